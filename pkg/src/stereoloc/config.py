"""Scenario configuration: a versioned JSON document.

Example (2+1 dimensions, static satellites)::

    {
      "schema_version": 1,
      "dimension": 3,
      "emitters": [
        {"id": "E",  "worldline": {"kind": "static", "position": [10, 0]}},
        {"id": "Et", "worldline": {"kind": "static", "position": [-4, 9]}},
        {"id": "Eh", "worldline": {"kind": "static", "position": [-6, -7]}},
        {"id": "S",  "worldline": {"kind": "static", "position": [2, -3]}}
      ],
      "anchor": {"id": "S"},
      "events": {"count": 100, "seed": 1}
    }

``dimension`` counts spacetime dimensions (2, 3 or 4).  In 3 and 4
dimensions one extra emitter is the anchoring (fifth) satellite, named by
``anchor.id``.  Every validation failure raises ``ConfigError`` carrying the
JSON path of the offending field.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constellation import (
    Affine,
    AnchoringWorldline,
    Circular,
    Constellation,
    Emitter,
    Inertial,
    ProperTime,
    SineWobble,
)
from .errors import ConfigError, ValidationError
from .positioning import DEFAULT_ATTRIBUTION, Attribution
from . import scenarios

SCHEMA_VERSION = 1
LAMBDA_RULES = ("consistent", "fixed")
DEFAULT_TOLERANCES = {"oracle": 1e-9, "constraint": 1e-9}


@dataclass
class EventSpec:
    count: int = 0
    seed: int = 1
    t_range: tuple = (0.0, 5.0)
    radius: float = 3.0
    explicit: Optional[np.ndarray] = None


@dataclass
class ScenarioConfig:
    """A validated scenario.  Build with ``parse_config``."""

    raw: dict
    dimension: int
    constellation: Constellation
    events: EventSpec
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    attribution: Attribution = DEFAULT_ATTRIBUTION
    lambda_rule: str = "consistent"
    output_format: str = "csv"

    @property
    def seed(self):
        return self.events.seed

    def scenario_hash(self):
        """Short digest of the canonical config document, seed excluded."""
        doc = copy.deepcopy(self.raw)
        doc.get("events", {}).pop("seed", None)
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def sample_events(self):
        if self.events.explicit is not None:
            return self.events.explicit
        rng = np.random.default_rng(self.events.seed)
        if self.dimension == 2:
            return scenarios.events_between_2d(self.events.count, rng, self.events.t_range)
        return scenarios.random_events(self.dimension, self.events.count, rng,
                                       self.events.t_range, self.events.radius)


# -- field helpers ------------------------------------------------------------------

def _get(obj, key, path, kind=None, default=...):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if key not in obj:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    value = obj[key]
    if kind is not None and not _is(value, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind}")
    return value


def _is(value, kind):
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "string":
        return isinstance(value, str)
    if kind == "object":
        return isinstance(value, dict)
    if kind == "array":
        return isinstance(value, list)
    raise AssertionError(kind)


def _vector(value, n, path):
    if not isinstance(value, list) or len(value) != n or not all(_is(v, "number") for v in value):
        raise ConfigError(path, f"expected {n} finite numbers")
    return np.array(value, dtype=float)


def _number(obj, key, path, default=...):
    return float(_get(obj, key, path, "number", default))


# -- worldlines and clocks --------------------------------------------------------------

def parse_worldline(spec, d, path):
    kind = _get(spec, "kind", path, "string")
    n = d - 1
    try:
        if kind == "static":
            pos = _vector(_get(spec, "position", path), n, f"{path}.position")
            return Inertial(np.concatenate(([_number(spec, "t0", path, 0.0)], pos)), np.zeros(n))
        if kind == "inertial":
            origin = _vector(_get(spec, "origin", path), d, f"{path}.origin")
            vel = _vector(_get(spec, "velocity", path), n, f"{path}.velocity")
            return Inertial(origin, vel)
        if kind in ("circular", "helical"):
            if d < 3 or (kind == "helical" and d < 4):
                raise ConfigError(f"{path}.kind", f"{kind} worldlines need more space dimensions")
            center = _vector(_get(spec, "center", path), n, f"{path}.center")
            return Circular(center, _number(spec, "radius", path), _number(spec, "rate", path),
                            phase=_number(spec, "phase", path, 0.0), t0=_number(spec, "t0", path, 0.0),
                            drift=_number(spec, "drift", path, 0.0))
    except ValidationError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown worldline kind {kind!r} (static, inertial, circular, helical)")


def parse_clock(spec, path):
    if spec is None:
        return ProperTime()
    kind = _get(spec, "kind", path, "string")
    if kind == "proper":
        return ProperTime()
    try:
        if kind == "affine":
            return Affine(_number(spec, "rate", path), _number(spec, "offset", path, 0.0))
        if kind == "sine":
            return SineWobble(_number(spec, "amplitude", path, 0.1))
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown clock kind {kind!r} (proper, affine, sine)")


def parse_emitter(spec, d, path):
    eid = _get(spec, "id", path, "string")
    w = parse_worldline(_get(spec, "worldline", path, "object"), d, f"{path}.worldline")
    clock = parse_clock(_get(spec, "clock", path, "object", None), f"{path}.clock")
    orientation = _get(spec, "orientation", path, "array", None)
    if orientation is not None:
        rows = [_vector(r, d - 1, f"{path}.orientation[{i}]") for i, r in enumerate(orientation)]
        if len(rows) != d - 1:
            raise ConfigError(f"{path}.orientation", f"expected {d - 1} rows")
        orientation = np.array(rows)
    try:
        return Emitter(eid, w, clock, orientation)
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from exc


# -- the document -----------------------------------------------------------------------

def parse_config(doc):
    """Validate a config document (dict) and build a ``ScenarioConfig``."""
    if not isinstance(doc, dict):
        raise ConfigError("$", "config must be a JSON object")
    version = _get(doc, "schema_version", "$", "integer")
    if version != SCHEMA_VERSION:
        raise ConfigError("$.schema_version", f"unsupported version {version} (expected {SCHEMA_VERSION})")
    d = _get(doc, "dimension", "$", "integer")
    if d not in (2, 3, 4):
        raise ConfigError("$.dimension", "must be 2, 3 or 4 (spacetime dimensions)")

    specs = _get(doc, "emitters", "$", "array")
    emitters = [parse_emitter(s, d, f"$.emitters[{i}]") for i, s in enumerate(specs)]
    ids = [e.id for e in emitters]
    if len(set(ids)) != len(ids):
        raise ConfigError("$.emitters", f"emitter ids must be unique, got {ids}")

    anchor = None
    anchor_spec = _get(doc, "anchor", "$", "object", None)
    if d == 2:
        if anchor_spec is not None:
            raise ConfigError("$.anchor", "1+1 scenarios take no anchoring satellite")
        if len(emitters) != 2:
            raise ConfigError("$.emitters", f"1+1 needs exactly 2 emitters, got {len(emitters)}")
    else:
        if anchor_spec is None:
            raise ConfigError("$.anchor", f"{d - 1}+1 localization needs an anchoring (fifth) satellite")
        aid = _get(anchor_spec, "id", "$.anchor", "string")
        if aid not in ids:
            raise ConfigError("$.anchor.id", f"no emitter named {aid!r}")
        if len(emitters) != d + 1:
            raise ConfigError("$.emitters", f"{d - 1}+1 localization needs {d} emitters plus the "
                                            f"anchoring satellite ({d + 1} in total), got {len(emitters)}")
        a = emitters.pop(ids.index(aid))
        origin = _number(anchor_spec, "origin", "$.anchor", -math.inf) if anchor_spec.get(
            "origin") is not None else -math.inf
        sense = _get(anchor_spec, "sense", "$.anchor", "string", "emission")
        if sense not in ("emission", "reception"):
            raise ConfigError("$.anchor.sense", "must be 'emission' or 'reception'")
        anchor = AnchoringWorldline(a, origin=origin, sense=sense)

    user = None
    if _get(doc, "user", "$", "object", None) is not None:
        if d != 3:
            raise ConfigError("$.user", "a user worldline is only used in 2+1 dimensions")
        user = parse_worldline(doc["user"], d, "$.user")

    try:
        constellation = Constellation(tuple(emitters), anchor, user)
    except ValidationError as exc:
        raise ConfigError("$.emitters", str(exc)) from exc

    return ScenarioConfig(
        raw=copy.deepcopy(doc),
        dimension=d,
        constellation=constellation,
        events=_parse_events(doc, d),
        tolerances=_parse_tolerances(doc),
        attribution=_parse_attribution(doc, d),
        lambda_rule=_parse_lambda_rule(doc),
        output_format=_parse_output(doc),
    )


def _parse_events(doc, d):
    spec = _get(doc, "events", "$", "object")
    ev = EventSpec()
    if "list" in spec:
        rows = _get(spec, "list", "$.events", "array")
        if not rows:
            raise ConfigError("$.events.list", "must not be empty")
        ev.explicit = np.array([_vector(r, d, f"$.events.list[{i}]") for i, r in enumerate(rows)])
        ev.count = len(rows)
    else:
        ev.count = _get(spec, "count", "$.events", "integer")
        if ev.count <= 0:
            raise ConfigError("$.events.count", "must be positive")
        t_range = _vector(_get(spec, "t_range", "$.events", "array", [0.0, 5.0]), 2, "$.events.t_range")
        if not t_range[0] < t_range[1]:
            raise ConfigError("$.events.t_range", "must be increasing")
        ev.t_range = tuple(t_range)
        ev.radius = _number(spec, "radius", "$.events", 3.0)
        if ev.radius <= 0:
            raise ConfigError("$.events.radius", "must be positive")
    ev.seed = _get(spec, "seed", "$.events", "integer", 1)
    if ev.seed <= 0:
        raise ConfigError("$.events.seed", "must be positive")
    return ev


def _parse_tolerances(doc):
    spec = _get(doc, "tolerances", "$", "object", {})
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in spec.items():
        if key not in tol:
            raise ConfigError(f"$.tolerances.{key}", f"unknown tolerance (known: {sorted(tol)})")
        if not _is(value, "number") or value <= 0:
            raise ConfigError(f"$.tolerances.{key}", "must be a positive number")
        tol[key] = float(value)
    return tol


def _parse_attribution(doc, d):
    spec = _get(doc, "attribution", "$", "object", None)
    if spec is None:
        return DEFAULT_ATTRIBUTION
    if d != 4:
        raise ConfigError("$.attribution", "stamp-pair attribution applies to 3+1 scenarios only")
    try:
        return Attribution(
            tuple(tuple(p) for p in _get(spec, "pairs", "$.attribution", "array")),
            tuple(tuple(f) for f in _get(spec, "frames", "$.attribution", "array")),
            tuple(_get(spec, "assembly", "$.attribution", "array", list(DEFAULT_ATTRIBUTION.assembly))),
        )
    except (ValidationError, TypeError) as exc:
        raise ConfigError("$.attribution", str(exc)) from exc


def _parse_lambda_rule(doc):
    rule = _get(doc, "lambda_rule", "$", "string", "consistent")
    if rule not in LAMBDA_RULES:
        raise ConfigError("$.lambda_rule", f"must be one of {LAMBDA_RULES}")
    return rule


def _parse_output(doc):
    spec = _get(doc, "output", "$", "object", {})
    fmt = _get(spec, "format", "$.output", "string", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("$.output.format", "must be 'csv' or 'json'")
    return fmt


def load_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(doc)


# -- presets ---------------------------------------------------------------------------

def _static(eid, pos):
    return {"id": eid, "worldline": {"kind": "static", "position": list(pos)}}


def preset(name, count=100, seed=1):
    """Config document for one of the built-in scenarios."""
    events = {"count": count, "seed": seed}
    if name == "static-2d":
        return {"schema_version": 1, "dimension": 2,
                "emitters": [_static(i, p) for i, p in zip(scenarios.IDS[2], scenarios.STATIC_2D)],
                "events": events}
    if name == "static-3d":
        ems = [_static(i, p) for i, p in zip(scenarios.IDS[3], scenarios.STATIC_3D)]
        return {"schema_version": 1, "dimension": 3,
                "emitters": ems + [_static("S", scenarios.ANCHOR_3D)],
                "anchor": {"id": "S"},
                "user": {"kind": "static", "position": list(scenarios.USER_3D)},
                "events": events}
    if name == "moving-3d":
        return {"schema_version": 1, "dimension": 3,
                "emitters": [
                    {"id": "E", "worldline": {"kind": "inertial", "origin": [0, 10, 0], "velocity": [0, 0.3]}},
                    {"id": "Et", "worldline": {"kind": "circular", "center": [-4, 9], "radius": 1,
                                               "rate": 0.3, "phase": 0.4},
                     "clock": {"kind": "affine", "rate": 2, "offset": 1}},
                    {"id": "Eh", "worldline": {"kind": "inertial", "origin": [0, -6, -7], "velocity": [0.2, 0.1]},
                     "clock": {"kind": "sine", "amplitude": 0.1}},
                    {"id": "S", "worldline": {"kind": "inertial", "origin": [0, 2, -3], "velocity": [-0.1, 0.2]}},
                ],
                "anchor": {"id": "S", "origin": -5},
                "user": {"kind": "inertial", "origin": [0, 1, 1.5], "velocity": [0.05, 0]},
                "events": events}
    if name == "static-4d":
        ems = [_static(i, p) for i, p in zip(scenarios.IDS[4], scenarios.STATIC_4D)]
        return {"schema_version": 1, "dimension": 4,
                "emitters": ems + [_static("S", scenarios.ANCHOR_4D)],
                "anchor": {"id": "S"}, "events": events}
    if name == "moving-4d":
        return {"schema_version": 1, "dimension": 4,
                "emitters": [
                    {"id": "E", "worldline": {"kind": "inertial", "origin": [0, 10, 0, 0], "velocity": [0, 0.2, 0]}},
                    {"id": "Eb", "worldline": {"kind": "circular", "center": [-4, 9, 1], "radius": 1.5,
                                               "rate": 0.2, "phase": 1.0, "drift": 0.1}},
                    {"id": "Et", "worldline": {"kind": "inertial", "origin": [0, -6, -7, 2],
                                               "velocity": [0.1, 0, -0.1]},
                     "clock": {"kind": "affine", "rate": 1.5, "offset": -2}},
                    {"id": "Eh", "worldline": {"kind": "inertial", "origin": [0, 1, 1, 9], "velocity": [0, -0.1, 0]},
                     "clock": {"kind": "sine", "amplitude": 0.05}},
                    {"id": "S", "worldline": {"kind": "inertial", "origin": [0, 2, 3, -4], "velocity": [0.1, 0.1, 0]}},
                ],
                "anchor": {"id": "S"}, "events": events}
    raise ConfigError("--preset", f"unknown preset {name!r} (choose from {', '.join(PRESETS)})")


PRESETS = ("static-2d", "static-3d", "moving-3d", "static-4d", "moving-4d")
