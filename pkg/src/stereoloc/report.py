"""Batch execution of a scenario and the CSV/JSON report.

Rows are produced in event order.  Per-event numerical failures do not
abort the run: the row keeps NaN in the affected columns and the failure
is recorded in ``flags``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import localization, oracles, positioning
from .constellation import message_coordinate
from .errors import NumericalError

COORD = "txyz"


@dataclass
class LocalizationReport:
    mode: str
    dimension: int
    scenario_hash: str
    seed: int
    columns: list
    rows: list
    records: list = field(default_factory=list)

    @property
    def n_flagged(self):
        return sum(1 for r in self.rows if r["flags"])

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def max_abs(self, prefix):
        cols = [c for c in self.columns if c.startswith(prefix)]
        vals = np.array([[r[c] for c in cols] for r in self.rows], dtype=float)
        if vals.size == 0 or np.all(np.isnan(vals)):
            return math.nan
        return float(np.nanmax(np.abs(vals)))


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _columns(mode, d, has_user=False):
    """Report columns.

    Residuals depend on the dimension: the 1+1 round trip back to the
    Cartesian event, the plane-procedure error in 2+1 (when a user worldline
    is configured) and the four constraint residuals in 3+1.
    """
    cols = ["index", "scenario_hash", "seed"]
    cols += [f"event_{c}" for c in COORD[:d]]
    cols += [f"emission_{i}" for i in range(d)]
    if d > 2:
        cols += ["anchor"]
    if mode == "localize":
        cols += [f"stereo_{i}" for i in range(d)]
        if d == 2:
            cols += ["roundtrip_residual"]
        elif d == 3 and has_user:
            cols += ["planes_residual"]
        elif d == 4:
            cols += [f"constraint_{i}" for i in range(4)]
        cols += [f"oracle_delta_{i}" for i in range(d)]
    cols += ["flags"]
    return cols


def _row(cols, **values):
    row = {c: math.nan for c in cols}
    row["flags"] = ""
    row.update(values)
    return row


def _assembled_oracle(con, e, dp, p, assembly):
    direct = [oracles.direct_station_4d(con, e, r.station, r.frame, r.pair, p.lambdas[r.station])
              for r in dp.records]
    return np.array([direct[assembly[c]][dp.records[assembly[c]].pair.index(c)] for c in range(4)])


def _localize_event(cfg, e):
    """``(values, record_json)`` for one event; raises on numerical failure."""
    con = cfg.constellation
    d = cfg.dimension
    out = {}
    if d == 2:
        p1, p2 = positioning.assemble_echo_2d(con, e)
        q = localization.localize_2d(p1, p2)
        oracle = positioning.emission_coordinates(con, e)
        rec = {"p_E1": p1.tolist(), "p_E2": p2.tolist()}
        back = positioning.cartesian_of_emission(con, q, guess=e)
        out["roundtrip_residual"] = float(np.max(np.abs(back - e)))
    elif d == 3:
        dp = positioning.assemble_data_point_3d(con, e)
        p = localization.localize_data_point_3d(dp)
        q = p.stamps
        oracle = oracles.direct_stereo_3d(con, e)
        rec = _records_json(dp)
        if con.user is not None:
            out["planes_residual"] = _planes_residual(con, e, dp.records)
    else:
        _, dp = positioning.assemble_station_records_4d(con, e, cfg.attribution)
        p = localization.localize_data_point_4d(dp, cfg.lambda_rule, cfg.attribution.assembly)
        q = p.stamps
        oracle = _assembled_oracle(con, e, dp, p, cfg.attribution.assembly)
        rec = _records_json(dp)
        rec["lambdas"] = p.lambdas.tolist()
        out.update({f"constraint_{i}": float(v) for i, v in enumerate(p.constraint_residuals)})
    out.update({f"stereo_{i}": float(v) for i, v in enumerate(q)})
    out.update({f"oracle_delta_{i}": float(v) for i, v in enumerate(q - oracle)})
    return out, rec


def _planes_residual(con, e, recs):
    """Error of the plane procedure fed with angles from the true event."""
    p_e = positioning.emission_coordinates(con, e)
    stations = localization.plane_stations(recs, [0.0] * 3)
    angles = [localization.plane_angle(st, p_e) for st in stations]
    sol = localization.localize_3d_planes(localization.plane_stations(recs, angles))
    return float(np.max(np.abs(sol.event - p_e)))


def _records_json(dp):
    recs = []
    for r in dp.records:
        item = {
            "station": r.station,
            "emitter": r.emitter_id,
            "primary_stamp": r.primary_stamp,
            "neighbor_positions": r.neighbor_positions.tolist(),
            "fifth_stamp": r.fifth_stamp,
            "reading": r.reading.tolist(),
        }
        if hasattr(r, "frame"):
            item["frame"] = list(r.frame)
            item["pair"] = list(r.pair)
        recs.append(item)
    return {"anchor_stamp": dp.anchor_stamp, "stations": recs}


def _forward(cfg, e):
    con = cfg.constellation
    values = {f"emission_{i}": float(v)
              for i, v in enumerate(positioning.emission_coordinates(con, e))}
    if cfg.dimension > 2:
        values["anchor"] = float(message_coordinate(con.anchor, e))
    return values


def run_scenario(cfg, mode="localize", tolerance=None):
    """Run every event of ``cfg`` and collect a report.

    Parameters
    ----------
    cfg : ScenarioConfig
    mode : {'localize', 'simulate'}
        ``simulate`` stops after the forward emission coordinates.
    tolerance : float, optional
        Overrides ``cfg.tolerances['oracle']`` for the ``oracle`` flag.
    """
    d = cfg.dimension
    cols = _columns(mode, d, cfg.constellation.user is not None)
    tol = cfg.tolerances["oracle"] if tolerance is None else tolerance
    h = cfg.scenario_hash()
    rows, records = [], []
    for i, e in enumerate(cfg.sample_events()):
        base = {"index": i, "scenario_hash": h, "seed": cfg.seed}
        base.update({f"event_{c}": float(v) for c, v in zip(COORD, e)})
        row = _row(cols, **base)
        rec = None
        try:
            row.update(_forward(cfg, e))
            if mode == "localize":
                values, rec = _localize_event(cfg, e)
                row.update(values)
                flags = []
                deltas = [abs(values[c]) for c in values if c.startswith("oracle_delta")]
                scale = max([1.0] + [abs(values[c]) for c in values if c.startswith("stereo")])
                if max(deltas) > tol * scale:
                    flags.append("oracle-delta")
                if d == 4 and max(abs(values[f"constraint_{k}"]) for k in range(4)) > \
                        cfg.tolerances["constraint"] * scale:
                    flags.append("constraint")
                row["flags"] = ";".join(flags)
        except NumericalError as exc:
            row["flags"] = f"error {type(exc).__name__}: {exc}"
        rows.append(row)
        records.append(rec)
    return LocalizationReport(mode, d, h, cfg.seed, cols, rows, records)


def to_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in report.rows:
        w.writerow([_fmt(row[c]) for c in report.columns])
    return buf.getvalue()


def to_json(report):
    """JSON mirror of the CSV rows, each with its nested echo records."""
    rows = []
    for row, rec in zip(report.rows, report.records):
        item = {c: (row[c] if isinstance(row[c], (str, int)) else _json_float(row[c]))
                for c in report.columns}
        if rec is not None:
            item["records"] = _json_tree(rec)
        rows.append(item)
    doc = {"mode": report.mode, "dimension": report.dimension,
           "scenario_hash": report.scenario_hash, "seed": report.seed,
           "columns": report.columns, "rows": rows}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def _json_float(v):
    v = float(v)
    # JSON has no NaN; keep the CSV spelling as a string
    return v if math.isfinite(v) else _fmt(v)


def _json_tree(x):
    if isinstance(x, dict):
        return {k: _json_tree(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_tree(v) for v in x]
    if isinstance(x, float):
        return _json_float(x)
    return x


def render(report, fmt):
    return to_csv(report) if fmt == "csv" else to_json(report)
