"""Emitter worldlines, broadcast clocks and the anchoring worldline.

All worldlines here move with constant speed, hence constant Lorentz factor,
and are parameterized by proper time ``s``: coordinate time is
``t(s) = t0 + gamma * s``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .errors import DomainError, NotTimelikeError, ValidationError

INF = math.inf


def _vec(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} must be a finite vector")
    return x


class _Worldline:
    domain = (-INF, INF)

    def _check(self, s):
        lo, hi = self.domain
        if not lo <= s <= hi:
            raise DomainError(f"parameter {s} outside worldline domain [{lo}, {hi}]")

    def __call__(self, s):
        return self.point(s)

    @property
    def dim(self):
        return self.point(0.0 if self.domain[0] <= 0.0 <= self.domain[1] else self.domain[0]).size


@dataclass(frozen=True, eq=False)
class Inertial(_Worldline):
    """Straight worldline ``w(s) = origin + s * gamma * (1, velocity)``."""

    origin: np.ndarray
    velocity: np.ndarray
    domain: tuple = (-INF, INF)

    def __post_init__(self):
        o = _vec(self.origin, "origin")
        v = _vec(self.velocity, "velocity")
        if o.size not in (2, 3, 4) or v.size != o.size - 1:
            raise ValidationError("inertial worldline needs a d-event origin and a (d-1)-velocity")
        if v @ v >= 1.0:
            raise NotTimelikeError(f"speed {math.sqrt(v @ v)} is not below light speed")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "velocity", v)
        object.__setattr__(self, "_u", np.concatenate(([1.0], v)) / math.sqrt(1.0 - v @ v))

    @property
    def max_speed(self):
        return float(np.linalg.norm(self.velocity))

    def point(self, s):
        self._check(s)
        return self.origin + s * self._u

    def tangent(self, s):
        return self._u.copy()


@dataclass(frozen=True, eq=False)
class Circular(_Worldline):
    """Uniform circular motion, optionally drifting along the z axis (helix).

    Parameters
    ----------
    center : array_like
        Spatial centre, length d - 1 (d = 3 or 4).  The circle lies in the
        x-y plane through the centre.
    radius, rate : float
        Radius and angular rate per unit coordinate time; ``radius * rate``
        is the orbital speed.
    phase : float
        Angle at ``s = 0``.
    t0 : float
        Coordinate time at ``s = 0``.
    drift : float
        Axial velocity along z (d = 4 only).
    """

    center: np.ndarray
    radius: float
    rate: float
    phase: float = 0.0
    t0: float = 0.0
    drift: float = 0.0
    domain: tuple = (-INF, INF)

    def __post_init__(self):
        c = _vec(self.center, "center")
        if c.size not in (2, 3):
            raise ValidationError("circular worldline needs a 2- or 3-dimensional centre")
        if self.drift and c.size != 3:
            raise ValidationError("axial drift needs three spatial dimensions")
        if self.radius < 0:
            raise ValidationError("radius must be non-negative")
        speed2 = (self.radius * self.rate) ** 2 + self.drift ** 2
        if speed2 >= 1.0:
            raise NotTimelikeError(f"orbital speed {math.sqrt(speed2)} is not below light speed")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "_gamma", 1.0 / math.sqrt(1.0 - speed2))

    @property
    def max_speed(self):
        return math.hypot(self.radius * self.rate, self.drift)

    def point(self, s):
        self._check(s)
        t = self._gamma * s
        th = self.phase + self.rate * t
        x = self.center.copy()
        x[0] += self.radius * math.cos(th)
        x[1] += self.radius * math.sin(th)
        if x.size == 3:
            x[2] += self.drift * t
        return np.concatenate(([self.t0 + t], x))

    def tangent(self, s):
        g = self._gamma
        th = self.phase + self.rate * g * s
        v = np.zeros(self.center.size)
        v[0] = -self.radius * self.rate * math.sin(th)
        v[1] = self.radius * self.rate * math.cos(th)
        if v.size == 3:
            v[2] = self.drift
        return g * np.concatenate(([1.0], v))


def helical(center, radius, rate, drift, phase=0.0, t0=0.0, domain=(-INF, INF)):
    """Helical worldline in 3+1 dimensions (circle in x-y, drift along z)."""
    return Circular(center, radius, rate, phase, t0, drift, domain)


@dataclass(frozen=True, eq=False)
class Transformed(_Worldline):
    """Image ``L @ w(s) + a`` of a worldline under a Poincare transformation.

    ``boost_speed`` bounds the speed of the boost part of ``L`` and is used
    only for the relativistic composition of speed bounds.
    """

    base: object
    lorentz: np.ndarray
    shift: np.ndarray
    boost_speed: float = 0.0

    @property
    def domain(self):
        return self.base.domain

    @property
    def max_speed(self):
        a, b = self.base.max_speed, self.boost_speed
        return (a + b) / (1.0 + a * b)

    def point(self, s):
        return self.lorentz @ self.base.point(s) + self.shift

    def tangent(self, s):
        return self.lorentz @ self.base.tangent(s)


def boost_matrix(velocity):
    """Lorentz boost taking the rest frame to a frame moving with ``-velocity``."""
    v = np.asarray(velocity, dtype=float)
    n = v.size + 1
    b2 = v @ v
    if b2 >= 1.0:
        raise NotTimelikeError("boost speed must be below light speed")
    L = np.eye(n)
    if b2 == 0.0:
        return L
    g = 1.0 / math.sqrt(1.0 - b2)
    L[0, 0] = g
    L[0, 1:] = g * v
    L[1:, 0] = g * v
    L[1:, 1:] += (g - 1.0) * np.outer(v, v) / b2
    return L


# -- clocks ------------------------------------------------------------------

@dataclass(frozen=True)
class ProperTime:
    """Broadcasts the proper time itself."""

    def stamp(self, s):
        return float(s)

    def unstamp(self, tau):
        return float(tau)

    def derivative(self, s):
        return 1.0


@dataclass(frozen=True)
class Affine:
    """``stamp = rate * base(s) + offset`` with ``rate > 0``."""

    rate: float
    offset: float = 0.0
    base: object = field(default_factory=ProperTime)

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate) and math.isfinite(self.offset)):
            raise ValidationError("affine clock needs a finite positive rate and finite offset")

    def stamp(self, s):
        return self.rate * self.base.stamp(s) + self.offset

    def unstamp(self, tau):
        return self.base.unstamp((tau - self.offset) / self.rate)

    def derivative(self, s):
        return self.rate * self.base.derivative(s)


@dataclass(frozen=True)
class SineWobble:
    """``stamp = s + amplitude * sin(s)``; monotone for ``|amplitude| < 1``."""

    amplitude: float = 0.1

    def __post_init__(self):
        if not abs(self.amplitude) < 1.0:
            raise ValidationError("wobble amplitude must satisfy |a| < 1")

    def stamp(self, s):
        return s + self.amplitude * math.sin(s)

    def unstamp(self, tau):
        a = self.amplitude
        # the inverse lies within |a| of tau; Newton from tau converges fast
        s = tau
        for _ in range(60):
            step = (s + a * math.sin(s) - tau) / (1.0 + a * math.cos(s))
            s -= step
            if abs(step) <= 1e-15 * max(1.0, abs(s)):
                break
        return s

    def derivative(self, s):
        return 1.0 + self.amplitude * math.cos(s)


@dataclass(frozen=True, eq=False)
class Emitter:
    """A satellite: identifier, worldline and broadcast clock.

    ``orientation`` rotates the spatial legs of the emitter's on-board frame
    (see ``observation.tetrad_at``); ``None`` means the coordinate axes.
    """

    id: str
    worldline: object
    clock: object = field(default_factory=ProperTime)
    orientation: Optional[np.ndarray] = None

    def stamp(self, s):
        return stamp(self, s)

    def unstamp(self, tau):
        return unstamp(self, tau)


def eval_worldline(w, s):
    """The event ``w(s)``; raises ``DomainError`` outside the domain."""
    return w.point(float(s))


def stamp(emitter, s):
    """Broadcast stamp at worldline parameter ``s``."""
    lo, hi = emitter.worldline.domain
    if not lo <= s <= hi:
        raise DomainError(f"parameter {s} outside the domain of {emitter.id}")
    return emitter.clock.stamp(float(s))


def unstamp(emitter, tau):
    """Inverse of :func:`stamp`."""
    if not math.isfinite(tau):
        raise DomainError(f"stamp {tau} is not finite")
    s = emitter.clock.unstamp(float(tau))
    lo, hi = emitter.worldline.domain
    if not lo <= s <= hi:
        raise DomainError(f"stamp {tau} of {emitter.id} maps outside the worldline domain")
    return s


def check_timelike(w, lo=-50.0, hi=50.0, n=1000):
    """Sample ``n`` tangents on ``[lo, hi]`` and check they are future timelike."""
    lo, hi = max(lo, w.domain[0]), min(hi, w.domain[1])
    for s in np.linspace(lo, hi, n):
        u = w.tangent(s)
        if not (u[0] > 0 and geometry.mdot(u, u) > 0):
            raise NotTimelikeError(f"tangent at s={s} is not future timelike")
    return True


# -- anchoring worldline -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Piecewise(_Worldline):
    """``main`` for ``s >= s_o`` and ``before`` for ``s < s_o``."""

    main: object
    before: object
    s_o: float

    @property
    def max_speed(self):
        return max(self.main.max_speed, self.before.max_speed)

    def point(self, s):
        return self.main.point(s) if s >= self.s_o else self.before.point(s)

    def tangent(self, s):
        return self.main.tangent(s) if s >= self.s_o else self.before.tangent(s)


@dataclass(frozen=True, eq=False)
class AnchoringWorldline:
    """The localizing satellite: its worldline starts at the event ``o``.

    Parameters
    ----------
    emitter : Emitter
        The fifth satellite; ``emitter.worldline`` describes ``s >= origin``.
    origin : float
        Parameter of ``o``, where the satellite begins to run.
    prolongation : worldline, optional
        Past continuation for ``s < origin``.  Defaults to the inertial
        continuation with the four-velocity at ``o``.
    sense : {'emission', 'reception'}
        Which null partner of an event defines its message coordinate.
    """

    emitter: Emitter
    origin: float = -INF
    prolongation: Optional[object] = None
    sense: str = "emission"

    def __post_init__(self):
        if self.sense not in ("emission", "reception"):
            raise ValidationError(f"unknown message sense {self.sense!r}")
        if self.prolongation is None and math.isfinite(self.origin):
            w = self.emitter.worldline
            o = w.point(self.origin)
            u = w.tangent(self.origin)
            # inertial line through o with parameter matching the main branch
            before = Inertial(o - self.origin * u, u[1:] / u[0])
            object.__setattr__(self, "prolongation", before)

    @property
    def worldline(self):
        """The worldline including its prolongation before ``o``."""
        if self.prolongation is None:
            return self.emitter.worldline
        return Piecewise(self.emitter.worldline, self.prolongation, self.origin)

    @property
    def id(self):
        return self.emitter.id

    def stamp(self, s):
        return self.emitter.clock.stamp(float(s))

    def unstamp(self, tau):
        return self.emitter.clock.unstamp(float(tau))


def message_coordinate(anchor, e, sense=None):
    """Fifth coordinate of ``e``: the anchor's stamp exchanged with ``e``.

    In the emission sense (default) this is the stamp broadcast from the
    anchor event on the past cone of ``e``; in the reception sense it is the
    stamp of the anchor event that receives light from ``e``.  The
    prolongation is used automatically when the partner event precedes ``o``.
    """
    sense = sense or anchor.sense
    w = anchor.worldline
    if sense == "emission":
        s = geometry.solve_null_past(w, e)
    elif sense == "reception":
        s = geometry.solve_null_future(w, e)
    else:
        raise ValidationError(f"unknown message sense {sense!r}")
    return anchor.stamp(s)


def with_orientation(emitter, rotation):
    """Copy of ``emitter`` whose on-board frame is rotated by ``rotation``."""
    return dataclasses.replace(emitter, orientation=np.asarray(rotation, dtype=float))


@dataclass(frozen=True, eq=False)
class Constellation:
    """Emitters of one scenario, in protocol order, plus an optional anchor.

    The emitter order fixes the meaning of the emission coordinates:
    2D ``(E1, E2)``, 3D ``(E, Etilde, Ehat)``, 4D ``(E, Ebar, Etilde, Ehat)``.
    ``user`` is an optional receiver worldline (procedure A).
    """

    emitters: tuple
    anchor: Optional[AnchoringWorldline] = None
    user: Optional[object] = None

    def __post_init__(self):
        em = tuple(self.emitters)
        object.__setattr__(self, "emitters", em)
        ids = [e.id for e in em]
        if self.anchor is not None:
            ids.append(self.anchor.id)
        if len(set(ids)) != len(ids):
            raise ValidationError(f"emitter ids must be unique, got {ids}")
        dims = {e.worldline.dim for e in em}
        if self.anchor is not None:
            dims.add(self.anchor.emitter.worldline.dim)
        if len(dims) != 1:
            raise ValidationError(f"emitters live in different dimensions: {sorted(dims)}")
        (d,) = dims
        if len(em) != d:
            raise ValidationError(f"{d}-dimensional spacetime needs {d} emitters, got {len(em)}")

    @property
    def dim(self):
        return self.emitters[0].worldline.dim

    def __len__(self):
        return len(self.emitters)

    def __getitem__(self, i):
        return self.emitters[i]
