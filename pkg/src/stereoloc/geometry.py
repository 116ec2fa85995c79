"""Flat spacetime kernel.

Events are float arrays ``(t, x[, y[, z]])`` with c = 1 and signature
(+, -, -, ...).  The null-cone solvers accept any worldline object exposing

* ``point(s)`` and ``tangent(s)`` (unit future-pointing four-velocity),
* ``max_speed`` (an upper bound on the coordinate speed, < 1),
* ``domain`` (a ``(lo, hi)`` parameter interval, possibly infinite),

and assume the worldline is parameterized by proper time, so that
``1 <= dt/ds <= 1/sqrt(1 - max_speed**2)``.  That bound is what turns a
coordinate-time window into a parameter bracket without any search.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .errors import (
    AmbiguousSolutionError,
    ConvergenceError,
    DimensionMismatchError,
    NoSignalError,
    NotTimelikeError,
    SingularConfigurationError,
    ValidationError,
)

EPS_NULL = 1e-9

# bisection stops at this parameter width, Newton polishes below it
BISECT_TOL = 1e-6
NEWTON_TOL = 1e-13


class CausalClass(str, enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


class Interval(NamedTuple):
    value: float
    causal_class: CausalClass


def as_event(x, dim=None):
    """Validate and convert ``x`` to a float event array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size not in (2, 3, 4):
        raise ValidationError(f"event must be a vector of length 2, 3 or 4, got shape {x.shape}")
    if dim is not None and x.size != dim:
        raise DimensionMismatchError(f"expected a {dim}-event, got length {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"event has non-finite components: {x}")
    return x


def mdot(a, b):
    """Minkowski product of two vectors (no validation)."""
    return a[0] * b[0] - np.dot(a[1:], b[1:])


def classify(value, scale=1.0, eps=EPS_NULL):
    """Causal class of a squared interval; ``scale`` is a squared magnitude."""
    if abs(value) <= eps * max(scale, 1.0):
        return CausalClass.NULL
    return CausalClass.TIMELIKE if value > 0 else CausalClass.SPACELIKE


def minkowski(a, b, eps=EPS_NULL):
    """Squared interval between two events and its causal class.

    Parameters
    ----------
    a, b : array_like
        Events of the same dimension.
    eps : float
        Null tolerance, multiplied by the squared coordinate magnitude.

    Returns
    -------
    Interval
    """
    a, b = as_event(a), as_event(b)
    if a.size != b.size:
        raise DimensionMismatchError(f"dimension mismatch: {a.size} vs {b.size}")
    d = a - b
    value = float(d[0] ** 2 - d[1:] @ d[1:])
    scale = max(np.max(np.abs(a)), np.max(np.abs(b))) ** 2
    return Interval(value, classify(value, scale, eps))


def _gamma_bound(worldline):
    v = float(worldline.max_speed)
    if not 0.0 <= v < 1.0:
        raise NotTimelikeError(f"worldline speed bound {v} is not below light speed")
    return v, 1.0 / math.sqrt(1.0 - v * v)


def _param_for_time(worldline, t, side):
    """Parameter ``s`` with ``t(s) <= t`` (side='below') or ``>= t`` ('above').

    Uses one evaluation at ``s = 0`` and the bound ``1 <= dt/ds <= gamma``.
    """
    _, gam = _gamma_bound(worldline)
    t_ref = float(worldline.point(0.0)[0])
    dt = t - t_ref
    if side == "below":
        return min(dt, dt / gam)
    return max(dt, dt / gam)


def _clip(s, domain):
    lo, hi = domain
    return min(max(s, lo), hi)


def _null_function(worldline, x, sense):
    """Signed null condition along the worldline and its derivative.

    ``sense='past'``: positive while ``w(s)`` is inside the past cone of x,
    decreasing through zero at the retarded parameter.
    ``sense='future'``: negative while ``w(s)`` is inside the past cone,
    increasing through zero at the advanced parameter.
    """
    sign = 1.0 if sense == "past" else -1.0
    xs = x[1:]

    def f(s):
        w = worldline.point(s)
        return sign * (x[0] - w[0]) - math.sqrt(float((xs - w[1:]) @ (xs - w[1:])))

    def fprime(s):
        w = worldline.point(s)
        u = worldline.tangent(s)
        r_vec = xs - w[1:]
        r = math.sqrt(float(r_vec @ r_vec))
        radial = float(r_vec @ u[1:]) / r if r > 0 else -float(np.linalg.norm(u[1:]))
        return -sign * u[0] + radial

    return f, fprime


def _auto_bracket(worldline, x, sense):
    vmax, _ = _gamma_bound(worldline)
    margin = 1e-6 * (1.0 + abs(x[0]))
    dom = getattr(worldline, "domain", (-math.inf, math.inf))
    if sense == "past":
        s_hi = _clip(_param_for_time(worldline, x[0], "above"), dom)
        w = worldline.point(s_hi)
        reach = (np.linalg.norm(x[1:] - w[1:]) + vmax * (w[0] - x[0])) / (1.0 - vmax)
        s_lo = _param_for_time(worldline, x[0] - reach - margin, "below")
    else:
        s_lo = _clip(_param_for_time(worldline, x[0], "below"), dom)
        w = worldline.point(s_lo)
        reach = (np.linalg.norm(x[1:] - w[1:]) + vmax * (x[0] - w[0])) / (1.0 - vmax)
        s_hi = _param_for_time(worldline, x[0] + reach + margin, "above")
    return _clip(s_lo, dom), _clip(s_hi, dom)


def _bracketed_root(f, fprime, lo, hi):
    """Bisection to ``BISECT_TOL`` then safeguarded Newton to ``NEWTON_TOL``."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignalError(
            f"null condition has no sign change on [{lo:.6g}, {hi:.6g}] "
            f"(values {f_lo:.3g}, {f_hi:.3g}): the signal never arrives"
        )
    increasing = f_hi > 0
    while hi - lo > BISECT_TOL * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == increasing:
            hi = mid
        else:
            lo = mid
    s = 0.5 * (lo + hi)
    for _ in range(50):
        fs = f(s)
        if fs == 0.0:
            return s
        if (fs > 0) == increasing:
            hi = s
        else:
            lo = s
        d = fprime(s)
        step = -fs / d if d != 0.0 else math.inf
        s_new = s + step
        if not lo <= s_new <= hi:
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= NEWTON_TOL * max(1.0, abs(s)):
            return s_new
        s = s_new
    raise ConvergenceError("null solve did not converge after Newton polish")


def _solve_null(worldline, x, bracket, sense):
    x = as_event(x)
    if bracket is None:
        lo, hi = _auto_bracket(worldline, x, sense)
    else:
        lo, hi = float(bracket[0]), float(bracket[1])
        if not lo < hi:
            raise ValidationError(f"empty bracket [{lo}, {hi}]")
    for s in (lo, hi):
        u = worldline.tangent(s)
        if mdot(u, u) <= 0 or u[0] <= 0:
            raise NotTimelikeError(f"worldline tangent at s={s} is not future timelike")
    f, fprime = _null_function(worldline, x, sense)
    return _bracketed_root(f, fprime, lo, hi)


def solve_null_past(worldline, x, bracket=None):
    """Retarded parameter: the point of the worldline on the past cone of ``x``.

    Parameters
    ----------
    worldline : worldline object
        See the module docstring for the required interface.
    x : array_like
        Receiving event.
    bracket : (float, float), optional
        Parameter interval.  Derived from the speed bound when omitted.

    Returns
    -------
    float
        The unique ``s`` with ``w(s)`` null-separated from ``x`` and
        ``w(s)[0] <= x[0]``.

    Raises
    ------
    NoSignalError
        If the null condition does not change sign on the bracket.
    """
    return _solve_null(worldline, x, bracket, "past")


def solve_null_future(worldline, x, bracket=None):
    """Advanced parameter: the point of the worldline on the future cone of ``x``.

    This is the dual of :func:`solve_null_past`; ``x`` lies on the past cone
    of the returned event ``w(s)``, i.e. ``w(s)`` receives a signal from ``x``.
    """
    return _solve_null(worldline, x, bracket, "future")


def _cone_residuals(apexes, e):
    d = apexes - e
    return d[:, 0] ** 2 - np.sum(d[:, 1:] ** 2, axis=1)


def _cone_jacobian(apexes, e):
    d = apexes - e
    jac = 2.0 * d
    jac[:, 0] *= -1.0
    return jac


def _algebraic_candidates(apexes):
    """Closed-form intersections of d null cones (linearize, then a quadratic)."""
    n = apexes.shape[1]
    centre = apexes.mean(axis=0)
    a = apexes - centre
    eta = np.ones(n)
    eta[1:] = -1.0
    q = np.array([mdot(r, r) for r in a])
    # <a_i - e, a_i - e> = 0  =>  2<a_i, e> - <e, e> = q_i ; difference rows kill <e,e>
    rows = 2.0 * (a[1:] - a[0]) * eta
    rhs = q[1:] - q[0]
    # rows @ e = rhs has a one-dimensional solution set e = p + mu * v
    u, sv, vt = np.linalg.svd(rows)
    if sv.size < n - 1 or sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise SingularConfigurationError("apex configuration is degenerate")
    p = np.linalg.lstsq(rows, rhs, rcond=None)[0]
    v = vt[-1]
    # substitute into 2<a_0, e> - <e, e> = q_0
    A = -mdot(v, v)
    B = 2.0 * mdot(a[0], v) - 2.0 * mdot(p, v)
    C = 2.0 * mdot(a[0], p) - mdot(p, p) - q[0]
    if abs(A) <= 1e-14 * max(abs(B), abs(C), 1.0):
        if B == 0.0:
            raise SingularConfigurationError("apex configuration is degenerate")
        mus = [-C / B]
    else:
        disc = B * B - 4 * A * C
        if disc < 0:
            if disc < -1e-10 * B * B:
                return []
            disc = 0.0
        root = math.sqrt(disc)
        q_ = -0.5 * (B + math.copysign(root, B))
        mus = [q_ / A, C / q_] if q_ != 0.0 else [0.0]
    return [centre + p + mu * v for mu in mus]


def _polish_cone_point(apexes, e, tol):
    """Damped Newton on the null conditions starting from ``e``."""
    res = _cone_residuals(apexes, e)
    for _ in range(60):
        jac = _cone_jacobian(apexes, e)
        if np.linalg.cond(jac) > 1e13:
            raise SingularConfigurationError("singular Jacobian at cone intersection")
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        while True:
            trial = e + lam * step
            trial_res = _cone_residuals(apexes, trial)
            if np.max(np.abs(trial_res)) < np.max(np.abs(res)) or lam < 1e-6:
                break
            lam *= 0.5
        e, res = trial, trial_res
        if np.max(np.abs(step)) * lam <= 1e-15 * max(1.0, np.max(np.abs(e))) or (
            np.max(np.abs(res)) <= 0.01 * tol
        ):
            break
    if np.max(np.abs(res)) > tol:
        raise ConvergenceError(f"cone intersection residual {np.max(np.abs(res)):.3g} above {tol:.1g}")
    return e


def intersect_cones(apexes, sense="past", guess=None, tol=1e-11):
    """Event lying on a null cone of each of ``d`` apexes.

    Parameters
    ----------
    apexes : array_like, shape (d, d)
        One event per row.
    sense : {'past', 'future'}
        ``'past'``: the solution lies on the past cones (it precedes every
        apex).  ``'future'``: it lies on the future cones.
    guess : array_like, optional
        Selects among two admissible roots by proximity.
    tol : float
        Absolute residual bound for the null conditions, scaled by the
        squared apex magnitude beyond 100.

    Raises
    ------
    SingularConfigurationError
        Degenerate apexes.
    AmbiguousSolutionError
        Two admissible roots and no ``guess``.
    """
    apexes = np.asarray(apexes, dtype=float)
    n = apexes.shape[1] if apexes.ndim == 2 else 0
    if apexes.ndim != 2 or apexes.shape[0] != n or n not in (2, 3, 4):
        raise ValidationError(f"need d apexes in d dimensions, got shape {apexes.shape}")
    if sense not in ("past", "future"):
        raise ValidationError(f"unknown sense {sense!r}")
    scale = max(1.0, np.max(np.abs(apexes)) / 100.0) ** 2
    tol = tol * scale
    sign = -1.0 if sense == "past" else 1.0
    slack = 1e-9 * max(1.0, np.max(np.abs(apexes)))
    admissible = [
        c for c in _algebraic_candidates(apexes)
        if np.all(sign * (c[0] - apexes[:, 0]) >= -slack)
    ]
    if not admissible:
        if guess is None:
            raise ConvergenceError(f"no {sense}-cone intersection exists")
        admissible = [np.asarray(guess, dtype=float)]
    if len(admissible) == 2:
        gap = np.max(np.abs(admissible[0] - admissible[1]))
        if gap <= 1e-9 * max(1.0, np.max(np.abs(admissible[0]))):
            admissible = admissible[:1]
        elif guess is None:
            raise AmbiguousSolutionError(
                f"two {sense}-cone intersections: {admissible[0]} and {admissible[1]}"
            )
        else:
            g = np.asarray(guess, dtype=float)
            admissible.sort(key=lambda c: np.linalg.norm(c - g))
    return _polish_cone_point(apexes, admissible[0], tol)


def intersect_past_cones(apexes, guess=None, tol=1e-11):
    """The event whose future light reaches every apex; see :func:`intersect_cones`."""
    return intersect_cones(apexes, "past", guess, tol)
