"""Independent reference computations used to check the protocols.

Nothing here calls the production solvers: null solves use Brent's method on
a scanned bracket, observer frames are built from explicit boost matrices,
and the station maps are recomputed from angles (cross ratios) or from
determinant ratios.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .constellation import boost_matrix


def null_parameter(worldline, x, sense="past", step=1.0):
    """Retarded (``'past'``) or advanced (``'future'``) parameter by Brent's method."""
    x = np.asarray(x, dtype=float)
    sign = 1.0 if sense == "past" else -1.0

    def g(s):
        w = worldline.point(s)
        return sign * (x[0] - w[0]) - np.linalg.norm(x[1:] - w[1:])

    # scan outward from s = 0 with doubling steps until a sign change shows up
    lo, hi = -step, step
    for _ in range(200):
        if g(lo) * g(hi) <= 0:
            break
        lo, hi = 2 * lo - step, 2 * hi + step
    else:
        raise RuntimeError("oracle could not bracket the null root")
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def static_retarded_time(q, x):
    """Closed-form emission time for a static source at ``q``."""
    x = np.asarray(x, dtype=float)
    return x[0] - np.linalg.norm(x[1:] - np.asarray(q, dtype=float))


def static_advanced_time(q, x):
    x = np.asarray(x, dtype=float)
    return x[0] + np.linalg.norm(x[1:] - np.asarray(q, dtype=float))


def inertial_retarded_time(origin, velocity, x):
    """Closed-form emission coordinate time for a uniformly moving source.

    With the lag ``tau = x0 - t`` and ``r`` the separation from the source's
    position at ``x0``, ``(1 - v^2) tau^2 - 2 (r.v) tau - r^2 = 0``; the
    positive root is taken in whichever form avoids cancellation.
    """
    o = np.asarray(origin, dtype=float)
    v = np.asarray(velocity, dtype=float)
    x = np.asarray(x, dtype=float)
    r = x[1:] - o[1:] - v * (x[0] - o[0])
    rv = float(r @ v)
    rr = float(r @ r)
    a = 1.0 - float(v @ v)
    sq = math.sqrt(rv * rv + a * rr)
    tau = (rv + sq) / a if rv >= 0 else rr / (sq - rv)
    return x[0] - tau


def rest_frame_direction(emitter, s, source):
    """Direction toward ``source`` in the emitter's rest frame at ``s``.

    Boosts the separation into the instantaneous rest frame with an explicit
    Lorentz matrix, then applies the emitter's orientation.
    """
    w = emitter.worldline
    u = np.asarray(w.tangent(s), dtype=float)
    v = u[1:] / u[0]
    L = boost_matrix(-v)
    k = L @ (np.asarray(source, dtype=float) - w.point(s))
    d = k[1:] / np.linalg.norm(k[1:])
    R = np.eye(d.size) if emitter.orientation is None else np.asarray(emitter.orientation)
    return R.T @ d


def line_cross_ratio(theta_e, theta_zero, theta_inf, theta_one):
    """Projective coordinate of a direction on RP^1 from angles."""
    return (math.sin(theta_e - theta_zero) * math.sin(theta_one - theta_inf)) / (
        math.sin(theta_e - theta_inf) * math.sin(theta_one - theta_zero)
    )


def stamp_from_cross_ratio(t, tau_zero, tau_inf, tau_one):
    """The stamp with coordinate ``t`` in the frame ``(tau_zero, tau_inf, tau_one)``."""
    if math.isinf(t):
        return tau_inf
    num = tau_zero * (tau_one - tau_inf) - t * tau_inf * (tau_one - tau_zero)
    den = (tau_one - tau_inf) - t * (tau_one - tau_zero)
    return num / den


def _emission_coords(constellation, x):
    return np.array([
        em.clock.stamp(null_parameter(em.worldline, x, "past")) for em in constellation.emitters
    ])


def direct_stereo_3d(constellation, e):
    """Stereometric coordinates of ``e`` computed straight from the geometry.

    For each station: solve every signal with the oracle solver, measure
    angles in the rest frame and evaluate the cross ratio.
    """
    out = np.empty(3)
    anchor = constellation.anchor
    for k, em in enumerate(constellation.emitters):
        s_k = null_parameter(em.worldline, e, "future")
        apex = em.worldline.point(s_k)
        ang, taus = [], []
        for j in ((k + 1) % 3, (k + 2) % 3):
            src = constellation.emitters[j]
            b = src.worldline.point(null_parameter(src.worldline, apex, "past"))
            d = rest_frame_direction(em, s_k, b)
            ang.append(math.atan2(d[1], d[0]))
            taus.append(_emission_coords(constellation, b)[k])
        s_a = null_parameter(anchor.worldline, apex, "past")
        d = rest_frame_direction(em, s_k, anchor.worldline.point(s_a))
        ang.append(math.atan2(d[1], d[0]))
        taus.append(anchor.stamp(s_a))
        d = rest_frame_direction(em, s_k, e)
        t = line_cross_ratio(math.atan2(d[1], d[0]), *ang)
        out[k] = stamp_from_cross_ratio(t, *taus)
    return out


def _det3(a, b, c):
    return float(np.dot(a, np.cross(b, c)))


def frame_coordinates(x, p1, p2, p3, unit):
    """Projective coordinates of ``x`` in the frame ``(p1, p2, p3; unit)``.

    Closed-form determinant ratios (Cramer's rule on both sides).
    """
    return np.array([
        _det3(x, p2, p3) / _det3(unit, p2, p3),
        _det3(p1, x, p3) / _det3(p1, unit, p3),
        _det3(p1, p2, x) / _det3(p1, p2, unit),
    ])


def frame_point(coords, t1, t2, t3, unit):
    """Point with projective coordinates ``coords`` in the frame ``(t1, t2, t3; unit)``."""
    d = _det3(t1, t2, t3)
    mu = np.array([_det3(unit, t2, t3), _det3(t1, unit, t3), _det3(t1, t2, unit)]) / d
    return (coords[0] * mu[0]) * np.asarray(t1) + (coords[1] * mu[1]) * np.asarray(t2) + (
        coords[2] * mu[2]) * np.asarray(t3)


def direct_station_4d(constellation, e, k, frame, pair, lam):
    """Output pair of 4D station ``k`` computed straight from the geometry.

    ``frame`` lists the emitters sent to ``[1:0:0], [0:1:0], [0:0:1]``,
    ``pair`` the two coordinates the station outputs and ``lam`` the value
    attached to the anchor's bright point.
    """
    em = constellation.emitters[k]
    s_k = null_parameter(em.worldline, e, "future")
    apex = em.worldline.point(s_k)
    src_pts, dst_pts = [], []
    for j in frame:
        other = constellation.emitters[j]
        b = other.worldline.point(null_parameter(other.worldline, apex, "past"))
        src_pts.append(rest_frame_direction(em, s_k, b))
        p = _emission_coords(constellation, b)
        dst_pts.append(np.array([p[pair[0]], p[pair[1]], 1.0]))
    anchor = constellation.anchor
    s_a = null_parameter(anchor.worldline, apex, "past")
    src_pts.append(rest_frame_direction(em, s_k, anchor.worldline.point(s_a)))
    dst_pts.append(np.array([anchor.stamp(s_a), lam, 1.0]))
    n = frame_coordinates(rest_frame_direction(em, s_k, e), *src_pts)
    h = frame_point(n, *dst_pts)
    return h[:2] / h[2]
