"""Celestial circles and spheres seen from a reception event.

A satellite's on-board frame is a Minkowski-orthonormal tetrad whose
timelike leg is the worldline four-velocity and whose spatial legs are the
boosted images of a chosen set of rest-frame axes.  Incoming light rays are
expressed as unit spatial vectors in that frame pointing toward the source.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry, projective
from .errors import NotNullSeparatedError, NotTimelikeError, ValidationError, ZeroSpatialPartError

NORTH, SOUTH, POLAR = "north", "south", "polar-circle"


@dataclass(frozen=True, eq=False)
class Tetrad:
    """``legs[0]`` is the four-velocity, ``legs[1:]`` the spatial legs."""

    base: np.ndarray
    legs: np.ndarray

    def gram(self):
        eta = np.diag([1.0] + [-1.0] * (self.base.size - 1))
        return self.legs @ eta @ self.legs.T


def tetrad_at(emitter, s, seed=None):
    """On-board frame of ``emitter`` at parameter ``s``.

    Parameters
    ----------
    emitter : Emitter
    s : float
    seed : array_like, optional
        Rotation of the rest-frame spatial axes, shape ``(d-1, d-1)``;
        column i is the i-th axis.  Defaults to ``emitter.orientation`` and
        then to the coordinate axes.

    Returns
    -------
    Tetrad
    """
    w = emitter.worldline
    base = w.point(s)
    u = np.asarray(w.tangent(s), dtype=float)
    norm2 = geometry.mdot(u, u)
    if not (u[0] > 0 and norm2 > 0):
        raise NotTimelikeError(f"tangent of {emitter.id} at s={s} is not future timelike")
    u = u / math.sqrt(norm2)
    n = base.size - 1
    if seed is None:
        seed = emitter.orientation
    R = np.eye(n) if seed is None else np.asarray(seed, dtype=float)
    if R.shape != (n, n) or not np.allclose(R.T @ R, np.eye(n), atol=1e-12):
        raise ValidationError("orientation seed must be an orthogonal matrix")
    if n > 1 and np.linalg.det(R) < 0:
        raise ValidationError("orientation seed must preserve handedness")
    g = u[0]
    v = u[1:] / g
    v2 = v @ v
    legs = np.empty((n + 1, n + 1))
    legs[0] = u
    for i in range(n):
        a = R[:, i]
        va = v @ a
        spatial = a + ((g - 1.0) * va / v2) * v if v2 > 0 else a.copy()
        legs[i + 1, 0] = g * va
        legs[i + 1, 1:] = spatial
    return Tetrad(base, legs)


def incoming_direction(tetrad, source, tol=1e-9):
    """Unit spatial vector, in the tetrad, pointing toward a past null source.

    Raises
    ------
    ZeroSpatialPartError
        If the source coincides with the base event or lies on its time axis.
    NotNullSeparatedError
        If the source is not on the past light cone of the base event.
    """
    k = np.asarray(source, dtype=float) - tetrad.base
    comps = np.array([-geometry.mdot(k, e) for e in tetrad.legs[1:]])
    r = float(np.linalg.norm(comps))
    scale = max(1.0, float(np.max(np.abs(tetrad.base))), float(np.max(np.abs(source))))
    if r <= 1e-14 * scale:
        raise ZeroSpatialPartError("source has no spatial offset in the observer frame")
    kk = geometry.mdot(k, k)
    if abs(kk) > tol * scale**2 or k[0] >= 0:
        raise NotNullSeparatedError(
            f"source is not on the past light cone (interval {kk:.3g}, dt {k[0]:.3g})"
        )
    return comps / r


def raw_homogeneous(direction):
    """Projective point of a direction in the raw chart.

    d = 3: ``[u2 : u1]``, i.e. ``[tan(alpha) : 1]``.
    d = 4: ``[u1 : u2 : u3]``, i.e. ``[tan(alpha) : tan(beta) : 1]``.
    """
    u = np.asarray(direction, dtype=float)
    if u.size == 2:
        return np.array([u[1], u[0]])
    if u.size == 3:
        return u.copy()
    raise ValidationError(f"directions have 2 or 3 components, got {u.size}")


@dataclass(frozen=True)
class HemisphereReading:
    """A raw compass reading.

    ``chart`` holds ``(tan(alpha),)`` or ``(tan(alpha), tan(beta))``, or is
    ``None`` on the boundary circle, where only the tag is recorded.
    ``passage`` is the sequence of signed boundary crossings so far.
    """

    hemisphere: str
    chart: Optional[tuple]
    homogeneous: np.ndarray = field(compare=False)
    passage: tuple = ()


def _tag(x, tol=1e-15):
    if x > tol:
        return NORTH
    if x < -tol:
        return SOUTH
    return POLAR


def chart_reading(direction, cap_height=0.0, passage=()):
    """Chart coordinates and hemisphere tag of a unit direction.

    In d = 3 the angle is measured from the first spatial leg and the tag
    records the sign of ``u1`` (antipodal rays share a tangent).  In d = 4 the
    chart is gnomonic about the third leg and the boundary circle sits at
    ``u3 = cap_height``.
    """
    u = np.asarray(direction, dtype=float)
    h = raw_homogeneous(u)
    if u.size == 2:
        tag = _tag(u[0])
        chart = None if tag == POLAR else (u[1] / u[0],)
        return HemisphereReading(tag, chart, h, tuple(passage))
    tag = _tag(u[2] - cap_height)
    chart = None if tag == POLAR or u[2] == 0.0 else (u[0] / u[2], u[1] / u[2])
    return HemisphereReading(tag, chart, h, tuple(passage))


def track_passages(directions, cap_height=0.0):
    """Readings along a trajectory of directions, with crossing signatures.

    A crossing into the north cap adds ``+1``, into the south side ``-1``.
    Samples exactly on the boundary do not count; the crossing is recorded
    when the other side is reached.
    """
    readings = []
    signs = []
    side = None
    for d in directions:
        r = chart_reading(d, cap_height, signs)
        if r.hemisphere != POLAR:
            if side is not None and r.hemisphere != side:
                signs.append(1 if r.hemisphere == NORTH else -1)
                r = HemisphereReading(r.hemisphere, r.chart, r.homogeneous, tuple(signs))
            side = r.hemisphere
        readings.append(r)
    return readings


def normalize_reading_rp1(e_dir, refs):
    """Reading of ``e_dir`` in the frame fixed by three bright points.

    Parameters
    ----------
    e_dir : array_like, shape (2,)
    refs : (zero, infinity, one)
        Directions sent to ``[0:1]``, ``[1:0]`` and ``[1:1]``.

    Returns
    -------
    ndarray
        Canonically normalized ProjPoint1.
    """
    z, inf, one = (raw_homogeneous(r) for r in refs)
    N = projective.frame_matrix([inf, z], one)
    return projective.normalize(np.linalg.solve(N, raw_homogeneous(e_dir)))


def normalize_reading_rp2(e_dir, refs):
    """Reading of ``e_dir`` in the frame fixed by four bright points.

    ``refs`` are the directions sent to ``[1:0:0]``, ``[0:1:0]``,
    ``[0:0:1]`` and ``[1:1:1]`` in that order.
    """
    hs = [raw_homogeneous(r) for r in refs]
    if len(hs) != 4:
        raise ValidationError("need four reference directions")
    N = projective.frame_matrix(hs[:3], hs[3])
    return projective.normalize(np.linalg.solve(N, raw_homogeneous(e_dir)))
