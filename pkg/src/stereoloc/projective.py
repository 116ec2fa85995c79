"""Numerical projective algebra on RP^1, RP^2, RP^3 and RP^4.

Projective points are plain homogeneous float arrays.  ``normalize`` puts
them in a canonical form (largest-magnitude entry equal to +1) which is used
for every equality test.  Stamps that may be infinite travel as ProjPoint1
pairs ``[p:q]``; ``[1:0]`` is infinity.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateFrameError,
    SingularConfigurationError,
    ValidationError,
    VanishingDenominatorError,
)

DET_TOL = 1e-12


def normalize(h):
    """Scale a homogeneous vector so its largest-magnitude entry is +1."""
    h = np.asarray(h, dtype=float)
    i = int(np.argmax(np.abs(h)))
    if h[i] == 0.0 or not np.all(np.isfinite(h)):
        raise ValidationError(f"not a projective point: {h}")
    return h / h[i]


def proj_distance(a, b):
    """Max-norm distance between the canonical forms of two points."""
    return float(np.max(np.abs(normalize(a) - normalize(b))))


def proj_equal(a, b, tol=1e-12):
    return proj_distance(a, b) <= tol


def point1(value):
    """ProjPoint1 ``[value:1]``; ``inf`` maps to ``[1:0]``."""
    if math.isinf(value):
        return np.array([1.0, 0.0])
    return np.array([float(value), 1.0])


def value1(h):
    """Affine value of a ProjPoint1 (``inf`` for ``[p:0]``)."""
    p, q = float(h[0]), float(h[1])
    if q == 0.0:
        if p == 0.0:
            raise ValidationError("[0:0] is not a projective point")
        return math.inf
    return p / q


def dehomogenize(h, tol=0.0):
    """Affine coordinates of a homogeneous point; rejects points at infinity."""
    h = np.asarray(h, dtype=float)
    if abs(h[-1]) <= tol * np.max(np.abs(h)) or h[-1] == 0.0:
        raise VanishingDenominatorError(f"point {h} is at infinity")
    return h[:-1] / h[-1]


def frame_matrix(points, unit):
    """Matrix sending the standard basis to ``points`` and ``(1,...,1)`` to ``unit``.

    Parameters
    ----------
    points : sequence of n homogeneous n-vectors
    unit : homogeneous n-vector

    Raises
    ------
    DegenerateFrameError
        If the n + 1 points are not in general position.
    """
    B = np.column_stack([np.asarray(p, dtype=float) for p in points])
    n = B.shape[0]
    if B.shape != (n, n):
        raise ValidationError(f"need {n} points of length {n}")
    cols = B / np.max(np.abs(B), axis=0)
    if abs(np.linalg.det(cols)) <= DET_TOL:
        raise DegenerateFrameError("reference points are projectively dependent")
    mu = np.linalg.solve(B, np.asarray(unit, dtype=float))
    u_scale = np.max(np.abs(unit))
    if np.any(np.abs(mu * np.max(np.abs(B), axis=0)) <= DET_TOL * u_scale):
        raise DegenerateFrameError("unit point lies on a face of the reference simplex")
    return B * mu


def check_frame_change(K):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("frame change must be a square matrix")
    scale = np.max(np.abs(K))
    if scale == 0.0 or abs(np.linalg.det(K / scale)) <= DET_TOL:
        raise SingularConfigurationError("frame change is singular")
    return K


# -- RP^1 ---------------------------------------------------------------------

def cross_ratio(a, b, c):
    """The three-point ratio ``[(a - c) : (b - c)]``."""
    h = np.array([a - c, b - c], dtype=float)
    if h[0] == 0.0 and h[1] == 0.0:
        raise ValidationError("cross ratio is indeterminate for a = b = c")
    return h


def solve_frame_change_rp1(targets):
    """Möbius matrix with ``[0:1] -> t0``, ``[1:0] -> t_inf``, ``[1:1] -> t1``.

    Parameters
    ----------
    targets : (t0, t_inf, t1)
        Stamps (floats, ``inf`` allowed) or ProjPoint1 pairs.
    """
    hs = [point1(t) if np.ndim(t) == 0 else np.asarray(t, dtype=float) for t in targets]
    t0, tinf, t1 = hs
    for x, y in ((t0, tinf), (t0, t1), (tinf, t1)):
        if proj_equal(x, y, 1e-15):
            raise DegenerateFrameError("frame-change targets must be pairwise distinct")
    return frame_matrix([tinf, t0], t1)


def frame_stamp_rp1(targets, reading):
    """Stamp of a normalized reading ``[x:y]`` in the frame ``(t0, t_inf, t1)``.

    Same map as ``solve_frame_change_rp1`` for finite stamps, evaluated as
    ``t1 + a b (x - y) / (a x + b y)`` with ``a = t1 - t0``, ``b = t_inf - t1``.
    Centering on ``t1`` keeps the three frame readings exact even when two
    targets nearly coincide, where the matrix product loses digits.
    """
    t0, tinf, t1 = (float(t) for t in targets)
    if not all(math.isfinite(t) for t in (t0, tinf, t1)):
        return value1(apply_moebius(solve_frame_change_rp1(targets), reading))
    if t0 == tinf or t0 == t1 or tinf == t1:
        raise DegenerateFrameError("frame-change targets must be pairwise distinct")
    x, y = (float(v) for v in reading)
    a, b = t1 - t0, tinf - t1
    den = a * x + b * y
    if den == 0.0:
        return math.inf
    return t1 + (a * b) * (x - y) / den


def apply_moebius(K, t):
    """Image of the ProjPoint1 ``t`` (a float is read as ``[t:1]``)."""
    h = point1(t) if np.ndim(t) == 0 else np.asarray(t, dtype=float)
    return np.asarray(K, dtype=float) @ h


class MoebiusCoefficients(NamedTuple):
    """``tau(t) = (uQ t + vQ) / (wl t + kl)``."""

    uQ: float
    vQ: float
    wl: float
    kl: float

    @property
    def matrix(self):
        return np.array([[self.uQ, self.vQ], [self.wl, self.kl]])

    def __call__(self, t):
        return (self.uQ * t + self.vQ) / (self.wl * t + self.kl)


def moebius_coefficients(t_zero, t_inf, t_one):
    """Coefficients of the map sending ``0, inf, 1`` to the three stamps.

    The numerator coefficients are quadratic and the denominator ones linear
    in the stamps.
    """
    a, b = t_zero - t_one, t_inf - t_one
    if a == 0.0 and b == 0.0:
        raise ValidationError("stamps give no frame: both differences vanish")
    return MoebiusCoefficients(-t_inf * a, t_zero * b, -a, b)


def reading_to_stamp(coeffs, t):
    """Evaluate a station map on a ProjPoint1 reading, returning a float."""
    return value1(coeffs.matrix @ (point1(t) if np.ndim(t) == 0 else np.asarray(t, float)))


# -- the PGL(4) action and the common denominator -----------------------------

def pgl4_act(P, tangents, tol=1e-14):
    """Fractional-linear action of a 4x4 matrix on a tangent triple.

    ``out_i = (sum_j P[i, j] t_j + P[i, 3]) / (sum_k P[3, k] t_k + P[3, 3])``

    Raises
    ------
    VanishingDenominatorError
        If the input lies on the exceptional plane of ``P``.
    """
    P = np.asarray(P, dtype=float)
    t = np.asarray(tangents, dtype=float)
    if P.shape != (4, 4) or t.shape != (3,):
        raise ValidationError("pgl4_act needs a 4x4 matrix and three tangents")
    h = P @ np.append(t, 1.0)
    if abs(h[3]) <= tol * max(np.max(np.abs(h)), 1.0):
        raise VanishingDenominatorError(f"tangents {t} lie on the exceptional plane")
    return h[:3] / h[3]


def common_denominator_P(coeffs):
    """The displayed element P equalizing the three station denominators.

    Rows are indexed by the output tangent.  With ``w_i, k_i`` the
    denominator coefficients of station i:
    ``P[i, i] = 1``, ``P[i, j] = (w_j + k_j - k_i) / w_i`` (i != j, j < 3),
    ``P[0, 3] = P[0, 2]``, ``P[1, 3] = P[1, 2]``, ``P[2, 3] = 1`` and the last
    row is all ones.  The resulting common denominator is
    ``sum_k (w_k + k_k) t'_k + (w_3 + k_3)``.

    Notes
    -----
    Columns 2 and 3 coincide, so P has rank at most 2 and is not an element
    of PGL(4).  Any P giving equal denominators has this defect.
    """
    w = np.array([c.wl for c in coeffs], dtype=float)
    k = np.array([c.kl for c in coeffs], dtype=float)
    if w.size != 3:
        raise ValidationError("need three coefficient sets")
    if np.any(w == 0.0):
        raise ValidationError(f"every w coefficient must be non-zero, got {w}")
    P = np.eye(4)
    for i in range(3):
        for j in range(3):
            if i != j:
                P[i, j] = (w[j] + k[j] - k[i]) / w[i]
    P[3, :] = 1.0
    P[0, 3] = P[0, 2]
    P[1, 3] = P[1, 2]
    P[2, 3] = 1.0
    return P


def common_denominator_row(coeffs):
    """``(w_1 + k_1, w_2 + k_2, w_3 + k_3, w_3 + k_3)``."""
    h = np.array([c.wl + c.kl for c in coeffs], dtype=float)
    return np.append(h, h[2])


def soldering_map(coeffs):
    """4x4 matrix sending ``[t'_1, t'_2, t'_3, 1]`` to ``[tau_1, tau_2, tau_3, 1]``.

    Row i is ``uQ_i * P[i] + vQ_i * P[3]``; the last row is the common
    denominator.  Dehomogenizing reproduces each station map applied to
    ``pgl4_act(P, t')``.
    """
    P = common_denominator_P(coeffs)
    M = np.empty((4, 4))
    for i, c in enumerate(coeffs):
        M[i] = c.uQ * P[i] + c.vQ * P[3]
    M[3] = common_denominator_row(coeffs)
    return M


class VanishingPoint(NamedTuple):
    homogeneous: np.ndarray
    at_infinity: bool

    @property
    def coords(self):
        if self.at_infinity:
            raise VanishingDenominatorError("vanishing point is itself at infinity")
        return self.homogeneous[:-1] / self.homogeneous[-1]


def vanishing_point(M, direction, tol=1e-13):
    """Image of the point at infinity in ``direction`` under ``M``.

    Lines of tangent space parallel to ``direction`` are mapped to lines
    through this point.
    """
    M = np.asarray(M, dtype=float)
    d = np.asarray(direction, dtype=float)
    if d.size != M.shape[1] - 1:
        raise ValidationError("direction length must be one less than the map size")
    if not np.any(d):
        raise ValidationError("zero direction")
    h = M @ np.append(d, 0.0)
    scale = np.max(np.abs(M)) * np.max(np.abs(d))
    if np.max(np.abs(h)) <= tol * scale:
        raise SingularConfigurationError("direction lies in the kernel of the map")
    return VanishingPoint(normalize(h), abs(h[-1]) <= tol * np.max(np.abs(h)))


# -- RP^2 ---------------------------------------------------------------------

CANONICAL_RP2 = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [1.0, 1, 1]])


def solve_frame_change_rp2(targets):
    """3x3 matrix sending ``[1:0:0], [0:1:0], [0:0:1], [1:1:1]`` to ``targets``."""
    t = [np.asarray(x, dtype=float) for x in targets]
    if len(t) != 4 or any(x.shape != (3,) for x in t):
        raise ValidationError("need four homogeneous 3-vectors")
    return frame_matrix(t[:3], t[3])


# -- groupoid -----------------------------------------------------------------

class GroupoidElement(NamedTuple):
    source: object
    target: object
    matrix: np.ndarray

    def __matmul__(self, other):
        """``self @ other``: first ``other`` (a -> b), then ``self`` (b -> c)."""
        return compose(self, other)


def groupoid_pt(source, target, source_id=None, target_id=None):
    """Projective transformation ``target @ inv(source)`` between two frames."""
    S = np.asarray(source, dtype=float)
    T = np.asarray(target, dtype=float)
    check_frame_change(S)
    return GroupoidElement(source_id, target_id, T @ np.linalg.inv(S))


def compose(g2, g1):
    """Composite of ``g1: a -> b`` followed by ``g2: b -> c``."""
    if g1.target is not None and g2.source is not None and g1.target != g2.source:
        raise ValidationError(f"cannot compose: {g1.target!r} != {g2.source!r}")
    return GroupoidElement(g1.source, g2.target, g2.matrix @ g1.matrix)
