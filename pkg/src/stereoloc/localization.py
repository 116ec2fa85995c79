"""Localization protocols in 1+1, 2+1 and 3+1 dimensions.

* 2D: the emission grid and the stereometric grid coincide.
* 3D procedure A: circumcircle construction in the emission grid.
* 3D intrinsic procedure: one projective frame change per station.
* 4D: one RP^2 frame change per station, glued by the matching constraints.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import projective
from .errors import (
    SingularConfigurationError,
    ValidationError,
    VanishingDenominatorError,
)

CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class StereoPosition:
    """Stereometric coordinates of an event.

    Attributes
    ----------
    stamps : ndarray
        ``(tau, tau~, tau^)`` in 3D, ``(tau, tau-, tau~, tau^)`` in 4D.
    anchor : float or None
        Fifth coordinate from the anchoring satellite.
    constraint_residuals : ndarray
        4D only: output mismatch for each shared coordinate.
    station_outputs : ndarray
        Per-station outputs (3D: one value each, 4D: a pair each).
    lambdas : ndarray or None
        4D only: the free second coordinate of each station's unit point.
    """

    stamps: np.ndarray
    anchor: Optional[float] = None
    constraint_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    station_outputs: Optional[np.ndarray] = None
    lambdas: Optional[np.ndarray] = None

    def consistent(self, tol=CONSTRAINT_TOL):
        scale = max(1.0, float(np.max(np.abs(self.stamps))))
        return bool(np.all(np.abs(self.constraint_residuals) <= tol * scale))


def embed_event(p):
    """``(stamps..., anchor)``: the event in R^4 (3D protocol) or R^5 (4D)."""
    if p.anchor is None:
        raise ValidationError("embedding needs the anchor coordinate")
    return np.append(np.asarray(p.stamps, dtype=float), p.anchor)


# -- 2D -------------------------------------------------------------------------

def localize_2d(p_E1, p_E2):
    """Emission position of ``e`` from the positions of its two receptions.

    ``E1`` on the first worldline carries ``e``'s second stamp unchanged and
    ``E2`` carries its first, since each stamp travels along the same ray.
    """
    p_E1 = np.asarray(p_E1, dtype=float)
    p_E2 = np.asarray(p_E2, dtype=float)
    if p_E1.shape != (2,) or p_E2.shape != (2,):
        raise ValidationError("2D positions have two stamps")
    return np.array([p_E2[0], p_E1[1]])


# -- 3D procedure A ---------------------------------------------------------------

def circumcenter(U, r_tilde, r_hat):
    """Circumcentre of ``U``, ``U + r_tilde``, ``U + r_hat`` in R^3."""
    U = np.asarray(U, dtype=float)
    a = np.asarray(r_tilde, dtype=float)
    b = np.asarray(r_hat, dtype=float)
    axb = np.cross(a, b)
    n2 = axb @ axb
    if n2 <= 1e-24 * (a @ a) * (b @ b) or n2 == 0.0:
        raise SingularConfigurationError("circumcircle undefined: points are collinear")
    return U + np.cross((a @ a) * b - (b @ b) * a, axb) / (2.0 * n2)


@dataclass(frozen=True, eq=False)
class PlaneStation:
    """Procedure-A inputs at one station, all in the emission grid."""

    apex: np.ndarray
    zero: np.ndarray
    inf: np.ndarray
    user: np.ndarray
    tan_alpha: float


@dataclass(frozen=True, eq=False)
class PlaneSolution3D:
    circumcenters: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    coefficients: np.ndarray
    event: np.ndarray
    condition: float


def plane_vectors(st):
    """Circumcentre and the two vectors spanning the station's plane."""
    E = np.asarray(st.apex, dtype=float)
    k_tilde = E - np.asarray(st.zero, dtype=float)
    k_hat = E - np.asarray(st.inf, dtype=float)
    k_user = np.asarray(st.user, dtype=float) - E
    P_tilde, P_hat = E + k_tilde, E + k_hat
    C = circumcenter(E + k_user, k_tilde - k_user, k_hat - k_user)
    turn = (P_tilde - C) + st.tan_alpha * (P_hat - C)
    return C, (C - E) + turn, (C - E) - turn


def plane_angle(st, p_e):
    """The tangent that puts ``p_e`` in the station's plane (oracle angle)."""
    E = np.asarray(st.apex, dtype=float)
    k_user = np.asarray(st.user, dtype=float) - E
    k_tilde = E - np.asarray(st.zero, dtype=float)
    k_hat = E - np.asarray(st.inf, dtype=float)
    C = circumcenter(E + k_user, k_tilde - k_user, k_hat - k_user)
    d = np.asarray(p_e, dtype=float) - E
    EC = C - E
    num = np.cross(EC, E + k_tilde - C) @ d
    den = np.cross(EC, E + k_hat - C) @ d
    return np.inf if den == 0.0 else -num / den


def localize_3d_planes(stations):
    """Intersect the three station planes (six linear equations).

    Parameters
    ----------
    stations : sequence of three PlaneStation

    Returns
    -------
    PlaneSolution3D
    """
    if len(stations) != 3:
        raise ValidationError("procedure A needs three stations")
    Cs, vp, vm = zip(*(plane_vectors(st) for st in stations))
    E = [np.asarray(st.apex, dtype=float) for st in stations]
    # E0 + a0 v0+ + b0 v0- = E1 + a1 v1+ + b1 v1- = E2 + a2 v2+ + b2 v2-
    A = np.zeros((6, 6))
    rhs = np.zeros(6)
    for row, (i, j) in enumerate(((0, 1), (0, 2))):
        r = slice(3 * row, 3 * row + 3)
        A[r, 2 * i], A[r, 2 * i + 1] = vp[i], vm[i]
        A[r, 2 * j], A[r, 2 * j + 1] = -vp[j], -vm[j]
        rhs[r] = E[j] - E[i]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e13:
        raise SingularConfigurationError(f"station planes do not meet in a point (cond {cond:.3g})")
    a = np.linalg.solve(A, rhs)
    event = E[0] + a[0] * vp[0] + a[1] * vm[0]
    return PlaneSolution3D(np.array(Cs), np.array(vp), np.array(vm), a, event, float(cond))


def plane_stations(records, tan_alphas):
    """Procedure-A inputs from 3D echo records carrying a user position."""
    out = []
    for r, t in zip(records, tan_alphas):
        if r.user_position is None:
            raise ValidationError("procedure A needs the user position in each record")
        out.append(PlaneStation(r.apex_position, r.neighbor_positions[0],
                                r.neighbor_positions[1], r.user_position, t))
    return out


# -- 3D intrinsic procedure -----------------------------------------------------------

def station_matrix_3d(record):
    """Möbius matrix from the station's normalized reading to its stamp."""
    return projective.solve_frame_change_rp1(record.targets)


def localize_3d_intrinsic(records, anchor=None):
    """Stereometric coordinates ``(tau_e, tau~_e, tau^_e)`` from three records.

    Parameters
    ----------
    records : sequence of three EchoRecord3D (stations 0, 1, 2)
    anchor : float, optional
        The fifth coordinate of ``e``, attached unchanged.
    """
    if [r.station for r in records] != [0, 1, 2]:
        raise ValidationError("need the records of stations 0, 1, 2 in order")
    out = np.empty(3)
    for r in records:
        if r.fifth_stamp is None:
            raise ValidationError(f"station {r.station} lacks the fifth stamp")
        out[r.station] = projective.frame_stamp_rp1(r.targets, r.reading)
    return StereoPosition(out, anchor, station_outputs=out.copy())


def localize_data_point_3d(dp):
    return localize_3d_intrinsic(dp.records, dp.anchor_stamp)


# -- 4D -----------------------------------------------------------------------------

def station_weights(record, lam):
    """Scales ``(x, y)`` of the first two frame columns (third fixed to 1).

    Solves
    ``(a1 - t5) x + (b1 - t5) y + (c1 - t5) = 0`` and
    ``(a2 - lam) x + (b2 - lam) y + (c2 - lam) = 0``
    where ``(a, b, c)`` are the reference pairs sent to ``[1:0:0]``,
    ``[0:1:0]``, ``[0:0:1]`` and ``t5`` is the fifth stamp.
    """
    ref = record.reference_pairs
    t5 = record.fifth_stamp
    A = np.array([[ref[0, 0] - t5, ref[1, 0] - t5], [ref[0, 1] - lam, ref[1, 1] - lam]])
    b = -np.array([ref[2, 0] - t5, ref[2, 1] - lam])
    scale = max(np.max(np.abs(A)), 1e-300)
    if abs(np.linalg.det(A / scale)) <= 1e-12:
        raise SingularConfigurationError(f"station {record.station}: singular frame system")
    return np.linalg.solve(A, b)


def station_pair(record, lam):
    """Output pair of one station for a given ``lam``."""
    x, y = station_weights(record, lam)
    ref = record.reference_pairs
    n = record.reading
    den = x * n[0] + y * n[1] + n[2]
    num = ref[0] * x * n[0] + ref[1] * y * n[1] + ref[2] * n[2]
    if abs(den) <= 1e-14 * max(abs(x * n[0]), abs(y * n[1]), abs(n[2])):
        raise VanishingDenominatorError(f"station {record.station}: output at infinity")
    return num / den


def station_lambda_map(record):
    """Homogeneous station output as an affine function of ``lam``.

    Returns ``(h0, h1)`` with output ``[h0 + lam h1]`` (a 3-vector whose
    first two entries over the last give the pair).
    """
    ref = record.reference_pairs
    B = np.vstack([ref.T, np.ones(3)])
    scale = np.max(np.abs(B))
    if abs(np.linalg.det(B / scale)) <= 1e-12:
        raise SingularConfigurationError(f"station {record.station}: singular frame system")
    mu0 = np.linalg.solve(B, np.array([record.fifth_stamp, 0.0, 1.0]))
    mu1 = np.linalg.solve(B, np.array([0.0, 1.0, 0.0]))
    n = np.asarray(record.reading, dtype=float)
    return B @ (mu0 * n), B @ (mu1 * n)


def _moebius_of_lambda(record, which):
    h0, h1 = station_lambda_map(record)
    return np.array([[h1[which], h0[which]], [h1[2], h0[2]]])


def _constraint_graph(records):
    """For each coordinate, the two ``(station, slot)`` pairs that output it."""
    owners = {}
    for r in records:
        for slot, c in enumerate(r.pair):
            owners.setdefault(c, []).append((r.station, slot))
    if sorted(owners) != [0, 1, 2, 3] or any(len(v) != 2 for v in owners.values()):
        raise ValidationError("every coordinate must be output by exactly two stations")
    return owners


def constraint_residuals(records, outputs):
    """``out_a[c] - out_b[c]`` for every coordinate c, in coordinate order."""
    owners = _constraint_graph(records)
    res = np.empty(4)
    for c in range(4):
        (a, sa), (b, sb) = owners[c]
        res[c] = outputs[a][sa] - outputs[b][sb]
    return res


def consistent_lambdas(records):
    """All ``lam`` quadruples making the four station outputs agree.

    Each station output is a Möbius function of its own ``lam``, so following
    the constraints around a cycle of stations composes to a Möbius map of
    the starting ``lam``; its fixed points are the admissible values.
    Candidates are returned most-finite first (largest relative output
    denominator); the root at which every output is at infinity comes last.
    """
    by_station = {r.station: r for r in records}
    owners = _constraint_graph(records)
    mob = {(r.station, s): _moebius_of_lambda(r, s) for r in records for s in (0, 1)}
    # walk the cycles of the constraint graph
    candidates_per_cycle = []
    seen = set()
    for start in sorted(by_station):
        if start in seen:
            continue
        path = []  # (station, slot_in, slot_out)
        k, slot_in = start, 0
        C = np.eye(2)
        steps = []
        while True:
            seen.add(k)
            slot_out = 1 - slot_in
            c = by_station[k].pair[slot_out]
            (a, sa), (b, sb) = owners[c]
            nxt, nslot = (b, sb) if (a, sa) == (k, slot_out) else (a, sa)
            T = np.linalg.solve(mob[(nxt, nslot)], mob[(k, slot_out)])
            steps.append((k, nxt, T))
            C = T @ C
            k, slot_in = nxt, nslot
            if k == start:
                break
        ev, vec = np.linalg.eig(C)
        cands = []
        for i in range(2):
            if abs(ev[i].imag) > 1e-12 * abs(ev[i]) or np.any(np.abs(vec[:, i].imag) > 1e-12):
                continue
            v = vec[:, i].real
            lams = {start: v}
            cur = v
            for (k0, k1, T) in steps[:-1]:
                cur = T @ cur
                lams[k1] = cur
            cands.append(lams)
        if not cands:
            raise SingularConfigurationError("constraint cycle has no real solution")
        candidates_per_cycle.append(cands)

    out = []
    for combo in itertools.product(*candidates_per_cycle):
        hom = {}
        for part in combo:
            hom.update(part)
        lam = np.empty(4)
        finite = True
        for k in range(4):
            p, q = hom[k]
            if q == 0.0:
                finite = False
                break
            lam[k] = p / q
        if finite:
            out.append(lam)
    if not out:
        raise SingularConfigurationError("no finite admissible lambdas")
    out.sort(key=lambda lam: -_finiteness(records, lam))
    return out


def _finiteness(records, lam):
    worst = np.inf
    for r in records:
        h0, h1 = station_lambda_map(r)
        h = h0 + lam[r.station] * h1
        worst = min(worst, abs(h[2]) / max(np.max(np.abs(h)), 1e-300))
    return worst


def _polish_lambdas(records, lam, iters=3):
    """Newton steps on the four constraints in the four ``lam`` values."""
    by = {r.station: r for r in records}
    maps = {k: station_lambda_map(r) for k, r in by.items()}

    def outputs(l):
        o = {}
        for k, (h0, h1) in maps.items():
            h = h0 + l[k] * h1
            o[k] = h[:2] / h[2]
        return o

    def derivs(l):
        d = {}
        for k, (h0, h1) in maps.items():
            h = h0 + l[k] * h1
            d[k] = (h1[:2] * h[2] - h[:2] * h1[2]) / h[2] ** 2
        return d

    owners = _constraint_graph(records)
    lam = lam.copy()
    res = constraint_residuals(records, outputs(lam))
    for _ in range(iters):
        J = np.zeros((4, 4))
        d = derivs(lam)
        for c in range(4):
            (a, sa), (b, sb) = owners[c]
            J[c, a] += d[a][sa]
            J[c, b] -= d[b][sb]
        try:
            step = np.linalg.lstsq(J, -res, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        trial = lam + step
        trial_res = constraint_residuals(records, outputs(trial))
        if np.max(np.abs(trial_res)) >= np.max(np.abs(res)):
            break
        lam, res = trial, trial_res
    return lam


def localize_4d(records, anchor=None, lambda_rule="consistent", lambdas=None, assembly=(0, 0, 2, 2)):
    """Stereometric 4-position from the four station records.

    Parameters
    ----------
    records : sequence of four StationRecord4D
    anchor : float, optional
        Fifth coordinate of ``e``.
    lambda_rule : {'consistent', 'fixed'}
        ``'consistent'`` solves the matching constraints for the four free
        values; ``'fixed'`` sets each to the station's fifth stamp.
    lambdas : array_like, optional
        Explicit values, overriding ``lambda_rule``.
    assembly : tuple
        Station supplying each coordinate of the result.

    Returns
    -------
    StereoPosition
        Residuals are reported, not enforced; see ``StereoPosition.consistent``.
    """
    records = tuple(sorted(records, key=lambda r: r.station))
    if [r.station for r in records] != [0, 1, 2, 3]:
        raise ValidationError("need the records of stations 0..3")
    if lambdas is not None:
        lam = np.asarray(lambdas, dtype=float)
    elif lambda_rule == "fixed":
        lam = np.array([r.fifth_stamp for r in records])
    elif lambda_rule == "consistent":
        lam = _polish_lambdas(records, consistent_lambdas(records)[0])
    else:
        raise ValidationError(f"unknown lambda rule {lambda_rule!r}")
    outputs = [station_pair(r, lam[r.station]) for r in records]
    stamps = np.empty(4)
    for c, k in enumerate(assembly):
        stamps[c] = outputs[k][list(records[k].pair).index(c)]
    return StereoPosition(
        stamps,
        anchor,
        constraint_residuals(records, outputs),
        np.array(outputs),
        lam,
    )


def localize_data_point_4d(dp, lambda_rule="consistent", assembly=(0, 0, 2, 2)):
    return localize_4d(dp.records, dp.anchor_stamp, lambda_rule, assembly=assembly)


# -- data-point frames for the groupoid -------------------------------------------------

def data_point_frame(dp, position=None):
    """Matrix whose columns are the embedded points of a data point.

    Columns are the embeddings of the station events (3- or 4-position
    followed by the fifth stamp received there) and, last, the embedding of
    the localized event.  ``groupoid_pt(frame(A), frame(B))`` therefore
    carries each of A's points to the matching point of B.
    """
    if position is None:
        position = localize_data_point_3d(dp) if dp.dim == 3 else localize_data_point_4d(dp)
    cols = [np.append(r.apex_position, r.fifth_stamp) for r in dp.records]
    cols.append(embed_event(position))
    return np.column_stack(cols)
