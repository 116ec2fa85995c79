"""The acceptance suite: one function per criterion.

Each criterion returns a ``CriterionResult``; ``run_all`` evaluates a
selection of them.  The CLI ``selftest`` and ``tests/test_acceptance.py``
both call these functions, so the two never drift apart.

``slack`` (>= 0) raises every tolerance to ``max(spec tolerance, slack)``.
``fault`` names a stamp of the first fixture event to corrupt, e.g.
``'s0.fifth'`` or ``'s1.neighbor0[2]'``; the criteria that consume echo data
then fail and report that stamp.
"""
from __future__ import annotations

import dataclasses
import math
import subprocess
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry, localization, oracles, positioning, projective, scenarios
from .constellation import Inertial

FAULT_SIZE = 1e-3


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metric: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number:2d} {self.name}: "
                f"metric {self.metric:.3e} (tol {self.tolerance:.1e}) {self.detail}").rstrip()


def _tol(spec, slack):
    return max(spec, slack or 0.0)


def _rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


# -- fault injection ------------------------------------------------------------

def corrupt_stamp(dp, name, delta=FAULT_SIZE):
    """Copy of a data point with the stamp ``name`` shifted by ``delta``."""
    records = list(dp.records)
    if name == "anchor":
        return dataclasses.replace(dp, anchor_stamp=dp.anchor_stamp + delta)
    try:
        head, field_ = name.split(".", 1)
        k = int(head[1:])
        r = records[k]
    except (ValueError, IndexError) as exc:
        raise ValueError(f"unknown stamp name {name!r}") from exc
    if field_ == "primary":
        r = dataclasses.replace(r, primary_stamp=r.primary_stamp + delta)
    elif field_ == "fifth":
        r = dataclasses.replace(r, fifth_stamp=r.fifth_stamp + delta)
    elif field_.startswith("neighbor"):
        i, j = int(field_[8]), int(field_[10])
        pos = r.neighbor_positions.copy()
        pos[i, j] += delta
        r = dataclasses.replace(r, neighbor_positions=pos)
    else:
        raise ValueError(f"unknown stamp name {name!r}")
    records[k] = r
    return dataclasses.replace(dp, records=tuple(records))


def check_fault_name(name):
    """Raise ``ValueError`` unless ``name`` is a stamp of the 3D or 4D fixtures."""
    dp3 = positioning.assemble_data_point_3d(scenarios.static_3d(user=False), [1.0, 0.5, 0.5])
    _, dp4 = positioning.assemble_station_records_4d(scenarios.static_4d(), [1.0, 0.5, 0.5, 0.5])
    names = [n for n, _ in dp4.stamps()]
    if name not in names:
        raise ValueError(f"unknown stamp {name!r}; expected sK.primary, sK.neighborI[J], "
                         f"sK.fifth or anchor (e.g. {names[13]})")


def audit_data_point(constellation, e, dp, tol=1e-9):
    """Names of the stamps of ``dp`` that disagree with independent solves."""
    ref = dp_reference_stamps(constellation, e, dp)
    bad = []
    for (name, value) in dp.stamps():
        if abs(value - ref[name]) > tol * max(1.0, abs(ref[name])):
            bad.append(f"{name} (off by {value - ref[name]:.3g})")
    return bad


def dp_reference_stamps(constellation, e, dp):
    """Every stamp of a data point recomputed with the oracle solver."""
    ems = constellation.emitters
    anchor = constellation.anchor
    ref = {}
    for r in dp.records:
        em = ems[r.station]
        s_k = oracles.null_parameter(em.worldline, e, "future")
        apex = em.worldline.point(s_k)
        tag = f"s{r.station}"
        ref[f"{tag}.primary"] = em.clock.stamp(s_k)
        frame = getattr(r, "frame", None) or tuple(
            (r.station + i) % len(ems) for i in (1, 2)
        )
        for i, j in enumerate(frame):
            b = ems[j].worldline.point(oracles.null_parameter(ems[j].worldline, apex, "past"))
            for c, other in enumerate(ems):
                ref[f"{tag}.neighbor{i}[{c}]"] = other.clock.stamp(
                    oracles.null_parameter(other.worldline, b, "past"))
        ref[f"{tag}.fifth"] = anchor.stamp(oracles.null_parameter(anchor.worldline, apex, "past"))
    ref["anchor"] = anchor.stamp(oracles.null_parameter(anchor.worldline, e, "past"))
    return ref


# -- criteria -------------------------------------------------------------------------

def criterion_1(slack=0.0, n=1000, seed=1):
    """Boundary triple: readings [0:1], [1:1], [1:0] give the three frame stamps."""
    tol = _tol(1e-12, slack)
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < n:
        t0, tinf, t1 = rng.uniform(-50, 50, size=3)
        if min(abs(t0 - tinf), abs(t0 - t1), abs(tinf - t1)) < 1e-6:
            continue
        for reading, want in (([0.0, 1.0], t0), ([1.0, 1.0], t1), ([1.0, 0.0], tinf)):
            got = projective.frame_stamp_rp1((t0, tinf, t1), reading)
            worst = max(worst, abs(got - want))
        done += 1
    return CriterionResult(1, "boundary triple", worst <= tol, worst, tol, f"{n} stamp triples")


def _first_data_point(constellation, e, dp, fault):
    """Apply the requested fault to the first fixture data point and audit it.

    Returns the (possibly corrupted) data point and the names of the stamps
    that disagree with independent solves.
    """
    if fault and fault in dict(dp.stamps()):
        dp = corrupt_stamp(dp, fault)
    return dp, audit_data_point(constellation, e, dp)


def _with_audit(ok, note, bad):
    if bad:
        return False, note + "; corrupted stamp: " + ", ".join(bad)
    return ok, note


def criterion_2(slack=0.0, n=1000, seed=2, fault=None):
    """3D intrinsic round trip against the direct cross-ratio oracle."""
    tol = _tol(1e-10, slack)
    con = scenarios.static_3d(user=False)
    events = scenarios.random_events(3, n, np.random.default_rng(seed))
    worst, where, bad = 0.0, None, []
    for i, e in enumerate(events):
        dp = positioning.assemble_data_point_3d(con, e)
        if i == 0:
            dp, bad = _first_data_point(con, e, dp, fault)
        p = localization.localize_data_point_3d(dp)
        ref = oracles.direct_stereo_3d(con, e)
        err = float(np.max(np.abs(p.stamps - ref) / np.abs(ref)))
        if err > worst:
            worst, where = err, i
    ok, note = _with_audit(worst <= tol, f"{n} events, worst at event {where}", bad)
    return CriterionResult(2, "3D intrinsic round trip", ok, worst, tol, note)


def criterion_3(slack=0.0, n=1000, seed=3, fault=None):
    """Rotating every on-board frame changes no stereometric coordinate."""
    tol = _tol(1e-10, slack)
    rng = np.random.default_rng(seed)
    con = scenarios.static_3d(user=False)
    rotated = scenarios.rotate_frames(con, rng)
    events = scenarios.random_events(3, n, rng)
    worst, bad = 0.0, []
    for i, e in enumerate(events):
        a = localization.localize_data_point_3d(positioning.assemble_data_point_3d(con, e))
        dp = positioning.assemble_data_point_3d(rotated, e)
        if i == 0:
            dp, bad = _first_data_point(rotated, e, dp, fault)
        b = localization.localize_data_point_3d(dp)
        worst = max(worst, float(np.max(np.abs(a.stamps - b.stamps))))
    ok, note = _with_audit(worst <= tol, f"{n} events, rotated seeds", bad)
    return CriterionResult(3, "frame independence", ok, worst, tol, note)


def criterion_4(slack=0.0, n=200, seed=4):
    """Rescaling all coordinates by k leaves readings bit-identical."""
    tol = _tol(0.0, slack)
    rng = np.random.default_rng(seed)
    con = scenarios.static_3d(user=False)
    events = scenarios.random_events(3, n, rng)
    worst_reading = 0.0
    worst_stamp = 0.0
    identical = 0
    total = 0
    for k in (1e-3, 1e3):
        scaled = scenarios.scale_constellation(con, k)
        for e in events:
            a = positioning.assemble_data_point_3d(con, e)
            b = positioning.assemble_data_point_3d(scaled, k * e)
            for ra, rb in zip(a.records, b.records):
                d = float(np.max(np.abs(ra.reading - rb.reading)))
                worst_reading = max(worst_reading, d)
                identical += d == 0.0
                total += 1
            for (na, va), (nb, vb) in zip(a.stamps(), b.stamps()):
                worst_stamp = max(worst_stamp, abs(k * va - vb) / max(abs(k * va), 1e-300))
    worst = max(worst_reading, worst_stamp)
    note = (f"{identical}/{total} readings bit-identical (max diff {worst_reading:.1e}), "
            f"stamp rescaling rel err {worst_stamp:.1e}")
    return CriterionResult(4, "conformal insensitivity", worst <= tol, worst, tol, note)


def criterion_5(slack=0.0, n=300, seed=5, fault=None):
    """4D: constraints hold and every station matches the direct oracle.

    Both checks are relative to ``max(1, |coordinate|)``.
    """
    tol = _tol(1e-9, slack)
    con = scenarios.static_4d()
    events = scenarios.random_events(4, n, np.random.default_rng(seed))
    worst_res = 0.0
    worst_orc = 0.0
    worst_abs = 0.0
    bad = []
    for i, e in enumerate(events):
        recs, dp = positioning.assemble_station_records_4d(con, e)
        if i == 0:
            dp, bad = _first_data_point(con, e, dp, fault)
        p = localization.localize_data_point_4d(dp)
        scale = max(1.0, float(np.max(np.abs(p.station_outputs))))
        worst_res = max(worst_res, float(np.max(np.abs(p.constraint_residuals))) / scale)
        direct = np.array([
            oracles.direct_station_4d(con, e, r.station, r.frame, r.pair, p.lambdas[r.station])
            for r in dp.records
        ])
        assembled = np.array([direct[0][0], direct[0][1], direct[2][0], direct[2][1]])
        err = max(float(np.max(np.abs(direct - p.station_outputs))),
                  float(np.max(np.abs(assembled - p.stamps))))
        worst_abs = max(worst_abs, err)
        worst_orc = max(worst_orc, err / scale)
    metric = max(worst_res, worst_orc)
    note = (f"{n} events, residual {worst_res:.1e}, oracle {worst_orc:.1e} "
            f"(absolute {worst_abs:.1e})")
    ok, note = _with_audit(metric <= tol, note, bad)
    return CriterionResult(5, "4D protocol consistency", ok, metric, tol, note)


def random_coefficients(rng):
    """Three station coefficient sets from random admissible stamps."""
    out = []
    while len(out) < 3:
        t0, tinf, t1 = rng.uniform(-20, 20, size=3)
        c = projective.moebius_coefficients(t0, tinf, t1)
        if abs(c.wl) > 1e-3 and abs(c.wl + c.kl) > 1e-3:
            out.append(c)
    return out


def post_P_denominators(coeffs, P, tangents):
    """The three station denominators after substituting ``t = P . t'``."""
    h = P @ np.append(tangents, 1.0)
    return np.array([c.wl * h[i] + c.kl * h[3] for i, c in enumerate(coeffs)]), h


def criterion_6(slack=0.0, n_coeffs=100, n_tangents=1000, seed=6):
    """Post-P denominators of the three stations coincide."""
    tol = _tol(1e-12, slack)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_coeffs):
        coeffs = random_coefficients(rng)
        P = projective.common_denominator_P(coeffs)
        T = rng.uniform(-10, 10, size=(n_tangents, 3))
        H = np.column_stack([T, np.ones(n_tangents)]) @ P.T
        w = np.array([c.wl for c in coeffs])
        k = np.array([c.kl for c in coeffs])
        dens = H[:, :3] * w + H[:, 3:4] * k
        terms = np.abs(H[:, :3] * w) + np.abs(H[:, 3:4] * k)
        spread = np.max(dens, axis=1) - np.min(dens, axis=1)
        worst = max(worst, float(np.max(spread / np.max(terms, axis=1))))
    return CriterionResult(6, "common denominator", worst <= tol, worst, tol,
                           f"{n_coeffs} coefficient triples x {n_tangents} tangents")


def _concurrency(M, rng, n_lines):
    worst = 0.0
    d = rng.normal(size=3)
    vp = projective.vanishing_point(M, d)
    if vp.at_infinity:
        return None
    V = vp.coords
    for _ in range(n_lines):
        p = rng.uniform(-5, 5, size=3)
        try:
            A = projective.dehomogenize(M @ np.append(p, 1.0), 1e-12)
            B = projective.dehomogenize(M @ np.append(p + d, 1.0), 1e-12)
        except Exception:
            continue
        AB = B - A
        if np.linalg.norm(AB) == 0.0:
            dist = np.linalg.norm(V - A)
        else:
            dist = np.linalg.norm(np.cross(V - A, AB)) / np.linalg.norm(AB)
        worst = max(worst, dist / max(1.0, np.linalg.norm(V), np.linalg.norm(A)))
    return worst


def criterion_7(slack=0.0, n_maps=20, n_lines=50, seed=7):
    """Images of parallel lines pass through the vanishing point.

    Run on soldering maps built from random coefficients and, since those
    are rank deficient, also on random invertible 4x4 maps.
    """
    tol = _tol(1e-8, slack)
    rng = np.random.default_rng(seed)
    worst = 0.0
    counts = [0, 0]
    for which in (0, 1):
        done = 0
        while done < n_maps:
            if which == 0:
                M = projective.soldering_map(random_coefficients(rng))
            else:
                M = rng.normal(size=(4, 4))
            try:
                w = _concurrency(M, rng, n_lines)
            except Exception:
                w = None
            if w is None:
                continue
            worst = max(worst, w)
            done += 1
        counts[which] = done
    return CriterionResult(7, "vanishing-point concurrency", worst <= tol, worst, tol,
                           f"{counts[0]} soldering + {counts[1]} invertible maps x {n_lines} lines")


def _matrix_distance(A, B):
    a = A / A.flat[np.argmax(np.abs(A))]
    b = B / B.flat[np.argmax(np.abs(B))]
    return float(np.max(np.abs(a - b)))


def criterion_8(slack=0.0, n_pairs=100, seed=8, fault=None):
    """Groupoid laws on data-point frames."""
    tol_assoc = _tol(1e-11, slack)
    tol_map = _tol(1e-10, slack)
    rng = np.random.default_rng(seed)
    con = scenarios.static_3d(user=False)
    events = scenarios.random_events(3, 2 * n_pairs + 1, rng)
    frames, points = [], []
    bad = []
    for i, e in enumerate(events):
        dp = positioning.assemble_data_point_3d(con, e)
        if i == 0:
            dp, bad = _first_data_point(con, e, dp, fault)
        p = localization.localize_data_point_3d(dp)
        frames.append(localization.data_point_frame(dp, p))
        points.append(localization.embed_event(p))
    worst_id = worst_assoc = worst_map = 0.0
    for i in range(n_pairs):
        a, b, c = 2 * i, 2 * i + 1, 2 * i + 2
        gaa = projective.groupoid_pt(frames[a], frames[a], a, a)
        worst_id = max(worst_id, _matrix_distance(gaa.matrix, np.eye(4)))
        gab = projective.groupoid_pt(frames[a], frames[b], a, b)
        gbc = projective.groupoid_pt(frames[b], frames[c], b, c)
        gac = projective.groupoid_pt(frames[a], frames[c], a, c)
        worst_assoc = max(worst_assoc, _matrix_distance((gbc @ gab).matrix, gac.matrix))
        mapped = gab.matrix @ points[a]
        worst_map = max(worst_map, _rel(mapped, points[b]))
    metric = max(worst_id, worst_assoc, worst_map / tol_map * tol_assoc)
    ok = worst_id <= tol_assoc and worst_assoc <= tol_assoc and worst_map <= tol_map
    note = (f"identity {worst_id:.1e}, associativity {worst_assoc:.1e}, "
            f"p_e -> p_e* {worst_map:.1e} on {n_pairs} pairs")
    ok, note = _with_audit(ok, note, bad)
    return CriterionResult(8, "groupoid laws", ok, metric, tol_assoc, note)


def criterion_9(slack=0.0, n=100, seed=9):
    """2D: the localized position equals the forward emission coordinates."""
    tol = _tol(1e-11, slack)
    con = scenarios.static_2d()
    worst = 0.0
    for e in scenarios.events_between_2d(n, np.random.default_rng(seed)):
        p1, p2 = positioning.assemble_echo_2d(con, e)
        got = localization.localize_2d(p1, p2)
        worst = max(worst, float(np.max(np.abs(got - positioning.emission_coordinates(con, e)))))
    return CriterionResult(9, "2D identity of grids", worst <= tol, worst, tol, f"{n} events")


def criterion_10(slack=0.0, n=100, seed=10):
    """Procedure A with oracle angles recovers the event."""
    tol = _tol(1e-9, slack)
    con = scenarios.static_3d(user=True)
    worst_grid = worst_cart = 0.0
    for e in scenarios.random_events(3, n, np.random.default_rng(seed)):
        recs = positioning.assemble_echo_3d(con, e)
        p_e = positioning.emission_coordinates(con, e)
        stations = localization.plane_stations(recs, [0.0] * 3)
        angles = [localization.plane_angle(st, p_e) for st in stations]
        sol = localization.localize_3d_planes(localization.plane_stations(recs, angles))
        worst_grid = max(worst_grid, _rel(sol.event, p_e))
        x = positioning.cartesian_of_emission(con, sol.event, guess=e)
        y = geometry.intersect_past_cones(np.array([r.apex for r in recs]))
        worst_cart = max(worst_cart, _rel(x, y))
    metric = max(worst_grid, worst_cart)
    return CriterionResult(10, "procedure A coherence", metric <= tol, metric, tol,
                           f"grid {worst_grid:.1e}, vs cone solver {worst_cart:.1e}, {n} events")


def _advanced_inertial_time(origin, velocity, x):
    o = np.asarray(origin, dtype=float)
    v = np.asarray(velocity, dtype=float)
    d = x[1:] - o[1:] + v * o[0]
    a = 1.0 - v @ v
    b = -2.0 * (x[0] - d @ v)
    c = x[0] ** 2 - d @ d
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


def _sign_changes(worldline, x, lo, hi, sense, step=1e-3):
    s = np.arange(lo, hi + step, step)
    pts = worldline.origin + s[:, None] * worldline.tangent(0.0)
    sign = 1.0 if sense == "past" else -1.0
    f = sign * (x[0] - pts[:, 0]) - np.linalg.norm(x[1:] - pts[:, 1:], axis=1)
    return int(np.count_nonzero(np.diff(np.sign(f)) != 0))


def criterion_11(slack=0.0, n=200, n_dense=10, seed=11):
    """Null solves against closed forms; uniqueness by dense sampling."""
    tol = _tol(1e-11, slack)
    rng = np.random.default_rng(seed)
    worst = 0.0
    unique = True
    for i in range(n):
        d = int(rng.integers(2, 5))
        v = rng.uniform(-1, 1, size=d - 1)
        v *= rng.uniform(0.0, 0.9) / max(np.linalg.norm(v), 1e-12)
        if i % 2 == 0:
            v[:] = 0.0
        origin = np.concatenate(([rng.uniform(-2, 2)], rng.uniform(-10, 10, size=d - 1)))
        w = Inertial(origin, v)
        x = np.concatenate(([rng.uniform(0, 20)], rng.uniform(-10, 10, size=d - 1)))
        s_past = geometry.solve_null_past(w, x)
        s_fut = geometry.solve_null_future(w, x)
        t_past = oracles.inertial_retarded_time(origin, v, x)
        t_fut = _advanced_inertial_time(origin, v, x)
        worst = max(worst, abs(w.point(s_past)[0] - t_past) / max(1.0, abs(t_past)),
                    abs(w.point(s_fut)[0] - t_fut) / max(1.0, abs(t_fut)))
        if i < n_dense:
            for sense, s in (("past", s_past), ("future", s_fut)):
                lo, hi = s - 15.0, s + 15.0
                unique &= _sign_changes(w, x, lo, hi, sense) == 1
    ok = worst <= tol and unique
    return CriterionResult(11, "null-solver correctness", ok, worst, tol,
                           f"{n} solves per sense, unique roots on {n_dense} dense grids: {unique}")


def criterion_12(slack=0.0, selftest=True):
    """CLI determinism and a clean selftest exit."""
    cmd = [sys.executable, "-m", "stereoloc.cli"]
    runs = []
    for _ in range(2):
        out = subprocess.run(cmd + ["localize", "--preset", "static-3d", "--events", "20",
                                    "--seed", "7", "--format", "csv"],
                             capture_output=True, check=False)
        runs.append(out)
    identical = runs[0].returncode == 0 and runs[0].stdout == runs[1].stdout and runs[0].stdout
    code = None
    if selftest:
        st = subprocess.run(cmd + ["selftest"] + (["--tolerance", repr(slack)] if slack else []),
                            capture_output=True, check=False)
        code = st.returncode
    ok = bool(identical) and (code in (None, 0))
    note = f"byte-identical reports: {bool(identical)}, selftest exit code: {code}"
    return CriterionResult(12, "CLI determinism", ok, 0.0 if ok else 1.0, 0.0, note)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11, 12: criterion_12,
}

TAKES_FAULT = {2, 3, 5, 8}


def run_criterion(number, slack=0.0, fault=None):
    fn = CRITERIA[number]
    start = time.perf_counter()
    kwargs = {"slack": slack}
    if fault and number in TAKES_FAULT:
        kwargs["fault"] = fault
    result = fn(**kwargs)
    result.seconds = time.perf_counter() - start
    return result


def run_all(numbers=range(1, 12), slack=0.0, fault=None, echo=None):
    results = []
    for n in numbers:
        r = run_criterion(n, slack, fault)
        if echo:
            echo(r.line())
        results.append(r)
    return results
