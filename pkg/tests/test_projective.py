import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from stereoloc import projective as pj
from stereoloc.errors import (
    DegenerateFrameError,
    SingularConfigurationError,
    ValidationError,
    VanishingDenominatorError,
)

stamp = st.floats(-50, 50, allow_nan=False)


def distinct(*ts, gap=1e-3):
    return all(abs(a - b) > gap for i, a in enumerate(ts) for b in ts[i + 1:])


# -- basics -----------------------------------------------------------------------

def test_normalize_and_equality():
    np.testing.assert_allclose(pj.normalize([2.0, -4.0]), [-0.5, 1.0])
    assert pj.proj_equal([1.0, 2.0, 3.0], [-2.0, -4.0, -6.0])
    with pytest.raises(ValidationError):
        pj.normalize([0.0, 0.0])


@pytest.mark.parametrize("v, h", [(3.0, [3.0, 1.0]), (math.inf, [1.0, 0.0]), (-math.inf, [1.0, 0.0])])
def test_point1(v, h):
    np.testing.assert_array_equal(pj.point1(v), h)


def test_value1_and_dehomogenize():
    assert pj.value1([6.0, 2.0]) == 3.0
    assert pj.value1([1.0, 0.0]) == math.inf
    with pytest.raises(ValidationError):
        pj.value1([0.0, 0.0])
    with pytest.raises(VanishingDenominatorError):
        pj.dehomogenize([1.0, 2.0, 0.0])


def test_cross_ratio():
    np.testing.assert_array_equal(pj.cross_ratio(5.0, 3.0, 1.0), [4.0, 2.0])
    with pytest.raises(ValidationError):
        pj.cross_ratio(1.0, 1.0, 1.0)


# -- frame changes ------------------------------------------------------------------

def test_frame_change_rp1_oracle_matrix():
    K = pj.solve_frame_change_rp1((2.0, 3.0, 1.0))
    np.testing.assert_allclose(K / K[1, 1], np.array([[-3.0, 4.0], [-1.0, 2.0]]) / 2.0)


@given(stamp, stamp, stamp)
def test_frame_change_rp1_sends_frame_to_targets(t0, tinf, t1):
    assume(distinct(t0, tinf, t1, gap=1e-2))
    K = pj.solve_frame_change_rp1((t0, tinf, t1))
    assert pj.value1(pj.apply_moebius(K, 0.0)) == pytest.approx(t0, abs=1e-9)
    assert pj.value1(pj.apply_moebius(K, 1.0)) == pytest.approx(t1, abs=1e-9)
    assert pj.proj_equal(pj.apply_moebius(K, math.inf), pj.point1(tinf), 1e-10)


@given(stamp, stamp, stamp)
def test_centred_stamp_exact_on_frame(t0, tinf, t1):
    assume(distinct(t0, tinf, t1, gap=1e-9))
    f = pj.frame_stamp_rp1
    assert abs(f((t0, tinf, t1), [0.0, 1.0]) - t0) <= 1e-12
    assert abs(f((t0, tinf, t1), [1.0, 1.0]) - t1) <= 1e-12
    assert abs(f((t0, tinf, t1), [1.0, 0.0]) - tinf) <= 1e-12


@given(stamp, stamp, stamp, st.floats(-3, 3))
def test_centred_stamp_agrees_with_matrix(t0, tinf, t1, x):
    assume(distinct(t0, tinf, t1, gap=1e-1))
    K = pj.solve_frame_change_rp1((t0, tinf, t1))
    a = pj.frame_stamp_rp1((t0, tinf, t1), [x, 1.0])
    b = pj.value1(K @ [x, 1.0])
    assume(abs(b) < 1e4)
    assert a == pytest.approx(b, rel=1e-8, abs=1e-8)


def test_frame_change_with_infinite_target():
    K = pj.solve_frame_change_rp1((0.0, math.inf, 1.0))
    assert pj.frame_stamp_rp1((0.0, math.inf, 1.0), [2.5, 1.0]) == pytest.approx(2.5)
    assert pj.value1(K @ [2.5, 1.0]) == pytest.approx(2.5)


@pytest.mark.parametrize("targets", [(1.0, 1.0, 2.0), (1.0, 2.0, 2.0), (3.0, 4.0, 3.0)])
def test_degenerate_rp1_frames(targets):
    with pytest.raises(DegenerateFrameError):
        pj.solve_frame_change_rp1(targets)
    with pytest.raises(DegenerateFrameError):
        pj.frame_stamp_rp1(targets, [0.5, 1.0])


def test_frame_change_rp2_sends_canonical_points(rng):
    targets = rng.normal(size=(4, 3))
    K = pj.solve_frame_change_rp2(targets)
    for c, t in zip(pj.CANONICAL_RP2, targets):
        assert pj.proj_equal(K @ c, t, 1e-12)


def test_rp2_frame_with_three_collinear_points_rejected():
    with pytest.raises(DegenerateFrameError):
        pj.solve_frame_change_rp2([[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 1, 1]])
    with pytest.raises(DegenerateFrameError):
        pj.solve_frame_change_rp2([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0]])


def test_check_frame_change_rejects_singular():
    with pytest.raises(SingularConfigurationError):
        pj.check_frame_change([[1.0, 2.0], [2.0, 4.0]])


# -- Moebius coefficients ---------------------------------------------------------------

@given(stamp, stamp, stamp)
def test_moebius_coefficients_hit_the_stamps(t0, tinf, t1):
    assume(distinct(t0, tinf, t1, gap=1e-2))
    c = pj.moebius_coefficients(t0, tinf, t1)
    assert c(0.0) == pytest.approx(t0, abs=1e-9)
    assert c(1.0) == pytest.approx(t1, abs=1e-9)
    assert c.uQ / c.wl == pytest.approx(tinf, abs=1e-9)
    assert pj.reading_to_stamp(c, 1.0) == pytest.approx(t1, abs=1e-9)


def test_moebius_coefficients_oracle():
    c = pj.moebius_coefficients(2.0, 3.0, 1.0)
    assert tuple(c) == (-3.0, 4.0, -1.0, 2.0)


# -- common denominator and soldering map -----------------------------------------------

def _coeffs(rng):
    out = []
    while len(out) < 3:
        c = pj.moebius_coefficients(*rng.uniform(-20, 20, size=3))
        if abs(c.wl) > 1e-2:
            out.append(c)
    return out


def test_P_equalizes_denominators(rng):
    for _ in range(20):
        coeffs = _coeffs(rng)
        P = pj.common_denominator_P(coeffs)
        row = pj.common_denominator_row(coeffs)
        for t in rng.uniform(-5, 5, size=(20, 3)):
            h = P @ np.append(t, 1.0)
            dens = [c.wl * h[i] + c.kl * h[3] for i, c in enumerate(coeffs)]
            expect = row @ np.append(t, 1.0)
            np.testing.assert_allclose(dens, expect, rtol=1e-10, atol=1e-10)


def test_P_is_rank_deficient(rng):
    P = pj.common_denominator_P(_coeffs(rng))
    np.testing.assert_array_equal(P[:, 2], P[:, 3])
    assert np.linalg.matrix_rank(P) <= 3


def test_P_rejects_zero_w():
    c = pj.MoebiusCoefficients(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        pj.common_denominator_P([c, c, c])


def test_soldering_map_reproduces_station_fractions(rng):
    for _ in range(20):
        coeffs = _coeffs(rng)
        P = pj.common_denominator_P(coeffs)
        M = pj.soldering_map(coeffs)
        for t in rng.uniform(-5, 5, size=(10, 3)):
            try:
                tau_star = pj.pgl4_act(P, t)
            except VanishingDenominatorError:
                continue
            h = M @ np.append(t, 1.0)
            expect = [c(tau_star[i]) for i, c in enumerate(coeffs)]
            np.testing.assert_allclose(h[:3] / h[3], expect, rtol=1e-8, atol=1e-8)


def test_pgl4_act_exceptional_plane():
    P = np.eye(4)
    P[3] = [1.0, 0.0, 0.0, 1.0]
    with pytest.raises(VanishingDenominatorError):
        pj.pgl4_act(P, [-1.0, 0.0, 0.0])
    np.testing.assert_allclose(pj.pgl4_act(np.eye(4), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


# -- vanishing points ------------------------------------------------------------------

def test_vanishing_point_of_identity_is_at_infinity():
    vp = pj.vanishing_point(np.eye(4), [1.0, 0.0, 0.0])
    assert vp.at_infinity
    with pytest.raises(VanishingDenominatorError):
        vp.coords


def test_vanishing_point_kernel_direction():
    M = np.eye(4)
    M[0, 0] = 0.0
    with pytest.raises(SingularConfigurationError):
        pj.vanishing_point(M, [1.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        pj.vanishing_point(np.eye(4), [0.0, 0.0, 0.0])


@given(st.integers(0, 2**32 - 1))
def test_parallel_lines_meet_at_vanishing_point(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(4, 4))
    d = rng.normal(size=3)
    vp = pj.vanishing_point(M, d)
    # homogeneous images of p, p + d and the vanishing point span a plane:
    # the three points of the image are collinear
    for p in rng.uniform(-3, 3, size=(5, 3)):
        A = M @ np.append(p, 1.0)
        B = M @ np.append(p + d, 1.0)
        stack = np.array([A / np.linalg.norm(A), B / np.linalg.norm(B),
                          vp.homogeneous / np.linalg.norm(vp.homogeneous)])
        s = np.linalg.svd(stack, compute_uv=False)
        assert s[2] <= 1e-12 * s[0]


# -- groupoid --------------------------------------------------------------------------

def test_groupoid_identity_and_composition(rng):
    A, B, C = (rng.normal(size=(4, 4)) for _ in range(3))
    gab = pj.groupoid_pt(A, B, "a", "b")
    gbc = pj.groupoid_pt(B, C, "b", "c")
    gac = pj.groupoid_pt(A, C, "a", "c")
    np.testing.assert_allclose(pj.groupoid_pt(A, A).matrix, np.eye(4), atol=1e-12)
    g = gbc @ gab
    assert (g.source, g.target) == ("a", "c")
    assert pj.proj_distance(g.matrix.ravel(), gac.matrix.ravel()) < 1e-10
    with pytest.raises(ValidationError):
        gab @ gbc
