import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stereoloc import oracles, scenarios
from stereoloc.constellation import Circular, Emitter, Inertial
from stereoloc.errors import NotNullSeparatedError, ValidationError, ZeroSpatialPartError
from stereoloc.geometry import solve_null_past
from stereoloc.observation import (
    NORTH,
    POLAR,
    SOUTH,
    chart_reading,
    incoming_direction,
    normalize_reading_rp1,
    normalize_reading_rp2,
    raw_homogeneous,
    tetrad_at,
    track_passages,
)

velocity = st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
angle = st.floats(0, 2 * math.pi)


def _rot2(th):
    return np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])


@given(velocity, angle)
def test_tetrad_is_orthonormal(v, th):
    em = Emitter("A", Inertial([0.0, 1.0, 2.0], list(v)), orientation=_rot2(th))
    t = tetrad_at(em, 0.7)
    eta = np.diag([1.0, -1.0, -1.0])
    np.testing.assert_allclose(t.gram(), eta, atol=1e-12)


def test_static_direction_oracle():
    em = Emitter("A", Inertial([0.0, 0.0, 0.0], [0.0, 0.0]))
    t = tetrad_at(em, 5.0)
    d = incoming_direction(t, [0.0, 3.0, 4.0])
    np.testing.assert_allclose(d, [0.6, 0.8], atol=1e-15)


@given(velocity, angle, st.floats(-5, 5), st.floats(-5, 5))
def test_direction_matches_boost_oracle(v, th, x, y):
    em = Emitter("A", Inertial([0.0, 10.0, 0.0], list(v)), orientation=_rot2(th))
    src = Circular([x, y], 1.0, 0.2)
    base = em.worldline.point(3.0)
    if np.linalg.norm(base[1:] - src.point(0.0)[1:]) < 2.5:
        return
    b = src.point(solve_null_past(src, base))
    got = incoming_direction(tetrad_at(em, 3.0), b)
    np.testing.assert_allclose(got, oracles.rest_frame_direction(em, 3.0, b), atol=1e-10)
    assert np.linalg.norm(got) == pytest.approx(1.0)


def test_direction_rejects_bad_sources():
    t = tetrad_at(Emitter("A", Inertial([0.0, 0.0, 0.0], [0.0, 0.0])), 5.0)
    with pytest.raises(ZeroSpatialPartError):
        incoming_direction(t, [1.0, 0.0, 0.0])
    with pytest.raises(NotNullSeparatedError):
        incoming_direction(t, [4.0, 3.0, 4.0])
    with pytest.raises(NotNullSeparatedError):
        incoming_direction(t, [10.0, 3.0, 4.0])  # future cone


def test_improper_seed_rejected():
    em = Emitter("A", Inertial([0.0, 0.0, 0.0], [0.0, 0.0]))
    with pytest.raises(ValidationError):
        tetrad_at(em, 0.0, seed=np.diag([1.0, -1.0]))
    with pytest.raises(ValidationError):
        tetrad_at(em, 0.0, seed=np.ones((2, 2)))


@pytest.mark.parametrize(
    "u, tag, chart",
    [
        ([0.6, 0.8], NORTH, (0.8 / 0.6,)),
        ([-0.6, 0.8], SOUTH, (-0.8 / 0.6,)),
        ([0.0, 1.0], POLAR, None),
        ([0.0, 0.6, 0.8], NORTH, (0.0, 0.75)),
        ([0.6, 0.0, -0.8], SOUTH, (-0.75, 0.0)),
        ([1.0, 0.0, 0.0], POLAR, None),
    ],
)
def test_chart_reading_tags(u, tag, chart):
    r = chart_reading(u)
    assert r.hemisphere == tag
    if chart is None:
        assert r.chart is None
    else:
        np.testing.assert_allclose(r.chart, chart)


def test_antipodal_rays_share_chart_but_not_tag():
    a, b = chart_reading([0.6, 0.8]), chart_reading([-0.6, -0.8])
    assert a.chart == pytest.approx(b.chart)
    assert a.hemisphere != b.hemisphere


def test_track_passages_signature():
    ths = np.linspace(0.0, 2 * math.pi, 9)[:-1]
    dirs = [np.array([math.cos(t), 0.0, math.sin(t)]) for t in ths]
    readings = track_passages(dirs)
    # starts on the boundary (u3 = 0), enters north, crosses to south, back to north ...
    assert [r.hemisphere for r in readings][:3] == [POLAR, NORTH, NORTH]
    assert readings[-1].passage == (-1,)
    assert readings[5].hemisphere == SOUTH


def test_raw_homogeneous_charts():
    np.testing.assert_allclose(raw_homogeneous([0.6, 0.8]), [0.8, 0.6])
    with pytest.raises(ValidationError):
        raw_homogeneous([1.0])


@given(st.lists(angle, min_size=4, max_size=4, unique=True), angle)
def test_rp1_normalization_reproduces_frame(ths, rot):
    z, inf, one, e = [np.array([math.cos(t), math.sin(t)]) for t in ths]
    hs = [raw_homogeneous(x) for x in (z, inf, one)]
    dets = [abs(np.linalg.det(np.column_stack([hs[i], hs[j]]))) for i, j in ((0, 1), (0, 2), (1, 2))]
    if min(dets) < 1e-3:
        return
    for ref, want in ((z, [0.0, 1.0]), (inf, [1.0, 0.0]), (one, [1.0, 1.0])):
        got = normalize_reading_rp1(ref, (z, inf, one))
        assert abs(got[0] * want[1] - got[1] * want[0]) < 1e-10
    # rotating all directions together leaves the reading unchanged
    R = _rot2(rot)
    a = normalize_reading_rp1(e, (z, inf, one))
    b = normalize_reading_rp1(R @ e, (R @ z, R @ inf, R @ one))
    assert abs(a[0] * b[1] - a[1] * b[0]) < 1e-9


def test_rp1_reading_matches_cross_ratio_oracle():
    ths = [0.3, 1.4, 2.2, 0.9]
    z, inf, one, e = [np.array([math.cos(t), math.sin(t)]) for t in ths]
    r = normalize_reading_rp1(e, (z, inf, one))
    t = oracles.line_cross_ratio(ths[3], ths[0], ths[1], ths[2])
    assert r[0] / r[1] == pytest.approx(t, rel=1e-12)


def test_rp2_normalization_sends_frame_to_canonical_points(rng):
    refs = [x / np.linalg.norm(x) for x in rng.normal(size=(4, 3))]
    canon = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float)
    for ref, want in zip(refs, canon):
        got = normalize_reading_rp2(ref, refs)
        np.testing.assert_allclose(got / np.max(np.abs(got)) * np.sign(got @ want), want / np.max(want), atol=1e-10)
    with pytest.raises(ValidationError):
        normalize_reading_rp2(refs[0], refs[:3])


def test_normalized_readings_of_fixture_are_frame_independent(rng):
    con = scenarios.static_3d(user=False)
    rot = scenarios.rotate_frames(con, rng)
    from stereoloc.positioning import assemble_data_point_3d

    e = np.array([2.0, 0.5, -1.0])
    a = assemble_data_point_3d(con, e)
    b = assemble_data_point_3d(rot, e)
    for ra, rb in zip(a.records, b.records):
        np.testing.assert_allclose(ra.reading, rb.reading, atol=1e-12)
