import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stereoloc import oracles, scenarios
from stereoloc.constellation import Constellation, Emitter, Inertial
from stereoloc.errors import EchoAssemblyError, ValidationError
from stereoloc.positioning import (
    DEFAULT_ATTRIBUTION,
    Attribution,
    DataPoint,
    assemble_data_point_3d,
    assemble_echo_2d,
    assemble_echo_3d,
    assemble_station_records_4d,
    cartesian_of_emission,
    emission_coordinates,
    emission_events,
    five_grids,
    grid_change,
)

CON3 = scenarios.static_3d()
CON4 = scenarios.static_4d()
MOV3 = scenarios.moving_3d()


def event3():
    return st.tuples(st.floats(0, 5), st.floats(-2, 2), st.floats(-2, 2)).map(np.array)


def test_emission_coordinates_static_oracle():
    e = np.array([20.0, 1.0, 2.0])
    want = [oracles.static_retarded_time(p, e) for p in scenarios.STATIC_3D]
    np.testing.assert_allclose(emission_coordinates(CON3, e), want, atol=1e-12)


@given(event3())
def test_emission_round_trip(e):
    p = emission_coordinates(MOV3, e)
    np.testing.assert_allclose(cartesian_of_emission(MOV3, p, guess=e), e, atol=1e-9)


def test_emission_events_are_on_past_cone():
    e = np.array([3.0, 0.5, -0.5])
    for a in emission_events(CON3, emission_coordinates(CON3, e)):
        dt = e[0] - a[0]
        assert dt > 0
        assert dt == pytest.approx(np.linalg.norm(e[1:] - a[1:]), abs=1e-10)


def test_emission_events_length_checked():
    with pytest.raises(ValidationError):
        emission_events(CON3, [1.0, 2.0])


def test_five_grids_and_grid_change():
    ems = CON4.emitters + (CON4.anchor.emitter,)
    grids = five_grids(ems)
    assert len(grids) == 5 and all(len(g) == 4 for g in grids)
    e = np.array([2.0, 0.3, -0.2, 0.1])
    p = emission_coordinates(grids[0], e)
    q = grid_change(grids[0], grids[1], p, guess=e)
    np.testing.assert_allclose(q, emission_coordinates(grids[1], e), atol=1e-9)
    np.testing.assert_array_equal(grid_change(grids[2], grids[2], p), p)


# -- 2D --------------------------------------------------------------------------

def test_echo_2d_positions():
    con = scenarios.static_2d()
    e = np.array([1.0, 4.0])
    p1, p2 = assemble_echo_2d(con, e)
    # E1 (at x = 0) receives at t = 5; its position has E2's stamp 5 - 10 = -5
    np.testing.assert_allclose(p1, [5.0, -5.0], atol=1e-12)
    np.testing.assert_allclose(p2, [-3.0, 7.0], atol=1e-12)


# -- 3D --------------------------------------------------------------------------

def test_echo_3d_record_contents():
    e = np.array([1.0, 0.5, -0.5])
    recs = assemble_echo_3d(CON3, e)
    assert [r.station for r in recs] == [0, 1, 2]
    assert recs[0].neighbor_ids == ("Et", "Eh")
    assert recs[1].neighbor_ids == ("Eh", "E")
    for r in recs:
        # the apex position carries the station's own stamp and neighbour stamps
        assert r.apex_position[r.station] == pytest.approx(r.primary_stamp)
        assert r.user_position is not None
        t0, tinf, t1 = r.targets
        assert len({t0, tinf, t1}) == 3
        assert r.reading.shape == (2,)
        assert np.max(r.reading) == pytest.approx(1.0) or np.min(r.reading) == pytest.approx(-1.0)


def test_data_point_stamps_named():
    dp = assemble_data_point_3d(CON3, [1.0, 0.5, -0.5])
    names = [n for n, _ in dp.stamps()]
    assert names[0] == "s0.primary" and names[-1] == "anchor"
    assert "s2.neighbor1[0]" in names
    assert dp.anchor_stamp == pytest.approx(oracles.static_retarded_time(scenarios.ANCHOR_3D, [1.0, 0.5, -0.5]))


def test_protocol_needs_anchor_and_dimension():
    no_anchor = Constellation(CON3.emitters)
    with pytest.raises(ValidationError):
        assemble_echo_3d(no_anchor, [1.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        assemble_echo_3d(CON4, [1.0, 0.0, 0.0, 0.0])


def test_failed_signal_is_named():
    # an emitter that only exists for s in [0, 1] cannot receive e at t = 3
    short = Emitter("E", Inertial([0.0, 10.0, 0.0], [0.0, 0.0], domain=(0.0, 1.0)))
    con = Constellation((short,) + CON3.emitters[1:], CON3.anchor)
    with pytest.raises(EchoAssemblyError) as info:
        assemble_echo_3d(con, [3.0, 0.0, 0.0])
    assert "e -> E" in str(info.value)
    assert info.value.edge == ("E", "e")


# -- 4D --------------------------------------------------------------------------

def test_default_attribution():
    assert DEFAULT_ATTRIBUTION.pairs == ((0, 1), (1, 2), (2, 3), (3, 0))
    assert DEFAULT_ATTRIBUTION.assembly == (0, 0, 2, 2)


@pytest.mark.parametrize(
    "pairs, frames, assembly",
    [
        (((0, 1), (0, 1), (2, 3), (2, 3)), DEFAULT_ATTRIBUTION.frames, (0, 0, 2, 2)),  # fine
        (((0, 1), (1, 2), (2, 3), (3, 3)), DEFAULT_ATTRIBUTION.frames, (0, 0, 2, 2)),
        (DEFAULT_ATTRIBUTION.pairs, ((0, 2, 3),) + DEFAULT_ATTRIBUTION.frames[1:], (0, 0, 2, 2)),
        (DEFAULT_ATTRIBUTION.pairs, DEFAULT_ATTRIBUTION.frames, (1, 0, 2, 2)),
    ],
)
def test_attribution_validation(pairs, frames, assembly):
    if pairs[0] == pairs[1] and frames == DEFAULT_ATTRIBUTION.frames:
        Attribution(pairs, frames, assembly)
        return
    with pytest.raises(ValidationError):
        Attribution(pairs, frames, assembly)


def test_attribution_permutation_round_trip():
    perm = (2, 0, 3, 1)
    inv = tuple(perm.index(i) for i in range(4))
    assert DEFAULT_ATTRIBUTION.permuted(perm).permuted(inv) == DEFAULT_ATTRIBUTION


def test_station_records_4d():
    e = np.array([1.0, 0.3, -0.2, 0.1])
    recs, dp = assemble_station_records_4d(CON4, e)
    assert isinstance(dp, DataPoint) and dp.records == recs
    for r, pair, frame in zip(recs, DEFAULT_ATTRIBUTION.pairs, DEFAULT_ATTRIBUTION.frames):
        assert r.pair == pair and r.frame == frame
        assert r.neighbor_positions.shape == (3, 4)
        assert r.reading.shape == (3,)
        assert r.reference_pairs.shape == (3, 2)
        assert r.apex_position[r.station] == pytest.approx(r.primary_stamp)
