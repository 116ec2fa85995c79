import math

import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from stereoloc import oracles
from stereoloc.constellation import Circular, Inertial
from stereoloc.errors import (
    AmbiguousSolutionError,
    DimensionMismatchError,
    NoSignalError,
    ValidationError,
)
from stereoloc.geometry import (
    CausalClass,
    intersect_cones,
    intersect_past_cones,
    minkowski,
    solve_null_future,
    solve_null_past,
)

coord = st.floats(-20, 20, allow_nan=False)
speed = st.floats(0.0, 0.9)


def static(*pos):
    return Inertial([0.0, *pos], np.zeros(len(pos)))


# -- minkowski ---------------------------------------------------------------------

@pytest.mark.parametrize(
    "a, b, value, kind",
    [
        ([0, 0, 0], [1, 0, 0], 1.0, CausalClass.TIMELIKE),
        ([0, 0, 0], [0, 1, 0], -1.0, CausalClass.SPACELIKE),
        ([0, 0, 0], [5, 3, 4], 0.0, CausalClass.NULL),
        ([1, 2], [4, 5], 0.0, CausalClass.NULL),
    ],
)
def test_minkowski_classes(a, b, value, kind):
    iv = minkowski(a, b)
    assert iv.value == pytest.approx(value)
    assert iv.causal_class is kind


def test_minkowski_null_tolerance_scales_with_magnitude():
    # 1e-6 off the cone at coordinates ~1e3 is within 1e-9 * 1e6
    assert minkowski([0, 0, 0], [1000.0, 1000.0 - 1e-10, 0]).causal_class is CausalClass.NULL
    assert minkowski([0, 0, 0], [1.0, 1.0 - 1e-6, 0]).causal_class is CausalClass.TIMELIKE


def test_minkowski_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        minkowski([0, 0], [0, 0, 0])


@given(st.lists(coord, min_size=3, max_size=3), st.lists(coord, min_size=3, max_size=3))
def test_minkowski_symmetric(a, b):
    assert minkowski(a, b).value == minkowski(b, a).value


# -- null solves -----------------------------------------------------------------------

def test_static_retarded_and_advanced_oracle_values():
    w = static(0.0, 0.0)
    assert solve_null_past(w, [10.0, 3.0, 4.0]) == pytest.approx(5.0, abs=1e-12)
    assert solve_null_future(w, [10.0, 3.0, 4.0]) == pytest.approx(15.0, abs=1e-12)


def test_moving_emitter_proper_time_oracle_value():
    # v = 0.5 along x from the origin; event (10, 3, 4): coordinate time 6, tau = 6 sqrt(0.75)
    w = Inertial([0.0, 0.0, 0.0], [0.5, 0.0])
    s = solve_null_past(w, [10.0, 3.0, 4.0])
    assert w.point(s)[0] == pytest.approx(6.0, abs=1e-12)
    assert s == pytest.approx(6.0 * math.sqrt(0.75), abs=1e-12)


@given(coord, coord, coord, st.floats(-0.9, 0.9), st.floats(-10, 10))
@example(5.0, 1e-5, 0.0, 0.0, 0.0)  # tiny lag: the naive quadratic formula cancels
def test_retarded_matches_closed_form(t, x, y, v, x0):
    origin = [0.0, x0, 0.0]
    w = Inertial(origin, [v, 0.0])
    s = solve_null_past(w, [t, x, y])
    expect = oracles.inertial_retarded_time(origin, [v, 0.0], [t, x, y])
    assert w.point(s)[0] == pytest.approx(expect, abs=1e-11 * max(1.0, abs(expect)))


@given(coord, coord, coord)
def test_advanced_static_closed_form(t, x, y):
    s = solve_null_future(static(1.0, -2.0), [t, x, y])
    assert s == pytest.approx(oracles.static_advanced_time([1.0, -2.0], [t, x, y]), abs=1e-11 * max(1, abs(t) + 40))


@given(coord, coord, coord)
def test_retarded_solution_is_null_and_past(t, x, y):
    w = Circular([0.0, 0.0], 3.0, 0.2)
    e = np.array([t, x, y])
    p = w.point(solve_null_past(w, e))
    assert p[0] <= e[0]
    assert minkowski(p, e).causal_class is CausalClass.NULL


def test_no_signal_on_bounded_worldline():
    w = Inertial([0.0, 0.0, 0.0], [0.0, 0.0], domain=(0.0, 1.0))
    with pytest.raises(NoSignalError):
        solve_null_past(w, [100.0, 0.0, 0.0])


def test_explicit_bracket_without_root_fails():
    with pytest.raises(NoSignalError):
        solve_null_past(static(0.0, 0.0), [10.0, 3.0, 4.0], bracket=(6.0, 7.0))


def test_empty_bracket_rejected():
    with pytest.raises(ValidationError):
        solve_null_past(static(0.0, 0.0), [10.0, 3.0, 4.0], bracket=(7.0, 6.0))


# -- cone intersection --------------------------------------------------------------------

def _apexes(emitters, e):
    return np.array([w.point(solve_null_future(w, e)) for w in emitters])


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_cone_intersection_recovers_event(dim, rng):
    positions = rng.uniform(-10, 10, size=(dim, dim - 1))
    if dim == 2:
        # in 1+1 the event must sit between the emitters
        positions = np.array([[-10.0], [10.0]])
    emitters = [static(*p) for p in positions]
    for _ in range(20):
        e = np.concatenate(([rng.uniform(0, 5)], rng.uniform(-2, 2, size=dim - 1)))
        apexes = _apexes(emitters, e)
        got = intersect_past_cones(apexes, guess=e)
        np.testing.assert_allclose(got, e, atol=1e-9)


def test_future_sense_recovers_emission_event():
    emitters = [static(10.0, 0.0), static(-4.0, 9.0), static(-6.0, -7.0)]
    e = np.array([30.0, 0.5, -0.5])
    emitted = np.array([w.point(solve_null_past(w, e)) for w in emitters])
    np.testing.assert_allclose(intersect_cones(emitted, "future", guess=e), e, atol=1e-9)


def test_two_roots_without_guess_is_ambiguous():
    # both quadratic roots precede every apex for this event outside the triangle
    emitters = [static(0.0, 0.0), static(1.0, 0.0), static(0.0, 1.0)]
    e = np.array([0.0, -5.0, -5.0])
    apexes = _apexes(emitters, e)
    with pytest.raises(AmbiguousSolutionError):
        intersect_past_cones(apexes)
    np.testing.assert_allclose(intersect_past_cones(apexes, guess=e), e, atol=1e-9)
    other = intersect_past_cones(apexes, guess=[7.0, 0.0, 0.0])
    assert other[0] > 6.0


def test_cone_intersection_shape_checked():
    with pytest.raises(ValidationError):
        intersect_cones(np.zeros((2, 3)))
