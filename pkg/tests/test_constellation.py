import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stereoloc.constellation import (
    Affine,
    AnchoringWorldline,
    Circular,
    Constellation,
    Emitter,
    Inertial,
    ProperTime,
    SineWobble,
    Transformed,
    boost_matrix,
    check_timelike,
    helical,
    message_coordinate,
    stamp,
    unstamp,
)
from stereoloc.errors import DomainError, NotTimelikeError, ValidationError
from stereoloc.geometry import mdot

param = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize(
    "w",
    [
        Inertial([0.0, 1.0, 2.0], [0.3, -0.4]),
        Circular([0.0, 0.0], 2.0, 0.3, phase=0.5),
        helical([0.0, 0.0, 0.0], 1.5, 0.2, 0.1),
        Transformed(Inertial([0.0, 0.0, 0.0], [0.2, 0.0]), boost_matrix([0.0, 0.3]), np.array([1.0, 2.0, 3.0]), 0.3),
    ],
)
def test_worldlines_are_proper_time_parameterized(w):
    for s in np.linspace(-10, 10, 7):
        u = w.tangent(s)
        assert mdot(u, u) == pytest.approx(1.0, abs=1e-12)
        assert u[0] > 0
        # tangent is the derivative of the point
        h = 1e-6
        np.testing.assert_allclose((w.point(s + h) - w.point(s - h)) / (2 * h), u, atol=1e-7)
    assert check_timelike(w)


def test_circular_oracle_point():
    w = Circular([1.0, 2.0], 2.0, 0.25, phase=0.0)
    g = 1.0 / math.sqrt(1.0 - 0.25)
    p = w.point(1.0)
    assert p[0] == pytest.approx(g)
    assert p[1] == pytest.approx(1.0 + 2.0 * math.cos(0.25 * g))


def test_transformed_speed_bound_is_relativistic_sum():
    w = Transformed(Inertial([0.0, 0.0, 0.0], [0.8, 0.0]), boost_matrix([0.8, 0.0]), np.zeros(3), 0.8)
    assert w.max_speed == pytest.approx(1.6 / 1.64)
    assert w.max_speed < 1.0


@pytest.mark.parametrize(
    "build",
    [
        lambda: Inertial([0.0, 0.0], [1.0]),
        lambda: Circular([0.0, 0.0], 2.0, 0.6),
        lambda: helical([0.0, 0.0, 0.0], 1.0, 0.8, 0.7),
    ],
)
def test_superluminal_worldlines_rejected(build):
    with pytest.raises(NotTimelikeError):
        build()


def test_domain_enforced():
    w = Inertial([0.0, 0.0], [0.0], domain=(0.0, 1.0))
    with pytest.raises(DomainError):
        w.point(2.0)
    with pytest.raises(DomainError):
        stamp(Emitter("A", w), -1.0)


@pytest.mark.parametrize("clock", [ProperTime(), Affine(2.0, 1.0), SineWobble(0.3), Affine(0.5, -3.0, SineWobble(0.2))])
@given(s=param)
def test_clock_round_trip(clock, s):
    em = Emitter("A", Inertial([0.0, 0.0], [0.0]), clock)
    assert unstamp(em, stamp(em, s)) == pytest.approx(s, abs=1e-12)
    assert clock.derivative(s) > 0


def test_affine_clock_oracle():
    assert Affine(2.0, 1.0).stamp(3.0) == 7.0
    assert Affine(2.0, 1.0).unstamp(7.0) == 3.0


@pytest.mark.parametrize("bad", [lambda: Affine(0.0), lambda: Affine(-1.0), lambda: SineWobble(1.0)])
def test_non_monotone_clocks_rejected(bad):
    with pytest.raises(ValidationError):
        bad()


def test_unstamp_rejects_non_finite():
    with pytest.raises(DomainError):
        unstamp(Emitter("A", Inertial([0.0, 0.0], [0.0])), math.inf)


def test_boost_matrix_preserves_metric():
    L = boost_matrix([0.3, -0.5, 0.1])
    eta = np.diag([1.0, -1.0, -1.0, -1.0])
    np.testing.assert_allclose(L.T @ eta @ L, eta, atol=1e-14)


# -- anchor ---------------------------------------------------------------------------

def test_message_coordinate_static_anchor():
    anchor = AnchoringWorldline(Emitter("S", Inertial([0.0, 0.0, 0.0], [0.0, 0.0])))
    assert message_coordinate(anchor, [10.0, 3.0, 4.0]) == pytest.approx(5.0)
    assert message_coordinate(anchor, [10.0, 3.0, 4.0], "reception") == pytest.approx(15.0)


def test_prolongation_is_inertial_continuation():
    em = Emitter("S", Circular([0.0, 0.0], 1.0, 0.5))
    anchor = AnchoringWorldline(em, origin=0.0)
    w = anchor.worldline
    # continuous with matching tangent at the origin event
    np.testing.assert_allclose(w.point(-1e-9), em.worldline.point(0.0), atol=1e-8)
    np.testing.assert_allclose(w.tangent(-1.0), em.worldline.tangent(0.0))
    # messages from before o use the straight continuation
    e = np.array([-20.0, 0.0, 0.0])
    s = message_coordinate(anchor, e)
    assert s < 0.0
    p = w.point(s)
    assert (e[0] - p[0]) == pytest.approx(np.linalg.norm(e[1:] - p[1:]), abs=1e-10)


def test_anchor_sense_validated():
    with pytest.raises(ValidationError):
        AnchoringWorldline(Emitter("S", Inertial([0.0, 0.0], [0.0])), sense="sideways")


# -- constellation ---------------------------------------------------------------------

def _static(eid, *pos):
    return Emitter(eid, Inertial([0.0, *pos], np.zeros(len(pos))))


def test_constellation_counts_and_ids():
    c = Constellation((_static("A", 0.0, 0.0), _static("B", 1.0, 0.0), _static("C", 0.0, 1.0)))
    assert c.dim == 3 and len(c) == 3 and c[1].id == "B"
    with pytest.raises(ValidationError):
        Constellation((_static("A", 0.0, 0.0), _static("B", 1.0, 0.0)))
    with pytest.raises(ValidationError):
        Constellation((_static("A", 0.0, 0.0), _static("A", 1.0, 0.0), _static("C", 0.0, 1.0)))
    with pytest.raises(ValidationError):
        Constellation((_static("A", 0.0), _static("B", 1.0, 0.0)))
