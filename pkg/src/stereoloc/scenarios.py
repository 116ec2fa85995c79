"""Ready-made constellations and event samplers.

The static layouts are deliberately asymmetric: with equal inter-satellite
distances two bright points of a station carry the same stamp and its frame
collapses.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from .constellation import (
    Affine,
    AnchoringWorldline,
    Circular,
    Constellation,
    Emitter,
    Inertial,
    Piecewise,
    ProperTime,
    SineWobble,
    Transformed,
)

STATIC_2D = [(0.0,), (10.0,)]
STATIC_3D = [(10.0, 0.0), (-4.0, 9.0), (-6.0, -7.0)]
ANCHOR_3D = (2.0, -3.0)
USER_3D = (1.0, 1.5)
STATIC_4D = [(10.0, 0.0, 0.0), (-4.0, 9.0, 1.0), (-6.0, -7.0, 2.0), (1.0, 1.0, 9.0)]
ANCHOR_4D = (2.0, 3.0, -4.0)

IDS = {2: ("E1", "E2"), 3: ("E", "Et", "Eh"), 4: ("E", "Eb", "Et", "Eh")}


def static_emitter(eid, position, t0=0.0):
    p = np.asarray(position, dtype=float)
    return Emitter(eid, Inertial(np.concatenate(([t0], p)), np.zeros(p.size)))


def static_2d():
    return Constellation(tuple(static_emitter(i, p) for i, p in zip(IDS[2], STATIC_2D)))


def static_3d(user=True):
    ems = tuple(static_emitter(i, p) for i, p in zip(IDS[3], STATIC_3D))
    anchor = AnchoringWorldline(static_emitter("S", ANCHOR_3D))
    u = static_emitter("U", USER_3D).worldline if user else None
    return Constellation(ems, anchor, u)


def moving_3d(user=True):
    """Inertial, circular and clock-modified emitters in 2+1 dimensions."""
    ems = (
        Emitter("E", Inertial([0.0, 10.0, 0.0], [0.0, 0.3])),
        Emitter("Et", Circular([-4.0, 9.0], 1.0, 0.3, phase=0.4), Affine(2.0, 1.0)),
        Emitter("Eh", Inertial([0.0, -6.0, -7.0], [0.2, 0.1]), SineWobble(0.1)),
    )
    anchor = AnchoringWorldline(Emitter("S", Inertial([0.0, 2.0, -3.0], [-0.1, 0.2])), origin=-5.0)
    u = Inertial([0.0, 1.0, 1.5], [0.05, 0.0]) if user else None
    return Constellation(ems, anchor, u)


def static_4d():
    ems = tuple(static_emitter(i, p) for i, p in zip(IDS[4], STATIC_4D))
    return Constellation(ems, AnchoringWorldline(static_emitter("S", ANCHOR_4D)))


def moving_4d():
    ems = (
        Emitter("E", Inertial([0.0, 10.0, 0.0, 0.0], [0.0, 0.2, 0.0])),
        Emitter("Eb", Circular([-4.0, 9.0, 1.0], 1.5, 0.2, phase=1.0, drift=0.1)),
        Emitter("Et", Inertial([0.0, -6.0, -7.0, 2.0], [0.1, 0.0, -0.1]), Affine(1.5, -2.0)),
        Emitter("Eh", Inertial([0.0, 1.0, 1.0, 9.0], [0.0, -0.1, 0.0]), SineWobble(0.05)),
    )
    anchor = AnchoringWorldline(Emitter("S", Inertial([0.0, 2.0, 3.0, -4.0], [0.1, 0.1, 0.0])))
    return Constellation(ems, anchor)


def random_events(dim, n, rng, t_range=(0.0, 5.0), radius=3.0):
    """``n`` events with uniform time and spatial part in a ball of ``radius``."""
    t = rng.uniform(*t_range, size=n)
    x = rng.normal(size=(n, dim - 1))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= radius * rng.uniform(size=(n, 1)) ** (1.0 / (dim - 1))
    return np.column_stack([t, x])


def events_between_2d(n, rng, t_range=(0.0, 5.0), margin=0.5):
    """Events strictly between the two static 1+1 emitters."""
    lo, hi = STATIC_2D[0][0] + margin, STATIC_2D[1][0] - margin
    return np.column_stack([rng.uniform(*t_range, size=n), rng.uniform(lo, hi, size=n)])


def random_rotation(n, rng):
    """Uniformly random proper rotation of R^n."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def rotate_frames(constellation, rng):
    """Same constellation with every on-board frame randomly rotated."""
    n = constellation.dim - 1
    ems = tuple(
        dataclasses.replace(e, orientation=random_rotation(n, rng)) for e in constellation.emitters
    )
    anchor = constellation.anchor
    if anchor is not None:
        anchor = dataclasses.replace(
            anchor, emitter=dataclasses.replace(anchor.emitter, orientation=random_rotation(n, rng))
        )
    return dataclasses.replace(constellation, emitters=ems, anchor=anchor)


# -- global rescaling ---------------------------------------------------------

def scale_worldline(w, k):
    """The worldline ``s -> k * w(s / k)``: all coordinates times ``k``."""
    if isinstance(w, Inertial):
        return Inertial(k * w.origin, w.velocity, tuple(k * d for d in w.domain))
    if isinstance(w, Circular):
        return Circular(k * w.center, k * w.radius, w.rate / k, w.phase, k * w.t0, w.drift,
                        tuple(k * d for d in w.domain))
    if isinstance(w, Piecewise):
        return Piecewise(scale_worldline(w.main, k), scale_worldline(w.before, k), k * w.s_o)
    if isinstance(w, Transformed):
        return Transformed(scale_worldline(w.base, k), w.lorentz, k * w.shift, w.boost_speed)
    raise TypeError(f"cannot rescale {type(w).__name__}")


def scale_clock(c, k):
    """Clock of the rescaled worldline: stamps are ``k`` times the originals."""
    if isinstance(c, ProperTime):
        return c
    if isinstance(c, Affine):
        return Affine(c.rate, k * c.offset, scale_clock(c.base, k))
    raise TypeError(f"clock {type(c).__name__} has no exact rescaling")


def scale_constellation(constellation, k):
    def em(e):
        return dataclasses.replace(e, worldline=scale_worldline(e.worldline, k),
                                   clock=scale_clock(e.clock, k))

    anchor = constellation.anchor
    if anchor is not None:
        anchor = AnchoringWorldline(
            em(anchor.emitter),
            k * anchor.origin,
            None if anchor.prolongation is None else scale_worldline(anchor.prolongation, k),
            anchor.sense,
        )
    user = None if constellation.user is None else scale_worldline(constellation.user, k)
    return Constellation(tuple(em(e) for e in constellation.emitters), anchor, user)
