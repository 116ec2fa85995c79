"""Emission coordinates and the echo data collected at each station.

Station naming follows the emitter order of the constellation: in 3D the
stations are ``E, Etilde, Ehat`` (indices 0, 1, 2), in 4D ``E, Ebar,
Etilde, Ehat`` (0..3).  A station is the event at which an emitter receives
light from the event ``e`` being localized.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry, observation
from .constellation import message_coordinate, stamp, unstamp
from .errors import (
    ConvergenceError,
    EchoAssemblyError,
    NumericalError,
    ValidationError,
)

STATION_NAMES = {
    2: ("E1", "E2"),
    3: ("E", "Etilde", "Ehat"),
    4: ("E", "Ebar", "Etilde", "Ehat"),
}


def _emitters(c):
    return c.emitters if hasattr(c, "emitters") else tuple(c)


def emission_coordinates(emitters, x):
    """Stamps received at ``x`` from each emitter.

    Each stamp is broadcast from the emitter event on the past light cone
    of ``x``.

    Parameters
    ----------
    emitters : Constellation or sequence of Emitter
    x : array_like

    Returns
    -------
    ndarray
        The d-position of ``x`` in the emission grid.
    """
    x = geometry.as_event(x)
    out = np.empty(len(_emitters(emitters)))
    for i, em in enumerate(_emitters(emitters)):
        out[i] = stamp(em, geometry.solve_null_past(em.worldline, x))
    return out


def emission_events(emitters, p):
    """Emitter events broadcasting the stamps ``p``."""
    ems = _emitters(emitters)
    p = np.asarray(p, dtype=float)
    if p.size != len(ems):
        raise ValidationError(f"position has {p.size} stamps for {len(ems)} emitters")
    return np.array([em.worldline.point(unstamp(em, t)) for em, t in zip(ems, p)])


def cartesian_of_emission(emitters, p, guess=None, tol=1e-10):
    """Event whose emission coordinates are ``p``.

    The event lies on the future light cones of the d emission events.  When
    two such events exist, ``guess`` selects the nearer one.

    Raises
    ------
    ConvergenceError
        If ``p`` is not attainable or the check ``emission_coordinates = p``
        fails at ``tol`` (relative to the stamp magnitude).
    """
    p = np.asarray(p, dtype=float)
    apexes = emission_events(emitters, p)
    x = geometry.intersect_cones(apexes, "future", guess)
    back = emission_coordinates(emitters, x)
    if np.max(np.abs(back - p)) > tol * max(1.0, np.max(np.abs(p))):
        raise ConvergenceError(f"position {p} is not attainable (round trip gives {back})")
    return x


def grid_change(source, target, p, guess=None):
    """Position ``p`` in the grid of ``source`` expressed in the grid of ``target``."""
    if _emitters(source) == _emitters(target):
        return np.asarray(p, dtype=float).copy()
    return emission_coordinates(target, cartesian_of_emission(source, p, guess))


def five_grids(emitters):
    """The emitter subsets of size ``len - 1``, in lexicographic order."""
    ems = tuple(emitters)
    return [tuple(c) for c in itertools.combinations(ems, len(ems) - 1)]


# -- echo assembly --------------------------------------------------------------

def _solve(edge, fn, worldline, x):
    try:
        return fn(worldline, x)
    except NumericalError as exc:
        raise EchoAssemblyError(edge, exc) from exc


def _reception(em, e, label):
    s = _solve((label, "e"), geometry.solve_null_future, em.worldline, e)
    return s, em.worldline.point(s)


def _bright(em, apex, label, src_label):
    s = _solve((label, src_label), geometry.solve_null_past, em.worldline, apex)
    return s, em.worldline.point(s)


def _position(constellation, x, label):
    try:
        return emission_coordinates(constellation, x)
    except NumericalError as exc:
        raise EchoAssemblyError((label, "grid"), exc) from exc


def _direction(tetrad, src, label, src_label):
    try:
        return observation.incoming_direction(tetrad, src)
    except NumericalError as exc:
        raise EchoAssemblyError((label, src_label), exc) from exc


@dataclass(frozen=True, eq=False)
class EchoRecord3D:
    """Data gathered at one station of the 3D protocol.

    Attributes
    ----------
    station : int
        0, 1, 2 for ``E, Etilde, Ehat``.
    emitter_id : str
    primary_stamp : float
        The station's own stamp (``tau_1`` at ``E``).
    neighbor_ids : (str, str)
        Emitters seen at ``[0]`` and ``[inf]`` of the station's frame.
    neighbor_positions : ndarray, shape (2, 3)
        3-positions of the two neighbour bright events.
    fifth_stamp : float
        Anchor stamp of the bright event seen at ``[1]``.
    reading : ndarray
        Normalized ProjPoint1 of ``e`` in the bright-point frame.
    raw : dict
        Raw ``HemisphereReading`` per bright point (``'zero'``, ``'inf'``,
        ``'one'``, ``'e'``).
    signature : str
        Opaque event signature carried through unchanged.
    apex : ndarray
        Cartesian station event (diagnostic only).
    user_position : ndarray or None
        3-position of the user event receiving this record.
    """

    station: int
    emitter_id: str
    primary_stamp: float
    neighbor_ids: tuple
    neighbor_positions: np.ndarray
    fifth_stamp: float
    reading: np.ndarray
    raw: dict = field(repr=False)
    signature: str = ""
    apex: Optional[np.ndarray] = field(default=None, repr=False)
    user_position: Optional[np.ndarray] = None

    @property
    def targets(self):
        """Stamps attached to ``[0]``, ``[inf]`` and ``[1]``."""
        k = self.station
        return (self.neighbor_positions[0, k], self.neighbor_positions[1, k], self.fifth_stamp)

    @property
    def apex_position(self):
        """3-position of the station event, read off the echo stamps."""
        k = self.station
        p = np.empty(3)
        p[k] = self.primary_stamp
        p[(k + 1) % 3] = self.neighbor_positions[0, (k + 1) % 3]
        p[(k + 2) % 3] = self.neighbor_positions[1, (k + 2) % 3]
        return p


@dataclass(frozen=True, eq=False)
class StationRecord4D:
    """Data gathered at one station of the 4D protocol.

    ``frame_ids`` lists the emitters whose bright points are sent to
    ``[1:0:0]``, ``[0:1:0]``, ``[0:0:1]``; the anchor's goes to ``[1:1:1]``.
    ``reference_pairs[i]`` is the stamp pair (coordinates ``pair``) of the
    i-th of those bright events.
    """

    station: int
    emitter_id: str
    pair: tuple
    frame: tuple
    frame_ids: tuple
    neighbor_positions: np.ndarray
    fifth_stamp: float
    reading: np.ndarray
    raw: dict = field(repr=False)
    primary_stamp: float = 0.0
    signature: str = ""
    apex: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def reference_pairs(self):
        return self.neighbor_positions[:, list(self.pair)]

    @property
    def apex_position(self):
        """4-position of the station event, read off the echo stamps."""
        p = np.empty(4)
        p[self.station] = self.primary_stamp
        for i, j in enumerate(self.frame):
            p[j] = self.neighbor_positions[i, j]
        return p


@dataclass(frozen=True, eq=False)
class DataPoint:
    """Every record collected for one event, plus its anchor stamp.

    ``anchor_stamp`` is the fifth coordinate of ``e`` (message function);
    ``None`` when the scenario has no anchoring satellite.
    """

    records: tuple
    anchor_stamp: Optional[float]
    signature: str = ""

    @property
    def dim(self):
        return len(self.records)

    def stamps(self):
        """Flat list of ``(name, value)`` for every broadcast stamp."""
        out = []
        for r in self.records:
            tag = f"s{r.station}"
            out.append((f"{tag}.primary", r.primary_stamp))
            for i, row in enumerate(r.neighbor_positions):
                for j, v in enumerate(row):
                    out.append((f"{tag}.neighbor{i}[{j}]", float(v)))
            out.append((f"{tag}.fifth", r.fifth_stamp))
        if self.anchor_stamp is not None:
            out.append(("anchor", self.anchor_stamp))
        return out


def _check_dim(constellation, d):
    if constellation.dim != d:
        raise ValidationError(f"need a {d}-dimensional constellation, got {constellation.dim}")
    if constellation.anchor is None:
        raise ValidationError("the localizing protocol needs an anchoring satellite")


def _station_core(constellation, e, k, frame):
    """Shared part of the 3D/4D assembly at station ``k``.

    Returns the apex, its parameter, the tetrad, bright events of the
    ``frame`` emitters and of the anchor, and their positions and directions.
    """
    names = STATION_NAMES[constellation.dim]
    em = constellation.emitters[k]
    label = names[k]
    s_k, apex = _reception(em, e, label)
    tetrad = observation.tetrad_at(em, s_k)
    positions, dirs = [], []
    for j in frame:
        src = constellation.emitters[j]
        _, ev = _bright(src, apex, label, f"{names[j]}'")
        positions.append(_position(constellation, ev, f"{names[j]}'"))
        dirs.append(_direction(tetrad, ev, label, f"{names[j]}'"))
    anchor = constellation.anchor
    s_a = _solve((label, f"{anchor.id}'"), geometry.solve_null_past, anchor.worldline, apex)
    dirs.append(_direction(tetrad, anchor.worldline.point(s_a), label, f"{anchor.id}'"))
    dirs.append(_direction(tetrad, e, label, "e"))
    return apex, s_k, np.array(positions), anchor.stamp(s_a), dirs


def assemble_echo_3d(constellation, e, signature=""):
    """The three station records ``d_E``, ``d_Etilde``, ``d_Ehat`` for ``e``.

    Station k sees emitter ``k+1`` at ``[0]``, emitter ``k+2`` at ``[inf]``
    (indices mod 3) and the anchor at ``[1]``.

    Raises
    ------
    EchoAssemblyError
        Naming the signal that could not be solved.
    """
    _check_dim(constellation, 3)
    e = geometry.as_event(e, 3)
    records = []
    for k in range(3):
        frame = ((k + 1) % 3, (k + 2) % 3)
        apex, s_k, positions, fifth, dirs = _station_core(constellation, e, k, frame)
        try:
            reading = observation.normalize_reading_rp1(dirs[3], dirs[:3])
        except NumericalError as exc:
            raise EchoAssemblyError((STATION_NAMES[3][k], "frame"), exc) from exc
        raw = dict(zip(("zero", "inf", "one", "e"), map(observation.chart_reading, dirs)))
        user_pos = None
        if constellation.user is not None:
            s_u = _solve(("U", STATION_NAMES[3][k]), geometry.solve_null_future,
                         constellation.user, apex)
            user_pos = _position(constellation, constellation.user.point(s_u), "U")
        em = constellation.emitters[k]
        records.append(EchoRecord3D(
            station=k,
            emitter_id=em.id,
            primary_stamp=stamp(em, s_k),
            neighbor_ids=tuple(constellation.emitters[j].id for j in frame),
            neighbor_positions=positions,
            fifth_stamp=fifth,
            reading=reading,
            raw=raw,
            signature=signature,
            apex=apex,
            user_position=user_pos,
        ))
    return tuple(records)


def assemble_data_point_3d(constellation, e, signature=""):
    records = assemble_echo_3d(constellation, e, signature)
    return DataPoint(records, message_coordinate(constellation.anchor, e), signature)


@dataclass(frozen=True)
class Attribution:
    """Which stamps and which frame each 4D station uses.

    ``pairs[k]`` are the two coordinates station k outputs, ``frames[k]`` the
    emitters sent to ``[1:0:0]``, ``[0:1:0]``, ``[0:0:1]`` and ``assembly[c]``
    the station whose output supplies coordinate c of the final 4-position.
    """

    pairs: tuple
    frames: tuple
    assembly: tuple

    def __post_init__(self):
        if len(self.pairs) != 4 or len(self.frames) != 4 or len(self.assembly) != 4:
            raise ValidationError("attribution needs four stations")
        count = [0, 0, 0, 0]
        for k, (p, f) in enumerate(zip(self.pairs, self.frames)):
            if len(set(p)) != 2 or sorted(f) != sorted(set(range(4)) - {k}):
                raise ValidationError(f"bad attribution row for station {k}")
            for c in p:
                count[c] += 1
        if count != [2, 2, 2, 2]:
            raise ValidationError("each coordinate must be output by exactly two stations")
        for c, k in enumerate(self.assembly):
            if c not in self.pairs[k]:
                raise ValidationError(f"station {k} does not output coordinate {c}")

    def permuted(self, perm):
        """The attribution obtained by relabelling emitters with ``perm``."""
        perm = tuple(perm)
        inv = [perm.index(i) for i in range(4)]
        pairs = [None] * 4
        frames = [None] * 4
        for k in range(4):
            pairs[perm[k]] = tuple(perm[c] for c in self.pairs[k])
            frames[perm[k]] = tuple(perm[j] for j in self.frames[k])
        assembly = tuple(perm[self.assembly[inv[c]]] for c in range(4))
        return Attribution(tuple(pairs), tuple(frames), assembly)


DEFAULT_ATTRIBUTION = Attribution(
    pairs=((0, 1), (1, 2), (2, 3), (3, 0)),
    frames=((1, 2, 3), (0, 3, 2), (3, 0, 1), (2, 1, 0)),
    assembly=(0, 0, 2, 2),
)


def assemble_station_records_4d(constellation, e, attribution=DEFAULT_ATTRIBUTION, signature=""):
    """Station records at ``E, Ebar, Etilde, Ehat`` and the data point of ``e``.

    Returns
    -------
    records : tuple of StationRecord4D
    data_point : DataPoint
    """
    _check_dim(constellation, 4)
    e = geometry.as_event(e, 4)
    records = []
    for k in range(4):
        frame = attribution.frames[k]
        apex, s_k, positions, fifth, dirs = _station_core(constellation, e, k, frame)
        try:
            reading = observation.normalize_reading_rp2(dirs[4], dirs[:4])
        except NumericalError as exc:
            raise EchoAssemblyError((STATION_NAMES[4][k], "frame"), exc) from exc
        raw = dict(zip(("x", "y", "z", "one", "e"), map(observation.chart_reading, dirs)))
        em = constellation.emitters[k]
        records.append(StationRecord4D(
            station=k,
            emitter_id=em.id,
            pair=tuple(attribution.pairs[k]),
            frame=tuple(frame),
            frame_ids=tuple(constellation.emitters[j].id for j in frame),
            neighbor_positions=positions,
            fifth_stamp=fifth,
            reading=reading,
            raw=raw,
            primary_stamp=stamp(em, s_k),
            signature=signature,
            apex=apex,
        ))
    records = tuple(records)
    return records, DataPoint(records, message_coordinate(constellation.anchor, e), signature)


def assemble_echo_2d(constellation, e):
    """Emission positions of the two reception events of ``e``'s light.

    Returns ``(p_E1, p_E2)`` where ``E_i`` lies on emitter i's worldline.
    """
    if constellation.dim != 2:
        raise ValidationError("the 2D protocol needs a 1+1 constellation")
    e = geometry.as_event(e, 2)
    out = []
    for k, em in enumerate(constellation.emitters):
        _, apex = _reception(em, e, STATION_NAMES[2][k])
        out.append(_position(constellation, apex, STATION_NAMES[2][k]))
    return tuple(out)
