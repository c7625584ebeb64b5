"""Room, waveguide and node coordinates, and the distances every link uses.

Coordinates follow the room frame: origin at the centre of the feed-point wall
on the floor, ``x`` along the waveguides (``0..L``), ``y`` across the room
(``-D/2..D/2``), ``z`` up.  Pinching antennas sit on the ceiling at ``z = H``;
the backscatter device (BD) and the eavesdropper lie on the floor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

Point = tuple[float, float, float]

DEFAULT_HEIGHT = 3.0


def distance(p: Point, q: Point) -> float:
    """Euclidean distance between two 3-D points."""
    return math.dist(p, q)


@dataclass(frozen=True)
class Room:
    length: float
    width: float
    height: float = DEFAULT_HEIGHT

    def __post_init__(self):
        for name in ("length", "width", "height"):
            if not getattr(self, name) > 0:
                raise ValueError(f"room {name} must be positive, got {getattr(self, name)!r}")

    def contains_floor_point(self, p: Point) -> bool:
        x, y, z = p
        half = self.width / 2
        return 0.0 <= x <= self.length and -half <= y <= half and z == 0.0


@dataclass(frozen=True)
class WaveguidePair:
    """Lateral offsets of the transmit and receive waveguides.

    Both feed points sit at ``x = 0`` on the ceiling.
    """

    y_t: float
    y_r: float


@dataclass(frozen=True)
class NodeLayout:
    bd: Point
    eve_estimate: Point
    tpa_x: float
    rpa_x: float


class LinkDistances(NamedTuple):
    d_fT_pT: float
    d_pT_b: float
    d_b_pR: float
    d_pR_fR: float
    d_b_e_est: float
    d_pT_e_est: float


@dataclass(frozen=True)
class Scenario:
    room: Room
    waveguides: WaveguidePair
    layout: NodeLayout

    def __post_init__(self):
        room, wg, lay = self.room, self.waveguides, self.layout
        half = room.width / 2
        for name, y in (("y_t", wg.y_t), ("y_r", wg.y_r)):
            if not -half <= y <= half:
                raise ValueError(f"waveguide offset {name}={y} outside [-{half}, {half}]")
        for name, p in (("bd", lay.bd), ("eve_estimate", lay.eve_estimate)):
            if len(p) != 3 or not room.contains_floor_point(tuple(p)):
                raise ValueError(f"{name}={p} is not a floor point inside the room")
        for name, x in (("tpa_x", lay.tpa_x), ("rpa_x", lay.rpa_x)):
            if not 0.0 <= x <= room.length:
                raise ValueError(f"{name}={x} outside [0, {room.length}]")

    # Antenna and feed coordinates
    @property
    def tpa(self) -> Point:
        return (self.layout.tpa_x, self.waveguides.y_t, self.room.height)

    @property
    def rpa(self) -> Point:
        return (self.layout.rpa_x, self.waveguides.y_r, self.room.height)

    @property
    def feed_t(self) -> Point:
        return (0.0, self.waveguides.y_t, self.room.height)

    @property
    def feed_r(self) -> Point:
        return (0.0, self.waveguides.y_r, self.room.height)

    def with_tpa(self, x: float) -> Scenario:
        return replace(self, layout=replace(self.layout, tpa_x=float(x)))


def link_distances(scenario: Scenario) -> LinkDistances:
    lay = scenario.layout
    tpa, rpa = scenario.tpa, scenario.rpa
    return LinkDistances(
        d_fT_pT=distance(scenario.feed_t, tpa),
        d_pT_b=distance(tpa, lay.bd),
        d_b_pR=distance(lay.bd, rpa),
        d_pR_fR=distance(rpa, scenario.feed_r),
        d_b_e_est=distance(lay.bd, lay.eve_estimate),
        d_pT_e_est=distance(tpa, lay.eve_estimate),
    )


def tpa_bd_distance(tpa_x, scenario: Scenario):
    """TPA-to-BD distance as a function of the TPA position (array friendly)."""
    xb, yb, _ = scenario.layout.bd
    offset2 = (scenario.waveguides.y_t - yb) ** 2 + scenario.room.height ** 2
    return ((tpa_x - xb) ** 2 + offset2) ** 0.5
