"""Road network model: signalized grid, boundary zones, and OD demand.

The network is a rows x cols grid of signalized intersections joined by
bidirectional roads.  Every boundary approach of a boundary intersection
carries one traffic zone, which acts as both a source and a sink.  Zones
attach through an entry link (zone -> intersection) and an exit link
(intersection -> zone) with the same geometry as internal links.

Coordinates follow the usual map convention: row 0 is the northern edge,
column 0 the western edge.  Directed links carry a compass tag naming the
direction of travel, e.g. ``NS`` is a southbound link (north to south).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

NS = "NS"  # southbound
SN = "SN"  # northbound
EW = "EW"  # westbound
WE = "WE"  # eastbound

DIRECTIONS = (NS, SN, EW, WE)

# Unit heading vectors, x east / y north.
_HEADING = {NS: (0, -1), SN: (0, 1), EW: (-1, 0), WE: (1, 0)}


class Turn(IntEnum):
    STRAIGHT = 0
    LEFT = 1
    RIGHT = 2

    @property
    def label(self) -> str:
        return _TURN_LABELS[self]


_TURN_LABELS = {Turn.STRAIGHT: "straight", Turn.LEFT: "left", Turn.RIGHT: "right"}
TURN_BY_LABEL = {v: k for k, v in _TURN_LABELS.items()}


class NoRouteError(Exception):
    """Origin and destination are not connected."""


def turn_between(dir_in: str, dir_out: str) -> Turn:
    """Movement made when leaving a ``dir_in`` link onto a ``dir_out`` link."""
    xi, yi = _HEADING[dir_in]
    xo, yo = _HEADING[dir_out]
    if (xi, yi) == (xo, yo):
        return Turn.STRAIGHT
    if (-yi, xi) == (xo, yo):  # 90 degrees counter-clockwise
        return Turn.LEFT
    if (yi, -xi) == (xo, yo):  # 90 degrees clockwise
        return Turn.RIGHT
    raise ValueError(f"u-turn from {dir_in} to {dir_out} is not a movement")


@dataclass(frozen=True)
class Link:
    """One directed road segment.

    Lane layout is the fixed {2 straight, 1 left, 1 right} pattern; it is
    not stored per link because it never varies.
    """

    id: int
    src: int | str  # intersection id or zone id
    dst: int | str
    length: float
    free_flow_speed: float
    direction: str

    def __post_init__(self):
        if self.length <= 0 or self.free_flow_speed <= 0:
            raise ValueError("link length and speed must be positive")

    @property
    def name(self) -> str:
        return f"{self.src}->{self.dst}"

    @property
    def free_flow_time(self) -> float:
        return self.length / self.free_flow_speed

    @property
    def is_entry(self) -> bool:
        return isinstance(self.src, str)

    @property
    def is_exit(self) -> bool:
        return isinstance(self.dst, str)

    @property
    def is_internal(self) -> bool:
        return isinstance(self.src, int) and isinstance(self.dst, int)


@dataclass
class Network:
    rows: int
    cols: int
    intersections: list[int]
    links: list[Link]
    zones: list[str]
    link_by_ends: dict[tuple[int | str, int | str], Link] = field(repr=False)
    out_links: dict[int | str, list[Link]] = field(repr=False)

    @property
    def M(self) -> int:
        return len(self.intersections)

    @property
    def internal_links(self) -> list[Link]:
        return [l for l in self.links if l.is_internal]

    @property
    def L(self) -> int:
        return len(self.internal_links)

    def link(self, src, dst) -> Link:
        return self.link_by_ends[(src, dst)]

    def link_by_name(self, name: str) -> Link:
        src, dst = name.split("->")
        return self.link_by_ends[(_parse_end(src), _parse_end(dst))]

    def node_at(self, row: int, col: int) -> int:
        return row * self.cols + col


def _parse_end(token: str) -> int | str:
    return int(token) if token.lstrip("-").isdigit() else token


def zone_id(side: str, node: int) -> str:
    return f"z_{side}_{node}"


def build_grid(rows: int, cols: int, link_length: float = 300.0,
               free_flow_speed: float = 12.5) -> Network:
    """Build a rows x cols signalized grid with one zone per boundary approach.

    Internal links come first in the link list, so internal link ids are
    contiguous in ``[0, L)``.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    if link_length <= 0 or free_flow_speed <= 0:
        raise ValueError("link length and speed must be positive")

    intersections = list(range(rows * cols))
    links: list[Link] = []
    zones: list[str] = []

    def add(src, dst, direction):
        links.append(Link(len(links), src, dst, link_length, free_flow_speed, direction))

    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                v = r * cols + (c + 1)
                add(u, v, WE)
                add(v, u, EW)
            if r + 1 < rows:
                v = (r + 1) * cols + c
                add(u, v, NS)
                add(v, u, SN)

    # Boundary zones: each boundary side of a boundary intersection gets one
    # zone serving both the entering and the exiting direction.
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if r == 0:
                z = zone_id("n", u)
                zones.append(z)
                add(z, u, NS)
                add(u, z, SN)
            if r == rows - 1:
                z = zone_id("s", u)
                zones.append(z)
                add(z, u, SN)
                add(u, z, NS)
            if c == 0:
                z = zone_id("w", u)
                zones.append(z)
                add(z, u, WE)
                add(u, z, EW)
            if c == cols - 1:
                z = zone_id("e", u)
                zones.append(z)
                add(z, u, EW)
                add(u, z, WE)

    link_by_ends = {(l.src, l.dst): l for l in links}
    out_links: dict[int | str, list[Link]] = {}
    for l in links:
        out_links.setdefault(l.src, []).append(l)

    return Network(rows, cols, intersections, links, zones, link_by_ends, out_links)


@dataclass(frozen=True)
class Route:
    """Ordered link sequence with the turn made at each internal hop.

    ``turns[i]`` is the movement a vehicle makes at the downstream end of
    ``links[i]``; the final link ends at a zone and has no movement.
    """

    links: tuple[Link, ...]
    turns: tuple[Turn, ...]

    def __post_init__(self):
        if len(self.turns) != len(self.links) - 1:
            raise ValueError("route needs one turn per internal hop")

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(l.dst for l in self.links[:-1])


def shortest_route(network: Network, origin_zone: str, dest_zone: str) -> Route:
    """Minimum-hop route between two zones.

    Ties are broken toward the lexicographically smallest intersection-id
    sequence, which makes routing deterministic.
    """
    if origin_zone == dest_zone:
        raise ValueError("origin and destination zones must differ")
    if origin_zone not in network.zones or dest_zone not in network.zones:
        raise ValueError("unknown zone")

    entry = network.out_links[origin_zone][0]
    exit_link = next(l for l in network.links if l.dst == dest_zone)
    a, b = entry.dst, exit_link.src

    if a == b:
        return _finish_route([entry, exit_link])

    # Hop distance from every intersection to b over internal links.
    dist: dict[int, int] = {b: 0}
    frontier = [b]
    while frontier:
        nxt = []
        for v in frontier:
            for l in network.links:
                if l.is_internal and l.dst == v and l.src not in dist:
                    dist[l.src] = dist[v] + 1
                    nxt.append(l.src)
        frontier = nxt
    if a not in dist:
        raise NoRouteError(f"{origin_zone} cannot reach {dest_zone}")

    # Greedy forward walk: among neighbors one hop closer to b, the smallest
    # id yields the lexicographically smallest node sequence.
    path_links = [entry]
    cur = a
    while cur != b:
        step = min(
            (l for l in network.out_links[cur]
             if l.is_internal and dist.get(l.dst) == dist[cur] - 1),
            key=lambda l: l.dst)
        path_links.append(step)
        cur = step.dst
    path_links.append(exit_link)
    return _finish_route(path_links)


def _finish_route(path_links: list[Link]) -> Route:
    turns = tuple(
        turn_between(path_links[i].direction, path_links[i + 1].direction)
        for i in range(len(path_links) - 1)
    )
    return Route(tuple(path_links), turns)


@dataclass(frozen=True)
class ODMatrix:
    """Zone-to-zone demand rates in vehicles per hour over a horizon."""

    rates: dict[tuple[str, str], float]
    horizon: float

    def validate(self, network: Network) -> None:
        for (o, d), rate in self.rates.items():
            if rate < 0:
                raise ValueError(f"negative rate for {o}->{d}")
            if o == d:
                raise ValueError(f"origin equals destination: {o}")
            if o not in network.zones or d not in network.zones:
                raise ValueError(f"unknown zone in pair {o}->{d}")


@dataclass(frozen=True)
class Arrival:
    time: float
    vehicle: int
    route: Route


@dataclass(frozen=True)
class ArrivalSchedule:
    arrivals: tuple[Arrival, ...]

    def __len__(self) -> int:
        return len(self.arrivals)


def generate_demand(network: Network, od: ODMatrix, seed: int) -> ArrivalSchedule:
    """Draw one arrival schedule from the OD matrix.

    Each OD pair is an independent homogeneous Poisson process; the merged
    schedule is a pure function of (network, od, seed).  Routes are static
    shortest-hop paths computed once per pair.
    """
    od.validate(network)
    rng = np.random.default_rng(seed)
    raw: list[tuple[float, int, int]] = []  # (time, pair rank, draw index)
    routes: list[Route] = []
    for rank, (o, d) in enumerate(sorted(od.rates)):
        rate = od.rates[(o, d)]
        if rate <= 0:
            continue
        routes.append(shortest_route(network, o, d))
        pair_rank = len(routes) - 1
        mean_gap = 3600.0 / rate
        t = rng.exponential(mean_gap)
        k = 0
        while t < od.horizon:
            raw.append((t, pair_rank, k))
            t += rng.exponential(mean_gap)
            k += 1
    raw.sort()
    arrivals = tuple(
        Arrival(time, vid, routes[pair_rank])
        for vid, (time, pair_rank, _) in enumerate(raw)
    )
    return ArrivalSchedule(arrivals)
