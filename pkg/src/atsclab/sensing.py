"""Queue length and link travel time estimation from event records.

A vehicle counts toward the queue of a link at control time t when it is
bound straight through the downstream intersection and either

  * its record is still open and it entered the link at or before the start
    of the most recent upstream green feeding the link straight through
    (it is a leftover the current platoon release did not produce), or
  * its record is complete, it entered at or before that upstream green
    start, and it exited at or after the start of the next downstream
    straight green after t (it sat through the red between them).

Both green-start references are taken relative to t: the most recent
upstream start at or before t, and the first downstream start strictly
after t.  The reported value is clamped to [0, q_ub]; the raw count is kept
alongside because physical queues may exceed the bound.

Estimates come in two flavors: full-information (every vehicle observable,
used during training) and probe (only a seeded Bernoulli sample of vehicles
observable, scaled by 1/penetration, used for deployment-style evaluation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .mesosim import LinkRecord, RecordStore
from .netmodel import Link, Network, Turn
from .signals import Movement, PlanSchedule

DEFAULT_Q_UB = 50


@dataclass(frozen=True)
class QueueEstimate:
    link: str
    time: float
    value: int            # clamped to [0, q_ub]
    raw: int              # unclamped criteria count
    method: str           # "full" | "probe"
    penetration: float | None = None
    no_reference: bool = False


def upstream_green_start(network: Network, schedules: dict[int, PlanSchedule],
                         link: Link, t: float) -> int | None:
    """Most recent start <= t of the upstream straight phase feeding the link.

    None when the link is fed from a zone (no upstream signal) or t precedes
    the first such green.
    """
    if link.is_entry:
        return None
    mv = Movement(link.src, link.direction, Turn.STRAIGHT)
    return schedules[link.src].green_start_before(mv, t)


def downstream_green_start(network: Network, schedules: dict[int, PlanSchedule],
                           link: Link, t: float) -> int | None:
    """First start > t of the downstream straight phase leaving the link."""
    if link.is_exit:
        return None
    mv = Movement(link.dst, link.direction, Turn.STRAIGHT)
    return schedules[link.dst].green_start_after(mv, t)


def count_queued(records: Iterable[LinkRecord], t_gs_u: float, t_gs_d: float) -> int:
    """Apply the queue criteria to straight-bound records."""
    n = 0
    for rec in records:
        if rec.movement is not Turn.STRAIGHT or rec.t_entry > t_gs_u:
            continue
        if rec.t_exit is None or rec.t_exit >= t_gs_d:
            n += 1
    return n


def true_queue(store: RecordStore, network: Network,
               schedules: dict[int, PlanSchedule], link: str, t: float,
               q_ub: int = DEFAULT_Q_UB) -> QueueEstimate:
    """Full-information queue estimate for one link at time t."""
    lk = network.link_by_name(link)
    gu = upstream_green_start(network, schedules, lk, t)
    gd = downstream_green_start(network, schedules, lk, t)
    if gu is None or gd is None:
        return QueueEstimate(link, t, 0, 0, "full", no_reference=True)
    raw = count_queued(store.records_on(link), gu, gd)
    return QueueEstimate(link, t, _clamp(raw, q_ub), raw, "full")


def probe_queue(store: RecordStore, network: Network,
                schedules: dict[int, PlanSchedule], link: str, t: float,
                penetration: float, probe_set: frozenset[int] | set[int],
                q_ub: int = DEFAULT_Q_UB) -> QueueEstimate:
    """Probe-sampled estimate: count probe vehicles, scale by 1/penetration.

    Scaling rounds half-up before clamping.  Probe membership is decided
    once per vehicle at creation and holds for its whole trip.
    """
    if not 0.0 < penetration <= 1.0:
        raise ValueError(f"penetration must be in (0, 1], got {penetration}")
    lk = network.link_by_name(link)
    gu = upstream_green_start(network, schedules, lk, t)
    gd = downstream_green_start(network, schedules, lk, t)
    if gu is None or gd is None:
        return QueueEstimate(link, t, 0, 0, "probe", penetration, True)
    n_probe = count_queued(
        (r for r in store.records_on(link) if r.vehicle in probe_set), gu, gd)
    raw = math.floor(n_probe / penetration + 0.5)
    return QueueEstimate(link, t, _clamp(raw, q_ub), raw, "probe", penetration)


def queue_from_active(active: dict[int, LinkRecord], t_gs_u: float,
                      probe_set=None, penetration: float = 1.0) -> int:
    """Unclamped live count from a link's open records only.

    When the trace ends at the control time, no completed record can satisfy
    the exit criterion (the next downstream green start lies strictly in the
    future), so the estimate reduces to open records entered at or before the
    upstream green start.  The simulator's control loop uses this path; it is
    exactly ``true_queue`` restricted to a trace ending now.
    """
    n = 0
    if probe_set is None:
        for rec in active.values():
            if rec.movement is Turn.STRAIGHT and rec.t_entry <= t_gs_u:
                n += 1
        return n
    for rec in active.values():
        if (rec.movement is Turn.STRAIGHT and rec.t_entry <= t_gs_u
                and rec.vehicle in probe_set):
            n += 1
    return math.floor(n / penetration + 0.5)


def mean_link_travel_time(store: RecordStore, link: str,
                          window: tuple[float, float]) -> float | None:
    """Mean t_exit - t_entry over completed straight records exiting in the
    window, or None when there is no data."""
    t0, t1 = window
    total = 0.0
    n = 0
    for rec in store.records_on(link):
        if rec.movement is Turn.STRAIGHT and rec.t_exit is not None \
                and t0 <= rec.t_exit < t1:
            total += rec.t_exit - rec.t_entry
            n += 1
    return total / n if n else None


def select_probes(vehicle_ids: Iterable[int], penetration: float,
                  rng) -> frozenset[int]:
    """Seeded Bernoulli(penetration) probe selection, fixed per vehicle."""
    if not 0.0 < penetration <= 1.0:
        raise ValueError(f"penetration must be in (0, 1], got {penetration}")
    return frozenset(v for v in vehicle_ids if rng.random() < penetration)


def estimate_lines(estimates: Iterable[QueueEstimate]):
    """Render estimates as ``link,time,value,method,p`` lines."""
    for e in estimates:
        p = "" if e.penetration is None else repr(e.penetration)
        yield f"{e.link},{e.time:g},{e.value},{e.method},{p}"


def _clamp(raw: int, q_ub: int) -> int:
    return max(0, min(q_ub, raw))
