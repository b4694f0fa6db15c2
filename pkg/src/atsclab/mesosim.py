"""Deterministic discrete-time point-queue traffic engine.

Vehicles traverse links at free-flow speed, join a FIFO queue per
(link, movement) at the stop line, and discharge during the serving green
phase at a calibrated saturation rate.  Queues are vertical: storage is
unbounded and never blocks the upstream link, so heavy overload shows up as
large queue counts rather than spillback.

Time advances in fixed 1-second steps.  Saturation rates are rational
numbers of vehicles per second (numerator/denominator) and service credit is
carried as an integer numerator, so discharge counts are exact: with the
default straight rate of 50/42 veh/s, a saturated straight queue served by a
42 s green discharges exactly 50 vehicles.  Credit accrues only while the
queue is backed up during green and resets whenever service pauses, so green
time with an empty stop line cannot be banked.

Event records (one per vehicle per link) are the substrate for queue
sensing; the engine never inspects them itself.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .netmodel import ArrivalSchedule, Link, Network, Turn
from .signals import Movement, PlanSchedule, green_lookup


class LinkRecord:
    """Entry/exit event of one vehicle on one link.

    ``movement`` is the turn made at the downstream intersection, or None on
    the final (exit-to-zone) hop.  ``t_exit`` is None while the vehicle is
    still on the link.
    """

    __slots__ = ("vehicle", "link", "t_entry", "t_exit", "movement")

    def __init__(self, vehicle: int, link: str, t_entry: float,
                 t_exit: float | None = None, movement: Turn | None = None):
        self.vehicle = vehicle
        self.link = link
        self.t_entry = t_entry
        self.t_exit = t_exit
        self.movement = movement

    def as_tuple(self):
        return (self.vehicle, self.link, self.t_entry, self.t_exit, self.movement)

    def __eq__(self, other):
        return isinstance(other, LinkRecord) and self.as_tuple() == other.as_tuple()

    def __repr__(self):
        return f"LinkRecord{self.as_tuple()!r}"


class RecordStore:
    """Append-only per-link record lists plus an index of open records."""

    def __init__(self):
        self.all: list[LinkRecord] = []
        self.by_link: dict[str, list[LinkRecord]] = {}
        self.active: dict[str, dict[int, LinkRecord]] = {}

    def open(self, vehicle: int, link: str, t_entry: float,
             movement: Turn | None) -> LinkRecord:
        rec = LinkRecord(vehicle, link, t_entry, None, movement)
        self.all.append(rec)
        self.by_link.setdefault(link, []).append(rec)
        self.active.setdefault(link, {})[vehicle] = rec
        return rec

    def close(self, vehicle: int, link: str, t_exit: float) -> LinkRecord:
        rec = self.active[link].pop(vehicle)
        rec.t_exit = t_exit
        return rec

    def records_on(self, link: str) -> list[LinkRecord]:
        return self.by_link.get(link, [])

    def active_on(self, link: str) -> dict[int, LinkRecord]:
        return self.active.get(link, {})

    # Event-log format: vehicle,link,t_entry,t_exit,movement per line, with
    # an empty t_exit for open records and an empty movement on exit hops.
    def event_log_lines(self):
        for rec in self.all:
            exit_s = "" if rec.t_exit is None else _num(rec.t_exit)
            mv = "" if rec.movement is None else rec.movement.label
            yield f"{rec.vehicle},{rec.link},{_num(rec.t_entry)},{exit_s},{mv}"

    def write_event_log(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.event_log_lines():
                fh.write(line + "\n")

    @classmethod
    def read_event_log(cls, path) -> "RecordStore":
        store = cls()
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                veh, link, entry_s, exit_s, mv = line.split(",")
                rec = store.open(int(veh), link, float(entry_s),
                                 TURN_FROM_LABEL.get(mv))
                if exit_s:
                    store.close(rec.vehicle, link, float(exit_s))
        return store


TURN_FROM_LABEL = {t.label: t for t in Turn}


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class SaturationRates:
    """Discharge rates in veh/s as exact rationals, per movement kind.

    The straight rate aggregates both straight lanes.  Defaults calibrate the
    straight movement so one 42 s green (initial split) serves 50 vehicles.
    """

    straight: Fraction = Fraction(50, 42)
    left: Fraction = Fraction(1, 2)
    right: Fraction = Fraction(1, 2)

    def for_turn(self, turn: Turn) -> Fraction:
        return (self.straight, self.left, self.right)[turn]


@dataclass
class StepMetrics:
    """Aggregates over one time window [t0, t1)."""

    t0: int
    t1: int
    total_travel_time: float  # vehicle-seconds of network presence
    vehicles_entered: int
    vehicles_exited: int
    queue_counts: dict[str, int]  # per-link vehicles at the stop line at t1


class _Queue:
    __slots__ = ("link_id", "turn", "next_link", "vehicles", "credit",
                 "rate_num", "rate_den", "last_serve")

    def __init__(self, link_id: int, turn: Turn, next_link: int, rate: Fraction):
        self.link_id = link_id
        self.turn = turn
        self.next_link = next_link
        self.vehicles: list[int] = []  # FIFO, served from the front
        self.credit = 0
        self.rate_num = rate.numerator
        self.rate_den = rate.denominator
        self.last_serve = -2


class Simulation:
    """Single-threaded mesoscopic simulation of one scenario realization.

    Distinct instances share nothing and may run in parallel.
    """

    def __init__(self, network: Network, schedules: dict[int, PlanSchedule],
                 arrivals: ArrivalSchedule, rates: SaturationRates | None = None,
                 check_conservation_every: int = 100):
        self.network = network
        self.schedules = schedules
        self.rates = rates or SaturationRates()
        self.store = RecordStore()
        self.clock = 0
        self._check_every = check_conservation_every

        self._arrivals = arrivals.arrivals
        self._cursor = 0
        self._seq = 0
        # (ready_time, seq, vehicle): in-transit vehicles about to reach the
        # stop line, or about to complete their trip on an exit link.
        self._transit: list[tuple[float, int, int]] = []

        self._routes: dict[int, tuple[tuple[int, ...], tuple[Turn, ...]]] = {}
        self._hop: dict[int, int] = {}

        self._links = network.links
        self._ff = [l.free_flow_time for l in self._links]
        self._is_exit = [l.is_exit for l in self._links]
        self._link_name = [l.name for l in self._links]

        # One queue per feasible (link, downstream movement).
        self._queues: dict[tuple[int, Turn], _Queue] = {}
        buckets: dict[int, dict[int, list[_Queue]]] = {
            n: {p: [] for p in range(4)} for n in network.intersections
        }
        from .netmodel import turn_between
        for link in self._links:
            if link.is_exit:
                continue
            node = link.dst
            for out in network.out_links[node]:
                try:
                    turn = turn_between(link.direction, out.direction)
                except ValueError:
                    continue  # u-turns are not movements
                q = _Queue(link.id, turn, out.id, self.rates.for_turn(turn))
                self._queues[(link.id, turn)] = q
                phase = Movement(node, link.direction, turn).phase
                buckets[node][phase].append(q)
        self._buckets = buckets
        self._nodes = list(network.intersections)
        self._offsets = {n: schedules[n].base.offset for n in self._nodes}
        self._cycles = {n: schedules[n].base.cycle for n in self._nodes}
        self._split_now = {n: schedules[n].split_at_cycle(0) for n in self._nodes}
        self._tables = {
            n: green_lookup(schedules[n].base.cycle, schedules[n].base.left_phase,
                            schedules[n].base.yellow, schedules[n].base.all_red,
                            self._split_now[n])
            for n in self._nodes
        }

        self.injected = 0
        self.exited = 0
        self._present = 0
        # Cumulative arrays indexed by second: position t holds the value
        # accumulated over [0, t).
        self._presence_cum = [0.0]
        self._entered_cum = [0]
        self._exited_cum = [0]

    # -- control -------------------------------------------------------------

    def set_split(self, node: int, split: int, at_time: float | None = None) -> int:
        """Latch a split change; takes effect at the next cycle boundary."""
        t = self.clock if at_time is None else at_time
        return self.schedules[node].set_split(split, t)

    def adjust_split(self, node: int, delta: int, at_time: float | None = None) -> int:
        t = self.clock if at_time is None else at_time
        return self.schedules[node].adjust_split(delta, t)

    # -- stepping ------------------------------------------------------------

    def step(self) -> list[LinkRecord]:
        """Advance one second; returns records opened during the step."""
        t = self.clock
        new_records: list[LinkRecord] = []
        presence_corr = 0.0
        store = self.store
        transit = self._transit

        # Vehicles reaching the stop line, and trips completing on exit links.
        while transit and transit[0][0] <= t:
            ready, _, vid = heapq.heappop(transit)
            hop = self._hop[vid]
            links, turns = self._routes[vid]
            li = links[hop]
            if self._is_exit[li]:
                store.close(vid, self._link_name[li], ready)
                self.exited += 1
                self._present -= 1
                presence_corr -= t - ready  # overshoot booked last step
                del self._hop[vid], self._routes[vid]
            else:
                self._queues[(li, turns[hop])].vehicles.append(vid)

        # Due arrivals enter their first link.
        arrivals = self._arrivals
        n_arr = len(arrivals)
        cursor = self._cursor
        while cursor < n_arr and arrivals[cursor].time < t + 1:
            arr = arrivals[cursor]
            cursor += 1
            vid = arr.vehicle
            links = tuple(l.id for l in arr.route.links)
            self._routes[vid] = (links, arr.route.turns)
            self._hop[vid] = 0
            li = links[0]
            rec = store.open(vid, self._link_name[li], arr.time, arr.route.turns[0])
            new_records.append(rec)
            self._seq += 1
            heapq.heappush(transit, (arr.time + self._ff[li], self._seq, vid))
            self.injected += 1
            self._present += 1
            presence_corr -= arr.time - t  # present only from arr.time on
        self._cursor = cursor

        # Signal-driven discharge.
        for n in self._nodes:
            rel = (t - self._offsets[n]) % self._cycles[n]
            if rel == 0:
                k = (t - self._offsets[n]) // self._cycles[n]
                s = self.schedules[n].split_at_cycle(k)
                if s != self._split_now[n]:
                    self._split_now[n] = s
                    sched = self.schedules[n]
                    self._tables[n] = green_lookup(
                        sched.base.cycle, sched.base.left_phase,
                        sched.base.yellow, sched.base.all_red, s)
            phase = self._tables[n][rel]
            if phase < 0:
                continue
            for q in self._buckets[n][phase]:
                if not q.vehicles:
                    continue
                if q.last_serve != t - 1:
                    q.credit = 0
                q.credit += q.rate_num
                q.last_serve = t
                count = q.credit // q.rate_den
                if not count:
                    continue
                served = q.vehicles[:count]
                del q.vehicles[:count]
                if q.vehicles:
                    q.credit -= count * q.rate_den
                else:
                    q.credit = 0  # idle service capacity is not banked
                li_name = self._link_name[q.link_id]
                nxt = q.next_link
                nxt_name = self._link_name[nxt]
                nxt_exit = self._is_exit[nxt]
                nxt_ready = t + 1 + self._ff[nxt]
                for vid in served:
                    store.close(vid, li_name, t + 1)
                    hop = self._hop[vid] + 1
                    self._hop[vid] = hop
                    turns = self._routes[vid][1]
                    mv = None if nxt_exit else turns[hop]
                    rec = store.open(vid, nxt_name, t + 1, mv)
                    new_records.append(rec)
                    self._seq += 1
                    heapq.heappush(transit, (nxt_ready, self._seq, vid))

        self._presence_cum.append(self._presence_cum[-1] + self._present + presence_corr)
        self._entered_cum.append(self.injected)
        self._exited_cum.append(self.exited)
        self.clock = t + 1

        if self._check_every and self.clock % self._check_every == 0:
            self.check_conservation()
        return new_records

    def run_until(self, t_target: int) -> list[LinkRecord]:
        """Step to t_target; returns all records opened on the way."""
        if t_target < self.clock:
            raise ValueError(f"cannot run backwards to {t_target} from {self.clock}")
        out: list[LinkRecord] = []
        while self.clock < t_target:
            out.extend(self.step())
        return out

    # -- accounting ----------------------------------------------------------

    @property
    def on_network(self) -> int:
        return self._present

    def check_conservation(self) -> None:
        queued = sum(len(q.vehicles) for q in self._queues.values())
        in_transit = len(self._transit)
        if self.injected != self.exited + queued + in_transit:
            raise AssertionError(
                f"vehicle conservation violated at t={self.clock}: "
                f"{self.injected} injected != {self.exited} exited "
                f"+ {queued} queued + {in_transit} in transit")
        if self._present != queued + in_transit:
            raise AssertionError("presence counter out of sync")

    def queue_count(self, link: str) -> int:
        """Vehicles at the stop line of a link right now, all movements."""
        li = self.network.link_by_name(link).id
        return sum(len(q.vehicles) for (lid, _), q in self._queues.items() if lid == li)

    def queue_counts(self) -> dict[str, int]:
        out = {l.name: 0 for l in self._links if not l.is_exit}
        for (lid, _), q in self._queues.items():
            out[self._link_name[lid]] += len(q.vehicles)
        return out

    def snapshot_metrics(self, t0: int, t1: int) -> StepMetrics:
        """Exact window aggregates.

        Presence integrals of vehicles exiting at fractional times are
        attributed to the second in which the exit is processed; with
        integer free-flow times all exits are integer and the window
        arithmetic is exact.
        """
        if not 0 <= t0 <= t1 <= self.clock:
            raise ValueError(f"window [{t0}, {t1}) outside simulated time")
        tt = self._presence_cum[t1] - self._presence_cum[t0]
        entered = self._entered_cum[t1] - self._entered_cum[t0]
        exited = self._exited_cum[t1] - self._exited_cum[t0]
        if t1 == self.clock:
            queues = self.queue_counts()
        else:
            queues = self._queues_from_records(t1)
        return StepMetrics(t0, t1, tt, entered, exited, queues)

    def _queues_from_records(self, t: int) -> dict[str, int]:
        # A vehicle is at the stop line once its free-flow run ends at or
        # before the start of the step that begins at t, matching when the
        # live engine promotes it into the queue.
        out = {l.name: 0 for l in self._links if not l.is_exit}
        ff = {l.name: l.free_flow_time for l in self._links}
        for name in out:
            for rec in self.store.records_on(name):
                if rec.t_entry + ff[name] <= t - 1 and \
                        (rec.t_exit is None or rec.t_exit > t):
                    out[name] += 1
        return out
