"""Four-phase fixed-cycle signal plans with a single adjustable split.

Each intersection runs a repeating cycle of four green phases separated by
yellow + all-red clearance:

    P1  north-south straight/right
    P2  north-south left
    P3  east-west straight/right
    P4  east-west left

The split ``s`` is the north-south green total, P1 + P2.  P2 and P4 are the
fixed left-turn duration; clearances sit outside the split, so

    P1 = s - left_phase          P3 = cycle - 4*(yellow+all_red) - 2*left_phase - P1

With the default constants (cycle 100, left 8, yellow 2, all-red 2) this is
P1 = s - 8 and P3 = 76 - s.  Split changes latch at the first cycle boundary
at or after the request, never mid-cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from .netmodel import EW, NS, SN, WE, Turn

P1, P2, P3, P4 = 0, 1, 2, 3
PHASE_NAMES = ("P1", "P2", "P3", "P4")
_CLEARANCE = ("Y", "AR")


@dataclass(frozen=True)
class Movement:
    """A served traffic movement: approach direction plus turn."""

    intersection: int
    direction: str
    turn: Turn

    @property
    def phase(self) -> int:
        return serving_phase(self.direction, self.turn)


def serving_phase(direction: str, turn: Turn) -> int:
    if direction in (NS, SN):
        return P2 if turn is Turn.LEFT else P1
    if direction in (EW, WE):
        return P4 if turn is Turn.LEFT else P3
    raise ValueError(f"unknown direction {direction}")


@dataclass(frozen=True)
class SignalPlan:
    cycle: int = 100
    split: int = 50
    left_phase: int = 8
    yellow: int = 2
    all_red: int = 2
    offset: int = 0
    split_lb: int = 30
    split_ub: int = 70

    def __post_init__(self):
        if min(self.cycle, self.left_phase, self.yellow, self.all_red) <= 0:
            raise ValueError("signal durations must be positive")
        if not self.split_lb <= self.split <= self.split_ub:
            raise ValueError(f"split {self.split} outside [{self.split_lb}, {self.split_ub}]")
        for s in (self.split_lb, self.split_ub):
            p = self._durations(s)
            if p[P1] <= 0 or p[P3] <= 0:
                raise ValueError(f"split bound {s} leaves a non-positive phase: {p}")

    def _durations(self, split: int) -> tuple[int, int, int, int]:
        p1 = split - self.left_phase
        p2 = p4 = self.left_phase
        p3 = self.cycle - 4 * (self.yellow + self.all_red) - p1 - p2 - p4
        return (p1, p2, p3, p4)

    @property
    def durations(self) -> tuple[int, int, int, int]:
        return self._durations(self.split)

    def phase_window(self, phase: int, split: int | None = None) -> tuple[int, int]:
        """(start offset within cycle, duration) of a green phase."""
        d = self._durations(self.split if split is None else split)
        clear = self.yellow + self.all_red
        start = sum(d[:phase]) + phase * clear
        return start, d[phase]


def phase_timeline(plan: SignalPlan, cycle_index: int) -> list[tuple[str, int, int]]:
    """The 12 intervals (P1,Y,AR,P2,Y,AR,P3,Y,AR,P4,Y,AR) of one cycle.

    Intervals tile [offset + k*C, offset + (k+1)*C) exactly.
    """
    if cycle_index < 0:
        raise ValueError("cycle_index must be non-negative")
    t = plan.offset + cycle_index * plan.cycle
    out = []
    for phase in (P1, P2, P3, P4):
        dur = plan.durations[phase]
        out.append((PHASE_NAMES[phase], t, t + dur))
        t += dur
        for kind, d in zip(_CLEARANCE, (plan.yellow, plan.all_red)):
            out.append((kind, t, t + d))
            t += d
    return out


def apply_split(plan: SignalPlan, delta: int) -> SignalPlan:
    """New plan with the split moved by delta and clamped to its bounds."""
    s = max(plan.split_lb, min(plan.split_ub, plan.split + delta))
    return replace(plan, split=s)


def is_green(plan: SignalPlan, movement: Movement, t: float) -> bool:
    """True iff t lies inside the phase serving the movement (not clearance)."""
    k = _cycle_index(plan, t)
    if k < 0:
        return False
    rel = t - plan.offset - k * plan.cycle
    start, dur = plan.phase_window(movement.phase)
    return start <= rel < start + dur


def green_start_before(plan: SignalPlan, movement: Movement, t: float) -> int | None:
    """Start of the most recent serving green at or before t, or None."""
    k = _cycle_index(plan, t)
    start, _ = plan.phase_window(movement.phase)
    while k >= 0:
        s = plan.offset + k * plan.cycle + start
        if s <= t:
            return s
        k -= 1
    return None


def green_start_after(plan: SignalPlan, movement: Movement, t: float) -> int:
    """Start of the first serving green strictly after t."""
    k = max(0, _cycle_index(plan, t))
    start, _ = plan.phase_window(movement.phase)
    while True:
        s = plan.offset + k * plan.cycle + start
        if s > t:
            return s
        k += 1


def _cycle_index(plan: SignalPlan, t: float) -> int:
    return int((t - plan.offset) // plan.cycle)


@lru_cache(maxsize=None)
def green_lookup(cycle: int, left_phase: int, yellow: int, all_red: int,
                 split: int) -> tuple[int, ...]:
    """Per-second table over one cycle: serving phase id, or -1 in clearance.

    Requires integer signal constants; this is the simulator's fast path.
    """
    plan = SignalPlan(cycle=cycle, split=split, left_phase=left_phase,
                      yellow=yellow, all_red=all_red,
                      split_lb=split, split_ub=split)
    table = [-1] * cycle
    for phase in (P1, P2, P3, P4):
        start, dur = plan.phase_window(phase)
        for x in range(start, start + dur):
            table[x] = phase
    return tuple(table)


class PlanSchedule:
    """A signal plan plus its split history over cycles.

    The simulator mutates splits through ``set_split``; sensing queries green
    starts against the history so estimates stay correct across changes.
    """

    def __init__(self, plan: SignalPlan):
        self.base = plan
        self._changes: list[tuple[int, int]] = [(0, plan.split)]

    def set_split(self, split: int, at_time: float) -> int:
        """Latch a new split from the first cycle boundary >= at_time.

        Returns the clamped split that will take effect.
        """
        split = max(self.base.split_lb, min(self.base.split_ub, split))
        k = int(-((at_time - self.base.offset) // -self.base.cycle))  # ceiling
        if k < 0:
            k = 0
        last_k, _ = self._changes[-1]
        if k < last_k:
            raise ValueError("split changes must be requested in time order")
        if k == last_k:
            self._changes[-1] = (k, split)
        else:
            self._changes.append((k, split))
        return split

    def adjust_split(self, delta: int, at_time: float) -> int:
        """Cumulative +/-delta on the split in force at (or after) at_time."""
        k = int(-((at_time - self.base.offset) // -self.base.cycle))
        return self.set_split(self.split_at_cycle(max(k, 0)) + delta, at_time)

    def split_at_cycle(self, k: int) -> int:
        value = self._changes[0][1]
        for ck, s in self._changes:
            if ck > k:
                break
            value = s
        return value

    def split_at(self, t: float) -> int:
        return self.split_at_cycle(max(0, _cycle_index(self.base, t)))

    def plan_at_cycle(self, k: int) -> SignalPlan:
        return replace(self.base, split=self.split_at_cycle(k))

    def is_green(self, movement: Movement, t: float) -> bool:
        return is_green(self.plan_at_cycle(_cycle_index(self.base, t)), movement, t)

    def green_start_before(self, movement: Movement, t: float) -> int | None:
        k = _cycle_index(self.base, t)
        while k >= 0:
            start, _ = self.plan_at_cycle(k).phase_window(movement.phase)
            s = self.base.offset + k * self.base.cycle + start
            if s <= t:
                return s
            k -= 1
        return None

    def green_start_after(self, movement: Movement, t: float) -> int:
        k = max(0, _cycle_index(self.base, t))
        while True:
            start, _ = self.plan_at_cycle(k).phase_window(movement.phase)
            s = self.base.offset + k * self.base.cycle + start
            if s > t:
                return s
            k += 1
