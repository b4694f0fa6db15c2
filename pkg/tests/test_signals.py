import pytest

from atsclab.netmodel import EW, NS, SN, WE, Turn
from atsclab.signals import (Movement, PlanSchedule, SignalPlan, apply_split,
                             green_start_after, green_start_before, is_green,
                             phase_timeline, serving_phase)

NS_STRAIGHT = Movement(0, NS, Turn.STRAIGHT)
EW_LEFT = Movement(0, EW, Turn.LEFT)
WE_STRAIGHT = Movement(0, WE, Turn.STRAIGHT)


def test_movement_phase_assignment():
    assert serving_phase(NS, Turn.STRAIGHT) == 0
    assert serving_phase(SN, Turn.RIGHT) == 0
    assert serving_phase(NS, Turn.LEFT) == 1
    assert serving_phase(EW, Turn.STRAIGHT) == 2
    assert serving_phase(WE, Turn.RIGHT) == 2
    assert serving_phase(WE, Turn.LEFT) == 3


def test_timeline_at_split_50():
    plan = SignalPlan(split=50)
    assert phase_timeline(plan, 0) == [
        ("P1", 0, 42), ("Y", 42, 44), ("AR", 44, 46),
        ("P2", 46, 54), ("Y", 54, 56), ("AR", 56, 58),
        ("P3", 58, 84), ("Y", 84, 86), ("AR", 86, 88),
        ("P4", 88, 96), ("Y", 96, 98), ("AR", 98, 100),
    ]
    shifted = phase_timeline(plan, 2)
    assert shifted[0] == ("P1", 200, 242)
    assert shifted[-1] == ("AR", 298, 300)


def test_timeline_respects_offset():
    plan = SignalPlan(split=50, offset=7)
    assert phase_timeline(plan, 0)[0] == ("P1", 7, 49)


@pytest.mark.parametrize("split,p1,p3", [(30, 22, 46), (50, 42, 26), (70, 62, 6)])
def test_phase_durations(split, p1, p3):
    d = SignalPlan(split=split).durations
    assert d[0] == p1 and d[2] == p3
    assert d[1] == d[3] == 8


@pytest.mark.parametrize("split", range(30, 71, 2))
def test_cycle_tiles_exactly(split):
    plan = SignalPlan(split=split)
    tl = phase_timeline(plan, 0)
    assert tl[0][1] == 0 and tl[-1][2] == plan.cycle
    for (_, _, end), (_, start, _) in zip(tl, tl[1:]):
        assert end == start, "intervals must be contiguous and disjoint"
    green = sum(e - s for kind, s, e in tl if kind.startswith("P"))
    clearance = sum(e - s for kind, s, e in tl if not kind.startswith("P"))
    assert green == 84 and clearance == 16
    assert all(e > s for _, s, e in tl)


def test_apply_split_examples():
    plan = SignalPlan(split=50)
    assert apply_split(plan, 2).split == 52
    assert apply_split(SignalPlan(split=70), 2).split == 70  # upper clamp
    assert apply_split(SignalPlan(split=30), -2).split == 30  # lower clamp


def test_apply_split_stays_bounded_and_reverses():
    plan = SignalPlan(split=50)
    s = plan
    deltas = [2, 2, -2, 2, -2, -2, 2] * 30
    for d in deltas:
        s = apply_split(s, d)
        assert 30 <= s.split <= 70
    for split in range(32, 69, 2):
        p = SignalPlan(split=split)
        assert apply_split(apply_split(p, 2), -2).split == split


def test_invalid_plans_rejected():
    with pytest.raises(ValueError):
        SignalPlan(split=20)  # below bound
    with pytest.raises(ValueError):
        SignalPlan(split_lb=8, split=40)  # P1 would hit zero at the bound
    with pytest.raises(ValueError):
        SignalPlan(yellow=0)


def test_is_green_examples():
    plan = SignalPlan(split=50)
    assert is_green(plan, NS_STRAIGHT, 10)
    assert not is_green(plan, NS_STRAIGHT, 43)  # yellow after P1
    assert is_green(plan, EW_LEFT, 90)          # P4 spans [88, 96)
    assert not is_green(plan, NS_STRAIGHT, 99)


def test_green_start_queries():
    plan = SignalPlan(split=50)
    assert green_start_before(plan, NS_STRAIGHT, 150) == 100
    assert green_start_before(plan, NS_STRAIGHT, 41) == 0
    assert green_start_after(plan, NS_STRAIGHT, 41) == 100
    assert green_start_after(plan, NS_STRAIGHT, 0) == 100
    assert green_start_before(plan, WE_STRAIGHT, 150) == 58
    assert green_start_after(plan, WE_STRAIGHT, 150) == 158


def test_green_start_before_first_green_is_none():
    plan = SignalPlan(split=50)
    assert green_start_before(plan, WE_STRAIGHT, 10) is None  # P3 starts at 58
    assert green_start_before(plan, NS_STRAIGHT, 0) == 0


@pytest.mark.parametrize("t", range(0, 700, 13))
def test_phase_start_is_its_own_most_recent_start(t):
    plan = SignalPlan(split=46, offset=5)
    for mv in (NS_STRAIGHT, EW_LEFT, WE_STRAIGHT):
        after = green_start_after(plan, mv, t)
        assert green_start_before(plan, mv, after) == after


class TestPlanSchedule:
    def test_latch_at_next_cycle_boundary(self):
        sched = PlanSchedule(SignalPlan(split=50))
        assert sched.set_split(60, at_time=150) == 60
        assert sched.split_at(199) == 50
        assert sched.split_at(200) == 60

    def test_request_exactly_on_boundary_takes_effect_that_cycle(self):
        sched = PlanSchedule(SignalPlan(split=50))
        sched.set_split(52, at_time=200)
        assert sched.split_at(200) == 52
        assert sched.split_at(199) == 50

    def test_adjust_is_cumulative_and_clamped(self):
        sched = PlanSchedule(SignalPlan(split=68))
        assert sched.adjust_split(2, at_time=0) == 70
        assert sched.adjust_split(2, at_time=100) == 70  # clamped
        assert sched.adjust_split(-2, at_time=200) == 68

    def test_green_starts_across_split_change(self):
        sched = PlanSchedule(SignalPlan(split=50))
        sched.set_split(60, at_time=150)  # effective from t = 200
        mv = Movement(0, WE, Turn.STRAIGHT)  # P3 starts at split + 8
        assert sched.green_start_before(mv, 199) == 158
        assert sched.green_start_after(mv, 160) == 268  # 200 + 68
        assert sched.green_start_before(mv, 290) == 268
        assert sched.is_green(mv, 270)
        assert not sched.is_green(mv, 262)  # would be green under split 50

    def test_out_of_order_requests_rejected(self):
        sched = PlanSchedule(SignalPlan(split=50))
        sched.set_split(60, at_time=500)
        with pytest.raises(ValueError):
            sched.set_split(52, at_time=100)
