import numpy as np
import pytest

from atsclab.rlenv import (EpisodeConfig, EpisodeFinishedError,
                           InvalidActionError, RewardParams, TrafficEnv,
                           action_space_size, decode_action, region_reward)

from conftest import make_spec, zero_demand_spec

TABLE2 = RewardParams(q_lc=10, q_hc=25, q_ub=50, w_cp=10.0, w_t=0.0)


class TestRegionReward:
    @pytest.mark.parametrize("q,expected", [
        (5, 0.0), (10, 0.0), (15, -15.0), (25, -25.0), (30, -300.0),
    ])
    def test_single_link_unit_table(self, q, expected):
        assert region_reward({"a": q}, 0.0, TABLE2) == expected

    def test_sum_over_links(self):
        assert region_reward({"a": 15, "b": 30}, 0.0, TABLE2) == -315.0

    def test_boundary_resolves_to_milder_branch(self):
        # q = q_lc is free flow; q = q_hc is light congestion
        assert region_reward({"a": 10}, 1e9, TABLE2) == 0.0
        assert region_reward({"a": 25}, 0.0, TABLE2) == -25.0
        assert region_reward({"a": 26}, 0.0, TABLE2) == -260.0

    def test_heavy_branch_is_w_cp_jump(self):
        light = region_reward({"a": 25}, 0.0, TABLE2)
        heavy = region_reward({"a": 25.0001}, 0.0, TABLE2)
        assert heavy / light == pytest.approx(10.0, rel=1e-4)

    def test_travel_time_term_enters_per_congested_link(self):
        params = RewardParams(w_t=0.001, w_cp=10.0)
        # one light link: -(q) - (0.001 * t)
        assert region_reward({"a": 15}, 1000.0, params) == -16.0
        # heavy link multiplies both terms
        assert region_reward({"a": 30}, 1000.0, params) == -310.0
        # two congested links each carry the regional t term
        assert region_reward({"a": 15, "b": 12}, 1000.0, params) == -29.0

    def test_travel_time_once_per_region_variant(self):
        params = RewardParams(w_t=0.001, w_cp=10.0, t_once_per_region=True)
        assert region_reward({"a": 15, "b": 12}, 1000.0, params) == -28.0
        assert region_reward({"a": 30, "b": 12}, 1000.0, params) == -322.0

    def test_masked_link_ignores_queue_when_w_t_zero(self):
        params = RewardParams(w_t=0.0, w_l={"a": 0.0})
        for q in (0, 15, 30, 50):
            assert region_reward({"a": q}, 123.0, params) == 0.0

    def test_non_increasing_in_queue(self):
        values = [region_reward({"a": q}, 0.0, TABLE2) for q in range(0, 51)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_free_flow_region_reward_is_zero(self):
        assert region_reward({"a": 3, "b": 9}, 5e6, RewardParams(w_t=1.0)) == 0.0


class TestActions:
    def test_decode_examples(self):
        assert decode_action(0, 9) == (0, -2)
        assert decode_action(4, 9) == (1, 0)
        assert decode_action(26, 9) == (8, 2)

    def test_decode_custom_delta(self):
        assert decode_action(5, 9, delta_s=4) == (1, 4)

    @pytest.mark.parametrize("a", [-1, 27, 100])
    def test_decode_rejects_out_of_range(self, a):
        with pytest.raises(InvalidActionError):
            decode_action(a, 9)

    def test_action_space_is_linear(self):
        assert action_space_size(9) == 27
        assert action_space_size(1) == 3
        assert action_space_size(100) == 300


def test_episode_config_step_identity():
    cfg = EpisodeConfig()
    assert cfg.steps == 144
    assert (cfg.horizon - cfg.warmup) / cfg.control_interval == 144
    with pytest.raises(ValueError):
        EpisodeConfig(warmup=1800, horizon=16250, control_interval=100)


class TestTrafficEnv:
    def test_observation_shape_and_diagonal(self):
        env = TrafficEnv(zero_demand_spec(3, 3))
        obs, _ = env.reset(seed=0)
        assert obs.shape == (9, 9)
        assert np.allclose(np.diag(obs), 0.5)  # (50 - 30) / (70 - 30)
        off = obs - np.diag(np.diag(obs))
        assert np.all(off == 0.0)  # zero demand: every off-diagonal is zero

    def test_observation_zero_pattern_matches_adjacency(self):
        spec = make_spec(rows=3, cols=3, demand=(("z_w_0", "z_e_2", 900.0),))
        env = TrafficEnv(spec)
        obs, _ = env.reset(seed=0)
        env.step(1)
        obs, *_ = env.step(1)
        adjacency = {(l.src, l.dst) for l in env.network.internal_links}
        nz = {(i, j) for i in range(9) for j in range(9)
              if i != j and obs[i, j] != 0.0}
        assert nz <= adjacency

    def test_observation_entries_in_unit_interval(self):
        env = TrafficEnv(make_spec())
        obs, _ = env.reset(seed=1)
        rng = np.random.default_rng(0)
        for _ in range(10):
            obs, *_ = env.step(int(rng.integers(env.action_count)))
            assert np.all(obs >= 0.0) and np.all(obs <= 1.0)

    def test_episode_accounting(self):
        spec = make_spec()
        env = TrafficEnv(spec)
        env.reset(seed=0)
        assert env.sim.clock == 200
        truncated, steps = False, 0
        while not truncated:
            _, _, terminated, truncated, info = env.step(1)
            steps += 1
            assert terminated is False
        assert steps == spec.steps == 10
        assert env.sim.clock == spec.horizon == 1200

    def test_step_after_truncation_raises(self):
        env = TrafficEnv(make_spec())
        env.reset(seed=0)
        for _ in range(10):
            env.step(1)
        with pytest.raises(EpisodeFinishedError):
            env.step(1)

    def test_step_before_reset_raises(self):
        env = TrafficEnv(make_spec())
        with pytest.raises(RuntimeError):
            env.step(0)

    def test_null_actions_on_zero_demand_give_zero_reward(self):
        env = TrafficEnv(zero_demand_spec(2, 2))
        env.reset(seed=3)
        for _ in range(10):
            _, reward, _, _, info = env.step(1)
            assert reward == 0.0
            assert all(v == 0 for v in info["queues_raw"].values())

    def test_replay_is_bit_identical(self):
        spec = make_spec()
        rng = np.random.default_rng(5)
        actions = [int(rng.integers(action_space_size(4))) for _ in range(10)]
        traces = []
        for _ in range(2):
            env = TrafficEnv(spec)
            obs, _ = env.reset(seed=11)
            rewards, observations = [], [obs]
            for a in actions:
                obs, r, _, _, _ = env.step(a)
                rewards.append(r)
                observations.append(obs)
            traces.append((rewards, observations))
        assert traces[0][0] == traces[1][0]
        for a, b in zip(traces[0][1], traces[1][1]):
            assert np.array_equal(a, b)

    def test_splits_stay_within_bounds_under_any_action_stream(self):
        env = TrafficEnv(make_spec())
        env.reset(seed=0)
        rng = np.random.default_rng(9)
        for _ in range(10):
            _, _, _, truncated, info = env.step(int(rng.integers(env.action_count)))
            assert all(30 <= s <= 70 for s in info["splits"].values())

    def test_action_latches_for_the_cycle_it_lands_on(self):
        env = TrafficEnv(make_spec())
        env.reset(seed=0)
        _, _, _, _, info = env.step(0)  # intersection 0, delta -2
        assert info["splits"][0] == 48
        assert env.sim.schedules[0].split_at(200) == 48  # active from the step start

    def test_probe_mode_runs_and_stays_bounded(self):
        spec = make_spec(sensing_mode="probe", penetration=0.25)
        env = TrafficEnv(spec)
        obs, _ = env.reset(seed=2)
        for _ in range(5):
            obs, r, _, _, info = env.step(1)
            assert np.all(obs >= 0.0) and np.all(obs <= 1.0)
            assert all(v >= 0 for v in info["queues_raw"].values())

    def test_info_carries_raw_queues_and_metrics(self):
        env = TrafficEnv(make_spec())
        env.reset(seed=0)
        _, _, _, _, info = env.step(1)
        assert info["metrics"].t0 == 200 and info["metrics"].t1 == 300
        assert set(info["queues_raw"]) == {l.name for l in env.network.internal_links}
        assert all(info["queues"][k] <= env.spec.q_ub for k in info["queues"])


def test_per_intersection_offsets_are_honored():
    spec = make_spec(offset=0, offset_by_intersection=((1, 30),))
    env = TrafficEnv(spec)
    env.reset(seed=0)
    assert env.sim.schedules[0].base.offset == 0
    assert env.sim.schedules[1].base.offset == 30
    env.step(1)  # runs fine with staggered cycles
