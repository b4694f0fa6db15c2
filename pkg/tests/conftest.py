import dataclasses

import pytest

from atsclab.scenario import ScenarioSpec

LIGHT_DEMAND = (
    ("z_w_0", "z_e_1", 400.0),
    ("z_n_0", "z_s_2", 200.0),
    ("z_s_2", "z_e_1", 120.0),
)


def make_spec(**overrides) -> ScenarioSpec:
    """Small, fast scenario: 2x2 grid, 10 control steps."""
    base = ScenarioSpec(
        name="test",
        rows=2, cols=2,
        demand=LIGHT_DEMAND,
        warmup=200, horizon=1200, control_interval=100,
        w_t=0.001,
    )
    return dataclasses.replace(base, **overrides) if overrides else base


def zero_demand_spec(rows=3, cols=3, **overrides) -> ScenarioSpec:
    return make_spec(rows=rows, cols=cols, demand=(), **overrides)


@pytest.fixture
def small_spec():
    return make_spec()
