"""Scenario configuration: grid, signals, demand, reward, episode, sensing.

A scenario is plain data and round-trips losslessly through JSON.  Two named
presets ship with the package:

  scenario1  dominant west-to-east demand with a cross feeder that
             oversubscribes the eastbound through links; eastbound-opposing
             (east-to-west) links carry zero importance weight.
  scenario2  balanced moderate demand in all directions, all weights one.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from importlib import resources

from .netmodel import Network, ODMatrix, build_grid

PRESET_NAMES = ("scenario1", "scenario2")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = "custom"
    # grid geometry
    rows: int = 2
    cols: int = 2
    link_length: float = 300.0
    free_flow_speed: float = 12.5
    # signal constants
    cycle: int = 100
    left_phase: int = 8
    yellow: int = 2
    all_red: int = 2
    offset: int = 0
    offset_by_intersection: tuple[tuple[int, int], ...] = ()
    split_lb: int = 30
    split_ub: int = 70
    initial_split: int = 50
    delta_s: int = 2
    # demand: (origin zone, destination zone) -> veh/hour
    demand: tuple[tuple[str, str, float], ...] = ()
    # reward constants
    q_ub: int = 50
    q_lc: int = 10
    q_hc: int = 25
    w_cp: float = 10.0
    w_t: float = 0.001
    w_l_default: float = 1.0
    w_l_by_direction: tuple[tuple[str, float], ...] = ()
    w_l_by_link: tuple[tuple[str, float], ...] = ()
    t_once_per_region: bool = False
    # episode structure
    warmup: int = 1800
    horizon: int = 16200
    control_interval: int = 100
    # sensing
    sensing_mode: str = "full"  # "full" | "probe"
    penetration: float = 0.2
    # saturation rates, veh/s as (numerator, denominator)
    sat_straight: tuple[int, int] = (50, 42)
    sat_left: tuple[int, int] = (1, 2)
    sat_right: tuple[int, int] = (1, 2)
    # default RNG seed for demand / probe selection
    seed: int = 0
    notes: str = ""

    def __post_init__(self):
        self.validate()

    @property
    def steps(self) -> int:
        return (self.horizon - self.warmup) // self.control_interval

    def validate(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be positive")
        if (self.horizon - self.warmup) % self.control_interval != 0:
            raise ValueError("horizon - warmup must be a whole number of control intervals")
        if not 0 < self.q_lc < self.q_hc <= self.q_ub:
            raise ValueError("congestion thresholds must satisfy 0 < q_lc < q_hc <= q_ub")
        if self.w_cp < 0 or self.w_t < 0 or self.w_l_default < 0:
            raise ValueError("reward weights must be non-negative")
        if not self.split_lb <= self.initial_split <= self.split_ub:
            raise ValueError("initial split outside bounds")
        if self.sensing_mode not in ("full", "probe"):
            raise ValueError(f"unknown sensing mode {self.sensing_mode!r}")
        if self.sensing_mode == "probe" and not 0 < self.penetration <= 1:
            raise ValueError("penetration must be in (0, 1]")
        p1 = self.split_lb - self.left_phase
        p3 = self.cycle - 4 * (self.yellow + self.all_red) - 2 * self.left_phase \
            - (self.split_ub - self.left_phase)
        if p1 <= 0 or p3 <= 0:
            raise ValueError("split bounds leave a non-positive phase duration")
        for o, d, rate in self.demand:
            if rate < 0:
                raise ValueError(f"negative demand rate for {o}->{d}")
            if o == d:
                raise ValueError(f"demand pair with origin == destination: {o}")

    # -- derived artifacts -----------------------------------------------

    def build_network(self) -> Network:
        return build_grid(self.rows, self.cols, self.link_length, self.free_flow_speed)

    def od_matrix(self) -> ODMatrix:
        return ODMatrix({(o, d): r for o, d, r in self.demand}, float(self.horizon))

    def saturation_rates(self):
        from .mesosim import SaturationRates
        return SaturationRates(Fraction(*self.sat_straight), Fraction(*self.sat_left),
                               Fraction(*self.sat_right))

    def intersection_offset(self, node: int) -> int:
        return dict(self.offset_by_intersection).get(node, self.offset)

    def link_weights(self, network: Network) -> dict[str, float]:
        """Importance weight per internal link, direction and per-link
        overrides applied in that order."""
        by_dir = dict(self.w_l_by_direction)
        by_link = dict(self.w_l_by_link)
        out = {}
        for link in network.internal_links:
            w = by_dir.get(link.direction, self.w_l_default)
            out[link.name] = by_link.get(link.name, w)
        return out

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        data = dict(data)
        for key in ("demand", "w_l_by_direction", "w_l_by_link",
                    "offset_by_intersection"):
            if key in data:
                data[key] = tuple(tuple(item) for item in data[key])
        for key in ("sat_straight", "sat_left", "sat_right"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        return cls.from_dict(json.loads(text))


def save_scenario(spec: ScenarioSpec, path) -> None:
    with open(path, "w") as fh:
        fh.write(spec.to_json() + "\n")


def load_scenario(name_or_path: str) -> ScenarioSpec:
    """Load a scenario from a preset name or a JSON file path."""
    if name_or_path in PRESET_NAMES:
        text = resources.files("atsclab.presets").joinpath(
            f"{name_or_path}.json").read_text()
        return ScenarioSpec.from_json(text)
    with open(name_or_path) as fh:
        return ScenarioSpec.from_json(fh.read())
