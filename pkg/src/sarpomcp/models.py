"""SarPomcp models for scenarios, configuration and results."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

from mashumaro.config import BaseConfig
from mashumaro.mixins.dict import DataClassDictMixin
from mashumaro.mixins.json import DataClassJSONMixin
from mashumaro.mixins.yaml import DataClassYAMLMixin

from sarpomcp.const import (
    DEFAULT_ALPHA,
    DEFAULT_ALPHAS,
    DEFAULT_C_UCT,
    DEFAULT_DELTA_H_M,
    DEFAULT_DISCOUNT_FACTORS,
    DEFAULT_GAMMA,
    DEFAULT_GRID_N,
    DEFAULT_H_INIT_M,
    DEFAULT_H_MAX_M,
    DEFAULT_MAX_DEPTH,
    DEFAULT_MAX_EPOCHS,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_MAX_LEVEL,
    DEFAULT_RASTER_M,
    DEFAULT_SAMPLE_COUNT,
    DEFAULT_SEEDS,
    DEFAULT_SIDE_LENGTH_M,
    DEFAULT_SPEED_MPS,
    DEFAULT_TARGET_COUNT,
    DEFAULT_TAU,
    DEFAULT_TIME_LIMIT_S,
)
from sarpomcp.exceptions import ConfigurationError
from sarpomcp.grid_world import BeliefKind, Cell, FinePosition


class PlannerKind(StrEnum):
    """Enum for the planners a mission can run."""

    SHRINKING = "shrinking"
    VANILLA = "vanilla"
    LAWNMOWER = "lawnmower"
    GREEDY = "greedy"


class BeliefPreset(StrEnum):
    """Enum for the belief families used by the experiments."""

    UNIFORM = "uniform"
    ONE_PEAK = "one_peak"
    THREE_PEAKS = "three_peaks"


class WaypointRule(StrEnum):
    """Enum for turning a planned cell into a waypoint."""

    SAMPLED = "sampled"
    NEAREST = "nearest"


class Termination(StrEnum):
    """Enum for the reasons an episode ends."""

    ALL_FOUND = "all_found"
    EPOCH_CAP = "epoch_cap"
    BOXED_IN = "boxed_in"


class EventKind(StrEnum):
    """Enum for the entries of an episode event log."""

    PLAN = "plan"
    WAYPOINT = "waypoint"
    ARRIVAL = "arrival"
    CAPTURE = "capture"
    UNREACHABLE = "unreachable"
    NO_FLY = "no_fly"
    ALTITUDE = "altitude"


def _require(condition: bool, message: str) -> None:  # noqa: FBT001
    """Raise a configuration error unless the condition holds."""
    if not condition:
        raise ConfigurationError(message)


@dataclass
class MapSpec(DataClassDictMixin):
    """Represents the map geometry of a scenario."""

    side_length_m: float = DEFAULT_SIDE_LENGTH_M
    grid_n: int = DEFAULT_GRID_N
    raster_m: float = DEFAULT_RASTER_M

    def __post_init__(self) -> None:
        """Validate the geometry."""
        _require(self.side_length_m > 0, "map.side_length_m must be positive")
        _require(self.grid_n >= 1, "map.grid_n must be at least 1")
        _require(self.raster_m > 0, "map.raster_m must be positive")


@dataclass
class Rectangle(DataClassDictMixin):
    """Represents an axis-aligned rectangle in meters."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        """Validate the rectangle."""
        _require(
            self.x_min < self.x_max and self.y_min < self.y_max,
            f"Degenerate rectangle {self}",
        )


@dataclass
class BuildingSpec(Rectangle):
    """Represents a building footprint with its roof height."""

    height_m: float = 0.0

    def __post_init__(self) -> None:
        """Validate the building."""
        super().__post_init__()
        _require(self.height_m >= 0, f"Building height must be >= 0: {self}")


@dataclass
class PeakSpec(DataClassDictMixin):
    """Represents one belief peak on the grid."""

    i: int
    j: int
    spread: float = 2.0
    weight: float = 1.0


@dataclass
class BeliefSpec(DataClassDictMixin):
    """Represents the initial belief of a scenario."""

    kind: BeliefKind = BeliefKind.UNIFORM
    peaks: list[PeakSpec] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Validate the belief block."""
        _require(
            self.kind is BeliefKind.UNIFORM or bool(self.peaks),
            f"belief kind {self.kind} needs at least one peak",
        )


@dataclass
class PositionSpec(DataClassDictMixin):
    """Represents a horizontal position in meters."""

    x: float
    y: float


@dataclass
class TargetSpec(DataClassDictMixin):
    """Represents the targets; unpinned targets are sampled from the belief."""

    count: int = DEFAULT_TARGET_COUNT
    positions: list[PositionSpec] | None = None

    def __post_init__(self) -> None:
        """Validate the target block."""
        _require(self.count >= 1, "targets.count must be at least 1")
        if self.positions is not None:
            _require(
                len(self.positions) == self.count,
                "targets.positions must list exactly targets.count entries",
            )


@dataclass
class PlannerConfig(DataClassDictMixin):
    """Represents the search budget and hyperparameters of the tree planners."""

    max_iterations: int = DEFAULT_MAX_ITERATIONS
    max_time_s: float | None = None
    max_level: int = DEFAULT_MAX_LEVEL
    p_epsilon: float | None = None
    gamma: float = DEFAULT_GAMMA
    c_uct: float = DEFAULT_C_UCT
    max_depth: int = DEFAULT_MAX_DEPTH
    alpha: float = DEFAULT_ALPHA
    sample_count: int = DEFAULT_SAMPLE_COUNT

    def __post_init__(self) -> None:
        """Validate the planner configuration."""
        _require(self.max_iterations >= 1, "planner.max_iterations must be >= 1")
        _require(
            self.max_time_s is None or self.max_time_s > 0,
            "planner.max_time_s must be positive when set",
        )
        _require(self.max_level >= 1, "planner.max_level must be >= 1")
        _require(
            self.p_epsilon is None or 0.0 <= self.p_epsilon <= 1.0,
            "planner.p_epsilon must lie in [0, 1]",
        )
        _require(0.0 < self.gamma <= 1.0, "planner.gamma must lie in (0, 1]")
        _require(self.c_uct >= 0, "planner.c_uct must be non-negative")
        _require(self.max_depth >= 0, "planner.max_depth must be non-negative")
        _require(self.alpha >= 0, "planner.alpha must be non-negative")
        _require(self.sample_count >= 1, "planner.sample_count must be >= 1")


@dataclass
class HeightConfig(DataClassDictMixin):
    """Represents the altitude adjustment parameters."""

    tau: int = DEFAULT_TAU
    delta_h_m: float = DEFAULT_DELTA_H_M
    h_max_m: float = DEFAULT_H_MAX_M
    h_init_m: float = DEFAULT_H_INIT_M

    def __post_init__(self) -> None:
        """Validate the height configuration."""
        _require(self.tau >= 1, "height.tau must be >= 1")
        _require(self.delta_h_m > 0, "height.delta_h_m must be positive")
        _require(self.h_init_m >= 0, "height.h_init_m must be non-negative")
        _require(self.h_init_m <= self.h_max_m, "height.h_init_m exceeds h_max_m")


@dataclass
class EpisodeSettings(DataClassDictMixin):
    """Represents the mission-level settings of a scenario."""

    max_epochs: int = DEFAULT_MAX_EPOCHS
    speed_mps: float = DEFAULT_SPEED_MPS
    time_limit_s: float = DEFAULT_TIME_LIMIT_S
    waypoint_rule: WaypointRule = WaypointRule.SAMPLED

    def __post_init__(self) -> None:
        """Validate the mission settings."""
        _require(self.max_epochs >= 1, "episode.max_epochs must be >= 1")
        _require(self.speed_mps > 0, "episode.speed_mps must be positive")
        _require(self.time_limit_s > 0, "episode.time_limit_s must be positive")


@dataclass
class Scenario(DataClassYAMLMixin):
    """Represents a complete search-and-rescue scenario file."""

    name: str
    start: PositionSpec
    map: MapSpec = field(default_factory=MapSpec)
    buildings: list[BuildingSpec] = field(default_factory=list)
    no_fly_zones: list[Rectangle] = field(default_factory=list)
    belief: BeliefSpec = field(default_factory=BeliefSpec)
    targets: TargetSpec = field(default_factory=TargetSpec)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    height: HeightConfig = field(default_factory=HeightConfig)
    episode: EpisodeSettings = field(default_factory=EpisodeSettings)


@dataclass
class EpisodeConfig(DataClassDictMixin):
    """Represents one episode run: planner choice, seed and configuration."""

    planner: PlannerKind = PlannerKind.SHRINKING
    seed: int = 0
    cfg: PlannerConfig = field(default_factory=PlannerConfig)
    hc: HeightConfig = field(default_factory=HeightConfig)
    max_epochs: int = DEFAULT_MAX_EPOCHS

    def __post_init__(self) -> None:
        """Validate the episode configuration."""
        _require(self.max_epochs >= 1, "max_epochs must be >= 1")

    @classmethod
    def from_scenario(
        cls, scenario: Scenario, planner: PlannerKind, seed: int
    ) -> EpisodeConfig:
        """Build the episode configuration a scenario file describes."""
        return cls(
            planner=planner,
            seed=seed,
            cfg=scenario.planner,
            hc=scenario.height,
            max_epochs=scenario.episode.max_epochs,
        )


@dataclass
class EpisodeResult(DataClassJSONMixin):
    """Represents the outcome of one episode."""

    epochs_used: int
    targets_found: int
    target_count: int
    trajectory: list[FinePosition]
    path_length_m: float
    terminated_by: Termination
    target_positions: list[FinePosition] = field(default_factory=list)
    dynamic_no_fly: list[Cell] = field(default_factory=list)
    travel_time_s: float = 0.0
    time_limit_exceeded: bool = False
    wall_ms_per_epoch: list[float] = field(default_factory=list)

    def to_record(self) -> dict[str, Any]:
        """Return the reproducible part of the result, without wall-clock time."""
        record = self.to_dict()
        record.pop("wall_ms_per_epoch")
        return record


@dataclass
class ResultRow(DataClassDictMixin):
    """Represents one (configuration, seed) row of an experiment table."""

    scenario_id: str
    belief: BeliefPreset
    planner: PlannerKind
    df: float
    alpha: float
    seed: int
    epochs_used: int
    targets_found: int
    target_count: int
    path_length_m: float
    wall_ms_total: float
    terminated_by: Termination
    targets: str

    @property
    def sort_key(self) -> tuple[str, str, str, float, float, int]:
        """Key that orders rows by configuration and seed."""
        return (
            self.scenario_id,
            self.belief,
            self.planner,
            self.df,
            self.alpha,
            self.seed,
        )


@dataclass
class SummaryRow(DataClassDictMixin):
    """Represents the mean and standard error of one configuration cell."""

    belief: BeliefPreset
    planner: PlannerKind
    df: float
    alpha: float
    runs: int
    mean_epochs: float
    se_epochs: float | None
    mean_targets_found: float
    best: bool = False


@dataclass
class SweepSpec(DataClassDictMixin):
    """Represents the hyperparameter grid of a sweep."""

    discount_factors: list[float] = field(
        default_factory=lambda: list(DEFAULT_DISCOUNT_FACTORS)
    )
    alphas: list[float] = field(default_factory=lambda: list(DEFAULT_ALPHAS))
    belief_kinds: list[BeliefPreset] = field(
        default_factory=lambda: list(BeliefPreset)
    )
    seeds: int = DEFAULT_SEEDS

    def __post_init__(self) -> None:
        """Validate the sweep grid."""
        _require(bool(self.discount_factors), "sweep needs discount factors")
        _require(bool(self.alphas), "sweep needs reward alphas")
        _require(bool(self.belief_kinds), "sweep needs belief kinds")
        _require(self.seeds >= 1, "sweep needs at least one seed")


@dataclass
class Hyperparameters(DataClassDictMixin):
    """Represents a (discount factor, reward alpha) pair."""

    df: float
    alpha: float


def default_best_hyperparameters() -> dict[BeliefPreset, Hyperparameters]:
    """Return the sweep winners used for planner comparisons by default."""
    return {
        BeliefPreset.UNIFORM: Hyperparameters(df=0.995, alpha=0.0),
        BeliefPreset.ONE_PEAK: Hyperparameters(df=0.995, alpha=10.0),
        BeliefPreset.THREE_PEAKS: Hyperparameters(df=0.995, alpha=10.0),
    }


@dataclass
class EpisodeEvent(DataClassJSONMixin):
    """Represents one entry of the per-epoch event log."""

    epoch: int
    kind: EventKind
    cell: Cell | None = None
    cells: list[Cell] | None = None
    position: FinePosition | None = None
    altitude_m: float | None = None
    targets: list[int] | None = None

    class Config(BaseConfig):
        """Mashumaro configuration."""

        omit_none = True
