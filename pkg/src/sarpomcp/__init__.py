"""Grid-world UAV search-and-rescue planning with Shrinking POMCP."""

from .exceptions import (
    BoxedInError,
    ConfigurationError,
    DomainError,
    PlanningError,
    SarPomcpError,
)
from .grid_world import BeliefMap, Cell, FinePosition, GridEnvironment, MapGeometry
from .mission import run_episode
from .models import (
    EpisodeConfig,
    EpisodeResult,
    PlannerConfig,
    PlannerKind,
    Scenario,
)
from .planner import PlanResult, plan

__all__ = [
    "BeliefMap",
    "BoxedInError",
    "Cell",
    "ConfigurationError",
    "DomainError",
    "EpisodeConfig",
    "EpisodeResult",
    "FinePosition",
    "GridEnvironment",
    "MapGeometry",
    "PlanResult",
    "PlannerConfig",
    "PlannerKind",
    "PlanningError",
    "SarPomcpError",
    "Scenario",
    "plan",
    "run_episode",
]
