"""A* rollout: sample a position in a promising cell and price the trip there."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import TYPE_CHECKING

import numpy as np

from sarpomcp.const import DEFAULT_GAMMA, DEFAULT_SAMPLE_COUNT
from sarpomcp.exceptions import DomainError
from sarpomcp.grid_world import Cell, FinePosition

if TYPE_CHECKING:
    from sarpomcp.grid_world import BeliefMap, GridEnvironment, RasterGraph
    from sarpomcp.pomdp import SimState
    from sarpomcp.tree import BeliefNode

Point = tuple[int, int]


@dataclass(frozen=True, slots=True)
class RolloutConfig:
    """Sample budget of the position sampler and the discount of the value.

    ``step_cost_scale`` is the number of meters counted as one discount step;
    unset means one grid cell.
    """

    sample_count: int = DEFAULT_SAMPLE_COUNT
    gamma: float = DEFAULT_GAMMA
    step_cost_scale: float | None = None

    def __post_init__(self) -> None:
        """Validate the configuration."""
        if self.sample_count < 1:
            msg = f"Rollout needs at least one sample, got {self.sample_count}"
            raise DomainError(msg)
        if self.step_cost_scale is not None and self.step_cost_scale <= 0:
            msg = "Rollout step cost scale must be positive"
            raise DomainError(msg)


def _manhattan_path(start: Point, goal: Point) -> list[Point]:
    """Return the straight x-then-y staircase between two points."""
    (sx, sy), (gx, gy) = start, goal
    step_x = 1 if gx >= sx else -1
    step_y = 1 if gy >= sy else -1
    path = [(x, sy) for x in range(sx, gx + step_x, step_x)]
    path.extend((gx, y) for y in range(sy + step_y, gy + step_y, step_y))
    return path


def _check_endpoints(graph: RasterGraph, start: Point, goal: Point) -> None:
    if not graph.is_open(*start) or not graph.is_open(*goal):
        msg = f"Path endpoints {start} -> {goal} must be valid raster points"
        raise DomainError(msg)


def raster_path(graph: RasterGraph, start: Point, goal: Point) -> list[Point] | None:
    """Return a shortest 4-connected raster path, endpoints included."""
    _check_endpoints(graph, start, goal)
    if graph.box_clear(*start, *goal):
        return _manhattan_path(start, goal)
    return graph.path_between(start, goal)


def raster_path_length(graph: RasterGraph, start: Point, goal: Point) -> int | None:
    """Return the number of steps of a shortest raster path, or None."""
    _check_endpoints(graph, start, goal)
    if graph.box_clear(*start, *goal):
        return abs(start[0] - goal[0]) + abs(start[1] - goal[1])
    return graph.steps_between(start, goal)


def astar_path_length(
    start: FinePosition,
    goal: FinePosition,
    env: GridEnvironment,
) -> float | None:
    """Return the length in meters of a shortest valid path, or None."""
    if not env.is_valid(start) or not env.is_valid(goal):
        msg = f"Path endpoints {start} -> {goal} are not valid at {env.altitude} m"
        raise DomainError(msg)
    geom = env.geom
    steps = raster_path_length(
        env.graph, geom.raster_index(start), geom.raster_index(goal)
    )
    return None if steps is None else steps * geom.raster_m


def sample_next_position(
    current: FinePosition,
    target_cell: Cell,
    cfg: RolloutConfig,
    env: GridEnvironment,
    rng: np.random.Generator,
) -> FinePosition | None:
    """Sample positions in a cell and return the valid one closest to ``current``."""
    geom = env.geom
    if not geom.in_grid(target_cell):
        msg = f"Cell {target_cell} lies outside the grid"
        raise DomainError(msg)
    k = geom.cell_raster
    offsets = rng.integers(0, k, size=(cfg.sample_count, 2))
    base_x = target_cell.i * k
    base_y = target_cell.j * k
    res = geom.raster_m
    is_open = env.graph.is_open
    best: tuple[int, int] | None = None
    best_dist = math.inf
    for dx, dy in offsets.tolist():
        ix, iy = base_x + dx, base_y + dy
        if not is_open(ix, iy):
            continue
        dist = math.hypot(ix * res - current.x, iy * res - current.y)
        if dist < best_dist:
            best, best_dist = (ix, iy), dist
    if best is None:
        return None
    return geom.raster_point(best[0], best[1], env.altitude)


@dataclass
class RolloutContext:
    """Inputs a rollout reads, fixed for one planner invocation."""

    env: GridEnvironment
    belief: BeliefMap
    alpha: float
    cfg: RolloutConfig
    _destinations: dict[Cell, Cell | None] = field(default_factory=dict)
    _candidates: np.ndarray | None = None

    def destination(self, cell: Cell) -> Cell | None:
        """Return the highest-belief open cell nearest to ``cell``."""
        if cell in self._destinations:
            return self._destinations[cell]
        if self._candidates is None:
            probs = np.where(self.env.valid_counts > 0, self.belief.probs, 0.0)
            peak = float(probs.max())
            self._candidates = (
                np.argwhere(probs >= peak * (1 - 1e-12))
                if peak > 0
                else np.empty((0, 2), dtype=int)
            )
        chosen: Cell | None = None
        if len(self._candidates):
            dist = np.abs(self._candidates - (cell.i, cell.j)).sum(axis=1)
            best = self._candidates[int(np.argmin(dist))]
            chosen = Cell(int(best[0]), int(best[1]))
        self._destinations[cell] = chosen
        return chosen

    def start_of(self, s: SimState) -> FinePosition | None:
        """Return the valid position the rollout starts from."""
        if self.env.is_valid(s.agent_pos):
            return s.agent_pos
        return self.env.anchor(s.agent_cell)


def discounted_value(
    length_m: float,
    gamma: float,
    cell_size_m: float,
    reward: float,
) -> float:
    """Discount a destination reward by the grid steps needed to reach it."""
    return float(gamma ** (length_m / cell_size_m) * reward)


def rollout_value(
    s: SimState,
    b: BeliefNode,  # noqa: ARG001
    ctx: RolloutContext,
    rng: np.random.Generator,
) -> float:
    """Estimate the value of a leaf by an A* trip to the most promising cell."""
    dest = ctx.destination(s.agent_cell)
    if dest is None:
        return 0.0
    target = 1.0 if s.unfound_target_in(dest) else 0.0
    reward = target + ctx.alpha * ctx.belief.at(dest)
    if reward == 0.0:
        return 0.0
    if dest == s.agent_cell:
        return reward
    start = ctx.start_of(s)
    if start is None:
        return 0.0
    goal = sample_next_position(start, dest, ctx.cfg, ctx.env, rng)
    if goal is None:
        return 0.0
    length = astar_path_length(start, goal, ctx.env)
    if length is None:
        return 0.0
    scale = ctx.cfg.step_cost_scale or ctx.env.geom.cell_size_m
    return discounted_value(length, ctx.cfg.gamma, scale, reward)
