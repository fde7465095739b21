"""The 2D mission: decision epochs, navigation, captures and belief updates."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
import logging
import time
from typing import TYPE_CHECKING, Protocol

from sarpomcp.baselines import (
    LawnmowerState,
    greedy_next,
    lawnmower_next,
    vanilla_pomcp_plan,
)
from sarpomcp.exceptions import BoxedInError, DomainError
from sarpomcp.grid_world import (
    Cell,
    FinePosition,
    belief_visit_update,
    cell_of,
)
from sarpomcp.helpers import episode_streams
from sarpomcp.models import (
    EpisodeEvent,
    EpisodeResult,
    EventKind,
    PlannerKind,
    Termination,
    WaypointRule,
)
from sarpomcp.planner import HeightAction, adjust_height, plan
from sarpomcp.pomdp import SimState, destination
from sarpomcp.rollout import RolloutConfig, raster_path, sample_next_position
from sarpomcp.scenario import place_targets, validate_scenario
from sarpomcp.tree import BeliefNode

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

    from sarpomcp.grid_world import BeliefMap, GridEnvironment
    from sarpomcp.models import EpisodeConfig, PlannerConfig, Scenario
    from sarpomcp.pomdp import Action

_LOGGER = logging.getLogger(__package__)

EventSink = Callable[[EpisodeEvent], None]
TreeSink = Callable[[BeliefNode], None]


@dataclass(frozen=True, slots=True)
class Arrived:
    """A collision-free raster path to the waypoint, both ends included."""

    path: list[FinePosition]

    @property
    def steps(self) -> int:
        """Number of raster steps along the path."""
        return len(self.path) - 1


@dataclass(frozen=True, slots=True)
class Unreachable:
    """The waypoint cannot be reached at the current altitude."""

    reason: str


def navigate(
    current: FinePosition,
    waypoint: FinePosition,
    env: GridEnvironment,
) -> Arrived | Unreachable:
    """Find a shortest raster path from the current position to a waypoint."""
    if not env.is_valid(current):
        msg = f"Agent position {current} is not valid at {env.altitude} m"
        raise DomainError(msg)
    if not env.is_valid(waypoint):
        return Unreachable(f"waypoint {waypoint} is not a valid position")
    geom = env.geom
    start, goal = geom.raster_index(current), geom.raster_index(waypoint)
    path = raster_path(env.graph, start, goal)
    if path is None:
        return Unreachable(f"no path from {current} to {waypoint}")
    return Arrived([geom.raster_point(ix, iy, env.altitude) for ix, iy in path])


def capture_check(
    agent_cell: Cell,
    targets: Sequence[Cell],
    found: Sequence[bool],
) -> list[int]:
    """Return the indices of unfound targets in the agent's cell."""
    return [
        index
        for index, (target, is_found) in enumerate(zip(targets, found, strict=True))
        if target == agent_cell and not is_found
    ]


@dataclass
class PlanningView:
    """What a planner sees at the start of a decision epoch."""

    belief: BeliefMap
    agent: SimState
    env: GridEnvironment
    rng: np.random.Generator


class CellPlanner(Protocol):
    """A planner producing the cells to visit during one decision epoch."""

    def next_cells(self, view: PlanningView) -> list[Cell]:
        """Return the cells to visit, in order."""


def _cells_along(start: Cell, actions: Sequence[Action]) -> list[Cell]:
    cells = []
    cell = start
    for action in actions:
        cell = destination(cell, action)
        cells.append(cell)
    return cells


@dataclass
class ShrinkingPlanner:
    """Runs the shrinking planner and follows its whole action sequence."""

    cfg: PlannerConfig
    trees: TreeSink | None = None

    def next_cells(self, view: PlanningView) -> list[Cell]:
        """Return the cells along the planned sequence."""
        result = plan(view.belief, view.agent, self.cfg, view.env, view.rng)
        if self.trees is not None and result.tree is not None:
            self.trees(result.tree)
        return _cells_along(view.agent.agent_cell, result.actions)


@dataclass
class VanillaPlanner:
    """Runs the same search and executes only the best root action."""

    cfg: PlannerConfig
    trees: TreeSink | None = None

    def next_cells(self, view: PlanningView) -> list[Cell]:
        """Return the neighbor chosen at the root."""
        action = vanilla_pomcp_plan(
            view.belief, view.agent, self.cfg, view.env, view.rng, on_tree=self.trees
        )
        return [destination(view.agent.agent_cell, action)]


@dataclass
class GreedyPlanner:
    """Steps to the most probable neighbor."""

    def next_cells(self, view: PlanningView) -> list[Cell]:
        """Return the best neighbor."""
        try:
            cell = greedy_next(view.agent.agent_cell, view.belief, view.env.open_cells)
        except DomainError as err:
            raise BoxedInError(str(err)) from err
        return [cell]


@dataclass
class LawnmowerPlanner:
    """Sweeps the region carrying belief mass."""

    state: LawnmowerState = field(default_factory=LawnmowerState)

    def next_cells(self, view: PlanningView) -> list[Cell]:
        """Return the next sweep cell, or nothing once the mass is unreachable."""
        try:
            cell = lawnmower_next(
                self.state, view.agent.agent_cell, view.belief, view.env.open_cells
            )
        except DomainError:
            _LOGGER.debug("Lawnmower has no cell left to visit")
            return []
        return [cell]


def make_planner(
    kind: PlannerKind, cfg: PlannerConfig, trees: TreeSink | None = None
) -> CellPlanner:
    """Return a fresh planner of the given kind.

    ``trees`` receives the root of every search tree the planner builds.
    """
    if kind is PlannerKind.SHRINKING:
        return ShrinkingPlanner(cfg, trees)
    if kind is PlannerKind.VANILLA:
        return VanillaPlanner(cfg, trees)
    if kind is PlannerKind.GREEDY:
        return GreedyPlanner()
    return LawnmowerPlanner()


class _Episode:
    """Mutable state of one running episode."""

    # pylint: disable=too-many-instance-attributes

    def __init__(
        self,
        sc: Scenario,
        ec: EpisodeConfig,
        events: EventSink | None,
    ) -> None:
        world = validate_scenario(sc)
        targets_rng, self.planner_rng, self.waypoint_rng = episode_streams(ec.seed, 3)
        self.sc = sc
        self.ec = ec
        self.events = events
        self.geom = world.geom
        self.altitude = ec.hc.h_init_m
        self.env = world.environment(self.altitude)
        self.belief = world.belief
        self.target_positions = place_targets(sc, world, targets_rng)
        self.target_cells = [cell_of(p, self.geom) for p in self.target_positions]
        self.found = [False] * len(self.target_cells)
        start = FinePosition(sc.start.x, sc.start.y, self.altitude)
        self.position = self.geom.raster_point(
            *self.geom.raster_index(start), self.altitude
        )
        self.cell = cell_of(self.position, self.geom)
        self.trajectory = [self.position]
        self.path_steps = 0
        self.epoch = 0
        self.wall_ms: list[float] = []
        self.waypoint_cfg = RolloutConfig(
            sample_count=ec.cfg.sample_count, gamma=ec.cfg.gamma
        )

    @property
    def all_found(self) -> bool:
        return all(self.found)

    def emit(  # noqa: PLR0913
        self,
        kind: EventKind,
        *,
        cell: Cell | None = None,
        cells: list[Cell] | None = None,
        position: FinePosition | None = None,
        altitude_m: float | None = None,
        targets: list[int] | None = None,
    ) -> None:
        if self.events is None:
            return
        self.events(
            EpisodeEvent(
                epoch=self.epoch,
                kind=kind,
                cell=cell,
                cells=cells,
                position=position,
                altitude_m=altitude_m,
                targets=targets,
            )
        )

    def enter(self, cell: Cell) -> None:
        """Search the cell the agent just entered."""
        self.cell = cell
        captured = capture_check(cell, self.target_cells, self.found)
        for index in captured:
            self.found[index] = True
        if captured:
            _LOGGER.info(
                "Epoch %d: captured targets %s in %s", self.epoch, captured, cell
            )
            self.emit(EventKind.CAPTURE, cell=cell, targets=captured)
        self.belief = belief_visit_update(
            self.belief,
            cell,
            bool(captured),
            targets_remaining=not self.all_found,
        )

    def agent_state(self) -> SimState:
        return SimState(
            agent_cell=self.cell,
            agent_pos=self.position,
            target_cells=tuple(self.target_cells),
            found=tuple(self.found),
            visited=frozenset({self.cell}),
        )

    def set_altitude(self, altitude: float) -> None:
        self.altitude = altitude
        self.env = self.env.with_altitude(altitude)
        self.position = self.position._replace(z=altitude)
        self.emit(EventKind.ALTITUDE, altitude_m=altitude)

    def escalate(self) -> bool:
        """Climb one step after a boxed-in plan; return False at the ceiling."""
        if self.altitude >= self.ec.hc.h_max_m:
            return False
        _LOGGER.warning(
            "Boxed in at %s and %.1f m, climbing", self.cell, self.altitude
        )
        self.set_altitude(min(self.altitude + self.ec.hc.delta_h_m, self.ec.hc.h_max_m))
        return True

    def waypoint(self, cell: Cell) -> FinePosition | None:
        if self.sc.episode.waypoint_rule is WaypointRule.SAMPLED:
            point = sample_next_position(
                self.position, cell, self.waypoint_cfg, self.env, self.waypoint_rng
            )
            if point is not None:
                return point
        return self.env.nearest_valid(cell, self.position)

    def designate_no_fly(self, cell: Cell) -> None:
        self.env = self.env.with_no_fly_cell(cell)
        self.emit(EventKind.NO_FLY, cell=cell)

    def visit(self, cell: Cell) -> bool:
        """Fly to one planned cell; return False when the sequence must stop."""
        decision = adjust_height(cell, self.altitude, self.ec.hc, self.env)
        if decision.action is HeightAction.NO_FLY_REPLAN:
            self.designate_no_fly(cell)
            return False
        if decision.action is HeightAction.RAISE:
            self.set_altitude(decision.altitude)
        waypoint = self.waypoint(cell)
        if waypoint is None:
            self.designate_no_fly(cell)
            return False
        self.emit(EventKind.WAYPOINT, cell=cell, position=waypoint)
        outcome = navigate(self.position, waypoint, self.env)
        if isinstance(outcome, Unreachable):
            _LOGGER.debug("Epoch %d: %s", self.epoch, outcome.reason)
            self.emit(EventKind.UNREACHABLE, cell=cell, position=waypoint)
            self.designate_no_fly(cell)
            return False
        for point in outcome.path[1:]:
            self.trajectory.append(point)
            self.path_steps += 1
            self.position = point
            entered = cell_of(point, self.geom)
            if entered != self.cell:
                self.enter(entered)
                if self.all_found:
                    return False
        self.emit(EventKind.ARRIVAL, cell=cell, position=self.position)
        return True

    def execute(self, cells: Sequence[Cell]) -> None:
        for cell in cells:
            if cell == self.cell:
                continue
            if not self.visit(cell):
                return

    def run(self, planner: CellPlanner) -> EpisodeResult:
        self.enter(self.cell)
        terminated_by = Termination.ALL_FOUND
        while not self.all_found:
            if self.epoch >= self.ec.max_epochs:
                terminated_by = Termination.EPOCH_CAP
                break
            self.epoch += 1
            started = time.perf_counter()
            view = PlanningView(
                self.belief, self.agent_state(), self.env, self.planner_rng
            )
            try:
                cells = planner.next_cells(view)
            except BoxedInError:
                self.wall_ms.append((time.perf_counter() - started) * 1000)
                if not self.escalate():
                    terminated_by = Termination.BOXED_IN
                    break
                continue
            _LOGGER.debug("Epoch %d: planned cells %s", self.epoch, cells)
            self.emit(EventKind.PLAN, cell=self.cell, cells=cells)
            self.execute(cells)
            self.wall_ms.append((time.perf_counter() - started) * 1000)
        return self.result(terminated_by)

    def result(self, terminated_by: Termination) -> EpisodeResult:
        path_length = self.path_steps * self.geom.raster_m
        travel_time = path_length / self.sc.episode.speed_mps
        _LOGGER.info(
            "Episode %s seed %d: %d epochs, %d/%d targets, %s",
            self.sc.name,
            self.ec.seed,
            self.epoch,
            sum(self.found),
            len(self.found),
            terminated_by,
        )
        return EpisodeResult(
            epochs_used=self.epoch,
            targets_found=sum(self.found),
            target_count=len(self.found),
            trajectory=self.trajectory,
            path_length_m=path_length,
            terminated_by=terminated_by,
            target_positions=self.target_positions,
            dynamic_no_fly=sorted(self.env.dynamic_cells),
            travel_time_s=travel_time,
            time_limit_exceeded=travel_time > self.sc.episode.time_limit_s,
            wall_ms_per_epoch=self.wall_ms,
        )


def run_episode(
    sc: Scenario,
    ec: EpisodeConfig,
    *,
    events: EventSink | None = None,
    trees: TreeSink | None = None,
) -> EpisodeResult:
    """Run one search mission until every target is found or it gives up.

    Every planner invocation is one decision epoch, however many cells
    the returned plan visits. A target in the start cell is captured
    before the first epoch.
    """
    episode = _Episode(sc, ec, events)
    return episode.run(make_planner(ec.planner, ec.cfg, trees))
