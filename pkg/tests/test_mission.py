"""Tests for running search missions."""

from __future__ import annotations

from dataclasses import replace
from itertools import pairwise

import pytest

from sarpomcp.exceptions import DomainError
from sarpomcp.grid_world import (
    Cell,
    FinePosition,
    GridEnvironment,
    cell_of,
)
from sarpomcp.mission import (
    Arrived,
    Unreachable,
    capture_check,
    navigate,
    run_episode,
)
from sarpomcp.models import (
    BeliefPreset,
    BuildingSpec,
    EpisodeConfig,
    EpisodeEvent,
    EpisodeSettings,
    EventKind,
    PlannerKind,
    PositionSpec,
    Scenario,
    TargetSpec,
    Termination,
    WaypointRule,
)
from sarpomcp.scenario import ScenarioOverrides, gen_scenario, validate_scenario
from sarpomcp.tree import BeliefNode


def _config(sc: Scenario, planner: PlannerKind, seed: int = 0) -> EpisodeConfig:
    return EpisodeConfig.from_scenario(sc, planner, seed)


def test_capture_check() -> None:
    """Test only unfound targets in the agent's cell are captured."""
    targets = [Cell(1, 1), Cell(2, 2), Cell(1, 1)]
    assert capture_check(Cell(0, 0), targets, [False] * 3) == []
    assert capture_check(Cell(2, 2), targets, [False] * 3) == [1]
    assert capture_check(Cell(1, 1), targets, [False] * 3) == [0, 2]
    assert capture_check(Cell(1, 1), targets, [True, False, False]) == [2]


def test_navigate_open(open_env: GridEnvironment) -> None:
    """Test an open map gives a Manhattan path."""
    outcome = navigate(
        FinePosition(0.0, 0.0, 10.0), FinePosition(3.0, 4.0, 10.0), open_env
    )
    assert isinstance(outcome, Arrived)
    assert outcome.steps == 7
    assert outcome.path[0] == FinePosition(0.0, 0.0, 10.0)
    assert outcome.path[-1] == FinePosition(3.0, 4.0, 10.0)


def test_navigate_blocked(open_env: GridEnvironment) -> None:
    """Test waypoints and positions inside no-fly cells."""
    env = open_env.with_no_fly_cell(Cell(1, 1))
    outcome = navigate(
        FinePosition(0.0, 0.0, 10.0), FinePosition(25.0, 25.0, 10.0), env
    )
    assert isinstance(outcome, Unreachable)
    with pytest.raises(DomainError):
        navigate(FinePosition(25.0, 25.0, 10.0), FinePosition(0.0, 0.0, 10.0), env)


def test_navigate_enclosed(small_env: GridEnvironment) -> None:
    """Test a valid waypoint walled off from the agent is unreachable."""
    env = small_env
    for cell in (Cell(1, 0), Cell(1, 1), Cell(0, 1)):
        env = env.with_no_fly_cell(cell)
    outcome = navigate(
        FinePosition(16.0, 16.0, 10.0), FinePosition(2.0, 2.0, 10.0), env
    )
    assert isinstance(outcome, Unreachable)


def test_greedy_walk(greedy_walk: Scenario) -> None:
    """Test the greedy planner climbs the belief to the target."""
    result = run_episode(greedy_walk, _config(greedy_walk, PlannerKind.GREEDY))
    assert result.epochs_used == 5
    assert result.targets_found == 1
    assert result.terminated_by is Termination.ALL_FOUND
    assert result.path_length_m == 21.0
    assert result.travel_time_s == pytest.approx(4.2)
    assert not result.time_limit_exceeded
    assert len(result.wall_ms_per_epoch) == 5
    geom = validate_scenario(greedy_walk).geom
    assert cell_of(result.trajectory[-1], geom) == Cell(3, 2)


def test_events(greedy_walk: Scenario) -> None:
    """Test the event log of a greedy mission."""
    events: list[EpisodeEvent] = []
    run_episode(
        greedy_walk, _config(greedy_walk, PlannerKind.GREEDY), events=events.append
    )
    kinds = [event.kind for event in events]
    assert kinds.count(EventKind.PLAN) == 5
    assert kinds.count(EventKind.WAYPOINT) == 5
    assert kinds.count(EventKind.ARRIVAL) == 4
    captures = [event for event in events if event.kind is EventKind.CAPTURE]
    assert len(captures) == 1
    assert captures[0].epoch == 5
    assert captures[0].cell == Cell(3, 2)
    assert captures[0].targets == [0]
    plans = [event.cells for event in events if event.kind is EventKind.PLAN]
    assert plans == [
        [Cell(1, 0)],
        [Cell(2, 0)],
        [Cell(2, 1)],
        [Cell(3, 1)],
        [Cell(3, 2)],
    ]
    assert "altitude_m" not in captures[0].to_dict()


def test_target_in_start_cell(greedy_walk: Scenario) -> None:
    """Test a target in the start cell is captured before the first epoch."""
    sc = replace(
        greedy_walk,
        targets=TargetSpec(count=1, positions=[PositionSpec(x=3.0, y=3.0)]),
    )
    result = run_episode(sc, _config(sc, PlannerKind.SHRINKING))
    assert result.epochs_used == 0
    assert result.targets_found == 1
    assert result.terminated_by is Termination.ALL_FOUND
    assert result.trajectory == [FinePosition(2.0, 2.0, 10.0)]
    assert result.path_length_m == 0.0


def test_corridor_shrinking_beats_vanilla(corridor: Scenario) -> None:
    """Test whole sequences cover a corridor in far fewer epochs."""
    shrinking = run_episode(corridor, _config(corridor, PlannerKind.SHRINKING))
    assert shrinking.terminated_by is Termination.ALL_FOUND
    assert shrinking.epochs_used <= 3
    vanilla = run_episode(corridor, _config(corridor, PlannerKind.VANILLA))
    assert vanilla.epochs_used >= 12
    assert shrinking.epochs_used < vanilla.epochs_used


def test_walled_target(walled: Scenario) -> None:
    """Test a target walled off at every altitude is never found."""
    result = run_episode(walled, _config(walled, PlannerKind.GREEDY))
    assert result.epochs_used == 100
    assert result.terminated_by is Termination.EPOCH_CAP
    assert result.targets_found == 0
    assert Cell(4, 4) in result.dynamic_no_fly
    env = validate_scenario(walled).environment(10.0)
    assert all(env.is_valid(point) for point in result.trajectory)


def test_boxed_in(greedy_walk: Scenario) -> None:
    """Test an agent sealed into its start cell climbs and then gives up."""
    sc = replace(
        greedy_walk,
        name="boxed-in",
        buildings=[
            BuildingSpec(x_min=5.0, y_min=0.0, x_max=6.0, y_max=6.0, height_m=100.0),
            BuildingSpec(x_min=0.0, y_min=5.0, x_max=6.0, y_max=6.0, height_m=100.0),
        ],
    )
    events: list[EpisodeEvent] = []
    result = run_episode(sc, _config(sc, PlannerKind.GREEDY), events=events.append)
    assert result.terminated_by is Termination.BOXED_IN
    assert result.targets_found == 0
    assert result.epochs_used == 10
    assert result.dynamic_no_fly == [Cell(0, 1), Cell(1, 0)]
    altitudes = [e.altitude_m for e in events if e.kind is EventKind.ALTITUDE]
    assert altitudes == [13.0, 16.0, 19.0, 22.0, 25.0, 28.0, 30.0]


@pytest.mark.parametrize("planner", list(PlannerKind))
def test_trajectory_invariants(greedy_walk: Scenario, planner: PlannerKind) -> None:
    """Test every planner moves one raster step at a time over valid points."""
    result = run_episode(greedy_walk, _config(greedy_walk, planner, seed=7))
    assert result.terminated_by is Termination.ALL_FOUND
    for a, b in pairwise(result.trajectory):
        assert abs(a.x - b.x) + abs(a.y - b.y) == pytest.approx(1.0)
    assert result.path_length_m == len(result.trajectory) - 1


@pytest.mark.parametrize("rule", list(WaypointRule))
def test_deterministic(greedy_walk: Scenario, rule: WaypointRule) -> None:
    """Test equal seeds reproduce the episode exactly."""
    sc = replace(greedy_walk, episode=EpisodeSettings(waypoint_rule=rule))
    first = run_episode(sc, _config(sc, PlannerKind.SHRINKING, seed=11))
    second = run_episode(sc, _config(sc, PlannerKind.SHRINKING, seed=11))
    assert first.to_record() == second.to_record()
    assert "wall_ms_per_epoch" not in first.to_record()


def test_sampled_targets_reproducible(greedy_walk: Scenario) -> None:
    """Test sampled targets depend on the seed only."""
    sc = replace(greedy_walk, targets=TargetSpec(count=3))
    cfg = replace(_config(sc, PlannerKind.GREEDY, seed=5), max_epochs=1)
    first = run_episode(sc, cfg)
    second = run_episode(sc, cfg)
    assert first.target_positions == second.target_positions
    assert first.target_count == 3


@pytest.mark.parametrize("planner", [PlannerKind.GREEDY, PlannerKind.LAWNMOWER])
def test_generated_zones_never_entered(planner: PlannerKind) -> None:
    """Test trajectories on random maps stay out of every no-fly zone."""
    overrides = ScenarioOverrides(
        side_length_m=100.0, grid_n=10, target_count=2, no_fly_zone_count=3
    )
    beliefs = list(BeliefPreset)
    for seed in range(40):
        sc = gen_scenario(beliefs[seed % len(beliefs)], seed, overrides)
        world = validate_scenario(sc)
        assert len(world.zones) == 3
        config = replace(_config(sc, planner, seed), max_epochs=40)
        result = run_episode(sc, config)
        entered = [
            point
            for point in result.trajectory
            if any(zone.contains(point) for zone in world.zones)
        ]
        assert entered == [], f"seed {seed}"


@pytest.mark.parametrize("planner", [PlannerKind.SHRINKING, PlannerKind.VANILLA])
def test_search_trees_reported(greedy_walk: Scenario, planner: PlannerKind) -> None:
    """Test every search tree built during an episode reaches the tree sink."""
    sc = replace(greedy_walk, planner=replace(greedy_walk.planner, max_iterations=40))
    roots: list[BeliefNode] = []
    result = run_episode(sc, _config(sc, planner), trees=roots.append)
    assert len(roots) == result.epochs_used
    assert all(root.visit_count == 40 for root in roots)


def test_search_trees_not_built_by_baselines(greedy_walk: Scenario) -> None:
    """Test planners without a search tree report nothing."""
    roots: list[BeliefNode] = []
    config = _config(greedy_walk, PlannerKind.GREEDY)
    run_episode(greedy_walk, config, trees=roots.append)
    assert roots == []
