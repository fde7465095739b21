"""Tests for SarPomcp."""

from pathlib import Path

from sarpomcp.grid_world import Cell, MapGeometry
from sarpomcp.models import Scenario
from sarpomcp.pomdp import ACTION_ORDER, Action, SimState, destination


def fixture_path(filename: str) -> Path:
    """Return the path of a fixture."""
    return Path(__package__) / "fixtures" / filename


def load_fixture(filename: str) -> str:
    """Load a fixture."""
    return fixture_path(filename).read_text(encoding="utf-8")


def load_scenario_fixture(filename: str) -> Scenario:
    """Load a scenario fixture."""
    return Scenario.from_yaml(load_fixture(filename))


def action_between(source: Cell, target: Cell) -> Action | None:
    """Return the action moving from ``source`` to an adjacent ``target``."""
    for action in ACTION_ORDER:
        if destination(source, action) == target:
            return action
    return None


def make_agent(
    cell: Cell,
    geom: MapGeometry,
    targets: tuple[Cell, ...] = (Cell(0, 0),),
    found: tuple[bool, ...] | None = None,
) -> SimState:
    """Build an agent state at the center of a cell."""
    return SimState(
        agent_cell=cell,
        agent_pos=geom.center(cell, 10.0),
        target_cells=targets,
        found=found if found is not None else (False,) * len(targets),
        visited=frozenset({cell}),
    )
