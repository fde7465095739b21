"""Comparison planners: lawnmower sweep, greedy ascent and vanilla POMCP."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
import logging
from typing import TYPE_CHECKING

from sarpomcp.exceptions import DomainError
from sarpomcp.grid_world import Cell
from sarpomcp.planner import best_root_action, search_tree
from sarpomcp.pomdp import ACTION_ORDER, destination

if TYPE_CHECKING:
    from collections.abc import Callable, Collection

    import numpy as np

    from sarpomcp.grid_world import BeliefMap, GridEnvironment
    from sarpomcp.models import PlannerConfig
    from sarpomcp.pomdp import Action, SimState
    from sarpomcp.tree import BeliefNode, SimulationLog

_LOGGER = logging.getLogger(__package__)


class SweepPhase(StrEnum):
    """Enum for the phases of a lawnmower search."""

    TRANSIT = "transit"
    SWEEPING = "sweeping"


@dataclass
class LawnmowerState:
    """Progress of a lawnmower search through its sweep."""

    phase: SweepPhase = SweepPhase.TRANSIT
    sweep: list[Cell] = field(default_factory=list)
    cursor: int = 0

    def __post_init__(self) -> None:
        """Validate the cursor."""
        if not 0 <= self.cursor <= len(self.sweep):
            msg = f"Sweep cursor {self.cursor} outside 0..{len(self.sweep)}"
            raise DomainError(msg)


def boustrophedon(lower: Cell, upper: Cell, entry: Cell) -> list[Cell]:
    """Return the back-and-forth sweep of a rectangle.

    Rows run east-west; the sweep starts on the row nearest the entry, at
    the row end nearest the entry, and steps one row at a time.
    """
    i0, j0 = lower
    i1, j1 = upper
    rows = range(j0, j1 + 1)
    if abs(entry.j - j1) < abs(entry.j - j0):
        rows = range(j1, j0 - 1, -1)
    eastward = abs(entry.i - i0) <= abs(entry.i - i1)
    sweep: list[Cell] = []
    for j in rows:
        columns = range(i0, i1 + 1) if eastward else range(i1, i0 - 1, -1)
        sweep.extend(Cell(i, j) for i in columns)
        eastward = not eastward
    return sweep


def _manhattan(a: Cell, b: Cell) -> int:
    return abs(a.i - b.i) + abs(a.j - b.j)


def _heading_rank(agent_cell: Cell, cell: Cell) -> int:
    """Return the position in action order of the first move toward ``cell``."""
    here = _manhattan(agent_cell, cell)
    for rank, action in enumerate(ACTION_ORDER):
        if _manhattan(destination(agent_cell, action), cell) < here:
            return rank
    return len(ACTION_ORDER)


def _nearest_nonzero(
    agent_cell: Cell,
    belief: BeliefMap,
    open_cells: Collection[Cell] | None,
) -> Cell:
    """Return the closest cell with mass; equal distances go in action order."""
    candidates = [
        cell
        for cell in belief.nonzero_cells()
        if cell != agent_cell and (open_cells is None or cell in open_cells)
    ]
    if not candidates:
        msg = "Lawnmower found no reachable cell with probability mass"
        raise DomainError(msg)
    return min(
        candidates,
        key=lambda cell: (
            (cell.i - agent_cell.i) ** 2 + (cell.j - agent_cell.j) ** 2,
            _heading_rank(agent_cell, cell),
        ),
    )


def lawnmower_next(
    state: LawnmowerState,
    agent_cell: Cell,
    belief: BeliefMap,
    open_cells: Collection[Cell] | None = None,
) -> Cell:
    """Return the next cell of a lawnmower search and advance ``state``.

    Transit heads for the nearest cell with mass and lays a sweep over the
    bounding rectangle of the mass. Sweeping returns the rectangle's cells
    in order, skipping searched and blocked cells; an exhausted sweep goes
    back to transit.
    """
    if belief.is_sentinel:
        msg = "Lawnmower needs a belief with probability mass"
        raise DomainError(msg)
    if state.phase is SweepPhase.SWEEPING:
        while state.cursor < len(state.sweep):
            cell = state.sweep[state.cursor]
            state.cursor += 1
            if cell == agent_cell or belief.visited[cell.i, cell.j]:
                continue
            if open_cells is not None and cell not in open_cells:
                continue
            return cell
        _LOGGER.debug("Lawnmower sweep exhausted at %s, back to transit", agent_cell)
        state.phase = SweepPhase.TRANSIT
    entry = _nearest_nonzero(agent_cell, belief, open_cells)
    cells = belief.nonzero_cells()
    lower = Cell(min(c.i for c in cells), min(c.j for c in cells))
    upper = Cell(max(c.i for c in cells), max(c.j for c in cells))
    state.sweep = boustrophedon(lower, upper, entry)
    state.cursor = 0
    state.phase = SweepPhase.SWEEPING
    _LOGGER.debug("Lawnmower transit to %s, sweeping %s..%s", entry, lower, upper)
    return entry


def greedy_next(
    agent_cell: Cell,
    belief: BeliefMap,
    open_cells: Collection[Cell] | None = None,
) -> Cell:
    """Return the legal neighbor with the highest belief, ties in action order."""
    n = belief.grid_n
    best: Cell | None = None
    best_value = -1.0
    for action in ACTION_ORDER:
        cell = destination(agent_cell, action)
        if not (0 <= cell.i < n and 0 <= cell.j < n):
            continue
        if open_cells is not None and cell not in open_cells:
            continue
        value = belief.at(cell)
        if value > best_value:
            best, best_value = cell, value
    if best is None:
        msg = f"Greedy planner has no legal neighbor of {agent_cell}"
        raise DomainError(msg)
    return best


def vanilla_pomcp_plan(
    belief: BeliefMap,
    agent: SimState,
    cfg: PlannerConfig,
    env: GridEnvironment,
    rng: np.random.Generator,
    *,
    log: SimulationLog | None = None,
    on_tree: Callable[[BeliefNode], None] | None = None,
) -> Action:
    """Build the same tree as the shrinking planner and return one root action."""
    tree = search_tree(belief, agent, cfg, env, rng, log=log)
    if on_tree is not None:
        on_tree(tree.root)
    return best_root_action(tree.root)
