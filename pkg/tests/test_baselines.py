"""Tests for the comparison planners."""

from __future__ import annotations

from itertools import pairwise

import numpy as np
import pytest

from sarpomcp.baselines import (
    LawnmowerState,
    SweepPhase,
    boustrophedon,
    greedy_next,
    lawnmower_next,
    vanilla_pomcp_plan,
)
from sarpomcp.exceptions import DomainError
from sarpomcp.grid_world import (
    BeliefMap,
    Cell,
    GridEnvironment,
    MapGeometry,
    belief_visit_update,
)
from sarpomcp.models import PlannerConfig
from sarpomcp.pomdp import Action

from . import action_between, make_agent


def _belief(n: int, values: dict[Cell, float]) -> BeliefMap:
    probs = np.zeros((n, n))
    for cell, value in values.items():
        probs[cell.i, cell.j] = value
    return BeliefMap(probs, np.zeros((n, n), dtype=bool))


def test_boustrophedon_from_north_west() -> None:
    """Test a 3 x 2 block entered at its north-west corner."""
    sweep = boustrophedon(Cell(0, 0), Cell(2, 1), Cell(0, 1))
    moves = [action_between(a, b) for a, b in pairwise(sweep)]
    assert sweep[0] == Cell(0, 1)
    assert moves == [
        Action.EAST,
        Action.EAST,
        Action.SOUTH,
        Action.WEST,
        Action.WEST,
    ]


def test_boustrophedon_from_south_east() -> None:
    """Test the sweep starts at the corner nearest the entry."""
    sweep = boustrophedon(Cell(1, 1), Cell(3, 3), Cell(4, 0))
    assert sweep[:4] == [Cell(3, 1), Cell(2, 1), Cell(1, 1), Cell(1, 2)]
    assert len(sweep) == 9
    assert len(set(sweep)) == 9


def test_lawnmower_transit_then_sweep() -> None:
    """Test the agent heads for the nearest mass and sweeps its rectangle."""
    belief = _belief(
        5, {Cell(3, 3): 0.25, Cell(4, 3): 0.25, Cell(3, 4): 0.25, Cell(4, 4): 0.25}
    )
    state = LawnmowerState()
    agent = Cell(0, 0)
    first = lawnmower_next(state, agent, belief)
    assert first == Cell(3, 3)
    assert state.phase is SweepPhase.SWEEPING
    visited = [first]
    agent = first
    belief = belief_visit_update(belief, agent, False)
    for _ in range(3):
        agent = lawnmower_next(state, agent, belief)
        belief = belief_visit_update(belief, agent, False)
        visited.append(agent)
    assert visited == [Cell(3, 3), Cell(4, 3), Cell(4, 4), Cell(3, 4)]


def test_lawnmower_returns_to_transit() -> None:
    """Test an exhausted sweep heads for the remaining mass."""
    belief = _belief(5, {Cell(1, 1): 0.5, Cell(4, 4): 0.5})
    state = LawnmowerState(SweepPhase.SWEEPING, [Cell(1, 1)], 0)
    belief = belief_visit_update(belief, Cell(1, 1), False)
    assert lawnmower_next(state, Cell(1, 1), belief) == Cell(4, 4)
    assert state.phase is SweepPhase.SWEEPING
    assert state.cursor == 0


def test_lawnmower_covers_uniform_belief() -> None:
    """Test a uniform belief is swept cell by cell exactly once."""
    n = 5
    belief = BeliefMap.from_weights(np.ones((n, n)))
    agent = Cell(0, 0)
    belief = belief_visit_update(belief, agent, False)
    state = LawnmowerState()
    returned = []
    while not belief.visited.all():
        agent = lawnmower_next(state, agent, belief)
        returned.append(agent)
        belief = belief_visit_update(belief, agent, False)
    assert len(returned) == n * n - 1
    assert len(set(returned)) == n * n - 1
    assert Cell(0, 0) not in returned


def test_lawnmower_skips_closed_cells() -> None:
    """Test cells without valid positions are left out of the sweep."""
    belief = BeliefMap.from_weights(np.ones((3, 3)))
    open_cells = {Cell(i, j) for i in range(3) for j in range(3)}
    open_cells -= {Cell(1, 0), Cell(0, 1)}
    state = LawnmowerState()
    agent = Cell(0, 0)
    belief = belief_visit_update(belief, agent, False)
    returned = []
    for _ in range(6):
        agent = lawnmower_next(state, agent, belief, open_cells)
        returned.append(agent)
        belief = belief_visit_update(belief, agent, False)
    assert set(returned) == open_cells - {Cell(0, 0)}


@pytest.mark.parametrize(
    ("agent", "ties", "entry"),
    [
        (Cell(0, 0), [Cell(0, 1), Cell(1, 0)], Cell(1, 0)),
        (Cell(2, 2), [Cell(2, 3), Cell(3, 2), Cell(2, 1), Cell(1, 2)], Cell(1, 2)),
        (Cell(2, 2), [Cell(2, 3), Cell(3, 2), Cell(2, 1)], Cell(2, 1)),
        (Cell(2, 2), [Cell(3, 3), Cell(1, 1)], Cell(1, 1)),
    ],
)
def test_lawnmower_entry_tie_break(agent: Cell, ties: list[Cell], entry: Cell) -> None:
    """Test equally near cells with mass are entered in action order."""
    belief = _belief(5, {cell: 1.0 / len(ties) for cell in ties})
    assert lawnmower_next(LawnmowerState(), agent, belief) == entry


def test_lawnmower_uniform_start_heads_east() -> None:
    """Test a corner start on a uniform belief moves east before north."""
    belief = belief_visit_update(
        BeliefMap.from_weights(np.ones((5, 5))), Cell(0, 0), False
    )
    assert lawnmower_next(LawnmowerState(), Cell(0, 0), belief) == Cell(1, 0)


def test_lawnmower_errors() -> None:
    """Test the lawnmower needs reachable mass and a sane cursor."""
    empty = BeliefMap(np.zeros((3, 3)), np.zeros((3, 3), dtype=bool))
    with pytest.raises(DomainError):
        lawnmower_next(LawnmowerState(), Cell(0, 0), empty)
    lonely = _belief(3, {Cell(0, 0): 1.0})
    with pytest.raises(DomainError):
        lawnmower_next(LawnmowerState(), Cell(0, 0), lonely)
    with pytest.raises(DomainError):
        LawnmowerState(cursor=2)


def test_greedy_picks_highest_neighbor() -> None:
    """Test the most probable neighbor wins."""
    belief = _belief(
        5,
        {
            Cell(1, 2): 0.1,
            Cell(2, 1): 0.3,
            Cell(3, 2): 0.2,
            Cell(2, 3): 0.0,
            Cell(0, 0): 0.4,
        },
    )
    assert greedy_next(Cell(2, 2), belief) == Cell(2, 1)


def test_greedy_tie_break() -> None:
    """Test equal neighbors fall back to the fixed action order."""
    belief = _belief(5, {Cell(0, 0): 1.0})
    assert greedy_next(Cell(2, 2), belief) == Cell(1, 2)
    assert greedy_next(Cell(0, 2), belief) == Cell(0, 1)


def test_greedy_respects_open_cells() -> None:
    """Test blocked neighbors are never chosen."""
    belief = _belief(3, {Cell(1, 0): 0.9, Cell(0, 1): 0.1})
    assert greedy_next(Cell(0, 0), belief, {Cell(0, 1), Cell(0, 0)}) == Cell(0, 1)
    with pytest.raises(DomainError):
        greedy_next(Cell(0, 0), belief, {Cell(0, 0)})


def test_greedy_never_illegal() -> None:
    """Test random beliefs and obstacles never yield an illegal cell."""
    rng = np.random.default_rng(13)
    n = 6
    for _ in range(10_000):
        belief = BeliefMap.from_weights(rng.random((n, n)) + 1e-3)
        agent = Cell(int(rng.integers(n)), int(rng.integers(n)))
        open_cells = {
            Cell(i, j) for i in range(n) for j in range(n) if rng.random() > 0.3
        }
        neighbors = {
            Cell(agent.i + di, agent.j + dj)
            for di, dj in ((-1, 0), (0, -1), (1, 0), (0, 1))
        } & open_cells
        if not neighbors:
            with pytest.raises(DomainError):
                greedy_next(agent, belief, open_cells)
            continue
        assert greedy_next(agent, belief, open_cells) in neighbors


def test_vanilla_returns_best_root_action(
    geometry: MapGeometry, open_env: GridEnvironment
) -> None:
    """Test vanilla planning steps towards an adjacent target."""
    belief = _belief(20, {Cell(5, 4): 1.0})
    agent = make_agent(Cell(5, 5), geometry, targets=(Cell(5, 4),))
    action = vanilla_pomcp_plan(
        belief,
        agent,
        PlannerConfig(max_iterations=500),
        open_env,
        np.random.default_rng(3),
    )
    assert action is Action.SOUTH
