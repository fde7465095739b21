"""State, action, observation and reward of the search POMDP."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import TYPE_CHECKING, NamedTuple

from sarpomcp.exceptions import DomainError
from sarpomcp.grid_world import Cell, FinePosition

if TYPE_CHECKING:
    import numpy as np

    from sarpomcp.grid_world import BeliefMap, GridEnvironment


class Action(IntEnum):
    """Enum for the cardinal moves, in their fixed tie-breaking order."""

    WEST = 0
    SOUTH = 1
    EAST = 2
    NORTH = 3


ACTION_ORDER: tuple[Action, ...] = tuple(Action)

_DELTAS: dict[Action, tuple[int, int]] = {
    Action.WEST: (-1, 0),
    Action.SOUTH: (0, -1),
    Action.EAST: (1, 0),
    Action.NORTH: (0, 1),
}


def destination(cell: Cell, action: Action) -> Cell:
    """Return the cell one step away in the direction of ``action``."""
    di, dj = _DELTAS[action]
    return Cell(cell.i + di, cell.j + dj)


@dataclass(frozen=True, slots=True)
class SimState:
    """Simulated world state: the agent, the targets and the searched cells."""

    agent_cell: Cell
    agent_pos: FinePosition
    target_cells: tuple[Cell, ...]
    found: tuple[bool, ...]
    visited: frozenset[Cell]

    def __post_init__(self) -> None:
        """Validate the state."""
        if len(self.found) != len(self.target_cells):
            msg = "Every target needs exactly one found flag"
            raise DomainError(msg)
        if self.agent_cell not in self.visited:
            msg = f"Visited cells must include the agent cell {self.agent_cell}"
            raise DomainError(msg)

    @property
    def is_terminal(self) -> bool:
        """Return whether every target has been found."""
        return all(self.found)

    def unfound_target_in(self, cell: Cell) -> bool:
        """Return whether an unfound target sits in ``cell``."""
        return any(
            target == cell and not found
            for target, found in zip(self.target_cells, self.found, strict=True)
        )


class Observation(NamedTuple):
    """The cell reached and the number of targets captured there."""

    new_cell: Cell
    captured: int


@dataclass(frozen=True, slots=True)
class RewardParams:
    """Token weight and the belief snapshot the token values come from."""

    alpha: float
    belief: BeliefMap

    def __post_init__(self) -> None:
        """Validate the reward weight."""
        if self.alpha < 0:
            msg = f"Reward alpha must be non-negative, got {self.alpha}"
            raise DomainError(msg)


def legal_actions(s: SimState, env: GridEnvironment) -> list[Action]:
    """Return the actions leading to a grid cell with a valid position."""
    open_cells = env.open_cells
    return [a for a in ACTION_ORDER if destination(s.agent_cell, a) in open_cells]


def reward_components(
    captured: int,
    first_visit: bool,  # noqa: FBT001
    p_norm: float,
    alpha: float,
) -> float:
    """Return the target term plus the weighted token term of one step.

    The target term is binary: several captures in one step still earn 1.
    """
    if not 0.0 <= p_norm <= 1.0:
        msg = f"Normalized probability must lie in [0, 1], got {p_norm}"
        raise DomainError(msg)
    target = 1.0 if captured > 0 else 0.0
    token = p_norm if first_visit else 0.0
    return target + alpha * token


def step_generative(
    s: SimState,
    a: Action,
    rp: RewardParams,
    rng: np.random.Generator,  # noqa: ARG001
    env: GridEnvironment,
) -> tuple[SimState, Observation, float]:
    """Sample a successor, an observation and a reward for ``a`` in ``s``.

    The transition is deterministic; ``rng`` is accepted so that stochastic
    variants share the signature.
    """
    new_cell = destination(s.agent_cell, a)
    if new_cell not in env.open_cells:
        msg = f"Action {a.name} from {s.agent_cell} is not legal"
        raise DomainError(msg)
    found = list(s.found)
    captured = 0
    for index, target in enumerate(s.target_cells):
        if target == new_cell and not found[index]:
            found[index] = True
            captured += 1
    first_visit = new_cell not in s.visited
    reward = reward_components(captured, first_visit, rp.belief.at(new_cell), rp.alpha)
    successor = SimState(
        agent_cell=new_cell,
        agent_pos=env.geom.center(new_cell, s.agent_pos.z),
        target_cells=s.target_cells,
        found=tuple(found),
        visited=s.visited | {new_cell} if first_visit else s.visited,
    )
    return successor, Observation(new_cell, captured), reward
