"""Shrinking POMCP: tree search, action-sequence extraction and altitude rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
import logging
import time
from typing import TYPE_CHECKING

import numpy as np

from sarpomcp.const import SPARSITY_SLACK
from sarpomcp.exceptions import BoxedInError, DomainError
from sarpomcp.grid_world import Cell
from sarpomcp.pomdp import RewardParams, SimState, legal_actions, step_generative
from sarpomcp.rollout import RolloutConfig, RolloutContext, rollout_value
from sarpomcp.tree import (
    ActionEdge,
    BeliefNode,
    child_for,
    expand,
    uct_select,
    update_stats,
)

if TYPE_CHECKING:
    from sarpomcp.grid_world import BeliefMap, GridEnvironment
    from sarpomcp.models import HeightConfig, PlannerConfig
    from sarpomcp.pomdp import Action
    from sarpomcp.tree import SimulationLog

_LOGGER = logging.getLogger(__package__)


@dataclass(frozen=True, slots=True)
class EdgeSummary:
    """Visit count and value of one root edge."""

    action: Action
    visits: int
    q: float


@dataclass(frozen=True, slots=True)
class PlanStats:
    """Budget accounting of one planner invocation."""

    iterations: int
    root_visits: int
    root_edges: tuple[EdgeSummary, ...]
    elapsed_s: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class PlanResult:
    """Actions to execute until the next decision epoch."""

    actions: tuple[Action, ...]
    stats: PlanStats
    tree: BeliefNode | None = field(default=None, compare=False, repr=False)


@dataclass
class SearchContext:
    """Everything one tree search reads besides the state and the node."""

    cfg: PlannerConfig
    env: GridEnvironment
    belief: BeliefMap
    reward: RewardParams
    rollout: RolloutContext
    log: SimulationLog | None = None

    @classmethod
    def create(
        cls,
        belief: BeliefMap,
        cfg: PlannerConfig,
        env: GridEnvironment,
        log: SimulationLog | None = None,
    ) -> SearchContext:
        """Freeze the belief snapshot and derive reward and rollout inputs."""
        rollout_cfg = RolloutConfig(sample_count=cfg.sample_count, gamma=cfg.gamma)
        return cls(
            cfg=cfg,
            env=env,
            belief=belief,
            reward=RewardParams(alpha=cfg.alpha, belief=belief),
            rollout=RolloutContext(env, belief, cfg.alpha, rollout_cfg),
            log=log,
        )


@dataclass
class SearchTree:
    """A built search tree and what it cost."""

    root: BeliefNode
    iterations: int
    elapsed_s: float

    def stats(self) -> PlanStats:
        """Summarize the root of the tree."""
        return PlanStats(
            iterations=self.iterations,
            root_visits=self.root.visit_count,
            root_edges=tuple(
                EdgeSummary(edge.action, edge.visit_count, edge.q_value)
                for edge in self.root.edges()
            ),
            elapsed_s=self.elapsed_s,
        )


def resolve_p_epsilon(cfg: PlannerConfig, belief: BeliefMap) -> float:
    """Return the sparsity threshold, defaulting to the uniform-mass level."""
    if cfg.p_epsilon is not None:
        return cfg.p_epsilon
    support = belief.support_size
    if support == 0:
        return 1.0
    return (1.0 + SPARSITY_SLACK) / support


def is_non_sparse(node: BeliefNode, p_epsilon: float) -> bool:
    """Return whether a node's cell probability exceeds the threshold."""
    return node.p_here > p_epsilon


def sample_root_state(
    belief: BeliefMap,
    agent: SimState,
    rng: np.random.Generator,
) -> SimState:
    """Draw the locations of the missing targets from the belief."""
    remaining = agent.found.count(False)
    cdf = np.cumsum(belief.probs.ravel())
    draws = np.searchsorted(cdf, rng.random(remaining) * cdf[-1], side="right")
    n = belief.grid_n
    targets = tuple(
        Cell(*divmod(int(min(idx, cdf.size - 1)), n)) for idx in draws.tolist()
    )
    return SimState(
        agent_cell=agent.agent_cell,
        agent_pos=agent.agent_pos,
        target_cells=targets,
        found=(False,) * remaining,
        visited=frozenset({agent.agent_cell}),
    )


def simulate_v(
    s: SimState,
    b: BeliefNode,
    depth: int,
    ctx: SearchContext,
    rng: np.random.Generator,
) -> float:
    """Run one simulation below ``b`` and return its discounted return."""
    if s.is_terminal or depth > ctx.cfg.max_depth:
        return 0.0
    if b.is_leaf:
        expand(b, legal_actions(s, ctx.env))
        b.visit_count += 1
        return rollout_value(s, b, ctx.rollout, rng)
    if not b.children:
        return 0.0
    action = uct_select(b, ctx.cfg.c_uct)
    edge = b.children[action]
    s_next, obs, reward = step_generative(s, action, ctx.reward, rng, ctx.env)
    child = child_for(edge, obs, s_next, ctx.belief)
    q = reward + ctx.cfg.gamma * simulate_v(s_next, child, depth + 1, ctx, rng)
    update_stats([(b, edge)], [q])
    if ctx.log is not None:
        ctx.log.record(edge, q)
    return q


def search_tree(
    belief: BeliefMap,
    agent: SimState,
    cfg: PlannerConfig,
    env: GridEnvironment,
    rng: np.random.Generator,
    *,
    log: SimulationLog | None = None,
) -> SearchTree:
    """Grow a belief tree from the agent's state until a budget runs out.

    The root is expanded before the first simulation, so its visit count
    equals the number of simulations run. At least one simulation always
    runs, even when the wall-clock budget is already spent.
    """
    if belief.is_sentinel:
        msg = "Cannot plan on a belief without probability mass"
        raise DomainError(msg)
    if agent.is_terminal:
        msg = "Cannot plan once every target has been found"
        raise DomainError(msg)
    legal = legal_actions(agent, env)
    if not legal:
        msg = f"No legal action from {agent.agent_cell} at {env.altitude} m"
        raise BoxedInError(msg)
    ctx = SearchContext.create(belief, cfg, env, log)
    root = BeliefNode(
        position=agent.agent_cell,
        p_here=belief.at(agent.agent_cell),
        rep_state=agent,
    )
    expand(root, legal)
    started = time.perf_counter()
    deadline = None if cfg.max_time_s is None else started + cfg.max_time_s
    iterations = 0
    while True:
        state = sample_root_state(belief, agent, rng)
        simulate_v(state, root, 0, ctx, rng)
        iterations += 1
        if iterations >= cfg.max_iterations:
            break
        if deadline is not None and time.perf_counter() >= deadline:
            break
    return SearchTree(root, iterations, time.perf_counter() - started)


def _best_edge(node: BeliefNode) -> ActionEdge | None:
    best: ActionEdge | None = None
    for edge in node.edges():
        if edge.visit_count == 0:
            continue
        if best is None or edge.q_value > best.q_value:
            best = edge
    return best


def best_root_action(root: BeliefNode) -> Action:
    """Return the visited root action with the highest value."""
    edge = _best_edge(root)
    if edge is None:
        msg = "Root has no visited edges"
        raise DomainError(msg)
    return edge.action


def get_action_sequence(
    root: BeliefNode,
    max_level: int,
    p_epsilon: float,
) -> list[Action]:
    """Descend best actions until a non-sparse node or ``max_level``.

    Each step follows the most visited observation child of the chosen
    edge. The first action is emitted even when its child is non-sparse.
    """
    if max_level < 1:
        msg = f"max_level must be at least 1, got {max_level}"
        raise DomainError(msg)
    actions = [best_root_action(root)]
    edge = root.children[actions[0]]
    while True:
        if not edge.children:
            break
        child = max(edge.children.values(), key=lambda n: n.visit_count)
        if is_non_sparse(child, p_epsilon) or len(actions) >= max_level:
            break
        next_edge = _best_edge(child)
        if next_edge is None:
            break
        edge = next_edge
        actions.append(edge.action)
    return actions


def plan(
    belief: BeliefMap,
    agent: SimState,
    cfg: PlannerConfig,
    env: GridEnvironment,
    rng: np.random.Generator,
    *,
    log: SimulationLog | None = None,
) -> PlanResult:
    """Plan a sequence of actions towards the next non-sparse region."""
    tree = search_tree(belief, agent, cfg, env, rng, log=log)
    p_epsilon = resolve_p_epsilon(cfg, belief)
    actions = get_action_sequence(tree.root, cfg.max_level, p_epsilon)
    _LOGGER.debug(
        "Planned %s from %s after %d iterations (P_eps=%.6g)",
        [a.name for a in actions],
        agent.agent_cell,
        tree.iterations,
        p_epsilon,
    )
    return PlanResult(tuple(actions), tree.stats(), tree.root)


class HeightAction(StrEnum):
    """Enum for the outcomes of the altitude rule."""

    KEEP = "keep"
    RAISE = "raise"
    NO_FLY_REPLAN = "no_fly_replan"


@dataclass(frozen=True, slots=True)
class HeightDecision:
    """Altitude to enter a cell at, or the verdict that it cannot be entered."""

    action: HeightAction
    altitude: float
    steps: int = 0


def adjust_height(
    cell: Cell,
    h: float,
    hc: HeightConfig,
    env: GridEnvironment,
) -> HeightDecision:
    """Find the lowest altitude step at which a cell has enough valid positions."""
    if h > hc.h_max_m:
        msg = f"Altitude {h} m exceeds the ceiling of {hc.h_max_m} m"
        raise DomainError(msg)
    view = env if env.altitude == h else env.with_altitude(h)
    if view.count_valid(cell) >= hc.tau:
        return HeightDecision(HeightAction.KEEP, h)
    steps = 0
    while h < hc.h_max_m:
        h = min(h + hc.delta_h_m, hc.h_max_m)
        steps += 1
        if env.with_altitude(h).count_valid(cell) >= hc.tau:
            return HeightDecision(HeightAction.RAISE, h, steps)
    return HeightDecision(HeightAction.NO_FLY_REPLAN, h, steps)
