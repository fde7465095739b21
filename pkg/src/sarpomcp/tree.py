"""Alternating belief/action tree with UCT selection."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import TYPE_CHECKING

from sarpomcp.exceptions import DomainError
from sarpomcp.pomdp import ACTION_ORDER, Action

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from sarpomcp.grid_world import BeliefMap, Cell
    from sarpomcp.pomdp import Observation, SimState


@dataclass(eq=False, slots=True)
class ActionEdge:
    """Statistics of taking one action from a belief node."""

    action: Action
    visit_count: int = 0
    q_value: float = 0.0
    children: dict[Observation, BeliefNode] = field(default_factory=dict)


@dataclass(eq=False, slots=True)
class BeliefNode:
    """A belief node, keyed by the observation history leading to it.

    ``visit_count`` counts selection visits, including the visit that
    expanded the node; the root is expanded up front and only counts
    the simulations passing through it.
    """

    position: Cell
    p_here: float
    rep_state: SimState | None = None
    visit_count: int = 0
    expanded: bool = False
    children: dict[Action, ActionEdge] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        """Return whether the node has not been expanded yet."""
        return not self.expanded

    def edges(self) -> list[ActionEdge]:
        """Return the child edges in fixed action order."""
        return [self.children[a] for a in ACTION_ORDER if a in self.children]


def uct_select(b: BeliefNode, c: float) -> Action:
    """Select the action maximizing the UCT score.

    Unvisited edges come first, in fixed action order; ties in the score
    are broken by the same order.
    """
    edges = b.edges()
    if not edges:
        msg = f"Cannot select an action at {b.position}: node has no edges"
        raise DomainError(msg)
    for edge in edges:
        if edge.visit_count == 0:
            return edge.action
    log_n = math.log(b.visit_count)
    best = edges[0]
    best_score = -math.inf
    for edge in edges:
        score = edge.q_value + c * math.sqrt(log_n / edge.visit_count)
        if score > best_score:
            best, best_score = edge, score
    return best.action


def expand(b: BeliefNode, legal: Iterable[Action]) -> None:
    """Give a leaf one zeroed edge per legal action."""
    if b.expanded:
        msg = f"Node at {b.position} is already expanded"
        raise DomainError(msg)
    for action in sorted(legal):
        b.children[action] = ActionEdge(action)
    b.expanded = True


def child_for(
    edge: ActionEdge,
    o: Observation,
    s_next: SimState,
    root_belief: BeliefMap,
) -> BeliefNode:
    """Return the child of ``edge`` for observation ``o``, creating it if new."""
    node = edge.children.get(o)
    if node is None:
        node = BeliefNode(
            position=s_next.agent_cell,
            p_here=root_belief.at(s_next.agent_cell),
            rep_state=s_next,
        )
        edge.children[o] = node
    return node


def update_stats(
    path: Sequence[tuple[BeliefNode, ActionEdge]],
    returns: Sequence[float],
) -> None:
    """Back discounted returns up through the traversed (node, edge) pairs."""
    if len(path) != len(returns):
        msg = f"{len(path)} path steps but {len(returns)} returns"
        raise DomainError(msg)
    for (node, edge), q in zip(path, returns, strict=True):
        node.visit_count += 1
        edge.visit_count += 1
        edge.q_value += (q - edge.q_value) / edge.visit_count


@dataclass
class SimulationLog:
    """Ordered record of every backup made while building a tree."""

    entries: list[tuple[ActionEdge, float]] = field(default_factory=list)

    def record(self, edge: ActionEdge, q: float) -> None:
        """Append one backup."""
        self.entries.append((edge, q))

    def replay(self) -> dict[int, tuple[int, float]]:
        """Recompute (N, Q) per edge, keyed by ``id(edge)``."""
        stats: dict[int, tuple[int, float]] = {}
        for edge, q in self.entries:
            count, value = stats.get(id(edge), (0, 0.0))
            count += 1
            value += (q - value) / count
            stats[id(edge)] = (count, value)
        return stats

    def returns_by_edge(self) -> dict[int, list[float]]:
        """Group the backed-up returns per edge, keyed by ``id(edge)``."""
        grouped: dict[int, list[float]] = {}
        for edge, q in self.entries:
            grouped.setdefault(id(edge), []).append(q)
        return grouped


def iter_edges(root: BeliefNode) -> Iterable[ActionEdge]:
    """Yield every edge of the tree, depth first in fixed action order."""
    stack = [root]
    while stack:
        node = stack.pop()
        for edge in node.edges():
            yield edge
            stack.extend(reversed(list(edge.children.values())))


def dump_tree(root: BeliefNode, max_depth: int | None = None) -> str:
    """Render the tree as text, one node per line indented by depth."""
    lines: list[str] = []

    def _walk(node: BeliefNode, depth: int, label: str) -> None:
        indent = "  " * (2 * depth)
        lines.append(
            f"{indent}{label}b N={node.visit_count} P={node.p_here:.6g} "
            f"pos=({node.position.i},{node.position.j})"
        )
        if max_depth is not None and depth >= max_depth:
            return
        for edge in node.edges():
            lines.append(
                f"{indent}  a={edge.action.name} N={edge.visit_count} "
                f"Q={edge.q_value:.6g}"
            )
            for obs, child in edge.children.items():
                _walk(
                    child,
                    depth + 1,
                    f"o=({obs.new_cell.i},{obs.new_cell.j},{obs.captured}) ",
                )

    _walk(root, 0, "")
    return "\n".join(lines)
