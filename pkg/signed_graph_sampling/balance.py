"""Greedy balancing of signed graphs.

Nodes are added one at a time to a bi-colored set S, always along the
strongest edge leaving S. Edges from the new node that disagree with the
coloring are removed (positive edges) or removed while compensating on
neighbouring edges (negative edges), so that L - L_B stays positive
semidefinite for the combinatorial Laplacians.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import heapq
import logging
from typing import Any, Callable

from signed_graph_sampling.exceptions import DisconnectedGraphError, GraphError
from signed_graph_sampling.graph import (
    Coloring,
    Edge,
    SignedGraph,
    connected_components,
)

_LOGGER = logging.getLogger(__name__)

BLUE = 1
RED = -1


class RemovalCase(Enum):
    """How an inconsistent negative edge was removed"""

    CASE1 = "case1"
    CASE2 = "case2"


@dataclass(frozen=True)
class NegativeRemoval:
    """Inconsistent negative edge removed from the working graph"""

    edge: Edge
    case: RemovalCase


@dataclass(frozen=True)
class Augmentation:
    """Weight update of a compensating edge, old weight 0 for created edges"""

    i: int
    j: int
    old_weight: float
    new_weight: float


@dataclass(frozen=True)
class Recoloring:
    """Node recolored against a monochromatic S instead of removing trigger"""

    node: int
    trigger: Edge


@dataclass
class BalanceReport:
    """Audit trail of a balancing run"""

    removed_positive: list[Edge] = field(default_factory=list)
    removed_negative: list[NegativeRemoval] = field(default_factory=list)
    augmented: list[Augmentation] = field(default_factory=list)
    recolored: list[Recoloring] = field(default_factory=list)
    iterations: int = 0

    def is_empty(self) -> bool:
        return not (
            self.removed_positive
            or self.removed_negative
            or self.augmented
            or self.recolored
        )

    def merge(self, other: BalanceReport, nodes: list[int]) -> None:
        """Appends a component report, relabelling local indices to nodes"""

        def edge(local: Edge) -> Edge:
            i, j = nodes[local.i], nodes[local.j]
            return Edge(min(i, j), max(i, j), local.weight)

        self.removed_positive.extend(edge(e) for e in other.removed_positive)
        self.removed_negative.extend(
            NegativeRemoval(edge(r.edge), r.case) for r in other.removed_negative
        )
        self.augmented.extend(
            Augmentation(nodes[a.i], nodes[a.j], a.old_weight, a.new_weight)
            for a in other.augmented
        )
        self.recolored.extend(
            Recoloring(nodes[r.node], edge(r.trigger)) for r in other.recolored
        )
        self.iterations += other.iterations

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation"""
        return {
            "iterations": self.iterations,
            "removed_positive": [list(e) for e in self.removed_positive],
            "removed_negative": [
                {"edge": list(r.edge), "case": r.case.value}
                for r in self.removed_negative
            ],
            "augmented": [
                {"edge": [a.i, a.j], "old_weight": a.old_weight, "new_weight": a.new_weight}
                for a in self.augmented
            ],
            "recolored": [
                {"node": r.node, "trigger": list(r.trigger)} for r in self.recolored
            ],
        }


@dataclass(frozen=True)
class BalanceStep:
    """Mutation event passed to a balance observer"""

    kind: str
    edge: tuple[int, int]
    state: BalanceState


BalanceObserver = Callable[[BalanceStep], None]
# Returns a node of S with the given color, or None when there is none
OppositePolicy = Callable[["BalanceState", int], "int | None"]


def lowest_index_policy(state: BalanceState, color: int) -> int | None:
    """Picks the smallest-index node of S with the given color"""
    return state.lowest_member(color)


class BalanceState:  # pylint: disable=too-many-instance-attributes
    """Mutable state of one greedy balancing run"""

    def __init__(
        self,
        graph: SignedGraph,
        seed: int,
        observer: BalanceObserver | None = None,
        opposite_policy: OppositePolicy | None = None,
    ) -> None:
        if not 0 <= seed < graph.n:
            raise GraphError("Seed node out of range", seed)
        self.graph = graph
        self.adjacency: list[dict[int, float]] = [
            dict(graph.neighbors(node)) for node in range(graph.n)
        ]
        self.color: list[int] = [0] * graph.n
        self.in_s: list[bool] = [False] * graph.n
        self.members: dict[int, set[int]] = {BLUE: set(), RED: set()}
        self._lowest: dict[int, int | None] = {BLUE: None, RED: None}
        # Gd, removed positive edges with their removal-time weights
        self.removed: dict[int, dict[int, float]] = {}
        self.report = BalanceReport()
        self._observer = observer
        self._opposite_policy = opposite_policy or lowest_index_policy
        self._heap: list[tuple[float, int, int]] = []
        self.color[seed] = BLUE
        self.add_to_s(seed)

    @property
    def size(self) -> int:
        """Number of nodes in S"""
        return len(self.members[BLUE]) + len(self.members[RED])

    @property
    def complete(self) -> bool:
        return self.size == self.graph.n

    def lowest_member(self, color: int) -> int | None:
        return self._lowest[color]

    def frontier(self) -> set[int]:
        """Nodes outside S with at least one edge into S"""
        return {
            node
            for node in range(self.graph.n)
            if not self.in_s[node]
            and any(self.in_s[other] for other in self.adjacency[node])
        }

    def add_to_s(self, node: int) -> None:
        """Adds a colored node to S and offers its edges to the frontier"""
        color = self.color[node]
        self.in_s[node] = True
        self.members[color].add(node)
        lowest = self._lowest[color]
        if lowest is None or node < lowest:
            self._lowest[color] = node
        for neighbor, weight in self.adjacency[node].items():
            if not self.in_s[neighbor]:
                heapq.heappush(self._heap, (-abs(weight), neighbor, node))

    def select_next(self) -> tuple[int, int]:
        """Strongest edge (j, i) with j outside and i inside S.

        Ties go to the smaller j, then the smaller i.
        """
        while self._heap:
            _, candidate, member = heapq.heappop(self._heap)
            if not self.in_s[candidate] and member in self.adjacency[candidate]:
                return candidate, member
        raise GraphError("Frontier is empty")

    def remove_inconsistent_positive(self, node: int) -> list[Edge]:
        """Removes positive edges from node to oppositely colored members of S"""
        removed = []
        for other, weight in sorted(self.adjacency[node].items()):
            if (
                self.in_s[other]
                and weight > 0
                and self.color[node] * self.color[other] < 0
            ):
                self._drop_edge(node, other)
                self.removed.setdefault(node, {})[other] = weight
                self.removed.setdefault(other, {})[node] = weight
                edge = _edge(node, other, weight)
                removed.append(edge)
                self.report.removed_positive.append(edge)
                self._notify("remove_positive", node, other)
        return removed

    def inconsistent_negative(self, node: int) -> list[tuple[int, float]]:
        """Negative edges from node to same-colored members of S, weakest first"""
        edges = [
            (other, weight)
            for other, weight in self.adjacency[node].items()
            if self.in_s[other] and weight < 0 and self.color[other] == self.color[node]
        ]
        return sorted(edges, key=lambda item: (abs(item[1]), item[0]))

    def try_case1(self, node: int, other: int) -> bool:
        """Removes (node, other) against two removed positive edges through some k"""
        weight = self.adjacency[node][other]
        threshold = -2.0 * weight
        legs_node = self.removed.get(node, {})
        legs_other = self.removed.get(other, {})
        for k in sorted(legs_node.keys() & legs_other.keys()):
            if legs_node[k] >= threshold and legs_other[k] >= threshold:
                self._drop_edge(node, other)
                self._forget_removed(k, node)
                self._forget_removed(k, other)
                self.report.removed_negative.append(
                    NegativeRemoval(_edge(node, other, weight), RemovalCase.CASE1)
                )
                self._notify("case1", node, other)
                return True
        return False

    def case2_remove(
        self, node: int, other: int
    ) -> tuple[int, list[Augmentation]] | None:
        """Removes (node, other) by pushing its weight onto edges to a node k.

        When S has no node of the opposite color, node is recolored instead and
        None is returned.
        """
        opposite = -self.color[other]
        weight = self.adjacency[node][other]
        if not self.members[opposite]:
            self._recolor(node, other, weight)
            return None
        k = self._opposite_policy(self, opposite)
        if k is None or not self.in_s[k] or self.color[k] != opposite:
            raise GraphError("Opposite color policy returned an invalid node", k)
        updates = []
        for end in (node, other):
            old = self.adjacency[k].get(end, 0.0)
            new = old + 2.0 * weight
            self._set_edge(k, end, new)
            updates.append(Augmentation(min(k, end), max(k, end), old, new))
        self._drop_edge(node, other)
        self.report.augmented.extend(updates)
        self.report.removed_negative.append(
            NegativeRemoval(_edge(node, other, weight), RemovalCase.CASE2)
        )
        self._notify("case2", node, other)
        return k, updates

    def step(self) -> None:
        """Colors and adds one frontier node to S"""
        node, anchor = self.select_next()
        weight = self.adjacency[node][anchor]
        self.color[node] = (1 if weight > 0 else -1) * self.color[anchor]
        self.remove_inconsistent_positive(node)
        for other, _ in self.inconsistent_negative(node):
            if self.color[other] != self.color[node]:
                # consistent again after a recoloring
                continue
            if not self.try_case1(node, other):
                self.case2_remove(node, other)
        self.add_to_s(node)
        self.report.iterations += 1
        _LOGGER.debug("Added node %d to S with color %+d", node, self.color[node])

    def working_graph(self) -> SignedGraph:
        """Snapshot of the working graph"""
        edges = [
            (node, other, weight)
            for node, neighbors in enumerate(self.adjacency)
            for other, weight in neighbors.items()
            if node < other
        ]
        return SignedGraph(self.graph.n, edges, self.graph.self_loops)

    def coloring(self) -> Coloring:
        """Current coloring, uncolored nodes reported as blue"""
        return Coloring(tuple(color or BLUE for color in self.color))

    def _recolor(self, node: int, other: int, weight: float) -> None:
        self.color[node] = -self.color[node]
        self.report.recolored.append(Recoloring(node, _edge(node, other, weight)))
        _LOGGER.debug("Recolored node %d against monochromatic S", node)
        self._notify("recolor", node, other)
        self.remove_inconsistent_positive(node)

    def _drop_edge(self, i: int, j: int) -> None:
        del self.adjacency[i][j]
        del self.adjacency[j][i]

    def _set_edge(self, i: int, j: int, weight: float) -> None:
        if weight == 0.0:
            self.adjacency[i].pop(j, None)
            self.adjacency[j].pop(i, None)
        else:
            self.adjacency[i][j] = weight
            self.adjacency[j][i] = weight

    def _forget_removed(self, i: int, j: int) -> None:
        del self.removed[i][j]
        del self.removed[j][i]

    def _notify(self, kind: str, i: int, j: int) -> None:
        if self._observer is not None:
            self._observer(BalanceStep(kind, (min(i, j), max(i, j)), self))


def _edge(i: int, j: int, weight: float) -> Edge:
    return Edge(min(i, j), max(i, j), weight)


def balance(
    graph: SignedGraph,
    seed: int = 0,
    observer: BalanceObserver | None = None,
    opposite_policy: OppositePolicy | None = None,
) -> tuple[SignedGraph, Coloring, BalanceReport]:
    """Balances a connected signed graph starting from the seed node"""
    if graph.n <= 0:
        raise GraphError("Graph has no nodes", graph.n)
    if len(connected_components(graph)) > 1:
        raise DisconnectedGraphError(
            "Balancing needs a connected graph, balance components separately"
        )
    state = BalanceState(graph, seed, observer, opposite_policy)
    while not state.complete:
        state.step()
    balanced = state.working_graph()
    report = state.report
    _LOGGER.debug(
        "Balanced graph with %d nodes: %d positive and %d negative edges removed, "
        "%d updates, %d recolorings",
        graph.n,
        len(report.removed_positive),
        len(report.removed_negative),
        len(report.augmented),
        len(report.recolored),
    )
    return balanced, state.coloring(), report


def balance_components(
    graph: SignedGraph,
    seed: int = 0,
    observer: BalanceObserver | None = None,
    opposite_policy: OppositePolicy | None = None,
) -> tuple[SignedGraph, Coloring, BalanceReport]:
    """Balances every connected component independently.

    The component holding seed starts from it, the others from their
    lowest node.
    """
    if graph.n <= 0:
        raise GraphError("Graph has no nodes", graph.n)
    if not 0 <= seed < graph.n:
        raise GraphError("Seed node out of range", seed)
    components = connected_components(graph)
    if len(components) == 1:
        return balance(graph, seed, observer, opposite_policy)
    edges: list[tuple[int, int, float]] = []
    colors = [BLUE] * graph.n
    report = BalanceReport()
    for nodes in components:
        local_seed = nodes.index(seed) if seed in nodes else 0
        part, coloring, part_report = balance(
            graph.subgraph(nodes), local_seed, observer, opposite_policy
        )
        for i, j, weight in part.edges():
            edges.append((nodes[i], nodes[j], weight))
        for local, node in enumerate(nodes):
            colors[node] = coloring[local]
        report.merge(part_report, nodes)
    return (
        SignedGraph(graph.n, edges, graph.self_loops),
        Coloring(tuple(colors)),
        report,
    )
