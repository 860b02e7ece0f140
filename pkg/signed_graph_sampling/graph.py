"""Signed graphs, Laplacians and graph frequency utilities"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
import logging
import math
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.sparse as sp
from scipy.sparse import csgraph

from signed_graph_sampling.exceptions import (
    DataError,
    DimensionError,
    GraphError,
    InputError,
)
from signed_graph_sampling.linalg import SparseSymMatrix
from signed_graph_sampling.util import format_float, open_text

_LOGGER = logging.getLogger(__name__)


class Edge(NamedTuple):
    """Undirected edge with i < j"""

    i: int
    j: int
    weight: float


class SignedGraph:
    """Undirected weighted graph with signed edge weights and self-loops"""

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, float]] = (),
        self_loops: ArrayLike | None = None,
    ) -> None:
        if n < 0:
            raise GraphError("Node count must not be negative", n)
        weights: dict[tuple[int, int], float] = {}
        for i, j, weight in edges:
            i, j, weight = int(i), int(j), float(weight)
            if i == j:
                raise GraphError("Self-loops must be given as self_loops", (i, j))
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError("Edge endpoint out of range", (i, j))
            if weight == 0.0 or not math.isfinite(weight):
                raise GraphError("Edge weight must be finite and nonzero", (i, j, weight))
            key = (i, j) if i < j else (j, i)
            if key in weights:
                raise GraphError("Duplicate edge", key)
            weights[key] = weight
        if self_loops is None:
            loops = np.zeros(n)
        else:
            loops = np.array(self_loops, dtype=float, copy=True)
            if loops.shape != (n,):
                raise DimensionError("Self-loop vector length must equal n", loops.shape)
            if not np.all(np.isfinite(loops)):
                raise GraphError("Self-loop weights must be finite")
        loops.setflags(write=False)
        self._n = n
        self._weights = dict(sorted(weights.items()))
        self._loops = loops

    @property
    def n(self) -> int:
        return self._n

    @property
    def self_loops(self) -> NDArray[np.float64]:
        """Read-only self-loop weights"""
        return self._loops

    @property
    def num_edges(self) -> int:
        return len(self._weights)

    def edges(self) -> list[Edge]:
        """Edges sorted by (i, j)"""
        return [Edge(i, j, w) for (i, j), w in self._weights.items()]

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges())

    def has_edge(self, i: int, j: int) -> bool:
        return _key(i, j) in self._weights

    def weight(self, i: int, j: int) -> float:
        """Weight of edge (i, j), raises GraphError when absent"""
        try:
            return self._weights[_key(i, j)]
        except KeyError as ex:
            raise GraphError("Edge not in graph", (i, j)) from ex

    @cached_property
    def _adjacency(self) -> list[dict[int, float]]:
        adjacency: list[dict[int, float]] = [{} for _ in range(self._n)]
        for (i, j), weight in self._weights.items():
            adjacency[i][j] = weight
            adjacency[j][i] = weight
        return adjacency

    def neighbors(self, i: int) -> Mapping[int, float]:
        """Neighbor to weight mapping of node i"""
        return self._adjacency[i]

    def degree(self, i: int) -> int:
        return len(self._adjacency[i])

    def weighted_degree(self, absolute: bool = True) -> NDArray[np.float64]:
        """Per-node sum of (absolute) edge weights, self-loops excluded"""
        degrees = np.zeros(self._n)
        for (i, j), weight in self._weights.items():
            value = abs(weight) if absolute else weight
            degrees[i] += value
            degrees[j] += value
        return degrees

    def has_negative_edges(self) -> bool:
        return any(weight < 0 for weight in self._weights.values())

    def edge_arrays(self) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
        """Edge endpoints and weights as parallel arrays"""
        if not self._weights:
            return np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0)
        keys = np.array(list(self._weights.keys()), dtype=int)
        return keys[:, 0], keys[:, 1], np.array(list(self._weights.values()))

    def adjacency_matrix(self, absolute: bool = False) -> sp.csr_matrix:
        """Symmetric adjacency matrix without self-loops"""
        rows, cols, weights = self.edge_arrays()
        if absolute:
            weights = np.abs(weights)
        matrix = sp.coo_matrix(
            (
                np.concatenate([weights, weights]),
                (np.concatenate([rows, cols]), np.concatenate([cols, rows])),
            ),
            shape=(self._n, self._n),
        )
        return sp.csr_matrix(matrix)

    def subgraph(self, nodes: Sequence[int]) -> SignedGraph:
        """Induced subgraph relabelled to positions in nodes"""
        position = {node: index for index, node in enumerate(nodes)}
        edges = [
            (position[i], position[j], w)
            for (i, j), w in self._weights.items()
            if i in position and j in position
        ]
        return SignedGraph(len(nodes), edges, self._loops[list(nodes)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignedGraph):
            return NotImplemented
        return (
            self._n == other.n
            and self._weights == dict(other.edges_dict())
            and bool(np.array_equal(self._loops, other.self_loops))
        )

    def edges_dict(self) -> dict[tuple[int, int], float]:
        """Copy of the (i, j) to weight mapping"""
        return dict(self._weights)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SignedGraph(n={self._n}, edges={self.num_edges})"


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _sign(value: float) -> int:
    return 1 if value > 0 else -1


@dataclass(frozen=True)
class Coloring:
    """Per-node color in {+1, -1}"""

    beta: tuple[int, ...]

    def __post_init__(self) -> None:
        beta = tuple(int(value) for value in self.beta)
        if any(value not in (1, -1) for value in beta):
            raise GraphError("Colors must be +1 or -1", beta)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def uniform(cls, n: int) -> Coloring:
        return cls((1,) * n)

    def __len__(self) -> int:
        return len(self.beta)

    def __getitem__(self, node: int) -> int:
        return self.beta[node]

    def as_array(self) -> NDArray[np.int64]:
        return np.array(self.beta, dtype=int)


class BoundaryKind(Enum):
    """Boundary condition kind of a second difference matrix"""

    NEUMANN_MID = "neumann_mid"
    DIRICHLET_MID = "dirichlet_mid"


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary condition at one end of a path"""

    kind: BoundaryKind
    weight: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is BoundaryKind.DIRICHLET_MID and not self.weight > 0:
            raise InputError("Dirichlet weight must be positive", self.weight)

    @classmethod
    def neumann(cls) -> BoundaryCondition:
        return cls(BoundaryKind.NEUMANN_MID)

    @classmethod
    def dirichlet(cls, weight: float) -> BoundaryCondition:
        return cls(BoundaryKind.DIRICHLET_MID, float(weight))

    @property
    def self_loop(self) -> float:
        """Self-loop weight added at the boundary node"""
        if self.kind is BoundaryKind.DIRICHLET_MID:
            return 2.0 * self.weight
        return 0.0


def _laplacian(graph: SignedGraph, loops: NDArray[np.float64]) -> SparseSymMatrix:
    rows, cols, weights = graph.edge_arrays()
    diagonal = loops.astype(float).copy()
    np.add.at(diagonal, rows, weights)
    np.add.at(diagonal, cols, weights)
    nodes = np.arange(graph.n)
    matrix = sp.coo_matrix(
        (
            np.concatenate([-weights, -weights, diagonal]),
            (np.concatenate([rows, cols, nodes]), np.concatenate([cols, rows, nodes])),
        ),
        shape=(graph.n, graph.n),
    )
    return SparseSymMatrix(matrix)


def generalized_laplacian(graph: SignedGraph) -> SparseSymMatrix:
    """L = D - W + diag(W), self-loops on the diagonal"""
    return _laplacian(graph, graph.self_loops)


def combinatorial_laplacian(graph: SignedGraph) -> SparseSymMatrix:
    """L = D - W ignoring self-loops"""
    return _laplacian(graph, np.zeros(graph.n))


def glr(laplacian: SparseSymMatrix, x: ArrayLike) -> float:
    """Graph Laplacian regularizer x^T L x"""
    vector = np.asarray(x, dtype=float)
    if vector.shape != (laplacian.n,):
        raise DimensionError("Signal length does not match Laplacian", vector.shape)
    return float(vector @ (laplacian.csr @ vector))


def edge_variation(graph: SignedGraph, x: ArrayLike) -> float:
    """Edge-sum form of the regularizer: sum W_ij (x_i - x_j)^2 + sum W_ii x_i^2"""
    vector = np.asarray(x, dtype=float)
    if vector.shape != (graph.n,):
        raise DimensionError("Signal length does not match graph", vector.shape)
    rows, cols, weights = graph.edge_arrays()
    return float(
        np.sum(weights * (vector[rows] - vector[cols]) ** 2)
        + np.sum(graph.self_loops * vector**2)
    )


def connected_components(graph: SignedGraph) -> list[list[int]]:
    """Connected components as sorted node lists, ordered by lowest node"""
    if graph.n == 0:
        return []
    count, labels = csgraph.connected_components(
        graph.adjacency_matrix(absolute=True), directed=False
    )
    components: dict[int, list[int]] = {}
    for node, label in enumerate(labels):
        components.setdefault(int(label), []).append(node)
    _LOGGER.debug("Graph has %d connected components", count)
    return sorted(components.values(), key=lambda nodes: nodes[0])


def is_balanced(graph: SignedGraph) -> Coloring | None:
    """Two-coloring certifying balance, or None for an unbalanced graph.

    Each component is rooted at its lowest node, colored +1.
    """
    colors = [0] * graph.n
    for root in range(graph.n):
        if colors[root]:
            continue
        colors[root] = 1
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for neighbor, weight in sorted(graph.neighbors(node).items()):
                expected = _sign(weight) * colors[node]
                if not colors[neighbor]:
                    colors[neighbor] = expected
                    queue.append(neighbor)
                elif colors[neighbor] != expected:
                    return None
    return Coloring(tuple(colors))


def edge_consistency(graph: SignedGraph, coloring: Coloring, edge: tuple[int, int]) -> int:
    """+1 if the edge is consistent with the coloring, -1 otherwise"""
    i, j = edge[0], edge[1]
    weight = graph.weight(i, j)
    return coloring[i] * coloring[j] * _sign(weight)


def signed_switch(graph: SignedGraph, coloring: Coloring) -> SignedGraph:
    """Positive graph with W'_ij = beta_i beta_j W_ij.

    Self-loops take up the change in degree, so the generalized Laplacian of
    the result is T L T with T = diag(beta).
    """
    if len(coloring) != graph.n:
        raise DimensionError("Coloring length does not match graph", len(coloring))
    edges = []
    loops = graph.self_loops.copy()
    for i, j, weight in graph.edges():
        switched = coloring[i] * coloring[j] * weight
        if switched < 0:
            raise GraphError("Coloring is not a balance certificate", (i, j))
        if switched != weight:
            loops[i] += 2.0 * weight
            loops[j] += 2.0 * weight
        edges.append((i, j, switched))
    return SignedGraph(graph.n, edges, loops)


def second_difference(
    n: int,
    left: BoundaryCondition,
    right: BoundaryCondition,
    weights: ArrayLike | None = None,
) -> SparseSymMatrix:
    """Second difference matrix of a weighted path with boundary conditions"""
    if n < 2:
        raise DimensionError("Path needs at least two nodes", n)
    edge_weights = np.ones(n - 1) if weights is None else np.asarray(weights, dtype=float)
    if edge_weights.shape != (n - 1,):
        raise DimensionError("Path needs n - 1 weights", edge_weights.shape)
    if np.any(edge_weights <= 0):
        raise InputError("Path weights must be positive")
    loops = np.zeros(n)
    loops[0] += left.self_loop
    loops[-1] += right.self_loop
    path = SignedGraph(n, [(i, i + 1, w) for i, w in enumerate(edge_weights)], loops)
    return generalized_laplacian(path)


def nodal_domains(
    graph: SignedGraph, x: ArrayLike, coloring: Coloring | None = None
) -> int:
    """Number of strong nodal domains of x.

    An edge joins a domain when sign(x_i) sign(x_j) = sign(W_ij); nodes with
    x_i = 0 belong to no domain. With a coloring the count is taken on the
    switched graph and signal, which gives the same result.
    """
    vector = np.asarray(x, dtype=float)
    if vector.shape != (graph.n,):
        raise DimensionError("Signal length does not match graph", vector.shape)
    if coloring is not None:
        graph = signed_switch(graph, coloring)
        vector = coloring.as_array() * vector
    nonzero = np.flatnonzero(vector != 0)
    if nonzero.size == 0:
        return 0
    rows, cols, weights = graph.edge_arrays()
    signs = np.sign(vector)
    qualifying = (
        (signs[rows] != 0)
        & (signs[cols] != 0)
        & (signs[rows] * signs[cols] == np.sign(weights))
    )
    position = np.full(graph.n, -1)
    position[nonzero] = np.arange(nonzero.size)
    links = sp.coo_matrix(
        (
            np.ones(int(qualifying.sum())),
            (position[rows[qualifying]], position[cols[qualifying]]),
        ),
        shape=(nonzero.size, nonzero.size),
    )
    count, _ = csgraph.connected_components(sp.csr_matrix(links), directed=False)
    return int(count)


def is_ms(graph: SignedGraph, x: ArrayLike) -> bool:
    """True if x is maximally sign-smooth on graph"""
    vector = np.asarray(x, dtype=float)
    if vector.shape != (graph.n,):
        raise DimensionError("Signal length does not match graph", vector.shape)
    rows, cols, weights = graph.edge_arrays()
    signs = np.sign(vector)
    return bool(
        np.all(signs[rows] != 0)
        and np.all(signs[cols] != 0)
        and np.all(signs[rows] == np.sign(weights) * signs[cols])
    )


def write_edge_list(graph: SignedGraph, target: str | Path | IO[str]) -> None:
    """Writes graph as `n <count>` followed by `i j w` lines, self-loops as `i i w`"""
    with open_text(target, "w") as stream:
        stream.write(f"n {graph.n}\n")
        for i, j, weight in graph.edges():
            stream.write(f"{i} {j} {format_float(weight)}\n")
        for node, weight in enumerate(graph.self_loops):
            if weight != 0.0:
                stream.write(f"{node} {node} {format_float(weight)}\n")


def read_edge_list(source: str | Path | IO[str]) -> SignedGraph:
    """Reads a graph in edge-list format; blank lines and # comments are skipped"""
    count: int | None = None
    edges: list[tuple[int, int, float]] = []
    loops: dict[int, float] = {}
    with open_text(source, "r") as stream:
        for number, raw in enumerate(stream, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if count is None:
                if len(fields) != 2 or fields[0] != "n":
                    raise DataError("Expected header `n <count>`", line, line=number)
                count = _parse(int, fields[1], number)
                continue
            if len(fields) != 3:
                raise DataError("Expected `i j w`", line, line=number)
            i = _parse(int, fields[0], number)
            j = _parse(int, fields[1], number)
            weight = _parse(float, fields[2], number)
            if i == j:
                if i in loops:
                    raise DataError("Duplicate self-loop", i, line=number)
                if not 0 <= i < count:
                    raise DataError("Node out of range", i, line=number)
                loops[i] = weight
            else:
                edges.append((i, j, weight))
    if count is None:
        raise DataError("Missing header `n <count>`")
    self_loops = np.zeros(count)
    for node, weight in loops.items():
        self_loops[node] = weight
    try:
        return SignedGraph(count, edges, self_loops)
    except GraphError as ex:
        raise DataError("Invalid edge list", str(ex)) from ex


def _parse(kind: type, text: str, line: int):
    try:
        return kind(text)
    except ValueError as ex:
        raise DataError("Cannot parse value", text, line=line) from ex
