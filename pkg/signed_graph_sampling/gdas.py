"""Gershgorin disc perfect alignment and disc-based sample selection"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
import logging
from typing import Any, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.sparse as sp
from scipy.sparse import csgraph

from signed_graph_sampling.const import (
    BISECTION_WIDTH,
    COVERAGE_TOL,
    DEFAULT_EIG_MAX_ITER,
    DEFAULT_EIG_TOL,
    DENSE_ORACLE_MAX_SIZE,
    REDUCIBLE_TOL,
)
from signed_graph_sampling.exceptions import (
    ConvergenceError,
    DimensionError,
    InputError,
    ReducibleGraphError,
)
from signed_graph_sampling.linalg import (
    SparseSymMatrix,
    canonicalize_signs,
    dense_eig,
    disc_left_ends,
    similarity_scale,
    smallest_eigenpair,
)

_LOGGER = logging.getLogger(__name__)

EIGENSOLVER_AUTO = "auto"
EIGENSOLVER_DENSE = "dense"
EIGENSOLVER_ITERATIVE = "iterative"


@dataclass(frozen=True)
class AlignedOperator:
    """Balanced Laplacian after the similarity transform S L_B S^-1.

    For a connected graph every disc left-end of the transformed matrix sits
    at lambda_min. Disconnected graphs are aligned per component, each at
    its own smallest eigenvalue, recorded in node_lambdas.
    """

    transformed: sp.csr_matrix
    v1: NDArray[np.float64]
    lambda_min: float
    scalars: NDArray[np.float64]
    node_lambdas: NDArray[np.float64]

    @property
    def n(self) -> int:
        return int(self.transformed.shape[0])

    def left_ends(self) -> NDArray[np.float64]:
        return disc_left_ends(self.transformed)

    def alignment_error(self) -> float:
        """Largest deviation of a disc left-end from its alignment target"""
        if self.n == 0:
            return 0.0
        return float(np.max(np.abs(self.left_ends() - self.node_lambdas)))


def _laplacian_components(laplacian: SparseSymMatrix) -> list[NDArray[np.int64]]:
    _, labels = csgraph.connected_components(laplacian.csr, directed=False)
    components: dict[int, list[int]] = {}
    for node, label in enumerate(labels):
        components.setdefault(int(label), []).append(node)
    return [np.array(nodes) for nodes in sorted(components.values(), key=lambda c: c[0])]


def _first_eigenpair(
    block: SparseSymMatrix, tol: float, max_iter: int, eigensolver: str
) -> tuple[float, NDArray[np.float64]]:
    if eigensolver == EIGENSOLVER_DENSE or (
        eigensolver == EIGENSOLVER_AUTO and block.n <= DENSE_ORACLE_MAX_SIZE
    ):
        return dense_eig(block).pair(0)
    try:
        return smallest_eigenpair(block, tol, max_iter)
    except ConvergenceError:
        if block.n > DENSE_ORACLE_MAX_SIZE:
            raise
        _LOGGER.warning(
            "Iterative eigensolver did not converge for n=%d, using dense solver",
            block.n,
        )
        return dense_eig(block).pair(0)


def gdpa_align(
    laplacian: SparseSymMatrix,
    tol: float = DEFAULT_EIG_TOL,
    max_iter: int = DEFAULT_EIG_MAX_ITER,
    eigensolver: str = EIGENSOLVER_AUTO,
) -> AlignedOperator:
    """Aligns all disc left-ends of a balanced Laplacian at lambda_min.

    The transform uses S = diag(1 / v1) where v1 is the first eigenvector.
    """
    if eigensolver not in (EIGENSOLVER_AUTO, EIGENSOLVER_DENSE, EIGENSOLVER_ITERATIVE):
        raise InputError("Unknown eigensolver", eigensolver)
    n = laplacian.n
    if n == 0:
        raise DimensionError("Laplacian is empty")
    v1 = np.zeros(n)
    node_lambdas = np.zeros(n)
    for nodes in _laplacian_components(laplacian):
        value, vector = _first_eigenpair(
            laplacian.submatrix(nodes), tol, max_iter, eigensolver
        )
        small = np.flatnonzero(np.abs(vector) < REDUCIBLE_TOL * np.max(np.abs(vector)))
        if small.size:
            raise ReducibleGraphError(
                "First eigenvector has numerically zero entries, graph is not "
                "balanced or numerically reducible",
                nodes[small].tolist(),
            )
        v1[nodes] = vector
        node_lambdas[nodes] = value
    v1 = canonicalize_signs(v1)
    scalars = 1.0 / v1
    transformed = similarity_scale(laplacian, scalars)
    aligned = AlignedOperator(
        transformed, v1, float(node_lambdas.min()), scalars, node_lambdas
    )
    _LOGGER.debug(
        "Aligned %d discs at lambda_min=%.6g, alignment error %.3e",
        n,
        aligned.lambda_min,
        aligned.alignment_error(),
    )
    return aligned


class Coverage(NamedTuple):
    """Result of one coverage pass at a fixed threshold"""

    samples: list[int]
    scalars: NDArray[np.float64]
    achieved: bool
    threshold: float


class _DiscRows:
    """Per-row centers and off-diagonal magnitudes of H^T H + mu L_p"""

    def __init__(self, aligned: AlignedOperator, mu: float) -> None:
        transformed = aligned.transformed
        off = abs(transformed - sp.diags(transformed.diagonal()))
        off = sp.csr_matrix(off * mu)
        off.eliminate_zeros()
        off.sort_indices()
        self.center = mu * transformed.diagonal()
        self.neighbors = [
            off.indices[off.indptr[i] : off.indptr[i + 1]] for i in range(off.shape[0])
        ]
        self.weights = [
            off.data[off.indptr[i] : off.indptr[i + 1]] for i in range(off.shape[0])
        ]

    def radius(self, node: int, scalars: NDArray[np.float64]) -> float:
        """Radius sum_j |B_ij| / t_j before multiplying by the node's own t_i"""
        return float(np.dot(self.weights[node], 1.0 / scalars[self.neighbors[node]]))

    def degree_order(self) -> list[int]:
        degrees = [len(neighbors) for neighbors in self.neighbors]
        return sorted(range(len(degrees)), key=lambda node: (-degrees[node], node))


def gdas_coverage(
    aligned: AlignedOperator,
    mu: float,
    threshold: float,
    order: Sequence[int] | None = None,
) -> Coverage:
    """Samples and scales discs until every left-end is at least threshold.

    Nodes are visited in descending degree order unless an order is given.
    A visited node below the threshold is sampled, which shifts its center by
    one. Each covered node gets the largest scalar keeping its left-end at the
    threshold, then coverage spreads breadth first to neighbours that can
    reach the threshold with a scalar of at least one.
    """
    if mu <= 0:
        raise InputError("mu must be positive", mu)
    n = aligned.n
    if threshold <= mu * aligned.lambda_min:
        return Coverage([], np.ones(n), True, threshold)
    rows = _DiscRows(aligned, mu)
    center = rows.center.copy()
    scalars = np.ones(n)
    covered = np.zeros(n, dtype=bool)
    samples: list[int] = []
    feasible = True

    def assign(node: int, radius: float) -> None:
        if radius > 0:
            scalars[node] = max(1.0, (center[node] - threshold) / radius)
        covered[node] = True

    def expand(source: int) -> None:
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for neighbor in rows.neighbors[node]:
                neighbor = int(neighbor)
                if covered[neighbor]:
                    continue
                radius = rows.radius(neighbor, scalars)
                if center[neighbor] - radius < threshold:
                    continue
                assign(neighbor, radius)
                queue.append(neighbor)

    visit = rows.degree_order() if order is None else list(order)
    if sorted(visit) != list(range(n)):
        raise InputError("Visiting order must be a permutation of the nodes")
    for node in visit:
        if covered[node]:
            continue
        radius = rows.radius(node, scalars)
        if center[node] - radius < threshold:
            center[node] += 1.0
            samples.append(node)
            if center[node] - radius < threshold:
                feasible = False
        assign(node, radius)
        expand(node)

    left_ends = np.array(
        [center[i] - scalars[i] * rows.radius(i, scalars) for i in range(n)]
    )
    slack = COVERAGE_TOL * max(1.0, float(np.max(np.abs(center))) if n else 1.0)
    achieved = feasible and bool(np.all(left_ends >= threshold - slack))
    return Coverage(samples, scalars, achieved, threshold)


@dataclass(frozen=True)
class SampleSet:
    """Ordered sampled nodes with the threshold and scalars that produced them.

    Baseline samplers leave t_final, mu and scalars unset.
    """

    nodes: tuple[int, ...]
    t_final: float | None = None
    mu: float | None = None
    scalars: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        nodes = tuple(int(node) for node in self.nodes)
        if len(set(nodes)) != len(nodes):
            raise InputError("Sampled nodes must be distinct", nodes)
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def sampling_matrix(self, n: int) -> sp.csr_matrix:
        """H with one row per sample selecting its node"""
        if any(not 0 <= node < n for node in self.nodes):
            raise DimensionError("Sampled node out of range", n)
        count = len(self.nodes)
        return sp.csr_matrix(
            (np.ones(count), (np.arange(count), np.array(self.nodes, dtype=int))),
            shape=(count, n),
        )

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation"""
        return {
            "nodes": list(self.nodes),
            "t_final": self.t_final,
            "mu": self.mu,
            "scalars": None if self.scalars is None else [float(s) for s in self.scalars],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SampleSet:
        try:
            scalars = data.get("scalars")
            return cls(
                tuple(data["nodes"]),
                data.get("t_final"),
                data.get("mu"),
                None if scalars is None else np.asarray(scalars, dtype=float),
            )
        except (KeyError, TypeError, ValueError) as ex:
            raise InputError("Invalid sample set", str(ex)) from ex


def gdas_sample(aligned: AlignedOperator, mu: float, budget: int) -> SampleSet:
    """Largest threshold whose coverage needs at most budget samples.

    Binary search over [mu lambda_min, mu lambda_min + 1] until the bracket is
    narrower than BISECTION_WIDTH.
    """
    n = aligned.n
    if not 0 <= budget <= n:
        raise InputError("Budget must be between 0 and n", budget)
    if mu <= 0:
        raise InputError("mu must be positive", mu)
    low = mu * aligned.lambda_min
    high = low + 1.0
    best = gdas_coverage(aligned, mu, low)
    probes = 0

    def fits(coverage: Coverage) -> bool:
        return coverage.achieved and len(coverage.samples) <= budget

    if budget > 0:
        top = gdas_coverage(aligned, mu, high)
        probes += 1
        if fits(top):
            best, low = top, high
        else:
            while high - low >= BISECTION_WIDTH:
                middle = 0.5 * (low + high)
                coverage = gdas_coverage(aligned, mu, middle)
                probes += 1
                if fits(coverage):
                    best, low = coverage, middle
                else:
                    high = middle
    _LOGGER.debug(
        "Selected %d of %d samples at T=%.9g after %d probes",
        len(best.samples),
        budget,
        low,
        probes,
    )
    return SampleSet(tuple(best.samples), low, mu, best.scalars)


def as_node_list(samples: SampleSet | ArrayLike) -> tuple[int, ...]:
    """Node indices of a sample set or a raw node list"""
    if isinstance(samples, SampleSet):
        return samples.nodes
    return tuple(int(node) for node in np.asarray(samples, dtype=int).ravel())
