"""Signal reconstruction from samples and evaluation metrics"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.linalg
import scipy.sparse as sp

from signed_graph_sampling.const import DEFAULT_CG_TOL, DEFAULT_EPS, SINGULAR_TOL
from signed_graph_sampling.exceptions import (
    ConvergenceError,
    DimensionError,
    InputError,
    NumericalError,
    SingularSystemError,
)
from signed_graph_sampling.gdas import SampleSet, as_node_list
from signed_graph_sampling.graph import SignedGraph
from signed_graph_sampling.linalg import SparseSymMatrix, cg_solve, smallest_eigenpair

_LOGGER = logging.getLogger(__name__)

DELTACON_DENSE = "dense"
DELTACON_CG = "cg"


@dataclass(frozen=True, init=False)
class ReconstructionProblem:
    """Samples y of an unknown signal observed at nodes, with prior mu x^T L x"""

    laplacian: SparseSymMatrix
    samples: tuple[int, ...]
    observed: NDArray[np.float64]
    mu: float

    def __init__(
        self,
        laplacian: SparseSymMatrix,
        samples: SampleSet | Sequence[int] | NDArray,
        observed: ArrayLike,
        mu: float,
    ) -> None:
        nodes = as_node_list(samples)
        values = np.asarray(observed, dtype=float).ravel()
        if len(values) != len(nodes):
            raise DimensionError(
                "Observed values must match sampled nodes", (len(values), len(nodes))
            )
        if len(set(nodes)) != len(nodes):
            raise InputError("Sampled nodes must be distinct")
        if any(not 0 <= node < laplacian.n for node in nodes):
            raise DimensionError("Sampled node out of range", laplacian.n)
        if not mu > 0:
            raise InputError("mu must be positive", mu)
        object.__setattr__(self, "laplacian", laplacian)
        object.__setattr__(self, "samples", nodes)
        object.__setattr__(self, "observed", values)
        object.__setattr__(self, "mu", float(mu))

    @property
    def n(self) -> int:
        return self.laplacian.n

    def sampling_matrix(self) -> sp.csr_matrix:
        return SampleSet(self.samples).sampling_matrix(self.n)

    def system(self) -> tuple[SparseSymMatrix, NDArray[np.float64]]:
        """Normal equations (H^T H + mu L) x = H^T y"""
        selection = np.zeros(self.n)
        selection[list(self.samples)] = 1.0
        matrix = (self.laplacian * self.mu).add_diagonal(selection)
        rhs = np.zeros(self.n)
        rhs[list(self.samples)] = self.observed
        return matrix, rhs

    def objective(self, x: ArrayLike) -> float:
        """||y - H x||^2 + mu x^T L x"""
        vector = np.asarray(x, dtype=float)
        fidelity = self.observed - vector[list(self.samples)]
        return float(fidelity @ fidelity + self.mu * vector @ (self.laplacian.csr @ vector))

    def gradient(self, x: ArrayLike) -> NDArray[np.float64]:
        """2 H^T (H x - y) + 2 mu L x"""
        vector = np.asarray(x, dtype=float)
        gradient = 2.0 * self.mu * (self.laplacian.csr @ vector)
        gradient[list(self.samples)] += 2.0 * (vector[list(self.samples)] - self.observed)
        return gradient


def reconstruct(
    problem: ReconstructionProblem, tol: float = DEFAULT_CG_TOL
) -> NDArray[np.float64]:
    """MAP estimate of the signal by conjugate gradients"""
    matrix, rhs = problem.system()
    try:
        return cg_solve(matrix, rhs, tol)
    except ConvergenceError as ex:
        try:
            lowest, _ = smallest_eigenpair(matrix)
        except NumericalError:
            lowest = float("nan")
        if lowest < SINGULAR_TOL:
            raise SingularSystemError(
                "Reconstruction system is numerically singular",
                f"lambda_min estimate {lowest:.3e}, condition estimate {ex.condition}",
            ) from ex
        raise


def mse(x: ArrayLike, xhat: ArrayLike) -> float:
    """Mean squared error"""
    first = np.asarray(x, dtype=float)
    second = np.asarray(xhat, dtype=float)
    if first.shape != second.shape:
        raise DimensionError("Signals differ in length", (first.shape, second.shape))
    if first.size == 0:
        return 0.0
    return float(np.mean((first - second) ** 2))


def relative_error(laplacian: SparseSymMatrix, approximation: SparseSymMatrix) -> float:
    """||L - L_B||_F / ||L||_F, not symmetric in its arguments"""
    if laplacian.shape != approximation.shape:
        raise DimensionError("Matrix shapes differ", (laplacian.shape, approximation.shape))
    norm = laplacian.frobenius_norm()
    if norm == 0.0:
        raise InputError("Reference matrix has zero norm")
    return (laplacian - approximation).frobenius_norm() / norm


def _similarity_system(graph: SignedGraph, eps: float) -> SparseSymMatrix:
    adjacency = graph.adjacency_matrix(absolute=True)
    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    matrix = sp.identity(graph.n, format="csr") + sp.diags(eps**2 * degrees) - eps * adjacency
    return SparseSymMatrix(matrix, check=False)


def node_similarity(
    graph: SignedGraph, eps: float = DEFAULT_EPS, method: str = DELTACON_DENSE
) -> NDArray[np.float64]:
    """Node affinity matrix [I + eps^2 D - eps A]^-1 on absolute edge weights"""
    system = _similarity_system(graph, eps)
    if method == DELTACON_DENSE:
        try:
            return scipy.linalg.inv(system.to_dense())
        except (np.linalg.LinAlgError, ValueError) as ex:
            raise SingularSystemError("Similarity system is singular", str(ex)) from ex
    if method == DELTACON_CG:
        columns = [cg_solve(system, unit) for unit in np.identity(graph.n)]
        return np.column_stack(columns) if columns else np.zeros((0, 0))
    raise InputError("Unknown similarity method", method)


def deltacon(
    graph: SignedGraph,
    other: SignedGraph,
    eps: float = DEFAULT_EPS,
    method: str = DELTACON_DENSE,
) -> float:
    """DELTACON similarity 1 / (1 + d) with d the Matusita distance of affinities"""
    if graph.n != other.n:
        raise DimensionError("Graphs differ in node count", (graph.n, other.n))
    if not eps > 0:
        raise InputError("eps must be positive", eps)
    first = node_similarity(graph, eps, method)
    second = node_similarity(other, eps, method)
    distance = float(np.sqrt(np.sum((np.sqrt(np.abs(first)) - np.sqrt(np.abs(second))) ** 2)))
    return 1.0 / (1.0 + distance)
