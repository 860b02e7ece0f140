"""Sparse precision matrix estimation with the graphical lasso"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.linalg
import scipy.sparse as sp

from signed_graph_sampling.const import (
    DEFAULT_GLASSO_MAX_ITER,
    DEFAULT_GLASSO_TOL,
    DEFAULT_PRUNE,
    DEFAULT_RIDGE_FACTOR,
    INNER_MAX_ITER,
    INNER_TOL_FACTOR,
)
from signed_graph_sampling.exceptions import (
    DataError,
    DimensionError,
    InputError,
    NotPositiveDefiniteError,
)
from signed_graph_sampling.graph import SignedGraph
from signed_graph_sampling.linalg import SparseSymMatrix

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignalMatrix:
    """Training signals, one row per signal and one column per node"""

    values: NDArray[np.float64]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise DataError("Signals must form a 2-D table", values.shape)
        if values.shape[0] < 2:
            raise DataError("At least two signals are required", values.shape[0])
        if not np.all(np.isfinite(values)):
            raise DataError("Signals contain missing or non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != values.shape[1]:
                raise DataError("One label per column is required", len(labels))
            object.__setattr__(self, "labels", labels)

    @property
    def num_signals(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_nodes(self) -> int:
        return int(self.values.shape[1])

    def take(self, rows: Sequence[int] | NDArray) -> SignalMatrix:
        """Subset of signals by row index"""
        return SignalMatrix(self.values[np.asarray(rows, dtype=int)], self.labels)

    def alphabets(self) -> list[NDArray[np.float64]]:
        """Sorted distinct values of every column"""
        return [np.unique(self.values[:, column]) for column in range(self.num_nodes)]


@dataclass(frozen=True)
class PrecisionEstimate:
    """Result of a graphical lasso run"""

    precision: SparseSymMatrix
    phi: float
    iterations: int
    delta: float
    converged: bool
    objectives: tuple[float, ...]


def empirical_covariance(signals: SignalMatrix, ridge: float = 0.0) -> SparseSymMatrix:
    """Biased sample covariance (1/S) sum (x_s - mean)(x_s - mean)^T + ridge I"""
    if ridge < 0:
        raise InputError("Ridge must not be negative", ridge)
    centered = signals.values - signals.values.mean(axis=0)
    if ridge == 0 and not np.any(centered):
        raise DataError("All signals are identical, covariance is degenerate")
    covariance = centered.T @ centered / signals.num_signals
    covariance = (covariance + covariance.T) / 2.0
    covariance += ridge * np.identity(signals.num_nodes)
    return SparseSymMatrix.from_dense(covariance)


def default_ridge(covariance: SparseSymMatrix) -> float:
    """Ridge 1e-6 trace(C) / N used for singular covariances"""
    return DEFAULT_RIDGE_FACTOR * float(np.sum(covariance.diagonal())) / covariance.n


def _dense(covariance: SparseSymMatrix | ArrayLike) -> NDArray[np.float64]:
    if isinstance(covariance, SparseSymMatrix):
        return covariance.to_dense()
    dense = np.asarray(covariance, dtype=float)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise DimensionError("Covariance must be square", dense.shape)
    return dense


def _offdiagonal(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    return matrix[~np.eye(matrix.shape[0], dtype=bool)]


def objective(
    covariance: NDArray[np.float64], precision: NDArray[np.float64], phi: float
) -> float:
    """Tr(P C) - log det P + phi sum_{i != j} |P_ij|"""
    sign, logdet = np.linalg.slogdet(precision)
    if sign <= 0:
        return float("inf")
    penalty = phi * float(np.sum(np.abs(_offdiagonal(precision))))
    return float(np.sum(precision * covariance)) - float(logdet) + penalty


def _lasso(
    quadratic: NDArray[np.float64],
    linear: NDArray[np.float64],
    phi: float,
    start: NDArray[np.float64],
    tol: float,
) -> NDArray[np.float64]:
    """Cyclic coordinate descent on 1/2 p^T Q p + c^T p + phi ||p||_1"""
    solution = start.copy()
    gradient = linear + quadratic @ solution
    scale = max(1.0, float(np.max(np.abs(solution))) if solution.size else 1.0)
    for _ in range(INNER_MAX_ITER):
        largest = 0.0
        for k in range(solution.size):
            old = solution[k]
            partial = gradient[k] - quadratic[k, k] * old
            new = -np.sign(partial) * max(abs(partial) - phi, 0.0) / quadratic[k, k]
            if new != old:
                gradient += quadratic[k] * (new - old)
                solution[k] = new
                largest = max(largest, abs(new - old))
        if largest <= tol * scale:
            break
    return solution


def glasso(  # pylint: disable=too-many-locals
    covariance: SparseSymMatrix | ArrayLike,
    phi: float,
    tol: float = DEFAULT_GLASSO_TOL,
    max_iter: int = DEFAULT_GLASSO_MAX_ITER,
) -> PrecisionEstimate:
    """Graphical lasso by primal block coordinate descent.

    Only off-diagonal entries are penalized. Each sweep updates one
    row/column of P at a time by exact minimization over the diagonal entry
    and a lasso over the off-diagonal part, so the objective never increases.
    Converges when the mean absolute change of the working covariance
    off-diagonals falls below tol times the mean |offdiag(C)|.
    """
    c = _dense(covariance)
    n = c.shape[0]
    if not phi > 0:
        raise InputError("phi must be positive", phi)
    if not np.allclose(c, c.T):
        raise InputError("Covariance must be symmetric")
    diagonal = np.diag(c).copy()
    if n == 0 or np.any(diagonal <= 0):
        raise NotPositiveDefiniteError("Covariance needs a strictly positive diagonal")
    lowest = float(scipy.linalg.eigvalsh(c)[0])
    if lowest < -1e-10 * max(1.0, float(np.sum(diagonal))):
        raise NotPositiveDefiniteError(
            "Covariance is not positive semidefinite", f"lambda_min={lowest:.3e}"
        )
    precision = np.diag(1.0 / diagonal)
    working = np.diag(diagonal)
    objectives = [objective(c, precision, phi)]
    scale = float(np.mean(np.abs(_offdiagonal(c)))) if n > 1 else 0.0
    inner_tol = INNER_TOL_FACTOR * tol
    delta = 0.0
    converged = n == 1
    iterations = 0
    indices = np.arange(n)
    while not converged and iterations < max_iter:
        iterations += 1
        previous = working.copy()
        for j in range(n):
            rest = indices != j
            w12 = working[rest, j]
            # inverse of P11 from the current working covariance
            inverse = working[np.ix_(rest, rest)] - np.outer(w12, w12) / working[j, j]
            c22 = c[j, j]
            p12 = _lasso(c22 * inverse, c[rest, j], phi, precision[rest, j], inner_tol)
            projected = inverse @ p12
            precision[rest, j] = p12
            precision[j, rest] = p12
            precision[j, j] = 1.0 / c22 + p12 @ projected
            working[np.ix_(rest, rest)] = inverse + c22 * np.outer(projected, projected)
            working[rest, j] = -c22 * projected
            working[j, rest] = -c22 * projected
            working[j, j] = c22
        objectives.append(objective(c, precision, phi))
        delta = float(np.mean(np.abs(_offdiagonal(working - previous))))
        _LOGGER.debug(
            "Sweep %d objective %.12g change %.3e", iterations, objectives[-1], delta
        )
        if not np.all(np.isfinite(precision)):
            raise NotPositiveDefiniteError(
                "Non-finite precision, system may be too ill-conditioned"
            )
        converged = delta <= tol * scale
    if not converged:
        _LOGGER.warning(
            "Graphical lasso did not converge after %d sweeps, change %.3e",
            iterations,
            delta,
        )
    symmetric = (precision + precision.T) / 2.0
    try:
        scipy.linalg.cholesky(symmetric)
    except np.linalg.LinAlgError as ex:
        raise NotPositiveDefiniteError("Estimated precision is not positive definite") from ex
    return PrecisionEstimate(
        SparseSymMatrix.from_dense(symmetric),
        float(phi),
        iterations,
        delta,
        converged,
        tuple(objectives),
    )


def learn_precision(  # pylint: disable=too-many-arguments
    signals: SignalMatrix,
    phi: float,
    tol: float = DEFAULT_GLASSO_TOL,
    max_iter: int = DEFAULT_GLASSO_MAX_ITER,
    ridge: float | None = None,
) -> PrecisionEstimate:
    """Covariance plus graphical lasso, with the default ridge when S <= N"""
    covariance = empirical_covariance(signals, 0.0 if ridge is None else ridge)
    if ridge is None and signals.num_signals <= signals.num_nodes:
        covariance = covariance.add_diagonal(default_ridge(covariance))
    estimate = glasso(covariance, phi, tol, max_iter)
    _LOGGER.info(
        "Learned precision with %d nonzeros in %d sweeps (phi=%g)",
        estimate.precision.nnz,
        estimate.iterations,
        phi,
    )
    return estimate


def precision_to_graph(
    precision: SparseSymMatrix, prune: float = DEFAULT_PRUNE
) -> SignedGraph:
    """Signed graph whose generalized Laplacian is the pruned precision matrix.

    Edge weights are W_ij = -P_ij and self-loops W_ii = P_ii - sum_{j != i} W_ij.
    """
    if prune < 0:
        raise InputError("Prune threshold must not be negative", prune)
    upper = sp.triu(precision.csr, k=1).tocoo()
    keep = np.abs(upper.data) > prune
    rows, cols, weights = upper.row[keep], upper.col[keep], -upper.data[keep]
    sums = np.zeros(precision.n)
    np.add.at(sums, rows, weights)
    np.add.at(sums, cols, weights)
    loops = precision.diagonal() - sums
    edges = zip(rows.tolist(), cols.tolist(), weights.tolist())
    return SignedGraph(precision.n, edges, loops)
