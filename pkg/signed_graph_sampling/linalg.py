"""Sparse symmetric matrices and the solvers built on them"""
from __future__ import annotations

from dataclasses import dataclass
import io
import logging
from pathlib import Path
from typing import IO, Iterable, Union
import warnings

import numpy as np
from numpy.typing import ArrayLike, NDArray
import scipy.io
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse import linalg as spla

from signed_graph_sampling.const import (
    DEFAULT_CG_MAX_ITER,
    DEFAULT_CG_TOL,
    DEFAULT_EIG_MAX_ITER,
    DEFAULT_EIG_TOL,
    DENSE_ORACLE_MAX_SIZE,
    ITERATIVE_EIG_MIN_SIZE,
    MULTIPLICITY_TOL,
    SIGN_CANON_TOL,
)
from signed_graph_sampling.exceptions import (
    ConvergenceError,
    DimensionError,
    InputError,
    NumericalError,
)

_LOGGER = logging.getLogger(__name__)

# Number of inverse iteration steps used to polish an iterative eigenpair
_POLISH_STEPS = 5


class SparseSymMatrix:
    """Real symmetric matrix stored in compressed sparse row form.

    The full symmetric pattern is stored, column indices are sorted and no
    explicit zeros are kept. Instances are treated as immutable.
    """

    def __init__(self, matrix: sp.spmatrix | ArrayLike, *, check: bool = True) -> None:
        csr = sp.csr_matrix(matrix, dtype=float, copy=True)
        if csr.shape[0] != csr.shape[1]:
            raise DimensionError("Matrix must be square", csr.shape)
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        if check and csr.nnz and (csr != csr.T).nnz:
            raise InputError("Matrix is not symmetric")
        self._csr = csr

    @classmethod
    def from_dense(cls, array: ArrayLike, *, symmetrize: bool = False) -> SparseSymMatrix:
        """Builds matrix from a dense square array"""
        dense = np.asarray(array, dtype=float)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionError("Matrix must be square", dense.shape)
        if symmetrize:
            dense = (dense + dense.T) / 2.0
        return cls(dense)

    @classmethod
    def from_entries(
        cls, n: int, entries: Iterable[tuple[int, int, float]]
    ) -> SparseSymMatrix:
        """Builds matrix from (i, j, value) entries given once per unordered pair.

        Off-diagonal entries are mirrored, repeated entries are summed.
        """
        rows: list[int] = []
        cols: list[int] = []
        values: list[float] = []
        for i, j, value in entries:
            rows.append(i)
            cols.append(j)
            values.append(value)
            if i != j:
                rows.append(j)
                cols.append(i)
                values.append(value)
        coo = sp.coo_matrix((values, (rows, cols)), shape=(n, n), dtype=float)
        return cls(coo)

    @classmethod
    def identity(cls, n: int) -> SparseSymMatrix:
        """Identity matrix of size n"""
        return cls(sp.identity(n, format="csr"))

    @property
    def n(self) -> int:
        """Row count"""
        return int(self._csr.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        """Matrix shape"""
        return (self.n, self.n)

    @property
    def nnz(self) -> int:
        """Number of stored entries"""
        return int(self._csr.nnz)

    @property
    def csr(self) -> sp.csr_matrix:
        """Underlying compressed row matrix, must not be modified"""
        return self._csr

    def row(self, i: int) -> list[tuple[int, float]]:
        """Sorted (column, value) pairs of row i"""
        start, end = self._csr.indptr[i], self._csr.indptr[i + 1]
        return [
            (int(j), float(v))
            for j, v in zip(self._csr.indices[start:end], self._csr.data[start:end])
        ]

    def diagonal(self) -> NDArray[np.float64]:
        return self._csr.diagonal()

    def to_dense(self) -> NDArray[np.float64]:
        return self._csr.toarray()

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.sum(self._csr.data**2)))

    def submatrix(self, nodes: ArrayLike) -> SparseSymMatrix:
        """Principal submatrix on the given rows and columns"""
        index = np.asarray(nodes, dtype=int)
        return SparseSymMatrix(self._csr[index][:, index], check=False)

    def add_diagonal(self, values: ArrayLike) -> SparseSymMatrix:
        """Returns matrix with values added to its diagonal"""
        diag = np.broadcast_to(np.asarray(values, dtype=float), (self.n,))
        return SparseSymMatrix(self._csr + sp.diags(diag, format="csr"), check=False)

    def matvec(self, x: ArrayLike) -> NDArray[np.float64]:
        vector = _vector(x, self.n)
        return self._csr @ vector

    def __matmul__(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.matvec(x)

    def __add__(self, other: SparseSymMatrix) -> SparseSymMatrix:
        _same_shape(self, other)
        return SparseSymMatrix(self._csr + other.csr, check=False)

    def __sub__(self, other: SparseSymMatrix) -> SparseSymMatrix:
        _same_shape(self, other)
        return SparseSymMatrix(self._csr - other.csr, check=False)

    def __neg__(self) -> SparseSymMatrix:
        return SparseSymMatrix(-self._csr, check=False)

    def __mul__(self, scalar: float) -> SparseSymMatrix:
        return SparseSymMatrix(self._csr * float(scalar), check=False)

    __rmul__ = __mul__

    def allclose(self, other: SparseSymMatrix, atol: float = 0.0) -> bool:
        """True if all entries differ by at most atol"""
        if self.shape != other.shape:
            return False
        difference = abs(self._csr - other.csr)
        return bool(difference.nnz == 0 or difference.max() <= atol)

    def __repr__(self) -> str:
        return f"SparseSymMatrix(n={self.n}, nnz={self.nnz})"


AnyMatrix = Union[SparseSymMatrix, sp.spmatrix]


@dataclass(frozen=True)
class DenseEigResult:
    """Full ascending eigendecomposition of a symmetric matrix"""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    def pair(self, index: int) -> tuple[float, NDArray[np.float64]]:
        """Eigenvalue and eigenvector at 0-based index"""
        return float(self.eigenvalues[index]), self.eigenvectors[:, index]

    def multiplicity(self, index: int) -> int:
        """Number of eigenvalues within tolerance of the eigenvalue at index"""
        target = self.eigenvalues[index]
        return int(np.sum(np.abs(self.eigenvalues - target) <= MULTIPLICITY_TOL))


def _as_csr(matrix: AnyMatrix) -> sp.csr_matrix:
    if isinstance(matrix, SparseSymMatrix):
        return matrix.csr
    return sp.csr_matrix(matrix)


def _vector(x: ArrayLike, n: int) -> NDArray[np.float64]:
    vector = np.asarray(x, dtype=float)
    if vector.shape != (n,):
        raise DimensionError("Vector length does not match matrix", (vector.shape, n))
    return vector


def _same_shape(first: SparseSymMatrix, second: SparseSymMatrix) -> None:
    if first.shape != second.shape:
        raise DimensionError("Matrix shapes differ", (first.shape, second.shape))


def canonicalize_signs(vectors: ArrayLike) -> NDArray[np.float64]:
    """Flips each column so its first significantly nonzero entry is positive"""
    columns = np.array(vectors, dtype=float, copy=True)
    single = columns.ndim == 1
    if single:
        columns = columns[:, None]
    if columns.size:
        significant = np.abs(columns) > SIGN_CANON_TOL
        first = significant.argmax(axis=0)
        signs = np.sign(columns[first, np.arange(columns.shape[1])])
        signs[signs == 0] = 1.0
        columns *= signs
    return columns[:, 0] if single else columns


def dense_eig(matrix: SparseSymMatrix) -> DenseEigResult:
    """Dense eigendecomposition used as oracle at small scale"""
    if matrix.n > DENSE_ORACLE_MAX_SIZE:
        raise DimensionError(
            "Matrix too large for dense eigendecomposition",
            f"n={matrix.n} > {DENSE_ORACLE_MAX_SIZE}",
        )
    try:
        values, vectors = scipy.linalg.eigh(matrix.to_dense())
    except np.linalg.LinAlgError as ex:
        raise NumericalError("Dense eigendecomposition failed", str(ex)) from ex
    return DenseEigResult(values, canonicalize_signs(vectors))


def _residual(csr: sp.csr_matrix, value: float, vector: NDArray) -> float:
    return float(np.linalg.norm(csr @ vector - value * vector))


def _polish(
    csr: sp.csr_matrix, value: float, vector: NDArray, bound: float
) -> tuple[float, NDArray, float]:
    """Refines an approximate smallest eigenpair by shifted inverse iteration"""
    residual = _residual(csr, value, vector)
    if residual <= bound:
        return value, vector, residual
    shift = value - 2.0 * max(residual, bound)
    try:
        factor = spla.splu(
            (csr - shift * sp.identity(csr.shape[0], format="csr")).tocsc()
        )
    except RuntimeError as ex:
        _LOGGER.debug("Shifted factorization failed: %s", ex)
        return value, vector, residual
    for step in range(_POLISH_STEPS):
        vector = factor.solve(vector)
        vector /= np.linalg.norm(vector)
        value = float(vector @ (csr @ vector))
        residual = _residual(csr, value, vector)
        _LOGGER.debug("Inverse iteration step %d residual %.3e", step, residual)
        if residual <= bound:
            break
    return value, vector, residual


def smallest_eigenpair(
    matrix: SparseSymMatrix,
    tol: float = DEFAULT_EIG_TOL,
    max_iter: int = DEFAULT_EIG_MAX_ITER,
    seed: int = 0,
) -> tuple[float, NDArray[np.float64]]:
    """Smallest eigenvalue and unit eigenvector.

    Uses LOBPCG followed by shifted inverse iteration; small matrices go
    straight to the dense routine. Raises ConvergenceError when the residual
    bound tol * (1 + ||A||_F) is not met.
    """
    if tol <= 0:
        raise InputError("Tolerance must be positive", tol)
    n = matrix.n
    if n == 0:
        raise DimensionError("Matrix is empty")
    if n < ITERATIVE_EIG_MIN_SIZE:
        value, vector = dense_eig(matrix).pair(0)
        return value, vector
    csr = matrix.csr
    bound = tol * (1.0 + matrix.frobenius_norm())
    block = min(3, n // 8)
    start = np.random.default_rng(seed).standard_normal((n, block))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        values, vectors = spla.lobpcg(
            csr, start, tol=bound, maxiter=max_iter, largest=False
        )
    lowest = int(np.argmin(values))
    vector = np.asarray(vectors[:, lowest], dtype=float)
    vector /= np.linalg.norm(vector)
    value = float(vector @ (csr @ vector))
    value, vector, residual = _polish(csr, value, vector, bound)
    if residual > bound:
        raise ConvergenceError(
            "Smallest eigenpair did not converge",
            f"residual {residual:.3e} > {bound:.3e}",
            iterations=max_iter,
            residual=residual,
        )
    return value, canonicalize_signs(vector)


def condition_estimate(matrix: SparseSymMatrix) -> float:
    """Ratio of largest to smallest eigenvalue magnitude"""
    try:
        if matrix.n <= DENSE_ORACLE_MAX_SIZE:
            values = np.abs(scipy.linalg.eigvalsh(matrix.to_dense()))
            largest, smallest = values.max(), values.min()
        else:
            largest = abs(
                float(spla.eigsh(matrix.csr, k=1, which="LM", return_eigenvectors=False)[0])
            )
            smallest = abs(smallest_eigenpair(matrix)[0])
    except Exception as ex:  # pylint: disable=broad-except
        _LOGGER.debug("Condition estimate failed: %s", ex)
        return float("nan")
    if smallest == 0:
        return float("inf")
    return float(largest / smallest)


def cg_solve(
    matrix: SparseSymMatrix,
    rhs: ArrayLike,
    tol: float = DEFAULT_CG_TOL,
    max_iter: int = DEFAULT_CG_MAX_ITER,
    x0: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """Solves A x = b for positive definite A with conjugate gradients.

    Guarantees ||A x - b|| <= tol * ||b|| on return.
    """
    b = _vector(rhs, matrix.n)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return np.zeros(matrix.n)
    guess = None if x0 is None else _vector(x0, matrix.n)
    residual = float("inf")
    info = 0
    # the recursive residual can drift from the true one, so restart from x
    for _ in range(3):
        solution, info = spla.cg(
            matrix.csr, b, x0=guess, rtol=tol, atol=0.0, maxiter=max_iter
        )
        if info < 0:
            raise NumericalError("Conjugate gradient breakdown", info)
        residual = float(np.linalg.norm(matrix.csr @ solution - b))
        if residual <= tol * norm_b:
            return solution
        guess = solution
    condition = condition_estimate(matrix)
    raise ConvergenceError(
        "Conjugate gradient did not converge",
        f"relative residual {residual / norm_b:.3e}, condition estimate {condition:.3e}",
        iterations=max_iter,
        residual=residual / norm_b,
        condition=condition,
    )


def disc_left_ends(matrix: AnyMatrix) -> NDArray[np.float64]:
    """Gershgorin disc left-ends A_ii - sum_{j != i} |A_ij| of every row"""
    csr = _as_csr(matrix)
    diagonal = csr.diagonal()
    radii = np.asarray(abs(csr).sum(axis=1)).ravel() - np.abs(diagonal)
    return diagonal - radii


def similarity_scale(matrix: AnyMatrix, scalars: ArrayLike) -> sp.csr_matrix:
    """Returns S A S^-1 with S = diag(scalars), a general sparse matrix"""
    csr = _as_csr(matrix)
    values = _vector(scalars, csr.shape[0])
    if np.any(values == 0):
        raise InputError(
            "Similarity scalars must be nonzero", np.flatnonzero(values == 0).tolist()
        )
    scaled = sp.diags(values) @ csr @ sp.diags(1.0 / values)
    result = sp.csr_matrix(scaled)
    result.sort_indices()
    return result


def write_matrix_market(matrix: SparseSymMatrix, target: str | Path | IO[bytes]) -> None:
    """Writes matrix in symmetric coordinate Matrix Market format"""
    try:
        scipy.io.mmwrite(
            target, sp.coo_matrix(matrix.csr), precision=17, symmetry="symmetric"
        )
    except OSError as ex:
        raise InputError("Cannot write matrix", str(ex)) from ex


def matrix_market_text(matrix: SparseSymMatrix) -> str:
    """Matrix Market representation as text"""
    buffer = io.BytesIO()
    write_matrix_market(matrix, buffer)
    return buffer.getvalue().decode("ascii")


def read_matrix_market(source: str | Path | IO[bytes]) -> SparseSymMatrix:
    """Reads a square symmetric matrix in Matrix Market format"""
    try:
        loaded = scipy.io.mmread(source)
    except (OSError, ValueError) as ex:
        raise InputError("Cannot read Matrix Market input", str(ex)) from ex
    if sp.issparse(loaded):
        return SparseSymMatrix(loaded)
    return SparseSymMatrix.from_dense(loaded)
