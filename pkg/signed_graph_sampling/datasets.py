"""Synthetic graphs and signals, noise models, CSV ingestion and baselines"""
from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from pathlib import Path
import re
from typing import IO, Sequence

import numpy as np
from numpy.typing import NDArray
import pandas as pd
import scipy.linalg

from signed_graph_sampling.const import (
    DENSE_ORACLE_MAX_SIZE,
    FLOAT_FORMAT,
    NOISE_FLIP,
    NOISE_GAUSS,
    NOISE_NONE,
)
from signed_graph_sampling.exceptions import (
    DataError,
    DimensionError,
    GraphError,
    InputError,
    NotPositiveDefiniteError,
)
from signed_graph_sampling.gdas import SampleSet
from signed_graph_sampling.graph import SignedGraph, is_balanced
from signed_graph_sampling.learn import SignalMatrix
from signed_graph_sampling.linalg import SparseSymMatrix
from signed_graph_sampling.util import open_text

_LOGGER = logging.getLogger(__name__)

# Candidate pairs are enumerated up to this count, sampled by rejection above
_ENUMERATE_PAIRS_MAX = 200_000
_PARSER_LINE = re.compile(r"line (\d+)")

SeedLike = int | Sequence[int] | np.random.Generator | None


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate_balanced_graph(  # pylint: disable=too-many-locals
    n: int,
    avg_degree: float,
    weight_range: tuple[float, float] = (0.1, 2.0),
    neg_fraction: float = 0.3,
    seed: SeedLike = 0,
) -> SignedGraph:
    """Connected random signed graph that is balanced by construction.

    A random spanning tree is extended with uniformly drawn extra edges until
    the average degree is reached. round(neg_fraction * n) nodes are colored
    red, and every edge between differently colored nodes is negative.
    """
    low, high = weight_range
    if n < 2:
        raise InputError("At least two nodes are required", n)
    if not 0 < avg_degree < n:
        raise InputError("Average degree must be in (0, n)", avg_degree)
    if not 0 < low <= high:
        raise InputError("Weight range must satisfy 0 < low <= high", weight_range)
    if not 0 <= neg_fraction <= 1:
        raise InputError("neg_fraction must be in [0, 1]", neg_fraction)
    rng = _rng(seed)
    total = n * (n - 1) // 2
    target = min(total, max(n - 1, int(round(avg_degree * n / 2))))
    pairs: set[tuple[int, int]] = set()
    order = rng.permutation(n)
    for position in range(1, n):
        parent = order[rng.integers(position)]
        node = order[position]
        pairs.add((int(min(node, parent)), int(max(node, parent))))
    if total <= _ENUMERATE_PAIRS_MAX:
        rows, cols = np.triu_indices(n, k=1)
        free = [
            (int(i), int(j)) for i, j in zip(rows, cols) if (int(i), int(j)) not in pairs
        ]
        extra = rng.choice(len(free), size=target - len(pairs), replace=False)
        pairs.update(free[index] for index in sorted(extra.tolist()))
    else:
        while len(pairs) < target:
            i, j = rng.integers(n, size=2)
            if i != j:
                pairs.add((int(min(i, j)), int(max(i, j))))
    colors = np.ones(n, dtype=int)
    colors[rng.permutation(n)[: int(round(neg_fraction * n))]] = -1
    edges = []
    for i, j in sorted(pairs):
        magnitude = float(rng.uniform(low, high))
        edges.append((i, j, magnitude * colors[i] * colors[j]))
    graph = SignedGraph(n, edges)
    _LOGGER.debug(
        "Generated balanced graph with %d nodes, %d edges, %d red nodes",
        n,
        graph.num_edges,
        int(np.sum(colors < 0)),
    )
    return graph


def perturb_to_unbalanced(
    graph: SignedGraph, flip_count: int, seed: SeedLike = 0, max_attempts: int = 100
) -> SignedGraph:
    """Flips the sign of flip_count random edges, redrawing while still balanced"""
    edges = graph.edges()
    if not 0 <= flip_count <= len(edges):
        raise GraphError("Flip count must be between 0 and the edge count", flip_count)
    if flip_count == 0:
        return graph
    rng = _rng(seed)
    perturbed = graph
    for attempt in range(1, max_attempts + 1):
        chosen = set(rng.choice(len(edges), size=flip_count, replace=False).tolist())
        perturbed = SignedGraph(
            graph.n,
            (
                (i, j, -weight if index in chosen else weight)
                for index, (i, j, weight) in enumerate(edges)
            ),
            graph.self_loops,
        )
        if is_balanced(perturbed) is None:
            _LOGGER.debug("Unbalanced after %d attempt(s)", attempt)
            return perturbed
    _LOGGER.warning(
        "Graph is still balanced after %d attempts to flip %d edges",
        max_attempts,
        flip_count,
    )
    return perturbed


def gmrf_sample(
    laplacian: SparseSymMatrix, delta: float, count: int, seed: SeedLike = 0
) -> SignalMatrix:
    """Draws count signals from N(0, (L + delta I)^-1)"""
    n = laplacian.n
    if n > DENSE_ORACLE_MAX_SIZE:
        raise DimensionError("GMRF sampling uses a dense factorization", n)
    if delta < 0:
        raise InputError("delta must not be negative", delta)
    precision = laplacian.add_diagonal(np.full(n, float(delta))).to_dense()
    try:
        lower = scipy.linalg.cholesky(precision, lower=True)
    except np.linalg.LinAlgError as ex:
        raise NotPositiveDefiniteError(
            "L + delta I is not positive definite", delta
        ) from ex
    draws = _rng(seed).standard_normal((n, count))
    # L + delta I = R R^T gives cov(R^-T z) = (L + delta I)^-1
    signals = scipy.linalg.solve_triangular(lower, draws, lower=True, trans="T")
    return SignalMatrix(signals.T)


@dataclass(frozen=True)
class NoiseModel:
    """Observation noise: none, flip with probability p or Gaussian with sigma"""

    kind: str = NOISE_NONE
    level: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (NOISE_NONE, NOISE_FLIP, NOISE_GAUSS):
            raise InputError("Unknown noise model", self.kind)
        if not math.isfinite(self.level):
            raise InputError("Noise level must be finite", self.level)
        if self.kind == NOISE_FLIP and not 0 <= self.level <= 1:
            raise InputError("Flip probability must be in [0, 1]", self.level)
        if self.kind == NOISE_GAUSS and self.level < 0:
            raise InputError("Noise sigma must not be negative", self.level)
        if self.kind == NOISE_NONE and self.level != 0:
            raise InputError("Noise model none takes no level", self.level)

    @classmethod
    def none(cls) -> NoiseModel:
        return cls()

    @classmethod
    def parse(cls, text: str) -> NoiseModel:
        """Parses none, flip:<p> or gauss:<sigma>"""
        kind, _, level = str(text).strip().lower().partition(":")
        if kind == NOISE_NONE and not level:
            return cls.none()
        if kind not in (NOISE_FLIP, NOISE_GAUSS) or not level:
            raise InputError("Noise must be none, flip:<p> or gauss:<sigma>", text)
        try:
            return cls(kind, float(level))
        except ValueError as ex:
            raise InputError("Invalid noise level", text) from ex

    @property
    def is_none(self) -> bool:
        return self.kind == NOISE_NONE or self.level == 0

    def __str__(self) -> str:
        if self.kind == NOISE_NONE:
            return NOISE_NONE
        return f"{self.kind}:{self.level:g}"


def noisy_values(
    values: NDArray[np.float64],
    model: NoiseModel,
    rng: np.random.Generator,
    alphabets: Sequence[NDArray[np.float64]] | None = None,
) -> NDArray[np.float64]:
    noisy = np.array(values, dtype=float, copy=True)
    if model.is_none:
        return noisy
    if model.kind == NOISE_GAUSS:
        return noisy + rng.normal(0.0, model.level, size=noisy.shape)
    columns = noisy.shape[1]
    if alphabets is None:
        alphabets = [np.unique(noisy[:, column]) for column in range(columns)]
    if len(alphabets) != columns:
        raise DimensionError("One alphabet per column is required", len(alphabets))
    flips = rng.random(noisy.shape) < model.level
    for column, alphabet in enumerate(alphabets):
        rows = np.flatnonzero(flips[:, column])
        if rows.size == 0 or len(alphabet) < 2:
            continue
        current = noisy[rows, column]
        position = np.searchsorted(alphabet, current)
        known = position < len(alphabet)
        known[known] = alphabet[position[known]] == current[known]
        # uniform over the other symbols, or over all symbols for unseen values
        choice = np.where(
            known,
            rng.integers(0, len(alphabet) - 1, size=rows.size),
            rng.integers(0, len(alphabet), size=rows.size),
        )
        choice += known & (choice >= position)
        noisy[rows, column] = alphabet[choice]
    return noisy


def add_noise(
    signals: SignalMatrix,
    model: NoiseModel,
    seed: SeedLike = 0,
    alphabets: Sequence[NDArray[np.float64]] | None = None,
) -> SignalMatrix:
    """Noisy copy of the signals.

    Flip noise moves an entry to a different value of its column alphabet with
    probability p. The alphabet defaults to the distinct column values.
    """
    noisy = noisy_values(signals.values, model, _rng(seed), alphabets)
    return SignalMatrix(noisy, signals.labels)


def ingest_csv(source: str | Path | IO[str], header: bool = False) -> SignalMatrix:
    """Reads signals from CSV, one signal per row and one node per column"""
    try:
        with open_text(source, "r") as stream:
            frame = pd.read_csv(
                stream,
                header=0 if header else None,
                dtype=str,
                skip_blank_lines=False,
                keep_default_na=False,
            )
    except pd.errors.EmptyDataError as ex:
        raise DataError("CSV file is empty") from ex
    except pd.errors.ParserError as ex:
        match = _PARSER_LINE.search(str(ex))
        raise DataError(
            "Ragged row", str(ex), int(match.group(1)) if match else None
        ) from ex
    offset = 2 if header else 1
    values = np.empty(frame.shape, dtype=float)
    for row, cells in enumerate(frame.itertuples(index=False)):
        for column, cell in enumerate(cells):
            if not isinstance(cell, str) or not cell.strip():
                raise DataError("Missing value", f"column {column + 1}", row + offset)
            try:
                values[row, column] = float(cell)
            except ValueError as ex:
                raise DataError(
                    "Non-numeric value", repr(cell), row + offset
                ) from ex
            if not math.isfinite(values[row, column]):
                raise DataError("Non-finite value", repr(cell), row + offset)
    labels = tuple(str(label) for label in frame.columns) if header else None
    _LOGGER.debug("Read %d signals on %d nodes", values.shape[0], values.shape[1])
    return SignalMatrix(values, labels)


def export_csv(signals: SignalMatrix, target: str | Path | IO[str]) -> None:
    """Writes signals as CSV, with a header row when labels are present"""
    frame = pd.DataFrame(
        signals.values,
        columns=list(signals.labels) if signals.labels else None,
    )
    with open_text(target, "w") as stream:
        frame.to_csv(
            stream,
            header=signals.labels is not None,
            index=False,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
        )


def resolve_budget(budget: int | float, n: int) -> int:
    """Sample count from an absolute budget or a fraction of n in (0, 1)"""
    if isinstance(budget, bool):
        raise InputError("Budget must be a number", budget)
    if isinstance(budget, float) and not budget.is_integer():
        if not 0 < budget < 1:
            raise InputError("Fractional budget must be in (0, 1)", budget)
        return math.ceil(budget * n)
    count = int(budget)
    if not 0 <= count <= n:
        raise InputError(f"Budget must be between 0 and {n}", count)
    return count


def baseline_random(n: int, budget: int, seed: SeedLike = 0) -> SampleSet:
    """Uniformly random nodes without replacement"""
    if not 0 <= budget <= n:
        raise InputError("Budget must be between 0 and n", budget)
    return SampleSet(tuple(_rng(seed).choice(n, size=budget, replace=False).tolist()))


def baseline_degree_greedy(graph: SignedGraph, budget: int) -> SampleSet:
    """Nodes with the largest weighted absolute degree, ties by index"""
    if not 0 <= budget <= graph.n:
        raise InputError("Budget must be between 0 and n", budget)
    degrees = graph.weighted_degree(absolute=True)
    order = sorted(range(graph.n), key=lambda node: (-degrees[node], node))
    return SampleSet(tuple(order[:budget]))
