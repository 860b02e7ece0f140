"""End-to-end experiment orchestration and result emission"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import json
import logging
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray
import pandas as pd

from signed_graph_sampling.balance import balance_components
from signed_graph_sampling.const import (
    BALANCE_SEED_RANDOM,
    DEFAULT_DELTA,
    DEFAULT_EPS,
    DEFAULT_GLASSO_MAX_ITER,
    DEFAULT_GLASSO_TOL,
    DEFAULT_MU,
    DEFAULT_NOISE_REALIZATIONS,
    DEFAULT_PHI,
    DEFAULT_PRUNE,
    DEFAULT_SIGNALS,
    DEFAULT_SPLIT_FRACTION,
    DEFAULT_TRIALS,
    DENSE_ORACLE_MAX_SIZE,
    FLOAT_FORMAT,
    RECONSTRUCT_BALANCED,
    RECONSTRUCT_ORIGINAL,
    RESULTS_CSV,
    SAMPLER_DEGREE_GREEDY,
    SAMPLER_PROPOSED,
    SAMPLER_RANDOM,
    SAMPLERS,
    SUMMARY_JSON,
)
from signed_graph_sampling.datasets import (
    NoiseModel,
    baseline_degree_greedy,
    baseline_random,
    generate_balanced_graph,
    gmrf_sample,
    ingest_csv,
    noisy_values,
    perturb_to_unbalanced,
    resolve_budget,
)
from signed_graph_sampling.exceptions import ConfigError, SamplingError
from signed_graph_sampling.gdas import (
    AlignedOperator,
    SampleSet,
    gdas_sample,
    gdpa_align,
)
from signed_graph_sampling.graph import (
    SignedGraph,
    combinatorial_laplacian,
    generalized_laplacian,
)
from signed_graph_sampling.learn import (
    SignalMatrix,
    learn_precision,
    precision_to_graph,
)
from signed_graph_sampling.linalg import SparseSymMatrix, dense_eig, smallest_eigenpair
from signed_graph_sampling.reconstruct import (
    ReconstructionProblem,
    deltacon,
    mse,
    reconstruct,
    relative_error,
)
from signed_graph_sampling.util import stage_timer

_LOGGER = logging.getLogger(__name__)

# Stream tags for per-trial random generators
_SPLIT_STREAM = 0
_BALANCE_STREAM = 1
_RANDOM_SAMPLER_STREAM = 2
_NOISE_STREAM = 3


@dataclass(frozen=True)
class SyntheticSource:
    """Balanced random graph, optionally perturbed, with GMRF signals"""

    n: int = 60
    avg_degree: float = 4.0
    weight_range: tuple[float, float] = (0.1, 2.0)
    neg_fraction: float = 0.3
    flips: int = 0
    signals: int = DEFAULT_SIGNALS
    delta: float = DEFAULT_DELTA
    seed: int | None = None


@dataclass(frozen=True)
class CsvSource:
    """Signals read from a CSV file"""

    path: Path
    header: bool = False


@dataclass(frozen=True)
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """Benchmark grid and pipeline parameters"""

    source: SyntheticSource | CsvSource = field(default_factory=SyntheticSource)
    phi: float = DEFAULT_PHI
    mu: float = DEFAULT_MU
    budgets: tuple[int | float, ...] = (0.2,)
    noise: tuple[NoiseModel, ...] = (NoiseModel(),)
    trials: int = DEFAULT_TRIALS
    samplers: tuple[str, ...] = tuple(SAMPLERS)
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    seed: int = 0
    noise_realizations: int = DEFAULT_NOISE_REALIZATIONS
    balance_seed: int | str = 0
    reconstruct_with: str = RECONSTRUCT_ORIGINAL
    verify: bool = False
    workers: int = 1
    timings: bool = False
    glasso_tol: float = DEFAULT_GLASSO_TOL
    glasso_max_iter: int = DEFAULT_GLASSO_MAX_ITER
    prune: float = DEFAULT_PRUNE
    eps: float = DEFAULT_EPS
    output: Path | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1", self.trials)
        if not 0 < self.split_fraction < 1:
            raise ConfigError("split_fraction must be in (0, 1)", self.split_fraction)
        if not self.samplers or any(s not in SAMPLERS for s in self.samplers):
            raise ConfigError("Unknown sampler", self.samplers)
        if not self.budgets:
            raise ConfigError("At least one budget is required")
        if not self.noise:
            raise ConfigError("At least one noise model is required")
        if self.seed < 0:
            raise ConfigError("seed must not be negative", self.seed)
        if not self.phi > 0 or not self.mu > 0:
            raise ConfigError("phi and mu must be positive", (self.phi, self.mu))
        if self.noise_realizations < 1 or self.workers < 1:
            raise ConfigError("noise_realizations and workers must be at least 1")
        if self.reconstruct_with not in (RECONSTRUCT_ORIGINAL, RECONSTRUCT_BALANCED):
            raise ConfigError("Unknown reconstruction graph", self.reconstruct_with)
        if isinstance(self.balance_seed, str):
            if self.balance_seed != BALANCE_SEED_RANDOM:
                raise ConfigError("balance_seed must be a node or random")
        elif self.balance_seed < 0:
            raise ConfigError("balance_seed must not be negative", self.balance_seed)


@dataclass
class CellResult:  # pylint: disable=too-many-instance-attributes
    """One (sampler, budget, noise, trial) cell of the grid"""

    sampler: str
    budget: int
    noise: str
    trial: int
    mse: float = math.nan
    samples: tuple[int, ...] = ()
    t_final: float | None = None
    lambda_min_b: float | None = None
    re: float = math.nan
    dcs: float = math.nan
    error: str | None = None
    timings: dict[str, float] = field(default_factory=dict)

    def as_row(self, timings: bool) -> dict[str, Any]:
        row: dict[str, Any] = {
            "sampler": self.sampler,
            "budget": self.budget,
            "noise": self.noise,
            "trial": self.trial,
            "mse": self.mse,
            "num_samples": len(self.samples),
            "samples": " ".join(str(node) for node in self.samples),
            "t_final": self.t_final,
            "lambda_min_b": self.lambda_min_b,
            "re": self.re,
            "dcs": self.dcs,
            "error": self.error or "",
        }
        if timings:
            for stage, seconds in sorted(self.timings.items()):
                row[f"time_{stage}"] = seconds
        return row


def _nan_to_none(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _column_mean(column: pd.Series) -> float | None:
    values = pd.to_numeric(column, errors="coerce").dropna()
    return _nan_to_none(float(values.mean())) if len(values) else None


@dataclass
class ExperimentResult:
    """Complete grid of cells ordered by (sampler, budget, noise, trial)"""

    config: ExperimentConfig
    n: int
    budgets: tuple[int, ...]
    cells: list[CellResult]

    @property
    def failures(self) -> list[CellResult]:
        return [cell for cell in self.cells if cell.error]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.as_row(self.config.timings) for cell in self.cells])

    def summary(self) -> dict[str, Any]:
        """Mean and population stddev of MSE per (sampler, budget, noise)"""
        frame = self.to_frame()
        cells = []
        for (sampler, budget, noise), group in frame.groupby(
            ["sampler", "budget", "noise"], sort=False
        ):
            valid = group["mse"].dropna()
            cells.append(
                {
                    "sampler": sampler,
                    "budget": int(budget),
                    "noise": noise,
                    "trials": int(len(group)),
                    "failed": int((group["error"] != "").sum()),
                    "mse_mean": _nan_to_none(float(valid.mean())) if len(valid) else None,
                    "mse_std": _nan_to_none(float(valid.std(ddof=0))) if len(valid) else None,
                }
            )
        per_trial = frame.drop_duplicates("trial")
        return {
            "n": self.n,
            "budgets": list(self.budgets),
            "trials": self.config.trials,
            "seed": self.config.seed,
            "re_mean": _column_mean(per_trial["re"]),
            "dcs_mean": _column_mean(per_trial["dcs"]),
            "cells": cells,
        }

    def write(self, output_dir: str | Path) -> tuple[Path, Path]:
        """Writes results.csv and summary.json into output_dir"""
        directory = Path(output_dir)
        try:
            directory.mkdir(parents=True, exist_ok=True)
            csv_path = directory / RESULTS_CSV
            self.to_frame().to_csv(
                csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
            )
            json_path = directory / SUMMARY_JSON
            json_path.write_text(
                json.dumps(self.summary(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        except OSError as ex:
            raise ConfigError(f"Cannot write results to {directory}", str(ex)) from ex
        _LOGGER.info("Wrote %s and %s", csv_path, json_path)
        return csv_path, json_path


def _lowest_eigenvalue(laplacian: SparseSymMatrix) -> float:
    if laplacian.n <= DENSE_ORACLE_MAX_SIZE:
        return float(dense_eig(laplacian).eigenvalues[0])
    return smallest_eigenpair(laplacian)[0]


def load_signals(config: ExperimentConfig) -> SignalMatrix:
    """Dataset of the experiment, generated or read once for all trials"""
    source = config.source
    if isinstance(source, CsvSource):
        return ingest_csv(source.path, source.header)
    seed = config.seed if source.seed is None else source.seed
    graph = generate_balanced_graph(
        source.n, source.avg_degree, source.weight_range, source.neg_fraction, [seed, 0]
    )
    graph = perturb_to_unbalanced(graph, source.flips, [seed, 1])
    laplacian = generalized_laplacian(graph)
    shift = source.delta + max(0.0, -_lowest_eigenvalue(laplacian))
    return gmrf_sample(laplacian, shift, source.signals, [seed, 2])


def _split(
    signals: SignalMatrix, fraction: float, rng: np.random.Generator
) -> tuple[SignalMatrix, NDArray[np.float64]]:
    count = signals.num_signals
    train = min(count - 1, max(2, int(round(fraction * count))))
    if train < 2 or count - train < 1:
        raise ConfigError("Too few signals for a train/test split", count)
    order = rng.permutation(count)
    return signals.take(np.sort(order[:train])), signals.values[np.sort(order[train:])]


def _select(  # pylint: disable=too-many-arguments
    sampler: str,
    budget: int,
    config: ExperimentConfig,
    trial: int,
    graph: SignedGraph,
    aligned: AlignedOperator,
) -> SampleSet:
    if sampler == SAMPLER_PROPOSED:
        return gdas_sample(aligned, config.mu, budget)
    if sampler == SAMPLER_RANDOM:
        rng = np.random.default_rng([config.seed, trial, budget, _RANDOM_SAMPLER_STREAM])
        return baseline_random(graph.n, budget, rng)
    if sampler == SAMPLER_DEGREE_GREEDY:
        return baseline_degree_greedy(graph, budget)
    raise ConfigError("Unknown sampler", sampler)


def _reconstruction_mse(  # pylint: disable=too-many-arguments
    config: ExperimentConfig,
    trial: int,
    laplacian: SparseSymMatrix,
    samples: SampleSet,
    test: NDArray[np.float64],
    noisy: Sequence[Sequence[NDArray[np.float64]]],
    noise_index: int,
) -> float:
    nodes = list(samples.nodes)
    errors = []
    for realization in noisy[noise_index]:
        for row, truth in enumerate(test):
            problem = ReconstructionProblem(
                laplacian, samples, realization[row, nodes], config.mu
            )
            errors.append(mse(truth, reconstruct(problem)))
    _LOGGER.debug("Trial %d: %d reconstructions", trial, len(errors))
    return float(np.mean(errors))


def _run_trial(  # pylint: disable=too-many-locals
    config: ExperimentConfig, signals: SignalMatrix, budgets: Sequence[int], trial: int
) -> list[CellResult]:
    """Learns, balances, aligns and evaluates every grid cell of one trial"""
    cells = [
        CellResult(sampler, budget, str(noise), trial)
        for sampler in config.samplers
        for budget in budgets
        for noise in config.noise
    ]
    timings: dict[str, float] = {}
    try:
        split_rng = np.random.default_rng([config.seed, trial, _SPLIT_STREAM])
        train, test = _split(signals, config.split_fraction, split_rng)
        with stage_timer(timings, "learn"):
            estimate = learn_precision(
                train, config.phi, config.glasso_tol, config.glasso_max_iter
            )
            graph = precision_to_graph(estimate.precision, config.prune)
            laplacian = generalized_laplacian(graph)
        with stage_timer(timings, "balance"):
            if config.balance_seed == BALANCE_SEED_RANDOM:
                balance_rng = np.random.default_rng(
                    [config.seed, trial, _BALANCE_STREAM]
                )
                seed = int(balance_rng.integers(graph.n))
            else:
                seed = int(config.balance_seed)
            balanced, _, report = balance_components(graph, seed)
            balanced_laplacian = generalized_laplacian(balanced)
        with stage_timer(timings, "metrics"):
            re = relative_error(
                combinatorial_laplacian(graph), combinatorial_laplacian(balanced)
            )
            dcs = deltacon(graph, balanced, config.eps)
        with stage_timer(timings, "align"):
            aligned = gdpa_align(balanced_laplacian)
        alphabets = train.alphabets()
        noisy = [
            [
                noisy_values(
                    test,
                    model,
                    np.random.default_rng(
                        [config.seed, trial, index, realization, _NOISE_STREAM]
                    ),
                    alphabets,
                )
                for realization in range(config.noise_realizations)
            ]
            for index, model in enumerate(config.noise)
        ]
    except Exception as ex:  # pylint: disable=broad-except
        _LOGGER.warning("Trial %d failed before sampling: %s", trial, ex)
        for cell in cells:
            cell.error = str(ex)
            cell.timings = dict(timings)
        return cells
    _LOGGER.debug(
        "Trial %d: %d nodes, %d edges, balancing changed %d edges",
        trial,
        graph.n,
        graph.num_edges,
        len(report.removed_positive) + len(report.removed_negative),
    )
    reference = (
        laplacian
        if config.reconstruct_with == RECONSTRUCT_ORIGINAL
        else balanced_laplacian
    )
    chosen: dict[tuple[str, int], SampleSet | Exception] = {}
    verified: dict[tuple[str, int], float] = {}
    for cell in cells:
        cell.re, cell.dcs = re, dcs
        cell_timings = dict(timings)
        key = (cell.sampler, cell.budget)
        try:
            if key not in chosen:
                with stage_timer(cell_timings, "sample"):
                    try:
                        chosen[key] = _select(
                            cell.sampler, cell.budget, config, trial, graph, aligned
                        )
                    except SamplingError as ex:
                        chosen[key] = ex
            samples = chosen[key]
            if isinstance(samples, Exception):
                raise samples
            cell.samples = samples.nodes
            cell.t_final = samples.t_final
            if (
                config.verify
                and cell.sampler == SAMPLER_PROPOSED
                and graph.n <= DENSE_ORACLE_MAX_SIZE
            ):
                if key not in verified:
                    selection = np.zeros(graph.n)
                    selection[list(samples.nodes)] = 1.0
                    system = (balanced_laplacian * config.mu).add_diagonal(selection)
                    verified[key] = float(dense_eig(system).eigenvalues[0])
                cell.lambda_min_b = verified[key]
            noise_index = [str(model) for model in config.noise].index(cell.noise)
            with stage_timer(cell_timings, "reconstruct"):
                cell.mse = _reconstruction_mse(
                    config, trial, reference, samples, test, noisy, noise_index
                )
        except Exception as ex:  # pylint: disable=broad-except
            _LOGGER.warning(
                "Cell %s/%d/%s/%d failed: %s",
                cell.sampler,
                cell.budget,
                cell.noise,
                trial,
                ex,
            )
            cell.error = str(ex) or type(ex).__name__
        cell.timings = cell_timings
    return cells


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Runs every trial and merges cells in (sampler, budget, noise, trial) order"""
    signals = load_signals(config)
    n = signals.num_nodes
    budgets = tuple(dict.fromkeys(resolve_budget(b, n) for b in config.budgets))
    _LOGGER.info(
        "Running %d trial(s) on %d signals over %d nodes, budgets %s",
        config.trials,
        signals.num_signals,
        n,
        list(budgets),
    )
    trials = range(config.trials)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(
                executor.map(
                    _run_trial,
                    [config] * config.trials,
                    [signals] * config.trials,
                    [budgets] * config.trials,
                    trials,
                )
            )
    else:
        outcomes = [_run_trial(config, signals, budgets, trial) for trial in trials]
    samplers = list(config.samplers)
    noises = [str(model) for model in config.noise]
    cells = sorted(
        (cell for outcome in outcomes for cell in outcome),
        key=lambda cell: (
            samplers.index(cell.sampler),
            budgets.index(cell.budget),
            noises.index(cell.noise),
            cell.trial,
        ),
    )
    result = ExperimentResult(config, n, budgets, cells)
    if result.failures:
        _LOGGER.warning("%d of %d cells failed", len(result.failures), len(cells))
    return result
