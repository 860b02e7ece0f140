"""Command line interface"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import IO, Any, Sequence

import colorlog
import numpy as np

from signed_graph_sampling.balance import balance_components
from signed_graph_sampling.config import apply_logger_config, load_config
from signed_graph_sampling.const import (
    CONF_BUDGETS,
    CONF_DEFAULT,
    CONF_MU,
    CONF_NOISE,
    CONF_OUTPUT,
    CONF_PHI,
    CONF_SEED,
    CONF_TRIALS,
    CONF_WORKERS,
    DEFAULT_CG_TOL,
    DEFAULT_EIG_TOL,
    DEFAULT_GLASSO_MAX_ITER,
    DEFAULT_GLASSO_TOL,
    DEFAULT_MU,
    DEFAULT_PHI,
    DEFAULT_PRUNE,
    EXIT_INPUT_ERROR,
    EXIT_NUMERICAL_ERROR,
    EXIT_OK,
    STARTUP_MESSAGE,
    __version__,
)
from signed_graph_sampling.datasets import ingest_csv
from signed_graph_sampling.exceptions import (
    ConfigError,
    DataError,
    InputError,
    NumericalError,
)
from signed_graph_sampling.gdas import SampleSet, gdas_sample, gdpa_align
from signed_graph_sampling.graph import (
    generalized_laplacian,
    is_balanced,
    read_edge_list,
    write_edge_list,
)
from signed_graph_sampling.harness import run_experiment
from signed_graph_sampling.learn import learn_precision, precision_to_graph
from signed_graph_sampling.linalg import (
    matrix_market_text,
    read_matrix_market,
    write_matrix_market,
)
from signed_graph_sampling.reconstruct import ReconstructionProblem, reconstruct
from signed_graph_sampling.util import format_float, open_text

_LOGGER = logging.getLogger(__name__)
_PACKAGE = "signed_graph_sampling"
_LOG_FORMAT = "%(log_color)s%(asctime)s %(levelname)s (%(name)s) %(message)s"


def setup_logging(level: str) -> None:
    """Installs a colored stderr handler on the package logger once"""
    logger = logging.getLogger(_PACKAGE)
    if not any(isinstance(h, colorlog.StreamHandler) for h in logger.handlers):
        handler = colorlog.StreamHandler(sys.stderr)
        handler.setFormatter(
            colorlog.ColoredFormatter(_LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
        )
        logger.addHandler(handler)
    logger.setLevel(level.upper())


def _write_json(data: Any, target: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if target is None:
        sys.stdout.write(text)
        return
    with open_text(target, "w") as stream:
        stream.write(text)


def _read_json(source: str) -> Any:
    with open_text(source, "r") as stream:
        try:
            return json.load(stream)
        except json.JSONDecodeError as ex:
            raise DataError("Invalid JSON", ex.msg, ex.lineno) from ex


def _read_values(stream: IO[str]) -> list[float]:
    values = []
    for line, text in enumerate(stream, start=1):
        text = text.strip()
        if not text or text.startswith("#"):
            continue
        try:
            value = float(text)
        except ValueError as ex:
            raise DataError("Non-numeric value", repr(text), line) from ex
        if not math.isfinite(value):
            raise DataError("Non-finite value", repr(text), line)
        values.append(value)
    return values


def _budget(text: str) -> int | float:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError as ex:
        raise argparse.ArgumentTypeError(f"invalid budget {text!r}") from ex


def _learn(args: argparse.Namespace) -> int:
    signals = ingest_csv(args.input, args.header)
    estimate = learn_precision(
        signals, args.phi, args.tol, args.max_iter, args.ridge
    )
    if args.output is None:
        sys.stdout.write(matrix_market_text(estimate.precision))
    else:
        write_matrix_market(estimate.precision, args.output)
    if args.graph is not None:
        with open_text(args.graph, "w") as stream:
            write_edge_list(precision_to_graph(estimate.precision, args.prune), stream)
    return EXIT_OK


def _balance(args: argparse.Namespace) -> int:
    with open_text(args.input, "r") as stream:
        graph = read_edge_list(stream)
    balanced, coloring, report = balance_components(graph, args.seed)
    if args.output is None:
        write_edge_list(balanced, sys.stdout)
    else:
        with open_text(args.output, "w") as stream:
            write_edge_list(balanced, stream)
    if args.report is not None:
        _write_json({**report.to_dict(), "coloring": list(coloring.beta)}, args.report)
    return EXIT_OK


def _sample(args: argparse.Namespace) -> int:
    laplacian = read_matrix_market(args.input)
    graph = precision_to_graph(laplacian, 0.0)
    if is_balanced(graph) is None:
        _LOGGER.info("Input graph is not balanced, balancing from node %d", args.seed)
        balanced, _, _ = balance_components(graph, args.seed)
        laplacian = generalized_laplacian(balanced)
    aligned = gdpa_align(laplacian, tol=args.tol)
    samples = gdas_sample(aligned, args.mu, args.budget)
    _write_json(samples.to_dict(), args.output)
    return EXIT_OK


def _reconstruct(args: argparse.Namespace) -> int:
    laplacian = read_matrix_market(args.laplacian)
    samples = SampleSet.from_dict(_read_json(args.samples))
    with open_text(args.values, "r") as stream:
        values = _read_values(stream)
    mu = args.mu
    if mu is None:
        mu = DEFAULT_MU if samples.mu is None else samples.mu
    signal = reconstruct(ReconstructionProblem(laplacian, samples, values, mu), args.tol)
    text = "".join(format_float(value) + "\n" for value in np.asarray(signal))
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open_text(args.output, "w") as stream:
            stream.write(text)
    return EXIT_OK


def _bench(args: argparse.Namespace) -> int:
    overrides = {
        CONF_TRIALS: args.trials,
        CONF_SEED: args.seed,
        CONF_NOISE: args.noise,
        CONF_MU: args.mu,
        CONF_PHI: args.phi,
        CONF_BUDGETS: args.budget,
        CONF_OUTPUT: args.output,
        CONF_WORKERS: args.workers,
    }
    config, logger = load_config(args.config, overrides)
    apply_logger_config(logger)
    logging.getLogger(_PACKAGE).setLevel(
        (args.log_level or logger[CONF_DEFAULT]).upper()
    )
    if config.output is None:
        raise ConfigError("An output directory is required, use --output")
    result = run_experiment(config)
    result.write(config.output)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signed_graph_sampling",
        description="Sampling and reconstruction of signals on signed graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        choices=["debug", "info", "warning", "error"],
        default=None,
        help="logging level (default: warning)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    learn = commands.add_parser("learn", help="learn a precision matrix from CSV signals")
    learn.add_argument("input", help="CSV file, one signal per row")
    learn.add_argument("--header", action="store_true", help="first row holds labels")
    learn.add_argument("--phi", type=float, default=DEFAULT_PHI)
    learn.add_argument("--tol", type=float, default=DEFAULT_GLASSO_TOL)
    learn.add_argument("--max-iter", type=int, default=DEFAULT_GLASSO_MAX_ITER)
    learn.add_argument("--ridge", type=float, default=None)
    learn.add_argument("--prune", type=float, default=DEFAULT_PRUNE)
    learn.add_argument("--graph", help="also write the learned graph as an edge list")
    learn.add_argument("--output", help="Matrix Market output (default: stdout)")
    learn.set_defaults(func=_learn)

    balance = commands.add_parser("balance", help="balance a signed graph")
    balance.add_argument("input", help="edge list file")
    balance.add_argument("--seed", type=int, default=0, help="node to start from")
    balance.add_argument("--output", help="balanced edge list (default: stdout)")
    balance.add_argument("--report", help="JSON file for the balancing report")
    balance.set_defaults(func=_balance)

    sample = commands.add_parser("sample", help="select sample nodes")
    sample.add_argument("input", help="generalized Laplacian in Matrix Market format")
    sample.add_argument("--budget", type=int, required=True)
    sample.add_argument("--mu", type=float, default=DEFAULT_MU)
    sample.add_argument("--seed", type=int, default=0, help="balancing start node")
    sample.add_argument("--tol", type=float, default=DEFAULT_EIG_TOL)
    sample.add_argument("--output", help="sample set JSON (default: stdout)")
    sample.set_defaults(func=_sample)

    rebuild = commands.add_parser("reconstruct", help="reconstruct a signal")
    rebuild.add_argument("laplacian", help="Laplacian in Matrix Market format")
    rebuild.add_argument("samples", help="sample set JSON")
    rebuild.add_argument("values", help="observed values, one per line")
    rebuild.add_argument("--mu", type=float, default=None)
    rebuild.add_argument("--tol", type=float, default=DEFAULT_CG_TOL)
    rebuild.add_argument("--output", help="signal output (default: stdout)")
    rebuild.set_defaults(func=_reconstruct)

    bench = commands.add_parser("bench", help="run a benchmark configuration")
    bench.add_argument("config", nargs="?", help="YAML configuration file")
    bench.add_argument("--trials", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--noise", nargs="+", help="none, flip:<p> or gauss:<sigma>")
    bench.add_argument("--mu", type=float)
    bench.add_argument("--phi", type=float)
    bench.add_argument("--budget", type=_budget, nargs="+")
    bench.add_argument("--workers", type=int)
    bench.add_argument("--output", help="results directory")
    bench.set_defaults(func=_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Runs a subcommand and maps errors to exit codes"""
    args = _parser().parse_args(argv)
    setup_logging(args.log_level or "warning")
    _LOGGER.debug(STARTUP_MESSAGE)
    try:
        return args.func(args)
    except InputError as ex:
        _LOGGER.error("%s", ex)
        return EXIT_INPUT_ERROR
    except NumericalError as ex:
        _LOGGER.error("%s", ex, exc_info=args.log_level == "debug")
        return EXIT_NUMERICAL_ERROR
