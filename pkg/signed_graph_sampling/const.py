"""Constants for signed graph sampling"""
from __future__ import annotations

from typing import Final

__version__ = "0.1.0"

NAME: Final = "Signed Graph Sampling"
ISSUE_URL: Final = "https://github.com/signed-graph-sampling/signed-graph-sampling/issues"

# Dense eigendecomposition is only attempted up to this size
DENSE_ORACLE_MAX_SIZE: Final = 2000
# Below this size the smallest eigenpair is taken from the dense routine
ITERATIVE_EIG_MIN_SIZE: Final = 24
SIGN_CANON_TOL: Final = 1e-12
MULTIPLICITY_TOL: Final = 1e-8

DEFAULT_EIG_TOL: Final = 1e-10
DEFAULT_EIG_MAX_ITER: Final = 2000
DEFAULT_CG_TOL: Final = 1e-10
DEFAULT_CG_MAX_ITER: Final = 10000
SINGULAR_TOL: Final = 1e-12

DEFAULT_GLASSO_TOL: Final = 1e-4
DEFAULT_GLASSO_MAX_ITER: Final = 100
INNER_TOL_FACTOR: Final = 1e-2
INNER_MAX_ITER: Final = 1000
DEFAULT_RIDGE_FACTOR: Final = 1e-6
DEFAULT_PRUNE: Final = 1e-8
DEFAULT_PHI: Final = 0.1

DEFAULT_MU: Final = 0.01
DEFAULT_EPS: Final = 0.05
# Relative size below which a first-eigenvector entry counts as zero
REDUCIBLE_TOL: Final = 1e-10
BISECTION_WIDTH: Final = 1e-6
COVERAGE_TOL: Final = 1e-12

DEFAULT_SPLIT_FRACTION: Final = 0.9
DEFAULT_TRIALS: Final = 1
DEFAULT_SIGNALS: Final = 300
DEFAULT_DELTA: Final = 0.1
DEFAULT_NOISE_REALIZATIONS: Final = 1

FLOAT_FORMAT: Final = "%.17g"

EXIT_OK: Final = 0
EXIT_INPUT_ERROR: Final = 2
EXIT_NUMERICAL_ERROR: Final = 3

SAMPLER_PROPOSED: Final = "proposed"
SAMPLER_RANDOM: Final = "random"
SAMPLER_DEGREE_GREEDY: Final = "degree_greedy"
SAMPLERS: Final = [SAMPLER_PROPOSED, SAMPLER_RANDOM, SAMPLER_DEGREE_GREEDY]

NOISE_NONE: Final = "none"
NOISE_FLIP: Final = "flip"
NOISE_GAUSS: Final = "gauss"

RECONSTRUCT_ORIGINAL: Final = "original"
RECONSTRUCT_BALANCED: Final = "balanced"

BALANCE_SEED_RANDOM: Final = "random"

RESULTS_CSV: Final = "results.csv"
SUMMARY_JSON: Final = "summary.json"

STARTUP_MESSAGE: Final = f"""
-------------------------------------------------------------------
{NAME}
Version: {__version__}
If you have any issues with this you need to open an issue here:
{ISSUE_URL}
-------------------------------------------------------------------
"""

CONF_SOURCE: Final = "source"
CONF_SYNTHETIC: Final = "synthetic"
CONF_CSV: Final = "csv"
CONF_PATH: Final = "path"
CONF_HEADER: Final = "header"
CONF_N: Final = "n"
CONF_AVG_DEGREE: Final = "avg_degree"
CONF_WEIGHT_RANGE: Final = "weight_range"
CONF_NEG_FRACTION: Final = "neg_fraction"
CONF_FLIPS: Final = "flips"
CONF_SIGNALS: Final = "signals"
CONF_DELTA: Final = "delta"
CONF_SEED: Final = "seed"
CONF_PHI: Final = "phi"
CONF_MU: Final = "mu"
CONF_BUDGETS: Final = "budgets"
CONF_NOISE: Final = "noise"
CONF_NOISE_REALIZATIONS: Final = "noise_realizations"
CONF_TRIALS: Final = "trials"
CONF_SAMPLERS: Final = "samplers"
CONF_SPLIT_FRACTION: Final = "split_fraction"
CONF_BALANCE_SEED: Final = "balance_seed"
CONF_RECONSTRUCT_WITH: Final = "reconstruct_with"
CONF_VERIFY: Final = "verify"
CONF_WORKERS: Final = "workers"
CONF_TIMINGS: Final = "timings"
CONF_GLASSO: Final = "glasso"
CONF_TOL: Final = "tol"
CONF_MAX_ITER: Final = "max_iter"
CONF_PRUNE: Final = "prune"
CONF_EPS: Final = "eps"
CONF_OUTPUT: Final = "output"
CONF_LOGGER: Final = "logger"
CONF_DEFAULT: Final = "default"
CONF_LOGS: Final = "logs"

LOG_LEVELS: Final = ["debug", "info", "warning", "error", "critical"]
