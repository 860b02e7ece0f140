"""Benchmark configuration loading and validation"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Mapping

import voluptuous as vol
import yaml

from signed_graph_sampling.const import (
    BALANCE_SEED_RANDOM,
    CONF_AVG_DEGREE,
    CONF_BALANCE_SEED,
    CONF_BUDGETS,
    CONF_CSV,
    CONF_DEFAULT,
    CONF_DELTA,
    CONF_EPS,
    CONF_FLIPS,
    CONF_GLASSO,
    CONF_HEADER,
    CONF_LOGGER,
    CONF_LOGS,
    CONF_MAX_ITER,
    CONF_MU,
    CONF_N,
    CONF_NEG_FRACTION,
    CONF_NOISE,
    CONF_NOISE_REALIZATIONS,
    CONF_OUTPUT,
    CONF_PATH,
    CONF_PHI,
    CONF_PRUNE,
    CONF_RECONSTRUCT_WITH,
    CONF_SAMPLERS,
    CONF_SEED,
    CONF_SIGNALS,
    CONF_SOURCE,
    CONF_SPLIT_FRACTION,
    CONF_SYNTHETIC,
    CONF_TIMINGS,
    CONF_TOL,
    CONF_TRIALS,
    CONF_VERIFY,
    CONF_WEIGHT_RANGE,
    CONF_WORKERS,
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
    LOG_LEVELS,
    NOISE_NONE,
    RECONSTRUCT_BALANCED,
    RECONSTRUCT_ORIGINAL,
    SAMPLERS,
)
from signed_graph_sampling.datasets import NoiseModel
from signed_graph_sampling.exceptions import ConfigError, InputError
from signed_graph_sampling.harness import CsvSource, ExperimentConfig, SyntheticSource
from signed_graph_sampling.util import ensure_list

_LOGGER = logging.getLogger(__name__)


def _empty_if_none(value: Any) -> Any:
    return {} if value is None else value


def _noise_model(value: Any) -> NoiseModel:
    try:
        return NoiseModel.parse(str(value))
    except InputError as ex:
        raise vol.Invalid(str(ex)) from ex


def _whole_float_to_int(value: Any) -> Any:
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def _one_source(value: dict[str, Any]) -> dict[str, Any]:
    if CONF_SYNTHETIC not in value and CONF_CSV not in value:
        raise vol.Invalid(f"source needs one of {CONF_SYNTHETIC} or {CONF_CSV}")
    return value


_POSITIVE_FLOAT = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
_COUNT = vol.All(vol.Coerce(int), vol.Range(min=0))

SYNTHETIC_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_N, default=60): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional(CONF_AVG_DEGREE, default=4.0): _POSITIVE_FLOAT,
        vol.Optional(CONF_WEIGHT_RANGE, default=[0.1, 2.0]): vol.All(
            [_POSITIVE_FLOAT], vol.Length(min=2, max=2)
        ),
        vol.Optional(CONF_NEG_FRACTION, default=0.3): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1)
        ),
        vol.Optional(CONF_FLIPS, default=0): _COUNT,
        vol.Optional(CONF_SIGNALS, default=DEFAULT_SIGNALS): vol.All(
            vol.Coerce(int), vol.Range(min=3)
        ),
        vol.Optional(CONF_DELTA, default=DEFAULT_DELTA): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_SEED): _COUNT,
    }
)

CSV_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_PATH): str,
        vol.Optional(CONF_HEADER, default=False): bool,
    }
)

SOURCE_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Exclusive(CONF_SYNTHETIC, CONF_SOURCE): vol.All(
                _empty_if_none, SYNTHETIC_SCHEMA
            ),
            vol.Exclusive(CONF_CSV, CONF_SOURCE): CSV_SCHEMA,
        }
    ),
    _one_source,
)

BUDGET = vol.All(
    _whole_float_to_int,
    vol.Any(
        vol.All(int, vol.Range(min=0)),
        vol.All(
            float, vol.Range(min=0, max=1, min_included=False, max_included=False)
        ),
        msg="budget must be a count or a fraction in (0, 1)",
    ),
)

LOGGER_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_DEFAULT, default="info"): vol.All(str, vol.Lower, vol.In(LOG_LEVELS)),
        vol.Optional(CONF_LOGS, default={}): vol.All(
            _empty_if_none, {str: vol.All(str, vol.Lower, vol.In(LOG_LEVELS))}
        ),
    }
)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_SOURCE, default={CONF_SYNTHETIC: {}}): SOURCE_SCHEMA,
        vol.Optional(CONF_PHI, default=DEFAULT_PHI): _POSITIVE_FLOAT,
        vol.Optional(CONF_MU, default=DEFAULT_MU): _POSITIVE_FLOAT,
        vol.Optional(CONF_BUDGETS, default=[0.2]): vol.All(
            ensure_list, [BUDGET], vol.Length(min=1)
        ),
        vol.Optional(CONF_NOISE, default=[NOISE_NONE]): vol.All(
            ensure_list, [_noise_model], vol.Length(min=1), vol.Unique()
        ),
        vol.Optional(
            CONF_NOISE_REALIZATIONS, default=DEFAULT_NOISE_REALIZATIONS
        ): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_TRIALS, default=DEFAULT_TRIALS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_SAMPLERS, default=list(SAMPLERS)): vol.All(
            ensure_list, [vol.In(SAMPLERS)], vol.Length(min=1), vol.Unique()
        ),
        vol.Optional(CONF_SPLIT_FRACTION, default=DEFAULT_SPLIT_FRACTION): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
        ),
        vol.Optional(CONF_SEED, default=0): _COUNT,
        vol.Optional(CONF_BALANCE_SEED, default=0): vol.Any(
            BALANCE_SEED_RANDOM, vol.All(int, vol.Range(min=0))
        ),
        vol.Optional(CONF_RECONSTRUCT_WITH, default=RECONSTRUCT_ORIGINAL): vol.In(
            [RECONSTRUCT_ORIGINAL, RECONSTRUCT_BALANCED]
        ),
        vol.Optional(CONF_VERIFY, default=False): bool,
        vol.Optional(CONF_WORKERS, default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_TIMINGS, default=False): bool,
        vol.Optional(CONF_GLASSO, default={}): vol.All(
            _empty_if_none,
            {
                vol.Optional(CONF_TOL, default=DEFAULT_GLASSO_TOL): _POSITIVE_FLOAT,
                vol.Optional(CONF_MAX_ITER, default=DEFAULT_GLASSO_MAX_ITER): vol.All(
                    vol.Coerce(int), vol.Range(min=1)
                ),
            },
        ),
        vol.Optional(CONF_PRUNE, default=DEFAULT_PRUNE): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_EPS, default=DEFAULT_EPS): _POSITIVE_FLOAT,
        vol.Optional(CONF_OUTPUT): vol.Any(None, str),
        vol.Optional(CONF_LOGGER, default={}): vol.All(_empty_if_none, LOGGER_SCHEMA),
    }
)


def validate(data: Mapping[str, Any] | None) -> dict[str, Any]:
    """Validates raw configuration data and fills in defaults"""
    try:
        return CONFIG_SCHEMA(dict(data or {}))
    except vol.Invalid as ex:
        raise ConfigError("Invalid configuration", str(ex)) from ex


def build_config(validated: Mapping[str, Any]) -> ExperimentConfig:
    """Experiment configuration from validated data"""
    source_data = validated[CONF_SOURCE]
    source: SyntheticSource | CsvSource
    if CONF_CSV in source_data:
        csv = source_data[CONF_CSV]
        source = CsvSource(Path(csv[CONF_PATH]), csv[CONF_HEADER])
    else:
        synthetic = source_data[CONF_SYNTHETIC]
        low, high = synthetic[CONF_WEIGHT_RANGE]
        source = SyntheticSource(
            n=synthetic[CONF_N],
            avg_degree=synthetic[CONF_AVG_DEGREE],
            weight_range=(low, high),
            neg_fraction=synthetic[CONF_NEG_FRACTION],
            flips=synthetic[CONF_FLIPS],
            signals=synthetic[CONF_SIGNALS],
            delta=synthetic[CONF_DELTA],
            seed=synthetic.get(CONF_SEED),
        )
    glasso = validated[CONF_GLASSO]
    output = validated.get(CONF_OUTPUT)
    return ExperimentConfig(
        source=source,
        phi=validated[CONF_PHI],
        mu=validated[CONF_MU],
        budgets=tuple(validated[CONF_BUDGETS]),
        noise=tuple(validated[CONF_NOISE]),
        trials=validated[CONF_TRIALS],
        samplers=tuple(validated[CONF_SAMPLERS]),
        split_fraction=validated[CONF_SPLIT_FRACTION],
        seed=validated[CONF_SEED],
        noise_realizations=validated[CONF_NOISE_REALIZATIONS],
        balance_seed=validated[CONF_BALANCE_SEED],
        reconstruct_with=validated[CONF_RECONSTRUCT_WITH],
        verify=validated[CONF_VERIFY],
        workers=validated[CONF_WORKERS],
        timings=validated[CONF_TIMINGS],
        glasso_tol=glasso[CONF_TOL],
        glasso_max_iter=glasso[CONF_MAX_ITER],
        prune=validated[CONF_PRUNE],
        eps=validated[CONF_EPS],
        output=None if output is None else Path(output),
    )


def read_yaml(path: str | Path) -> dict[str, Any]:
    """Raw mapping from a YAML file"""
    try:
        with open(path, encoding="utf-8") as stream:
            data = yaml.safe_load(stream)
    except OSError as ex:
        raise ConfigError(f"Cannot read configuration {path}", str(ex)) from ex
    except yaml.YAMLError as ex:
        raise ConfigError(f"Invalid YAML in {path}", str(ex)) from ex
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("Configuration must be a mapping", type(data).__name__)
    return data


def load_config(
    path: str | Path | None, overrides: Mapping[str, Any] | None = None
) -> tuple[ExperimentConfig, dict[str, Any]]:
    """Experiment configuration and logger section.

    Overrides that are not None replace top-level values before validation.
    """
    data = read_yaml(path) if path is not None else {}
    if overrides:
        data.update({key: value for key, value in overrides.items() if value is not None})
    validated = validate(data)
    _LOGGER.debug("Loaded configuration %s", validated)
    return build_config(validated), validated[CONF_LOGGER]


def apply_logger_config(logger: Mapping[str, Any]) -> None:
    """Applies the default and per-module levels of a logger section"""
    if CONF_DEFAULT in logger:
        logging.getLogger().setLevel(logger[CONF_DEFAULT].upper())
    for name, level in (logger.get(CONF_LOGS) or {}).items():
        logging.getLogger(name).setLevel(level.upper())
