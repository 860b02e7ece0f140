"""Tests for the experiment harness"""
import json
import math
from unittest import mock

import numpy as np
import pandas as pd
import pytest

from signed_graph_sampling import harness
from signed_graph_sampling.datasets import NoiseModel, export_csv
from signed_graph_sampling.exceptions import (
    ConfigError,
    NotPositiveDefiniteError,
    NumericalError,
)
from signed_graph_sampling.harness import (
    CsvSource,
    ExperimentConfig,
    SyntheticSource,
    load_signals,
    run_experiment,
)

SMALL_SOURCE = SyntheticSource(n=15, avg_degree=3.0, flips=2, signals=60, seed=3)


def _config(**kwargs):
    values = {"source": SMALL_SOURCE, "phi": 0.05, "budgets": (3,), "trials": 2}
    values.update(kwargs)
    return ExperimentConfig(**values)


def test_small_experiment():
    """Every grid cell gets a finite error and ordered position"""
    result = run_experiment(_config(noise=(NoiseModel(), NoiseModel("gauss", 0.1))))
    assert result.n == 15
    assert result.budgets == (3,)
    assert not result.failures
    assert len(result.cells) == 3 * 2 * 2
    keys = [(c.sampler, c.noise, c.trial) for c in result.cells]
    assert keys[:4] == [
        ("proposed", "none", 0),
        ("proposed", "none", 1),
        ("proposed", "gauss:0.1", 0),
        ("proposed", "gauss:0.1", 1),
    ]
    for cell in result.cells:
        assert math.isfinite(cell.mse)
        assert len(cell.samples) <= 3
        assert 0 <= cell.re
        assert 0 < cell.dcs <= 1
    proposed = [c for c in result.cells if c.sampler == "proposed"]
    assert all(cell.t_final is not None for cell in proposed)


def test_common_random_numbers():
    """Cells of one trial share the learned and balanced graphs"""
    result = run_experiment(_config(trials=1))
    assert len({cell.re for cell in result.cells}) == 1
    assert len({cell.dcs for cell in result.cells}) == 1


def test_experiment_is_deterministic():
    """Same configuration gives identical tables"""
    first = run_experiment(_config()).to_frame()
    second = run_experiment(_config()).to_frame()
    pd.testing.assert_frame_equal(first, second)


def test_fraction_budgets_are_resolved():
    """Fractions become counts and duplicates collapse"""
    result = run_experiment(_config(budgets=(0.2, 3), trials=1, samplers=("degree_greedy",)))
    assert result.budgets == (3,)
    assert len(result.cells) == 1


def test_write_results(tmp_path):
    """Results and summary land in the output directory"""
    result = run_experiment(_config())
    csv_path, json_path = result.write(tmp_path / "out")
    frame = pd.read_csv(csv_path, keep_default_na=False)
    assert list(frame.columns[:4]) == ["sampler", "budget", "noise", "trial"]
    assert not any(column.startswith("time_") for column in frame.columns)
    assert len(frame) == 6
    summary = json.loads(json_path.read_text(encoding="utf-8"))
    assert summary["n"] == 15
    assert summary["trials"] == 2
    assert len(summary["cells"]) == 3
    cell = summary["cells"][0]
    assert cell["sampler"] == "proposed"
    assert cell["mse_std"] >= 0


def test_timings_only_when_requested():
    """Timing columns appear with the timings flag"""
    frame = run_experiment(_config(timings=True, trials=1)).to_frame()
    assert {"time_learn", "time_balance", "time_align", "time_reconstruct"} <= set(
        frame.columns
    )


def test_verify_matches_threshold():
    """Dense check confirms the disc bound of proposed samples"""
    result = run_experiment(_config(verify=True, trials=1))
    for cell in result.cells:
        if cell.sampler == "proposed":
            assert cell.lambda_min_b >= cell.t_final - 1e-8
        else:
            assert cell.lambda_min_b is None


def test_sampler_failure_is_recorded():
    """A failing sampler marks only its own cells"""
    with mock.patch.object(
        harness, "gdas_sample", side_effect=NumericalError("eigensolver exploded")
    ):
        result = run_experiment(_config())
    failed = result.failures
    assert {cell.sampler for cell in failed} == {"proposed"}
    assert all("eigensolver exploded" in cell.error for cell in failed)
    assert all(math.isfinite(c.mse) for c in result.cells if c.sampler != "proposed")
    summary = result.summary()
    assert summary["cells"][0]["failed"] == 2
    assert summary["cells"][0]["mse_mean"] is None


def test_trial_failure_marks_every_cell():
    """A failure before sampling fails the whole trial"""
    with mock.patch.object(
        harness, "learn_precision", side_effect=NotPositiveDefiniteError("singular")
    ):
        result = run_experiment(_config(trials=1))
    assert len(result.failures) == len(result.cells) == 3


def test_unexpected_error_before_sampling_is_recorded():
    """Foreign exceptions in the shared stages fail the trial, not the run"""
    with mock.patch.object(
        harness, "deltacon", side_effect=ValueError("array must not contain infs")
    ):
        result = run_experiment(_config())
    assert len(result.failures) == len(result.cells) == 6
    assert all("must not contain infs" in cell.error for cell in result.cells)
    summary = result.summary()
    assert all(cell["failed"] == 2 for cell in summary["cells"])
    assert summary["re_mean"] is None


def test_csv_source(tmp_path):
    """Signals can come from a CSV file"""
    path = tmp_path / "signals.csv"
    export_csv(load_signals(_config()), path)
    config = _config(source=CsvSource(path), trials=1)
    assert np.array_equal(load_signals(config).values, load_signals(_config()).values)
    result = run_experiment(config)
    assert not result.failures


def test_synthetic_seed_defaults_to_master_seed():
    """Sources without a seed follow the experiment seed"""
    source = SyntheticSource(n=10, avg_degree=3.0, signals=20)
    first = load_signals(ExperimentConfig(source=source, seed=4))
    second = load_signals(ExperimentConfig(source=source, seed=4))
    third = load_signals(ExperimentConfig(source=source, seed=5))
    assert np.array_equal(first.values, second.values)
    assert not np.array_equal(first.values, third.values)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"trials": 0},
        {"split_fraction": 1.0},
        {"samplers": ("oracle",)},
        {"budgets": ()},
        {"mu": 0.0},
        {"balance_seed": "anywhere"},
        {"reconstruct_with": "neither"},
    ],
)
def test_config_validation(kwargs):
    """Invalid settings are configuration errors"""
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


@pytest.mark.slow
def test_proposed_beats_baselines():
    """Disc-based sampling beats random on average and degree order in most trials"""
    config = ExperimentConfig(
        source=SyntheticSource(n=60, avg_degree=4.0, flips=10, signals=300),
        phi=0.1,
        mu=0.01,
        budgets=(12,),
        trials=50,
        seed=1,
    )
    result = run_experiment(config)
    assert not result.failures
    means = {cell["sampler"]: cell["mse_mean"] for cell in result.summary()["cells"]}
    assert means["proposed"] <= means["random"]
    per_trial = result.to_frame().pivot(index="trial", columns="sampler", values="mse")
    wins = (per_trial["proposed"] <= per_trial["degree_greedy"]).mean()
    assert wins >= 0.8
