"""Tests for synthetic data, noise, CSV handling and baseline samplers"""
import io

import numpy as np
from numpy.testing import assert_allclose
import pytest

from signed_graph_sampling.datasets import (
    NoiseModel,
    add_noise,
    baseline_degree_greedy,
    baseline_random,
    export_csv,
    generate_balanced_graph,
    gmrf_sample,
    ingest_csv,
    perturb_to_unbalanced,
    resolve_budget,
)
from signed_graph_sampling.exceptions import (
    DataError,
    GraphError,
    InputError,
    NotPositiveDefiniteError,
)
from signed_graph_sampling.graph import (
    SignedGraph,
    connected_components,
    generalized_laplacian,
    is_balanced,
)
from signed_graph_sampling.learn import SignalMatrix
from signed_graph_sampling.linalg import SparseSymMatrix

from .const import CSV_2X2, CSV_NON_NUMERIC, CSV_RAGGED, CSV_WITH_HEADER


@pytest.mark.parametrize("n,avg_degree", [(2, 1.0), (10, 3.0), (40, 6.0), (8, 7.0)])
def test_generate_balanced_graph(n, avg_degree):
    """Generated graphs are connected, balanced and within the weight range"""
    graph = generate_balanced_graph(n, avg_degree, (0.5, 1.5), 0.5, seed=n)
    assert graph.n == n
    assert len(connected_components(graph)) == 1
    assert is_balanced(graph) is not None
    expected = min(n * (n - 1) // 2, max(n - 1, round(avg_degree * n / 2)))
    assert graph.num_edges == expected
    _, _, weights = graph.edge_arrays()
    assert np.all((np.abs(weights) >= 0.5) & (np.abs(weights) <= 1.5))


def test_generate_sign_fractions():
    """No red nodes gives a positive graph, some give negative edges"""
    assert not generate_balanced_graph(20, 4.0, neg_fraction=0.0).has_negative_edges()
    assert generate_balanced_graph(20, 4.0, neg_fraction=0.5).has_negative_edges()


def test_generate_is_seeded():
    """Same seed gives the same graph"""
    assert generate_balanced_graph(30, 4.0, seed=5) == generate_balanced_graph(
        30, 4.0, seed=5
    )
    assert generate_balanced_graph(30, 4.0, seed=5) != generate_balanced_graph(
        30, 4.0, seed=6
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 1, "avg_degree": 0.5},
        {"n": 5, "avg_degree": 5.0},
        {"n": 5, "avg_degree": 2.0, "weight_range": (0.0, 1.0)},
        {"n": 5, "avg_degree": 2.0, "neg_fraction": 1.5},
    ],
)
def test_generate_rejects_bad_arguments(kwargs):
    """Argument ranges are validated"""
    with pytest.raises(InputError):
        generate_balanced_graph(**kwargs)


def test_perturb_to_unbalanced(balanced_graph_factory):
    """Flipped graphs lose balance but keep magnitudes"""
    graph = balanced_graph_factory(20, seed=1)
    perturbed = perturb_to_unbalanced(graph, 3, seed=1)
    assert is_balanced(perturbed) is None
    flipped = [
        key for key, weight in graph.edges_dict().items()
        if perturbed.weight(*key) != weight
    ]
    assert len(flipped) == 3
    for key in flipped:
        assert perturbed.weight(*key) == -graph.weight(*key)
    assert perturb_to_unbalanced(graph, 0) is graph
    with pytest.raises(GraphError):
        perturb_to_unbalanced(graph, graph.num_edges + 1)


def test_gmrf_sample_covariance(path4):
    """Sample covariance approaches the inverse precision"""
    laplacian = generalized_laplacian(path4)
    signals = gmrf_sample(laplacian, 0.5, 50000, seed=2)
    assert signals.values.shape == (50000, 4)
    expected = np.linalg.inv(laplacian.to_dense() + 0.5 * np.identity(4))
    assert_allclose(np.cov(signals.values.T, bias=True), expected, atol=0.05)


def test_gmrf_sample_errors(path4):
    """Singular precisions and negative shifts are rejected"""
    with pytest.raises(NotPositiveDefiniteError):
        gmrf_sample(generalized_laplacian(path4), 0.0, 10)
    with pytest.raises(InputError):
        gmrf_sample(generalized_laplacian(path4), -1.0, 10)


@pytest.mark.parametrize(
    "text,kind,level",
    [("none", "none", 0.0), ("flip:0.1", "flip", 0.1), ("GAUSS:0.5", "gauss", 0.5)],
)
def test_noise_model_parse(text, kind, level):
    """Noise descriptions parse into models"""
    model = NoiseModel.parse(text)
    assert (model.kind, model.level) == (kind, level)
    assert NoiseModel.parse(str(model)) == model


@pytest.mark.parametrize("text", ["flip", "flip:2", "gauss:-1", "salt:0.1", "flip:x"])
def test_noise_model_rejects(text):
    """Malformed noise descriptions are input errors"""
    with pytest.raises(InputError):
        NoiseModel.parse(text)


def test_flip_noise_rate(rng):
    """Flip noise changes about p of the entries to another symbol"""
    values = rng.choice([-1.0, 0.0, 1.0], size=(2000, 10))
    signals = SignalMatrix(values)
    noisy = add_noise(signals, NoiseModel("flip", 0.1), seed=4)
    changed = noisy.values != values
    assert changed.mean() == pytest.approx(0.1, abs=0.01)
    assert set(np.unique(noisy.values)) <= {-1.0, 0.0, 1.0}


def test_flip_noise_uses_given_alphabet():
    """Values outside the alphabet move to one of its symbols"""
    signals = SignalMatrix([[5.0], [5.0]])
    alphabets = [np.array([0.0, 1.0])]
    noisy = add_noise(signals, NoiseModel("flip", 1.0), seed=0, alphabets=alphabets)
    assert set(noisy.values.ravel()) <= {0.0, 1.0}


def test_gauss_noise_and_none(rng):
    """Gaussian noise has the requested spread, none is a copy"""
    signals = SignalMatrix(np.zeros((5000, 4)))
    noisy = add_noise(signals, NoiseModel("gauss", 0.3), seed=1)
    assert np.std(noisy.values) == pytest.approx(0.3, rel=0.05)
    clean = SignalMatrix(rng.standard_normal((3, 2)))
    assert np.array_equal(add_noise(clean, NoiseModel.none()).values, clean.values)


def test_ingest_csv():
    """CSV rows become signals, headers become labels"""
    signals = ingest_csv(io.StringIO(CSV_2X2))
    assert_allclose(signals.values, [[1, -1], [-1, 1]])
    assert signals.labels is None
    labelled = ingest_csv(io.StringIO(CSV_WITH_HEADER), header=True)
    assert labelled.labels == ("alice", "bob", "carol")
    assert labelled.values.shape == (3, 3)


@pytest.mark.parametrize(
    "text,line", [(CSV_RAGGED, 3), (CSV_NON_NUMERIC, 2), ("1,2\n3,\n", 2)]
)
def test_ingest_csv_errors(text, line):
    """Malformed CSV reports the offending line"""
    with pytest.raises(DataError) as info:
        ingest_csv(io.StringIO(text))
    assert info.value.line == line


def test_ingest_csv_empty(tmp_path):
    """Empty and missing files are data errors"""
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(DataError):
        ingest_csv(path)
    with pytest.raises(InputError):
        ingest_csv(tmp_path / "missing.csv")


def test_export_csv_round_trip(rng, tmp_path):
    """Exported signals read back bit for bit"""
    signals = SignalMatrix(rng.standard_normal((4, 3)), ("x", "y", "z"))
    path = tmp_path / "signals.csv"
    export_csv(signals, path)
    loaded = ingest_csv(path, header=True)
    assert np.array_equal(loaded.values, signals.values)
    assert loaded.labels == signals.labels


@pytest.mark.parametrize(
    "budget,n,expected", [(3, 10, 3), (0, 10, 0), (10, 10, 10), (0.25, 10, 3), (2.0, 5, 2)]
)
def test_resolve_budget(budget, n, expected):
    """Counts pass through, fractions round up"""
    assert resolve_budget(budget, n) == expected


@pytest.mark.parametrize("budget", [11, -1, 1.5, True])
def test_resolve_budget_rejects(budget):
    """Out of range budgets are input errors"""
    with pytest.raises(InputError):
        resolve_budget(budget, 10)


def test_baseline_random():
    """Random baseline draws distinct nodes reproducibly"""
    samples = baseline_random(20, 5, seed=3)
    assert len(set(samples.nodes)) == 5
    assert samples == baseline_random(20, 5, seed=3)
    assert baseline_random(20, 0).nodes == ()
    with pytest.raises(InputError):
        baseline_random(3, 4)


def test_baseline_degree_greedy():
    """Greedy baseline ranks by absolute degree, ties by index"""
    graph = SignedGraph(4, [(0, 1, -3.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert baseline_degree_greedy(graph, 2).nodes == (1, 0)
    assert baseline_degree_greedy(graph, 4).nodes == (1, 0, 2, 3)
    star = SignedGraph(3, [(0, 1, 1.0), (0, 2, 1.0)])
    assert baseline_degree_greedy(star, 2).nodes == (0, 1)
    with pytest.raises(InputError):
        baseline_degree_greedy(graph, 5)


def test_signal_matrix_identity_precision():
    """Identity precision draws have unit variance"""
    signals = gmrf_sample(SparseSymMatrix.identity(3), 0.0, 8000, seed=0)
    assert_allclose(np.var(signals.values, axis=0), 1.0, atol=0.06)
