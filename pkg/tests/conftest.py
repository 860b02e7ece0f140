# pylint: disable=redefined-outer-name
"""Global fixtures for signed graph sampling tests."""

from typing import Callable

import numpy as np
import pytest

from signed_graph_sampling.datasets import (
    generate_balanced_graph,
    perturb_to_unbalanced,
)
from signed_graph_sampling.graph import SignedGraph


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    """Random generator with a fixed seed."""
    return np.random.default_rng(20240611)


@pytest.fixture(name="balanced_graph_factory")
def balanced_graph_factory_fixture() -> Callable[..., SignedGraph]:
    """Builds connected balanced graphs with random signs and weights."""

    def factory(n: int, seed: int, avg_degree: float = 4.0) -> SignedGraph:
        return generate_balanced_graph(
            n, min(avg_degree, n - 1), (0.1, 2.0), 0.4, seed
        )

    return factory


@pytest.fixture(name="signed_graph_factory")
def signed_graph_factory_fixture(
    balanced_graph_factory,
) -> Callable[..., SignedGraph]:
    """Builds connected signed graphs, unbalanced whenever they have a cycle."""

    def factory(n: int, seed: int, avg_degree: float = 4.0) -> SignedGraph:
        graph = balanced_graph_factory(n, seed, avg_degree)
        flips = max(1, graph.num_edges // 4)
        return perturb_to_unbalanced(graph, flips, seed)

    return factory


@pytest.fixture(name="path4")
def path4_fixture() -> SignedGraph:
    """Four-node path with unit weights."""
    return SignedGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])


@pytest.fixture(name="triangle_positive_removal")
def triangle_positive_removal_fixture() -> SignedGraph:
    """Unbalanced triangle resolved by dropping one positive edge."""
    return SignedGraph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, -2.0)])


@pytest.fixture(name="triangle_all_negative")
def triangle_all_negative_fixture() -> SignedGraph:
    """Unbalanced all-negative triangle that needs a weight update."""
    return SignedGraph(3, [(0, 1, -1.0), (0, 2, -0.5), (1, 2, -2.0)])
