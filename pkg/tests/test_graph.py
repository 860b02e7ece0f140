"""Tests for signed graphs and Laplacians"""
import io

import numpy as np
from numpy.testing import assert_allclose
import pytest

from signed_graph_sampling.exceptions import DataError, DimensionError, GraphError
from signed_graph_sampling.graph import (
    BoundaryCondition,
    Coloring,
    SignedGraph,
    combinatorial_laplacian,
    connected_components,
    edge_consistency,
    edge_variation,
    generalized_laplacian,
    glr,
    is_balanced,
    is_ms,
    nodal_domains,
    read_edge_list,
    second_difference,
    signed_switch,
    write_edge_list,
)
from signed_graph_sampling.linalg import dense_eig

from .const import EDGE_LIST, ORACLE_TOL


@pytest.mark.parametrize(
    "edges",
    [
        [(0, 0, 1.0)],
        [(0, 3, 1.0)],
        [(0, 1, 0.0)],
        [(0, 1, float("nan"))],
        [(0, 1, 1.0), (1, 0, 2.0)],
    ],
)
def test_invalid_edges(edges):
    """Loops, bad endpoints, zero weights and duplicates are rejected"""
    with pytest.raises(GraphError):
        SignedGraph(3, edges)


def test_graph_accessors():
    """Edges are normalized to i < j and sorted"""
    graph = SignedGraph(3, [(2, 1, -1.0), (1, 0, 2.0)])
    assert graph.edges() == [(0, 1, 2.0), (1, 2, -1.0)]
    assert graph.weight(2, 1) == -1.0
    assert graph.has_edge(1, 0)
    assert not graph.has_edge(0, 2)
    assert dict(graph.neighbors(1)) == {0: 2.0, 2: -1.0}
    assert graph.degree(1) == 2
    assert_allclose(graph.weighted_degree(), [2.0, 3.0, 1.0])
    assert_allclose(graph.weighted_degree(absolute=False), [2.0, 1.0, -1.0])
    assert graph.has_negative_edges()
    with pytest.raises(GraphError):
        graph.weight(0, 2)


def test_generalized_laplacian_example():
    """Diagonal holds signed degree plus self-loop"""
    graph = SignedGraph(3, [(0, 1, 2.0), (1, 2, -1.0)], [0.0, 0.0, 0.5])
    assert_allclose(
        generalized_laplacian(graph).to_dense(),
        [[2.0, -2.0, 0.0], [-2.0, 1.0, 1.0], [0.0, 1.0, -0.5]],
    )
    assert_allclose(
        generalized_laplacian(graph).to_dense()
        - combinatorial_laplacian(graph).to_dense(),
        np.diag([0.0, 0.0, 0.5]),
    )


def test_laplacian_is_symmetric_with_zero_row_sums(signed_graph_factory):
    """Combinatorial Laplacian rows sum to zero"""
    for seed in range(5):
        graph = signed_graph_factory(20, seed)
        dense = combinatorial_laplacian(graph).to_dense()
        assert np.array_equal(dense, dense.T)
        assert_allclose(dense.sum(axis=1), 0.0, atol=1e-12)


def test_glr_matches_edge_variation(signed_graph_factory, rng):
    """Quadratic form agrees with the edge-sum form"""
    for seed in range(5):
        graph = SignedGraph(
            20,
            signed_graph_factory(20, seed).edges(),
            rng.uniform(-1.0, 1.0, 20),
        )
        x = rng.standard_normal(20)
        assert glr(generalized_laplacian(graph), x) == pytest.approx(
            edge_variation(graph, x), rel=1e-10
        )
    with pytest.raises(DimensionError):
        glr(generalized_laplacian(graph), np.ones(3))


def test_connected_components():
    """Components are ordered by their lowest node"""
    graph = SignedGraph(5, [(3, 4, 1.0), (0, 2, -1.0)])
    assert connected_components(graph) == [[0, 2], [1], [3, 4]]
    assert connected_components(SignedGraph(0)) == []


def test_is_balanced():
    """Balanced graphs get a certificate, unbalanced cycles do not"""
    coloring = is_balanced(SignedGraph(3, [(0, 1, -1.0), (1, 2, -1.0)]))
    assert coloring == Coloring((1, -1, 1))
    assert is_balanced(SignedGraph(3, [(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)])) is None
    assert is_balanced(SignedGraph(2)) == Coloring((1, 1))


def _all_cycles_positive(graph: SignedGraph) -> bool:
    """Walks every simple cycle from its lowest node and checks the sign product"""

    def walk(start, node, visited, sign):
        for neighbor, weight in graph.neighbors(node).items():
            product = sign * np.sign(weight)
            if neighbor == start and len(visited) >= 3 and product < 0:
                return False
            if neighbor > start and neighbor not in visited:
                if not walk(start, neighbor, visited | {neighbor}, product):
                    return False
        return True

    return all(walk(start, start, frozenset({start}), 1.0) for start in range(graph.n))


def test_is_balanced_matches_cycle_signs(rng):
    """Certificate exists exactly when every cycle has a positive sign product"""
    outcomes = set()
    for seed in range(200):
        n = 3 + seed % 5
        edges = [
            (i, j, rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5))
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.6
        ]
        graph = SignedGraph(n, edges)
        expected = _all_cycles_positive(graph)
        assert (is_balanced(graph) is not None) == expected
        outcomes.add(expected)
    assert outcomes == {True, False}


def test_generated_graphs_are_balanced(balanced_graph_factory):
    """Certificate makes every edge consistent"""
    for seed in range(5):
        graph = balanced_graph_factory(25, seed)
        coloring = is_balanced(graph)
        assert coloring is not None
        for i, j, _ in graph.edges():
            assert edge_consistency(graph, coloring, (i, j)) == 1


def _isolated(eigenvalues, index, gap=1e-3):
    others = np.delete(eigenvalues, index)
    return bool(np.min(np.abs(others - eigenvalues[index])) > gap)


def test_signed_switch_preserves_spectrum(balanced_graph_factory):
    """Switching is a similarity transform onto a positive graph"""
    for seed in range(100):
        graph = balanced_graph_factory(5 + seed % 26, seed)
        coloring = is_balanced(graph)
        beta = coloring.as_array()
        switched = signed_switch(graph, coloring)
        assert not switched.has_negative_edges()
        original = dense_eig(generalized_laplacian(graph))
        mapped = dense_eig(generalized_laplacian(switched))
        assert_allclose(mapped.eigenvalues, original.eigenvalues, atol=ORACLE_TOL)
        for index in range(graph.n):
            if not _isolated(original.eigenvalues, index):
                continue
            vector = original.eigenvectors[:, index]
            image = beta * mapped.eigenvectors[:, index]
            image *= np.sign(image @ vector)
            assert_allclose(vector, image, atol=ORACLE_TOL)
        assert is_ms(graph, original.pair(0)[1])
        assert is_ms(switched, mapped.pair(0)[1])


def test_rayleigh_quotient_bounds(signed_graph_factory, rng):
    """Eigenvectors attain their eigenvalue, other signals stay inside the spectrum"""
    for seed in range(10):
        graph = signed_graph_factory(15, seed)
        laplacian = generalized_laplacian(graph)
        result = dense_eig(laplacian)
        for index in range(graph.n):
            value, vector = result.pair(index)
            assert glr(laplacian, vector) / (vector @ vector) == pytest.approx(
                value, abs=ORACLE_TOL
            )
        for _ in range(20):
            x = rng.standard_normal(graph.n)
            quotient = glr(laplacian, x) / (x @ x)
            assert result.eigenvalues[0] - ORACLE_TOL <= quotient
            assert quotient <= result.eigenvalues[-1] + ORACLE_TOL


def test_signed_switch_examples():
    """Positive graphs are unchanged, negative edges flip"""
    positive = SignedGraph(3, [(0, 1, 1.0), (1, 2, 2.0)])
    assert signed_switch(positive, Coloring.uniform(3)) == positive
    negative = SignedGraph(2, [(0, 1, -1.0)])
    switched = signed_switch(negative, Coloring((1, -1)))
    assert switched.weight(0, 1) == 1.0
    assert_allclose(generalized_laplacian(switched).to_dense(), [[-1, -1], [-1, -1]])
    with pytest.raises(GraphError):
        signed_switch(negative, Coloring.uniform(2))


def test_balanced_first_eigenvector_signs(balanced_graph_factory):
    """Smallest eigenvector of a balanced graph follows the coloring"""
    for seed in range(5):
        graph = balanced_graph_factory(12, seed)
        coloring = is_balanced(graph)
        _, vector = dense_eig(generalized_laplacian(graph)).pair(0)
        assert np.all(np.abs(vector) > 0)
        signs = np.sign(vector) * np.sign(vector[0])
        assert np.array_equal(signs, coloring.as_array())
        assert is_ms(graph, vector)


def test_second_difference_boundaries():
    """Dirichlet boundaries add a self-loop of twice the weight"""
    neumann = BoundaryCondition.neumann()
    assert_allclose(
        second_difference(3, neumann, neumann).to_dense(),
        [[1, -1, 0], [-1, 2, -1], [0, -1, 1]],
    )
    dirichlet = second_difference(
        3, BoundaryCondition.dirichlet(1.0), BoundaryCondition.neumann()
    )
    assert dirichlet.to_dense()[0, 0] == pytest.approx(3.0)
    values = dense_eig(
        second_difference(6, BoundaryCondition.neumann(), BoundaryCondition.neumann())
    ).eigenvalues
    expected = 2 - 2 * np.cos(np.pi * np.arange(6) / 6)
    assert_allclose(values, expected, atol=ORACLE_TOL)


def test_neumann_eigenvectors_are_cosines():
    """Free-boundary path diagonalizes in the DCT-II basis"""
    size = 8
    result = dense_eig(
        second_difference(
            size, BoundaryCondition.neumann(), BoundaryCondition.neumann()
        )
    )
    positions = np.arange(size) + 0.5
    for k in range(size):
        cosine = np.cos(np.pi * k * positions / size)
        cosine *= np.sqrt((1.0 if k == 0 else 2.0) / size)
        assert result.eigenvalues[k] == pytest.approx(
            2 - 2 * np.cos(np.pi * k / size), abs=ORACLE_TOL
        )
        assert_allclose(
            np.abs(result.eigenvectors[:, k]), np.abs(cosine), atol=ORACLE_TOL
        )


def test_nodal_domain_bound(balanced_graph_factory):
    """Eigenvector k has at most k + r - 1 strong nodal domains"""
    for seed in range(100):
        graph = balanced_graph_factory(5 + seed % 16, seed)
        result = dense_eig(generalized_laplacian(graph))
        for k in range(1, graph.n + 1):
            vector = result.eigenvectors[:, k - 1].copy()
            vector[np.abs(vector) < 1e-10] = 0.0
            bound = k + result.multiplicity(k - 1) - 1
            assert nodal_domains(graph, vector) <= bound


def test_nodal_domains_count_increases(path4):
    """Eigenvector k of a positive path has k strong nodal domains"""
    result = dense_eig(generalized_laplacian(path4))
    for index in range(4):
        assert nodal_domains(path4, result.eigenvectors[:, index]) == index + 1
    assert nodal_domains(path4, np.zeros(4)) == 0


def test_nodal_domains_switching_invariant(balanced_graph_factory, rng):
    """Counting on the switched graph gives the same result"""
    graph = balanced_graph_factory(10, seed=4)
    coloring = is_balanced(graph)
    x = rng.standard_normal(10)
    assert nodal_domains(graph, x, coloring) == nodal_domains(graph, x)


def test_edge_list_round_trip():
    """Edge lists keep comments out and self-loops in"""
    graph = read_edge_list(io.StringIO(EDGE_LIST))
    assert graph.n == 4
    assert graph.edges() == [(0, 1, 1.5), (1, 2, -0.25), (2, 3, 2.0)]
    assert_allclose(graph.self_loops, [0, 0, 0, 0.5])
    buffer = io.StringIO()
    write_edge_list(graph, buffer)
    assert buffer.getvalue() == "n 4\n0 1 1.5\n1 2 -0.25\n2 3 2\n3 3 0.5\n"
    assert read_edge_list(io.StringIO(buffer.getvalue())) == graph


@pytest.mark.parametrize(
    "text,line",
    [
        ("0 1 1\n", 1),
        ("n 3\n0 1 x\n", 2),
        ("n 3\n0 1\n", 2),
        ("n 2\n0 0 1\n0 0 2\n", 3),
    ],
)
def test_edge_list_errors(text, line):
    """Malformed lines report their line number"""
    with pytest.raises(DataError) as info:
        read_edge_list(io.StringIO(text))
    assert info.value.line == line


def test_edge_list_invalid_graph():
    """Graph errors are reported as data errors"""
    with pytest.raises(DataError):
        read_edge_list(io.StringIO("n 2\n0 5 1\n"))
    with pytest.raises(DataError):
        read_edge_list(io.StringIO("# empty\n"))
