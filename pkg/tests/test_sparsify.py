"""Tests for the cycle-halving sparsifiers."""
import numpy as np
import pytest

from cyclesparse import (
    DirectedGraph,
    NotEulerianError,
    PreconditionError,
    SparsifyConfig,
    WeightedMultigraph,
    asym_error_norm,
    certify_spectral_approx,
    degree_preserving_sparsify,
    directed_sparsify_once,
    eulerian_sparsify,
    sparsify_once,
)
from cyclesparse.generators import complete_graph, random_eulerian
from cyclesparse.graph import Edge
from cyclesparse.resistance import exact_edge_resistances
from cyclesparse.sparsify import greedy_bipartition, sample_directed_cycle, sample_even_cycle

TRIANGLE = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])
SQUARE = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])


def _cut_size(g, parts):
    left = set(parts[0])
    return sum((e.u in left) != (e.v in left) for e in g.edges)


def _imbalance(n, arcs):
    net = np.zeros(n, dtype=int)
    for e in arcs:
        net[e.u] += e.w
        net[e.v] -= e.w
    return net


class TestBipartition:
    def test_edge(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 1)])
        assert greedy_bipartition(g) == ((1,), (0,))

    def test_triangle(self):
        assert _cut_size(TRIANGLE, greedy_bipartition(TRIANGLE)) == 2

    def test_k4(self):
        g = complete_graph(4)
        parts = greedy_bipartition(g)
        assert parts == ((2, 3), (0, 1)) and _cut_size(g, parts) == 4

    def test_weighted(self):
        g = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 8), (2, 0, 1)])
        assert greedy_bipartition(g) == ((2,), (0, 1))
        assert greedy_bipartition(g, weighted=False) == ((1, 2), (0,))

    def test_half_cut(self):
        g = complete_graph(11)
        assert 2 * _cut_size(g, greedy_bipartition(g)) >= g.m


class TestCycleHalves:
    def test_even(self):
        kept = sample_even_cycle(list(SQUARE.edges), rng=0)
        assert len(kept) == 2 and all(e.w == 2 for e in kept)
        assert SQUARE.with_edges(kept).weighted_degrees() == SQUARE.weighted_degrees()

    def test_two_cycle(self):
        cycle = [Edge(0, 0, 1, 4), Edge(1, 0, 1, 4)]
        kept = sample_even_cycle(cycle, rng=1)
        assert len(kept) == 1 and kept[0].w == 8

    def test_odd(self):
        with pytest.raises(PreconditionError) as ex:
            _ = sample_even_cycle(list(TRIANGLE.edges))
        assert "odd length 3" in str(ex.value)

    def test_mixed_weights(self):
        with pytest.raises(PreconditionError):
            _ = sample_even_cycle([Edge(0, 0, 1, 1), Edge(1, 0, 1, 2)])

    def test_directed_cycle(self):
        arcs = [Edge(0, 0, 1, 1), Edge(1, 1, 2, 1), Edge(2, 2, 0, 1)]
        for seed in range(4):
            kept = sample_directed_cycle(arcs, rng=seed)
            assert len(kept) in (0, 3)

    @pytest.mark.parametrize("seed", range(6))
    def test_directed_imbalance(self, seed):
        arcs = [Edge(0, 0, 1, 1), Edge(1, 2, 1, 1), Edge(2, 2, 0, 1)]
        kept = sample_directed_cycle(arcs, rng=seed)
        assert np.array_equal(_imbalance(3, kept), _imbalance(3, arcs))

    def test_not_a_cycle(self):
        with pytest.raises(PreconditionError):
            _ = sample_directed_cycle([Edge(0, 0, 1, 1), Edge(1, 2, 3, 1)])


class TestSparsifyOnce:
    def test_clique(self):
        g = complete_graph(32)
        out = sparsify_once(g, exact_edge_resistances(g), rng=0)
        assert out.weighted_degrees() == g.weighted_degrees()
        assert out.m < g.m

    def test_tree(self):
        path = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
        out = sparsify_once(path, [1.0, 1.0, 1.0], rng=0)
        assert out.m == 3 and out.weighted_degrees() == path.weighted_degrees()

    def test_powers_of_two(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 3)])
        with pytest.raises(PreconditionError) as ex:
            _ = sparsify_once(g, [1.0])
        assert "powers of two" in str(ex.value)

    def test_estimate_count(self):
        with pytest.raises(PreconditionError):
            _ = sparsify_once(TRIANGLE, [1.0, 1.0])

    def test_directed(self):
        g = random_eulerian(24, 30, rng=2, min_length=3)
        est = exact_edge_resistances(g.undirected_support())
        out = directed_sparsify_once(g, est, rng=4)
        assert out.is_eulerian()
        assert np.array_equal(_imbalance(g.n, out.edges), _imbalance(g.n, g.edges))

    def test_directed_unbalanced(self):
        g = DirectedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
        with pytest.raises(NotEulerianError):
            _ = directed_sparsify_once(g, [1.0, 1.0])


class TestSparsifyLoop:
    def test_below_threshold(self):
        result = degree_preserving_sparsify(complete_graph(10))
        assert result.rounds == () and result.graph.m == 45
        assert result.certificate is not None and result.certificate.error < 1e-8

    def test_clique(self):
        g = complete_graph(40)
        result = degree_preserving_sparsify(g, SparsifyConfig(max_edges=300, seed=1))
        assert result.graph.weighted_degrees() == g.weighted_degrees()
        assert result.rounds and result.graph.m < g.m
        assert result.stop_threshold == 300
        assert result.rounds[0].refreshed

    def test_weighted(self):
        g = WeightedMultigraph.from_edges(3, [(0, 1, 5), (1, 2, 6), (2, 0, 7)])
        result = degree_preserving_sparsify(g)
        assert result.graph.weighted_degrees() == g.weighted_degrees()
        assert all(e.w & (e.w - 1) == 0 for e in result.graph.edges)

    def test_directed_input(self):
        with pytest.raises(PreconditionError):
            _ = degree_preserving_sparsify(DirectedGraph.from_edges(2, [(0, 1, 1), (1, 0, 1)]))

    def test_eulerian(self):
        g = random_eulerian(30, 40, rng=3, min_length=3)
        result = eulerian_sparsify(g, SparsifyConfig(max_edges=200, seed=2))
        assert result.graph.directed
        assert result.graph.is_eulerian()
        assert result.asym_norm is not None

    def test_clique_within_eps(self):
        g = complete_graph(64)
        passed = 0
        for seed in range(5):
            config = SparsifyConfig(eps=0.5, max_edges=g.m - 1, seed=seed)
            result = degree_preserving_sparsify(g, config)
            assert len(result.rounds) == 1 and result.graph.m < g.m
            assert result.graph.weighted_degrees() == g.weighted_degrees()
            error = certify_spectral_approx(g, result.graph).error
            assert abs(error - result.certificate.error) < 1e-9
            passed += result.certificate.holds(config.eps)
        assert passed >= 4

    def test_eulerian_within_eps(self):
        g = DirectedGraph.from_edges(64, [(i, j, 1) for i in range(64) for j in range(64) if i != j])
        passed = 0
        for seed in range(5):
            config = SparsifyConfig(eps=0.75, max_edges=g.m - 1, seed=seed)
            result = eulerian_sparsify(g, config)
            assert len(result.rounds) == 1 and result.graph.m < g.m
            assert result.graph.is_eulerian()
            norm = asym_error_norm(g.symmetric_laplacian(), g, result.graph).value
            assert abs(norm - result.asym_norm) < 1e-9
            passed += result.asym_norm <= config.eps
        assert passed >= 4

    def test_not_eulerian(self):
        g = DirectedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
        with pytest.raises(NotEulerianError) as ex:
            _ = eulerian_sparsify(g)
        assert "0, 2" in str(ex.value)
