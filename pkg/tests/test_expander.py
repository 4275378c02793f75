"""Tests for conductance, the expander decomposers and lazy random walks."""
import math

import numpy as np
import pytest

from cyclesparse import (
    InvalidInputRange,
    PreconditionError,
    WeightedMultigraph,
    conductance,
    expander_decompose,
    lazy_random_walk,
    ns_style_decompose,
)
from cyclesparse.expander import RandomWalker, sweep_cut
from cyclesparse.generators import complete_graph

PATH = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])


def _cliques(k, bridge):
    edges = [(i, j, 1) for i in range(k) for j in range(i + 1, k)]
    edges += [(i + k, j + k, 1) for i in range(k) for j in range(i + 1, k)]
    if bridge:
        edges.append((0, k, 1))
    return WeightedMultigraph.from_edges(2 * k, edges)


class TestConductance:
    def test_path_prefix(self):
        phi = conductance(PATH, [0, 1])
        assert phi.exact and abs(phi.value - 1) < 1e-12

    def test_k4(self):
        assert abs(conductance(complete_graph(4), range(4)).value - 2 / 3) < 1e-12

    def test_disconnected(self):
        assert conductance(PATH, [0, 2]).value == 0

    def test_singleton(self):
        assert math.isinf(conductance(PATH, [1]).value)

    def test_empty(self):
        with pytest.raises(PreconditionError):
            _ = conductance(PATH, [])

    def test_sweep_bound(self):
        g = _cliques(12, bridge=True)
        phi = conductance(g, range(24), exact_limit=4)
        assert not phi.exact
        assert abs(phi.value - 1 / 133) < 1e-12


class TestExpanderDecompose:
    def test_two_cliques(self):
        part = expander_decompose(_cliques(8, bridge=False), 0.25, rng=0)
        assert part.pieces == (tuple(range(8)), tuple(range(8, 16)))
        assert part.boundary_edges == ()
        assert all(c >= 0.5 for c in part.certificates)

    def test_single_edge(self):
        part = expander_decompose(WeightedMultigraph.from_edges(2, [(0, 1, 1)]), 0.1)
        assert part.pieces == ((0, 1),) and part.trivial == (True,)

    def test_dumbbell(self):
        g = _cliques(8, bridge=True)
        part = expander_decompose(g, 0.25, rng=0)
        assert part.pieces == (tuple(range(8)), tuple(range(8, 16)))
        assert part.boundary_edges == (g.m - 1,)
        assert part.measured_gamma >= 1

    def test_phi_range(self):
        with pytest.raises(InvalidInputRange):
            _ = expander_decompose(PATH, 0.5)

    def test_unit_weights(self):
        g = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 2)])
        with pytest.raises(PreconditionError) as ex:
            _ = expander_decompose(g, 0.1)
        assert "single weight" in str(ex.value)


class TestEdgeExpanderSplit:
    def test_clique(self):
        split = ns_style_decompose(complete_graph(16), 1.0, rng=0)
        assert split.sparse_part == () and split.dense_components == (tuple(range(16)),)
        assert split.expansion_bounds[0] >= 1.0

    def test_tree(self):
        tree = WeightedMultigraph.from_edges(5, [(0, 1, 1), (1, 2, 1), (1, 3, 1), (3, 4, 1)])
        split = ns_style_decompose(tree, 0.5)
        assert split.sparse_part == (0, 1, 2, 3) and split.dense_components == ()
        assert split.sparse_ratio == 1

    def test_bridge(self):
        g = _cliques(16, bridge=True)
        split = ns_style_decompose(g, 1.0, rng=0)
        assert split.sparse_part == (g.m - 1,)
        assert len(split.dense_components) == 2

    def test_parallel_not_bridge(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 1), (0, 1, 1)])
        split = ns_style_decompose(g, 0.5)
        assert split.sparse_part == () and split.dense_components == ((0, 1),)


class TestRandomWalk:
    def test_zero_steps(self):
        assert lazy_random_walk(PATH, 1, 0, rng=3) == 1

    def test_k2_fair(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 1)])
        ends = RandomWalker(g).walk(np.zeros(10_000, dtype=int), 1, np.random.default_rng(0))
        assert abs(ends.mean() - 0.5) < 0.03

    def test_isolated_start(self):
        with pytest.raises(PreconditionError):
            _ = lazy_random_walk(WeightedMultigraph.from_edges(3, [(0, 1, 1)]), 2, 1)

    def test_record(self):
        walker = RandomWalker(PATH)
        ends, verts, edges = walker.walk([0, 2], 5, np.random.default_rng(1), record=True)
        assert verts.shape == (2, 6) and edges.shape == (2, 5)
        assert np.array_equal(verts[:, -1], ends)
        moved = edges >= 0
        assert np.array_equal(moved, verts[:, 1:] != verts[:, :-1])

    @pytest.mark.slow
    def test_hits_heavy_set(self):
        g = complete_graph(16)
        target = {0, 1, 2, 3}
        walker = RandomWalker(g)
        steps = math.ceil(10 * math.log(16) / 0.5**2)
        starts = np.random.default_rng(2).integers(0, 16, size=20_000)
        ends = walker.walk(starts, steps, np.random.default_rng(3))
        share = np.isin(ends, list(target)).mean()
        assert share >= len(target) * 15 / (3 * g.m * 2)


def test_sweep_cut_dumbbell():
    g = _cliques(8, bridge=True)
    value, prefix = sweep_cut(g, range(16), rng=0)
    assert prefix in (tuple(range(8)), tuple(range(8, 16)))
    assert abs(value - 1 / 57) < 1e-12
