"""Tests for the power-of-two and unit weight reductions."""
import math

import numpy as np
import pytest

from cyclesparse import (
    DirectedGraph,
    NotEulerianError,
    PreconditionError,
    ReduceConfig,
    decompose_bipartite_dir,
    local_move,
    reduce_powers_of_two,
    reduce_to_unit,
)
from cyclesparse.generators import random_eulerian
from cyclesparse.reduce import reconstruct, reconstruct_degrees

SQUARE = [(0, 1), (1, 2), (2, 3), (3, 0)]
TRIANGLE = DirectedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])


def _square(w):
    return DirectedGraph.from_edges(4, [(u, v, w) for u, v in SQUARE])


def _degrees(powers):
    deg_in, deg_out = powers.tree.degree_change()
    for h in powers.classes.values():
        for e in h.edges:
            deg_out[e.u] += e.w
            deg_in[e.v] += e.w
    return deg_in, deg_out


def _arcs(g):
    return sorted((e.u, e.v, e.w) for e in g.edges)


class TestBipartiteParts:
    def test_bipartite(self):
        g = _square(1)
        assert decompose_bipartite_dir(g) == [g]

    def test_triangle(self):
        parts = decompose_bipartite_dir(TRIANGLE)
        assert len(parts) >= 2
        ids = sorted(eid for p in parts for eid in p.edge_ids)
        assert ids == [0, 1, 2]
        assert all(len(decompose_bipartite_dir(p)) == 1 for p in parts if p.m)

    def test_clique_parts(self):
        edges = [(i, j, 1) for i in range(6) for j in range(6) if i != j]
        g = DirectedGraph.from_edges(6, edges)
        parts = decompose_bipartite_dir(g)
        assert sum(p.m for p in parts) == g.m
        assert sum(len(p.non_isolated()) for p in parts) <= 6 * 3


class TestLocalMove:
    def test_forward(self):
        g = DirectedGraph.from_edges(4, [(0, 1, 1), (1, 2, 5), (2, 3, 5)])
        h = local_move(g, 0, 1, 2, 3, threshold=1)
        assert _arcs(h) == [(0, 3, 1), (1, 2, 5), (2, 1, 1), (2, 3, 4)]
        assert h.weighted_degrees() == g.weighted_degrees()
        diff = h.laplacian().toarray() - g.laplacian().toarray()
        assert np.linalg.matrix_rank(diff) == 1

    def test_reverse(self):
        g = DirectedGraph.from_edges(4, [(1, 0, 1), (2, 1, 5), (3, 2, 5)])
        h = local_move(g, 0, 1, 2, 3, reverse=True, threshold=1)
        assert _arcs(h) == [(1, 2, 1), (2, 1, 5), (3, 0, 1), (3, 2, 4)]
        assert h.weighted_degrees() == g.weighted_degrees()

    def test_distinct(self):
        g = DirectedGraph.from_edges(4, [(0, 1, 1), (1, 2, 5), (2, 3, 5)])
        with pytest.raises(PreconditionError):
            _ = local_move(g, 0, 1, 2, 1, threshold=1)

    def test_weight(self):
        g = DirectedGraph.from_edges(4, [(0, 1, 1), (1, 2, 5), (2, 3, 5)])
        with pytest.raises(PreconditionError) as ex:
            _ = local_move(g, 0, 1, 2, 3, t=2, threshold=1)
        assert "carry less than 2" in str(ex.value)

    def test_threshold(self):
        g = DirectedGraph.from_edges(4, [(0, 1, 1), (1, 2, 5), (2, 3, 5)])
        with pytest.raises(PreconditionError) as ex:
            _ = local_move(g, 0, 1, 2, 3)
        assert "below" in str(ex.value)


class TestPowersOfTwo:
    def test_exact_powers(self):
        g = _square(4)
        powers = reduce_powers_of_two(g)
        assert list(powers.classes) == [2]
        assert (powers.moves, powers.kept_trailing) == (0, 0)
        lap = reconstruct(powers.tree, list(powers.classes.values()), include_base=False)
        assert np.allclose(lap, g.laplacian().toarray())

    def test_trailing_moved(self):
        g = _square(3)
        powers = reduce_powers_of_two(g, ReduceConfig(lead_bits=1, move_threshold=1))
        assert list(powers.classes) == [1]
        assert powers.moves == 1 and powers.kept_trailing == 0
        assert _degrees(powers) == g.weighted_degrees()

    def test_trailing_kept(self):
        g = _square(3)
        powers = reduce_powers_of_two(g, ReduceConfig(lead_bits=1))
        assert list(powers.classes) == [0, 1]
        assert powers.kept_trailing == 4
        assert _degrees(powers) == g.weighted_degrees()

    def test_base_symmetric(self):
        powers = reduce_powers_of_two(_square(8))
        base = powers.tree.base
        assert len(base) == 6
        assert all(base[(b, a)] == w for (a, b), w in base.items())

    def test_not_bipartite(self):
        with pytest.raises(PreconditionError) as ex:
            _ = reduce_powers_of_two(TRIANGLE)
        assert "bipartite" in str(ex.value)

    def test_disconnected(self):
        g = DirectedGraph.from_edges(4, [(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1)])
        with pytest.raises(PreconditionError) as ex:
            _ = reduce_powers_of_two(g)
        assert "connected" in str(ex.value)


class TestUnitReduction:
    def test_degrees(self):
        g = random_eulerian(20, 15, rng=4, min_length=3, max_weight=1000)
        red = reduce_to_unit(g)
        assert reconstruct_degrees(red) == g.weighted_degrees()
        assert all(c.graph.uniform_weight == 1 << c.index for c in red.classes)
        xi = math.ceil(4 * math.log2(20))
        assert all(c.bucket == c.index % xi for c in red.classes)

    @pytest.mark.parametrize("n", [2, 20, 64, 1000])
    def test_default_constants(self, n):
        xi, lead, thr = ReduceConfig().resolve(n)
        assert xi == math.ceil(4 * math.log2(n))
        assert lead == math.ceil(10 * math.log2(n))
        assert thr == float(n) ** 4

    def test_single_bucket(self):
        g = random_eulerian(16, 12, rng=7, min_length=3, max_weight=64)
        red = reduce_to_unit(g, ReduceConfig(xi=1))
        assert reconstruct_degrees(red) == g.weighted_degrees()
        assert set(c.bucket for c in red.classes) == {0}
        for (piece, _), total in red.touched.items():
            verts = {v for c in red.classes if c.piece == piece for v in c.graph.non_isolated()}
            assert total <= 2 * 16
            assert len(verts) <= 16

    def test_not_eulerian(self):
        g = DirectedGraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
        with pytest.raises(NotEulerianError):
            _ = reduce_to_unit(g)
