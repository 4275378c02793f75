"""Tests for exact and projected effective resistances."""
import math

import numpy as np
import pytest

from cyclesparse import (
    ComponentMismatchError,
    InvalidInputRange,
    PreconditionError,
    WeightedMultigraph,
    approx_effective_resistances,
    exact_effective_resistances,
    foster_residual,
)
from cyclesparse.generators import complete_graph, cycle_graph, erdos_renyi
from cyclesparse.resistance import exact_edge_resistances

SMALL = 1e-9


class TestExact:
    def test_path(self):
        path = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
        assert abs(exact_effective_resistances(path, [(0, 3)])[0] - 3) < SMALL

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_cycle(self, n):
        r = exact_effective_resistances(cycle_graph(n), [(0, 1)])[0]
        assert abs(r - (n - 1) / n) < SMALL

    @pytest.mark.parametrize("n", [4, 7])
    def test_clique(self, n):
        r = exact_edge_resistances(complete_graph(n))
        assert np.allclose(r.values, 2 / n)

    def test_weighted(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 2), (0, 1, 2)])
        assert abs(exact_effective_resistances(g, [(0, 1)])[0] - 0.25) < SMALL

    def test_same_vertex(self):
        assert exact_effective_resistances(cycle_graph(4), [(2, 2)])[0] == 0

    def test_components(self):
        g = WeightedMultigraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
        with pytest.raises(ComponentMismatchError):
            _ = exact_effective_resistances(g, [(0, 3)])

    def test_frame(self):
        g = cycle_graph(4)
        frame = exact_edge_resistances(g).to_frame(g)
        assert list(frame.columns) == ["u", "v", "w", "r"]
        assert np.allclose(frame["r"], 0.75)


class TestFoster:
    def test_exact_connected(self):
        g = erdos_renyi(25, 0.3, rng=4)
        assert abs(foster_residual(g, exact_edge_resistances(g))) < 1e-8

    def test_components(self):
        g = WeightedMultigraph.from_edges(6, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 3)])
        assert abs(foster_residual(g, exact_edge_resistances(g))) < 1e-8

    def test_mismatch(self):
        with pytest.raises(PreconditionError):
            _ = foster_residual(cycle_graph(4), [1.0, 1.0])


class TestApprox:
    def test_theta_range(self):
        with pytest.raises(InvalidInputRange):
            _ = approx_effective_resistances(cycle_graph(4), theta=1.5)

    def test_empty(self):
        est = approx_effective_resistances(WeightedMultigraph.from_edges(3, []))
        assert len(est) == 0

    def test_accuracy(self):
        g = erdos_renyi(30, 0.3, rng=6)
        exact = np.array(exact_edge_resistances(g).values)
        est = approx_effective_resistances(g, rng=1)
        ratio = np.array(est.values) / exact
        assert est.method == "projected"
        assert np.all(np.abs(np.log(ratio)) <= math.log(1.5))

    def test_deterministic(self):
        g = cycle_graph(10)
        a = approx_effective_resistances(g, rng=3)
        b = approx_effective_resistances(g, rng=3)
        assert a == b
