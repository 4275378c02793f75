"""Tests for the degree preserving spectral sketch."""
import math

import numpy as np
import pytest

from cyclesparse import (
    DirectedGraph,
    PreconditionError,
    SketchConfig,
    WeightedMultigraph,
    decompose_and_sample,
    inverse_form_check,
    spectral_sketch,
)
from cyclesparse.generators import complete_graph, cycle_graph
from cyclesparse.sketch import (
    counterexample_graph,
    naive_degree_preserving_sample,
    quadratic_form_errors,
)

C4 = cycle_graph(4)
X = [1.0, -1.0, 0.0, 0.0]


class TestDecomposeAndSample:
    def test_low_degrees(self):
        g = complete_graph(5)
        assert decompose_and_sample(g, alpha=10, rng=0) == g

    def test_degrees(self):
        g = complete_graph(30)
        out = decompose_and_sample(g, alpha=1, rng=0)
        assert out.weighted_degrees() == g.weighted_degrees()
        assert {e.w for e in out.edges} <= {1, 2}
        assert set(out.edge_ids) <= set(g.edge_ids)
        assert out.m < g.m

    def test_not_simple(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 1), (0, 1, 1)])
        with pytest.raises(PreconditionError) as ex:
            _ = decompose_and_sample(g, alpha=1)
        assert "simple" in str(ex.value)

    def test_mixed_weights(self):
        g = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 2)])
        with pytest.raises(PreconditionError):
            _ = decompose_and_sample(g, alpha=1)


class TestSpectralSketch:
    def test_clique(self):
        g = complete_graph(40)
        result = spectral_sketch(g, SketchConfig(alpha=4, seed=0))
        assert result.graph.weighted_degrees() == g.weighted_degrees()
        assert result.edge_counts[0] == g.m
        assert result.edge_counts[-1] < g.m
        assert result.rounds == len(result.gammas) >= 1

    def test_threshold_keeps_graph(self):
        g = counterexample_graph(8)
        result = spectral_sketch(g)
        assert result.rounds == 1 and result.graph.m == g.m

    def test_directed(self):
        with pytest.raises(PreconditionError):
            _ = spectral_sketch(DirectedGraph.from_edges(2, [(0, 1, 1), (1, 0, 1)]))

    def test_seeded(self):
        g = complete_graph(24)
        config = SketchConfig(alpha=3, seed=5)
        assert spectral_sketch(g, config).graph == spectral_sketch(g, config).graph

    def test_fixed_vectors_within_eps(self):
        g = complete_graph(64)
        config = SketchConfig(eps=0.5, alpha=8, max_rounds=1, seed=3)
        result = spectral_sketch(g, config)
        assert result.graph.weighted_degrees() == g.weighted_degrees()
        assert result.graph.m < g.m
        xs = np.random.default_rng(11).standard_normal((20, 64))
        errors = quadratic_form_errors(g, result.graph, xs)
        assert np.mean(errors <= config.eps) >= 0.9


class TestInverseForm:
    def test_identity(self):
        check = inverse_form_check(C4, C4, X, 0.1)
        assert check.hypotheses_hold and check
        assert abs(check.ratio - 1) < 1e-9

    def test_scaled(self):
        lap = C4.laplacian().toarray()
        check = inverse_form_check(lap, 2 * lap, X, 0.5)
        assert check.spectral_hypothesis and not check.form_hypothesis
        assert abs(check.ratio - 0.5) < 1e-9
        assert check.conclusion_holds

    def test_scaled_eps_one(self):
        lap = C4.laplacian().toarray()
        check = inverse_form_check(lap, 2 * lap, X, 1.0)
        assert check.hypotheses_hold and check.conclusion_holds
        assert abs(check.form_log_ratio - math.log(2)) < 1e-9

    def test_nullspace(self):
        with pytest.raises(PreconditionError):
            _ = inverse_form_check(C4, C4, np.ones(4), 0.5)

    def test_eps_range(self):
        with pytest.raises(PreconditionError):
            _ = inverse_form_check(C4, C4, X, 0.0)


class TestCounterexample:
    def test_shape(self):
        g = counterexample_graph(6)
        assert (g.n, g.m) == (12, 36)

    def test_indicator_form(self):
        k = 10
        g = counterexample_graph(k)
        x = np.r_[np.ones(k), np.zeros(k)]
        lap = g.laplacian().toarray()
        assert abs(x @ lap @ x - k) < 1e-9

    def test_naive_sample_degrees(self):
        g = counterexample_graph(16)
        out = naive_degree_preserving_sample(g, rng=1)
        assert out.weighted_degrees() == g.weighted_degrees()


def test_quadratic_form_errors():
    lap = C4.laplacian().toarray()
    errors = quadratic_form_errors(lap, 2 * lap, np.array([X, [0.0, 1.0, 0.0, -1.0]]))
    assert np.allclose(errors, 1.0)
    assert quadratic_form_errors(lap, lap, np.ones((1, 4)))[0] == 0
