"""Tests for biclique sums, their samplers and the squared Schur step."""
from fractions import Fraction

import numpy as np
import pytest

from cyclesparse import (
    Biclique,
    BicliqueCollection,
    FractionalGraph,
    PreconditionError,
    WeightedBiclique,
    WeightedClique,
    WeightedMultigraph,
    biclique_split_by_partition,
    biclique_to_unit,
    clique_to_bicliques,
    dd_subset,
    implicit_partition_and_sample,
    implicit_sketch_bicliques,
    make_balanced,
    sample_bicliques,
    sample_matchings,
    schur_squared_matrix,
    schur_step_cliques,
    sketch_schur_step,
)
from cyclesparse.biclique import plan_bicliques, schur_identity_error
from cyclesparse.generators import erdos_renyi

STAR = WeightedMultigraph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
SMALL = 1e-9


def _two_blocks(r=8):
    return BicliqueCollection(
        4 * r,
        (
            Biclique(range(r), range(r, 2 * r)),
            Biclique(range(2 * r, 3 * r), range(3 * r, 4 * r)),
        ),
    )


def _reweighted(g, seed):
    rng = np.random.default_rng(seed)
    return g.with_edges(e._replace(w=int(rng.integers(1, 6))) for e in g.edges)


class TestBiclique:
    def test_sizes(self):
        k = Biclique((0, 1), (2, 3, 4))
        assert (k.vertex_count, k.edge_count, k.balanced) == (5, 6, False)

    def test_overlap(self):
        with pytest.raises(PreconditionError):
            _ = Biclique((0, 1), (1, 2))

    def test_empty_side(self):
        with pytest.raises(PreconditionError):
            _ = Biclique((), (1, 2))

    def test_weight(self):
        with pytest.raises(PreconditionError):
            _ = Biclique((0,), (1,), 0)

    def test_r_unbalanced(self):
        with pytest.raises(PreconditionError):
            _ = Biclique((0,), (1, 2)).r

    def test_json(self):
        coll = BicliqueCollection(4, (Biclique((0, 1), (2, 3), Fraction(1, 4)),))
        doc = coll.to_json()
        assert '"w": "2^-2"' in doc
        assert BicliqueCollection.from_json(doc, n=4) == coll

    def test_collection_degrees(self):
        coll = BicliqueCollection(5, (Biclique((0, 1), (2, 3, 4)), Biclique((2,), (0,))))
        assert coll.edge_degrees().tolist() == [4, 3, 3, 2, 2]
        assert coll.vertex_total == 7 and coll.edge_total == 7


class TestBalance:
    def test_two_by_four(self):
        parts = make_balanced(Biclique((0, 1), (2, 3, 4, 5)))
        assert [(b.left, b.right) for b in parts] == [((0, 1), (2, 3)), ((0, 1), (4, 5))]

    def test_cover(self):
        k = Biclique((0, 1, 2), (3, 4, 5, 6, 7))
        parts = make_balanced(k)
        assert all(b.balanced for b in parts)
        assert all(b.r & (b.r - 1) == 0 for b in parts)
        edges = sorted((a, b) for p in parts for a, b, _ in p.edges())
        assert edges == sorted((a, b) for a, b, _ in k.edges())


class TestMatchings:
    def test_k22(self):
        coll = BicliqueCollection(4, (Biclique((0, 1), (2, 3)),))
        out = sample_matchings(coll, 1, rng=0)
        assert out.m == 2 and all(w == 2 for _, _, w in out.edges)
        assert out.weighted_degrees() == coll.materialize().weighted_degrees()

    def test_unbalanced(self):
        coll = BicliqueCollection(3, (Biclique((0,), (1, 2)),))
        with pytest.raises(PreconditionError):
            _ = sample_matchings(coll, 1)

    def test_count(self):
        with pytest.raises(PreconditionError):
            _ = sample_matchings(BicliqueCollection(2, (Biclique((0,), (1,)),)), 0)


class TestSampleBicliques:
    def test_low_degree(self):
        coll = BicliqueCollection(4, (Biclique((0, 1), (2, 3)),))
        plan = plan_bicliques(coll, 0.5)
        assert plan.sampled == ()
        out = sample_bicliques(coll, 0.5, rng=0)
        assert out.combined() == coll.materialize().combined()

    def test_large(self):
        coll = BicliqueCollection(128, (Biclique(range(64), range(64, 128)),))
        plan = plan_bicliques(coll, 0.5)
        assert [(b.r, s, j) for b, s, j in plan.sampled] == [(64, 4, 7)]
        out = sample_bicliques(coll, 0.5, rng=1)
        assert out.m == 256
        assert out.weighted_degrees() == coll.materialize().weighted_degrees()

    def test_tight_rule(self):
        coll = BicliqueCollection(128, (Biclique(range(64), range(64, 128)),))
        plan = plan_bicliques(coll, 0.5, rule="tight")
        assert [s for _, s, _ in plan.sampled] == [3]

    def test_mixed_weights(self):
        coll = BicliqueCollection(4, (Biclique((0,), (1,), 1), Biclique((2,), (3,), 2)))
        with pytest.raises(PreconditionError):
            _ = sample_bicliques(coll, 0.5)


class TestPartition:
    def test_split(self):
        coll = BicliqueCollection(4, (Biclique((0, 1), (2, 3)),))
        inside, boundary = biclique_split_by_partition(coll, [(0, 2), (1, 3)])
        assert [(k.left, k.right) for k in inside[0].bicliques] == [((0,), (2,))]
        assert [(k.left, k.right) for k in inside[1].bicliques] == [((1,), (3,))]
        assert sorted((k.left, k.right) for k in boundary.bicliques) == [
            ((0,), (3,)),
            ((1,), (2,)),
        ]

    def test_uncovered(self):
        coll = BicliqueCollection(4, (Biclique((0, 1), (2, 3)),))
        with pytest.raises(PreconditionError):
            _ = biclique_split_by_partition(coll, [(0, 1, 2)])

    def test_partition_and_sample(self):
        coll = _two_blocks()
        part = implicit_partition_and_sample(coll, 0.5, 0.1, rng=0)
        total = part.graph.union(part.boundary.materialize())
        assert total.weighted_degrees() == coll.materialize().weighted_degrees()
        assert part.crude.weighted_degrees() == coll.materialize().weighted_degrees()

    def test_sketch_q0(self):
        coll = _two_blocks(4)
        assert implicit_sketch_bicliques(coll, 0.5, 0.1, 0) == coll.materialize()

    def test_sketch_degrees(self):
        coll = _two_blocks()
        out = implicit_sketch_bicliques(coll, 0.5, 0.1, 2, rng=3)
        assert out.weighted_degrees() == coll.materialize().weighted_degrees()

    def test_weighted_rejected(self):
        coll = BicliqueCollection(2, (WeightedBiclique((0,), (1,), (1.0,), (2.0,)),))
        with pytest.raises(PreconditionError):
            _ = implicit_sketch_bicliques(coll, 0.5, 0.1, 1)


class TestSchur:
    def test_star(self):
        step = schur_step_cliques(STAR, [0])
        assert step.f_cliques == () and step.bicliques == ()
        weights = sorted(w for _, _, w in step.c_cliques[0].edges())
        assert np.allclose([float(w) for w in weights], 1 / 3)
        assert schur_identity_error(STAR, [0]) < SMALL

    def test_empty_f(self):
        g = erdos_renyi(8, 0.5, rng=2)
        step = schur_step_cliques(g, [])
        assert np.allclose(step.squared_matrix(), 2 * g.laplacian().toarray())
        assert schur_identity_error(g, []) < SMALL

    def test_isolated(self):
        g = WeightedMultigraph.from_edges(3, [(0, 1, 1)])
        with pytest.raises(PreconditionError):
            _ = schur_step_cliques(g, [2])

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_identity(self, seed):
        g = _reweighted(erdos_renyi(14, 0.4, rng=seed), seed)
        f = dd_subset(g, rng=seed)
        assert f
        assert schur_identity_error(g, f) < 1e-8
        step = schur_step_cliques(g, f)
        assert np.allclose(step.squared_matrix(), schur_squared_matrix(g, f), atol=1e-9)
        assert schur_identity_error(g, f, step.squared_matrix()) < 1e-8

    def test_dd_subset(self):
        g = _reweighted(erdos_renyi(30, 0.3, rng=5), 5)
        alpha = 0.1
        f = set(dd_subset(g, alpha, rng=1))
        deg = np.zeros(g.n)
        inside = np.zeros(g.n)
        for e in g.edges:
            deg[e.u] += e.w
            deg[e.v] += e.w
            if e.u in f and e.v in f:
                inside[e.u] += e.w
                inside[e.v] += e.w
        assert all(inside[v] <= deg[v] / (1 + alpha) + SMALL for v in f)

    def test_sketch_step(self):
        g = erdos_renyi(10, 0.5, rng=1)
        f = dd_subset(g, rng=0)
        out = sketch_schur_step(g, f, rng=4, bits=8)
        step = schur_step_cliques(g, f)
        exact = np.array([float(d) for d in step.materialize().weighted_degrees()])
        got = np.array([float(d) for d in out.weighted_degrees()])
        assert np.all(got <= exact * (1 + SMALL))
        assert np.all(got >= 0.95 * exact)


class TestUnitSplit:
    def test_clique(self):
        clique = WeightedClique((0, 1, 2, 3, 4), (1.0, 2.0, 3.0, 4.0, 5.0))
        parts = clique_to_bicliques(clique)
        edges = sorted((min(a, b), max(a, b), w) for p in parts for a, b, w in p.edges())
        assert edges == sorted(clique.edges())

    def test_unit_exact(self):
        k = WeightedBiclique((0, 1), (2,), (3.0, 1.0), (1.0,))
        units = biclique_to_unit(k)
        parts = [BicliqueCollection(3, (u,)).materialize() for u in units]
        total = FractionalGraph(3, ()).union(*parts)
        assert total.combined() == FractionalGraph.from_edges(3, k.edges()).combined()

    def test_bits(self):
        with pytest.raises(PreconditionError):
            _ = biclique_to_unit(WeightedBiclique((0,), (1,), (1.0,), (1.0,)), bits=0)
