"""Tests for the seeded graph families."""
import networkx as nx
import pytest

from cyclesparse import InvalidInputRange
from cyclesparse.generators import (
    complete_graph,
    cycle_graph,
    dumbbell,
    erdos_renyi,
    from_networkx,
    random_eulerian,
    random_multigraph,
    random_regular,
    two_cliques_matching,
)


def test_complete():
    g = complete_graph(6, w=2)
    assert (g.n, g.m) == (6, 15)
    assert g.weighted_degrees() == [10] * 6


def test_cycle():
    g = cycle_graph(5)
    assert [(e.u, e.v) for e in g.edges][-1] == (4, 0)


def test_from_networkx_weights():
    graph = nx.Graph()
    graph.add_edge(2, 0, weight=3)
    g = from_networkx(graph, weight="weight", n=4)
    assert g.n == 4 and [(e.u, e.v, e.w) for e in g.edges] == [(2, 0, 3)]


class TestRandom:
    def test_regular(self):
        g = random_regular(20, 4, rng=1)
        assert g.weighted_degrees() == [4] * 20

    def test_regular_odd(self):
        with pytest.raises(InvalidInputRange):
            _ = random_regular(5, 3)

    def test_regular_seeded(self):
        assert random_regular(30, 6, rng=2) == random_regular(30, 6, rng=2)

    def test_erdos_renyi_connected(self):
        g = erdos_renyi(25, 0.2, rng=0)
        assert g.components()[0] == 1

    def test_erdos_renyi_range(self):
        with pytest.raises(InvalidInputRange):
            _ = erdos_renyi(10, 0)

    def test_dumbbell(self):
        g = dumbbell(20, rng=3)
        assert g.n == 20 and g.components()[0] == 1
        crossing = [e for e in g.edges if (e.u < 10) != (e.v < 10)]
        assert len(crossing) == 1

    def test_two_cliques(self):
        g = two_cliques_matching(5)
        assert (g.n, g.m) == (10, 25)
        assert g.weighted_degrees() == [5] * 10

    def test_eulerian(self):
        g = random_eulerian(12, 8, rng=5, min_length=3, max_weight=9)
        assert g.is_eulerian()
        assert all(1 <= e.w <= 9 and e.u != e.v for e in g.edges)

    def test_eulerian_length(self):
        with pytest.raises(InvalidInputRange):
            _ = random_eulerian(4, 2, min_length=5)

    def test_multigraph(self):
        g = random_multigraph(6, 50, rng=0, max_weight=3)
        assert g.m == 50 and all(e.u != e.v for e in g.edges)
