"""Tests for the graph types, degree bookkeeping and edge-list I/O."""
import numpy as np
import pytest

from cyclesparse import (
    DirectedGraph,
    GraphParseError,
    InvalidInputRange,
    InvalidInputValue,
    LaplacianView,
    WeightedMultigraph,
    binary_split,
    combine_parallel_edges,
    load_graph,
    read_graph,
    save_graph,
    weighted_degrees,
)
from cyclesparse.graph import union_graphs

TRIANGLE = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])


class TestLoad:
    def test_path(self):
        g = load_graph("0 1 1\n1 2 1")
        assert (g.n, g.m, g.directed) == (3, 2, False)

    def test_parallel(self):
        g = load_graph("0 1 2\n0 1 3")
        assert g.m == 2 and g.weighted_degrees()[0] == 5

    def test_header(self):
        g = load_graph("# n=5 directed=1\n0 1 1\n1 0 1")
        assert isinstance(g, DirectedGraph) and g.n == 5

    def test_override_direction(self):
        g = load_graph("# n=2 directed=1\n0 1 1", directed=False)
        assert not g.directed

    def test_self_loop(self):
        with pytest.raises(GraphParseError) as ex:
            _ = load_graph("0 0 1")
        assert "self-loop" in str(ex.value)

    def test_bad_weight(self):
        with pytest.raises(GraphParseError) as ex:
            _ = load_graph("0 1 1\n1 2 0")
        assert "Line 2" in str(ex.value)

    def test_bad_fields(self):
        with pytest.raises(GraphParseError) as ex:
            _ = load_graph("0 1")
        assert "expected 'u v w'" in str(ex.value)

    def test_small_header(self):
        with pytest.raises(GraphParseError) as ex:
            _ = load_graph("# n=2\n0 3 1")
        assert "smaller than the largest vertex id" in str(ex.value)

    def test_empty(self):
        g = load_graph("")
        assert (g.n, g.m) == (0, 0)


class TestSave:
    def test_roundtrip_path(self, tmp_path):
        g = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
        path = tmp_path / "path.txt"
        save_graph(g, path)
        assert read_graph(path) == g

    def test_directed_order(self):
        g = DirectedGraph.from_edges(3, [(2, 0, 1), (0, 1, 4), (1, 2, 1)])
        h = load_graph(save_graph(g))
        assert h.directed
        assert [(e.u, e.v, e.w) for e in h.edges] == [(2, 0, 1), (0, 1, 4), (1, 2, 1)]

    def test_parallel_kept(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 2), (0, 1, 2)])
        assert load_graph(save_graph(g)).m == 2


class TestDegrees:
    def test_triangle(self):
        assert weighted_degrees(TRIANGLE) == [2, 2, 2]

    def test_star(self):
        star = WeightedMultigraph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
        assert weighted_degrees(star) == [3, 1, 1, 1]

    def test_parallel(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 2), (0, 1, 3)])
        assert weighted_degrees(g) == [5, 5]

    def test_directed(self):
        g = DirectedGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (2, 0, 2), (0, 2, 1)])
        deg_in, deg_out = weighted_degrees(g)
        assert deg_in == [2, 2, 3] and deg_out == [3, 2, 2]
        assert g.unbalanced_vertices() == [0, 2]
        assert not g.is_eulerian()


class TestValidation:
    def test_loop(self):
        with pytest.raises(InvalidInputValue):
            _ = WeightedMultigraph.from_edges(2, [(1, 1, 1)])

    def test_endpoint(self):
        with pytest.raises(InvalidInputRange) as ex:
            _ = WeightedMultigraph.from_edges(2, [(0, 2, 1)])
        assert "outside" in str(ex.value)

    def test_weight(self):
        with pytest.raises(InvalidInputRange):
            _ = WeightedMultigraph.from_edges(2, [(0, 1, 0)])

    def test_duplicate_id(self):
        with pytest.raises(InvalidInputValue) as ex:
            _ = WeightedMultigraph(3, ((0, 0, 1, 1), (0, 1, 2, 1)))
        assert "repeated" in str(ex.value)


class TestLaplacian:
    def test_undirected(self):
        lap = TRIANGLE.laplacian().toarray()
        assert np.allclose(lap, 3 * np.eye(3) - np.ones((3, 3)))

    def test_directed_columns(self):
        g = DirectedGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (2, 0, 2)])
        lap = g.laplacian().toarray()
        assert np.allclose(lap.sum(axis=0), 0)
        assert lap[1, 0] == -2 and lap[0, 0] == 2
        assert np.allclose(lap.sum(axis=1), 0)

    def test_symmetric(self):
        g = DirectedGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (2, 0, 2)])
        sym = g.symmetric_laplacian().toarray()
        assert np.allclose(sym, sym.T)
        assert np.allclose(sym, TRIANGLE.laplacian().toarray())

    def test_view_modes(self):
        view = LaplacianView(TRIANGLE, "degree")
        assert np.allclose(view.matrix().toarray(), 2 * np.eye(3))
        with pytest.raises(InvalidInputValue):
            _ = LaplacianView(TRIANGLE, "directed")


class TestWeightClasses:
    def test_split_five(self):
        classes = binary_split(WeightedMultigraph.from_edges(2, [(0, 1, 5)]))
        assert sorted(classes) == [0, 2]
        assert [e.w for e in classes[2].edges] == [4]

    def test_split_unit(self):
        classes = binary_split(TRIANGLE)
        assert list(classes) == [0] and classes[0] == TRIANGLE

    def test_split_six(self):
        classes = binary_split(WeightedMultigraph.from_edges(2, [(0, 1, 6)]))
        assert sorted(classes) == [1, 2]
        union = union_graphs(classes.values(), n=2)
        assert union.weighted_degrees() == [6, 6]

    def test_combine_pair(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 2), (0, 1, 2)])
        assert [e.w for e in combine_parallel_edges(g).edges] == [4]

    def test_combine_cascade(self):
        g = WeightedMultigraph.from_edges(2, [(0, 1, 4), (0, 1, 4), (0, 1, 8)])
        out = combine_parallel_edges(g)
        assert [e.w for e in out.edges] == [16]
        assert np.allclose(out.laplacian().toarray(), g.laplacian().toarray())

    def test_combine_simple(self):
        assert combine_parallel_edges(TRIANGLE) == TRIANGLE

    def test_combine_directed_keeps_orientation(self):
        g = DirectedGraph.from_edges(2, [(0, 1, 1), (1, 0, 1), (0, 1, 1)])
        out = combine_parallel_edges(g)
        assert sorted((e.u, e.v, e.w) for e in out.edges) == [(0, 1, 2), (1, 0, 1)]
        assert out.weighted_degrees() == g.weighted_degrees()
