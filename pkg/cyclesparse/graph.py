"""Multigraph types, Laplacians, degree bookkeeping, weight classes and edge-list I/O."""
import heapq
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .exceptions import GraphParseError, InvalidInputRange, InvalidInputValue, PreconditionError

logger = logging.getLogger(__name__)

WEIGHT_CAP = 2**62
LAPLACIAN_MODES = ["undirected", "directed", "adjacency", "degree"]

__all__ = [
    "Edge",
    "WeightedMultigraph",
    "DirectedGraph",
    "LaplacianView",
    "load_graph",
    "read_graph",
    "save_graph",
    "weighted_degrees",
    "binary_split",
    "combine_parallel_edges",
    "union_graphs",
]


class Edge(NamedTuple):
    """An edge ``u - v`` (or arc ``u -> v`` in a directed graph) with an integer weight."""

    eid: int
    u: int
    v: int
    w: int

    def other(self, x: int) -> int:
        """Return the endpoint opposite to ``x``."""
        return self.v if x == self.u else self.u


@dataclass(frozen=True)
class _Graph:
    n: int
    edges: Tuple[Edge, ...]

    directed = False

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidInputRange("Vertex count must be non-negative.")
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for e in edges:
            if e.eid in seen:
                raise InvalidInputValue("edge id", [f"unique ids, {e.eid} is repeated"])
            seen.add(e.eid)
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise InvalidInputRange(f"Edge {e.eid} has an endpoint outside [0, {self.n}).")
            if e.u == e.v:
                raise InvalidInputValue("edge", [f"edges without self-loops, {e.eid} is a loop"])
            if e.w < 1 or int(e.w) != e.w:
                raise InvalidInputRange(f"Edge {e.eid} must have a positive integer weight.")

    @classmethod
    def from_edges(cls, n: int, triples: Iterable[Sequence[int]]):
        """Build a graph with dense edge ids from ``(u, v, w)`` triples."""
        return cls(n, tuple(Edge(i, int(u), int(v), int(w)) for i, (u, v, w) in enumerate(triples)))

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self.edges)

    @cached_property
    def edge_map(self) -> Dict[int, Edge]:
        """Edges keyed by their id."""
        return {e.eid: e for e in self.edges}

    def edge(self, eid: int) -> Edge:
        """Return the edge with the given id."""
        return self.edge_map[eid]

    @property
    def edge_ids(self) -> List[int]:
        return [e.eid for e in self.edges]

    @property
    def total_weight(self) -> int:
        return sum(e.w for e in self.edges)

    @property
    def uniform_weight(self) -> Optional[int]:
        """The common weight of all edges, or None if weights differ or there are no edges."""
        ws = {e.w for e in self.edges}
        return ws.pop() if len(ws) == 1 else None

    def next_edge_id(self) -> int:
        return max((e.eid for e in self.edges), default=-1) + 1

    def pair(self, e: Edge) -> Tuple[int, int]:
        """Key identifying parallel edges."""
        if self.directed:
            return (e.u, e.v)
        return (e.u, e.v) if e.u < e.v else (e.v, e.u)

    def is_simple(self) -> bool:
        """Whether there is at most one edge between every vertex pair."""
        keys = [self.pair(e) for e in self.edges]
        return len(keys) == len(set(keys))

    def with_edges(self, edges: Iterable[Edge]):
        """A graph on the same vertex set with the given edges (ids kept)."""
        return type(self)(self.n, tuple(edges))

    def edge_subgraph(self, eids: Iterable[int]):
        """The subgraph formed by the given edge ids, keeping ids and the vertex set."""
        keep = set(eids)
        return self.with_edges(e for e in self.edges if e.eid in keep)

    def remove_edges(self, eids: Iterable[int]):
        drop = set(eids)
        return self.with_edges(e for e in self.edges if e.eid not in drop)

    def induced_subgraph(self, vertices: Iterable[int]):
        """Edges with both endpoints in ``vertices``; ids and vertex set are kept."""
        keep = set(vertices)
        return self.with_edges(e for e in self.edges if e.u in keep and e.v in keep)

    def renumbered(self):
        """Same edges in the same order with dense ids ``0..m-1``."""
        return type(self).from_edges(self.n, ((e.u, e.v, e.w) for e in self.edges))

    def edge_counts(self) -> np.ndarray:
        """Number of incident edges per vertex (multiplicity, ignoring weights)."""
        deg = np.zeros(self.n, dtype=np.int64)
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def non_isolated(self) -> List[int]:
        deg = self.edge_counts()
        return [int(v) for v in np.flatnonzero(deg)]

    def incidence(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR incidence of the undirected support as ``(indptr, neighbor, edge_id)``.

        Every edge appears once from each endpoint, ordered by edge position.
        """
        deg = self.edge_counts()
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        fill = indptr[:-1].copy()
        nbr = np.empty(2 * self.m, dtype=np.int64)
        eid = np.empty(2 * self.m, dtype=np.int64)
        for e in self.edges:
            for a, b in ((e.u, e.v), (e.v, e.u)):
                nbr[fill[a]] = b
                eid[fill[a]] = e.eid
                fill[a] += 1
        return indptr, nbr, eid

    def support_adjacency(self) -> sp.csr_matrix:
        """Symmetric float adjacency of the undirected support."""
        if self.m == 0:
            return sp.csr_matrix((self.n, self.n))
        u = np.fromiter((e.u for e in self.edges), dtype=np.int64, count=self.m)
        v = np.fromiter((e.v for e in self.edges), dtype=np.int64, count=self.m)
        w = np.fromiter((float(e.w) for e in self.edges), dtype=float, count=self.m)
        a = sp.coo_matrix((w, (u, v)), shape=(self.n, self.n))
        return (a + a.T).tocsr()

    def components(self) -> Tuple[int, np.ndarray]:
        """Connected components of the undirected support, isolated vertices included."""
        return csgraph.connected_components(self.support_adjacency(), directed=False)


@dataclass(frozen=True)
class WeightedMultigraph(_Graph):
    """Undirected multigraph with positive integer weights and stable edge ids.

    Parameters
    ----------
    n : int
        Number of vertices, labeled ``0..n-1``.
    edges : tuple of Edge
        Edges as ``(eid, u, v, w)``. Parallel edges are allowed, self-loops are not.

    Examples
    --------
    >>> g = WeightedMultigraph.from_edges(3, [(0, 1, 2), (0, 1, 3), (1, 2, 1)])
    >>> g.m, g.weighted_degrees()
    (3, [5, 6, 1])
    """

    def weighted_degrees(self) -> List[int]:
        deg = [0] * self.n
        for e in self.edges:
            deg[e.u] += e.w
            deg[e.v] += e.w
        return deg

    def adjacency(self) -> sp.csr_matrix:
        return self.support_adjacency()

    def laplacian(self) -> sp.csr_matrix:
        """The Laplacian ``D - A`` as a float sparse matrix."""
        a = self.adjacency()
        d = np.asarray(a.sum(axis=1)).ravel()
        return (sp.diags(d) - a).tocsr()


@dataclass(frozen=True)
class DirectedGraph(_Graph):
    """Directed weighted multigraph, edges are arcs ``(eid, tail, head, w)``.

    The directed Laplacian has out-degrees on the diagonal and ``-w`` at
    ``[head, tail]`` for every arc, so that its columns sum to zero.
    """

    directed = True

    def out_degrees(self) -> List[int]:
        deg = [0] * self.n
        for e in self.edges:
            deg[e.u] += e.w
        return deg

    def in_degrees(self) -> List[int]:
        deg = [0] * self.n
        for e in self.edges:
            deg[e.v] += e.w
        return deg

    def weighted_degrees(self) -> Tuple[List[int], List[int]]:
        """Return ``(in_degrees, out_degrees)``."""
        return self.in_degrees(), self.out_degrees()

    def unbalanced_vertices(self) -> List[int]:
        return [v for v, (a, b) in enumerate(zip(*self.weighted_degrees())) if a != b]

    def is_eulerian(self) -> bool:
        return not self.unbalanced_vertices()

    def adjacency(self) -> sp.csr_matrix:
        """``A[tail, head] = w`` summed over parallel arcs."""
        if self.m == 0:
            return sp.csr_matrix((self.n, self.n))
        u = np.fromiter((e.u for e in self.edges), dtype=np.int64, count=self.m)
        v = np.fromiter((e.v for e in self.edges), dtype=np.int64, count=self.m)
        w = np.fromiter((float(e.w) for e in self.edges), dtype=float, count=self.m)
        return sp.coo_matrix((w, (u, v)), shape=(self.n, self.n)).tocsr()

    def laplacian(self) -> sp.csr_matrix:
        a = self.adjacency()
        d = np.asarray(a.sum(axis=1)).ravel()
        return (sp.diags(d) - a.T).tocsr()

    def symmetric_laplacian(self) -> sp.csr_matrix:
        """Laplacian of the undirectification, ``(L + L^T) / 2``."""
        lap = self.laplacian()
        return ((lap + lap.T) * 0.5).tocsr()

    def undirected_support(self) -> WeightedMultigraph:
        """The undirected multigraph with the same edge ids and full weights."""
        return WeightedMultigraph(self.n, self.edges)


Graph = Union[WeightedMultigraph, DirectedGraph]


@dataclass(frozen=True)
class LaplacianView:
    """A graph together with the matrix it should be read as.

    Parameters
    ----------
    graph : WeightedMultigraph or DirectedGraph
        The underlying graph.
    mode : str, optional
        One of ``undirected`` (symmetric Laplacian, the undirectification for directed
        graphs), ``directed``, ``adjacency``, or ``degree``. Defaults to ``undirected``.
    """

    graph: Graph
    mode: str = "undirected"

    def __post_init__(self) -> None:
        if self.mode not in LAPLACIAN_MODES:
            raise InvalidInputValue("mode", LAPLACIAN_MODES)
        if self.mode == "directed" and not self.graph.directed:
            raise InvalidInputValue("mode", ["undirected", "adjacency", "degree"])

    @property
    def n(self) -> int:
        return self.graph.n

    def matrix(self) -> sp.csr_matrix:
        g = self.graph
        if self.mode == "directed":
            return g.laplacian()
        if self.mode == "adjacency":
            return g.adjacency()
        if self.mode == "degree":
            lap = g.symmetric_laplacian() if g.directed else g.laplacian()
            return sp.diags(lap.diagonal()).tocsr()
        return g.symmetric_laplacian() if g.directed else g.laplacian()


def weighted_degrees(g: Graph) -> Union[List[int], Tuple[List[int], List[int]]]:
    """Weighted degrees as exact integers.

    Parameters
    ----------
    g : WeightedMultigraph or DirectedGraph
        Input graph.

    Returns
    -------
    list or tuple of lists
        Degrees per vertex, or ``(in_degrees, out_degrees)`` for directed graphs.

    Examples
    --------
    >>> weighted_degrees(WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)]))
    [2, 2, 2]
    """
    return g.weighted_degrees()


def _parse_header(line: str, lineno: int) -> Dict[str, int]:
    out = {}
    for token in line.lstrip("#").split():
        if "=" not in token:
            continue
        key, _, value = token.partition("=")
        if key not in ("n", "directed"):
            continue
        try:
            out[key] = int(value)
        except ValueError as ex:
            raise GraphParseError(lineno, f"header field {key} must be an integer") from ex
    if out.get("directed", 0) not in (0, 1):
        raise GraphParseError(lineno, "header field directed must be 0 or 1")
    return out


def load_graph(
    text: str, directed: Optional[bool] = None, weight_cap: int = WEIGHT_CAP
) -> Graph:
    """Parse an edge-list document.

    Parameters
    ----------
    text : str
        Optional header ``# n=<int> directed=<0|1>`` followed by ``u v w`` lines.
    directed : bool, optional
        Build a ``DirectedGraph``. Defaults to the header's flag, or undirected.
    weight_cap : int, optional
        Largest accepted weight, defaults to ``2**62``.

    Returns
    -------
    WeightedMultigraph or DirectedGraph
        The graph with one edge per data line and dense edge ids in line order.

    Examples
    --------
    >>> g = load_graph("0 1 1\\n1 2 1")
    >>> g.n, g.m
    (3, 2)
    """
    header: Dict[str, int] = {}
    triples = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not triples and not header:
                header = _parse_header(line, lineno)
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphParseError(lineno, f"expected 'u v w', got {line!r}")
        try:
            u, v, w = (int(p) for p in parts)
        except ValueError as ex:
            raise GraphParseError(lineno, f"non-integer field in {line!r}") from ex
        if u < 0 or v < 0:
            raise GraphParseError(lineno, "vertex ids must be non-negative")
        if u == v:
            raise GraphParseError(lineno, f"self-loop at vertex {u}")
        if w < 1:
            raise GraphParseError(lineno, f"weight must be a positive integer, got {w}")
        if w > weight_cap:
            raise GraphParseError(lineno, f"weight {w} exceeds the cap {weight_cap}")
        triples.append((u, v, w))

    max_id = max((max(u, v) for u, v, _ in triples), default=-1)
    n = header.get("n", max_id + 1)
    if n <= max_id:
        raise GraphParseError(1, f"header n={n} is smaller than the largest vertex id {max_id}")
    is_directed = bool(header.get("directed", 0)) if directed is None else directed
    cls = DirectedGraph if is_directed else WeightedMultigraph
    return cls.from_edges(n, triples)


def read_graph(path: Union[str, Path], directed: Optional[bool] = None) -> Graph:
    """Load an edge-list file, see :func:`load_graph`."""
    return load_graph(Path(path).read_text(), directed=directed)


def save_graph(g: Graph, path: Optional[Union[str, Path]] = None) -> str:
    """Serialize a graph to the edge-list format, optionally writing it to ``path``.

    Examples
    --------
    >>> print(save_graph(WeightedMultigraph.from_edges(2, [(0, 1, 3)])), end="")
    # n=2 directed=0
    0 1 3
    """
    lines = [f"# n={g.n} directed={int(g.directed)}"]
    lines.extend(f"{e.u} {e.v} {e.w}" for e in g.edges)
    doc = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(doc)
    return doc


def binary_split(g: Graph) -> Dict[int, Graph]:
    """Split every edge by the binary representation of its weight.

    Class ``i`` holds one edge of weight ``2**i`` for every edge whose weight has bit
    ``i`` set; edge ids are those of the originating edges.

    Examples
    --------
    >>> classes = binary_split(WeightedMultigraph.from_edges(2, [(0, 1, 5)]))
    >>> {i: [e.w for e in c.edges] for i, c in classes.items()}
    {0: [1], 2: [4]}
    """
    buckets: Dict[int, List[Edge]] = defaultdict(list)
    for e in g.edges:
        w, i = e.w, 0
        while w:
            if w & 1:
                buckets[i].append(Edge(e.eid, e.u, e.v, 1 << i))
            w >>= 1
            i += 1
    return {i: type(g)(g.n, tuple(buckets[i])) for i in sorted(buckets)}


def union_graphs(graphs: Iterable[Graph], n: Optional[int] = None) -> Graph:
    """Concatenate the edges of several graphs with fresh dense ids."""
    graphs = list(graphs)
    if not graphs:
        if n is None:
            raise PreconditionError("union_graphs", "no graphs and no vertex count given")
        return WeightedMultigraph(n, ())
    cls = type(graphs[0])
    size = max(g.n for g in graphs) if n is None else n
    triples = [(e.u, e.v, e.w) for g in graphs for e in g.edges]
    return cls.from_edges(size, triples)


def combine_parallel_edges(g: Graph) -> Graph:
    """Merge equal-weight parallel edges until every pair has distinct weights.

    Two edges of weight ``w`` between the same pair become one edge of weight ``2w``;
    the merge repeats while duplicates remain. Pairs keep their first-seen orientation
    and order, and edges are renumbered densely.

    Examples
    --------
    >>> g = WeightedMultigraph.from_edges(2, [(0, 1, 4), (0, 1, 4), (1, 0, 8)])
    >>> combine_parallel_edges(g).edges
    (Edge(eid=0, u=0, v=1, w=16),)
    """
    order: Dict[Tuple[int, int], Tuple[int, int]] = {}
    weights: Dict[Tuple[int, int], Counter] = defaultdict(Counter)
    for e in g.edges:
        key = g.pair(e)
        order.setdefault(key, (e.u, e.v))
        weights[key][e.w] += 1

    triples = []
    for key, (u, v) in order.items():
        counts = weights[key]
        heap = list(counts)
        heapq.heapify(heap)
        kept = []
        while heap:
            w = heapq.heappop(heap)
            c = counts.pop(w)
            if c % 2:
                kept.append(w)
            if c >= 2:
                if 2 * w not in counts:
                    heapq.heappush(heap, 2 * w)
                counts[2 * w] += c // 2
        triples.extend((u, v, w) for w in sorted(kept))
    return type(g).from_edges(g.n, triples)
