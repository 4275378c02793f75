"""Seeded graph families for tests, benchmarks and the command line."""
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np

from .core import RngLike, as_generator
from .exceptions import InvalidInputRange
from .graph import DirectedGraph, WeightedMultigraph

__all__ = [
    "from_networkx",
    "random_regular",
    "erdos_renyi",
    "dumbbell",
    "two_cliques_matching",
    "random_eulerian",
    "random_multigraph",
    "complete_graph",
    "cycle_graph",
]


def _seed(rng: RngLike) -> int:
    return int(as_generator(rng).integers(0, 2**31 - 1))


def from_networkx(
    graph: nx.Graph, weight: Optional[str] = None, n: Optional[int] = None
) -> WeightedMultigraph:
    """Convert an integer-labeled networkx graph, edges in sorted order.

    Examples
    --------
    >>> from_networkx(nx.path_graph(3)).edges
    (Edge(eid=0, u=0, v=1, w=1), Edge(eid=1, u=1, v=2, w=1))
    """
    size = graph.number_of_nodes() if n is None else n
    rows: List[Tuple[int, int, int]] = []
    for u, v, data in sorted(graph.edges(data=True), key=lambda t: (min(t[:2]), max(t[:2]))):
        w = int(data.get(weight, 1)) if weight else 1
        rows.append((int(u), int(v), w))
    return WeightedMultigraph.from_edges(size, rows)


def complete_graph(n: int, w: int = 1) -> WeightedMultigraph:
    return WeightedMultigraph.from_edges(n, [(u, v, w) for u, v in nx.complete_graph(n).edges()])


def cycle_graph(n: int, w: int = 1) -> WeightedMultigraph:
    return WeightedMultigraph.from_edges(n, [(i, (i + 1) % n, w) for i in range(n)])


def random_regular(n: int, d: int, rng: RngLike = None) -> WeightedMultigraph:
    """Uniform random simple ``d``-regular graph with unit weights."""
    if (n * d) % 2 or d >= n:
        raise InvalidInputRange("n * d must be even and d smaller than n.")
    return from_networkx(nx.random_regular_graph(d, n, seed=_seed(rng)), n=n)


def erdos_renyi(
    n: int, p: float, rng: RngLike = None, connected: bool = True
) -> WeightedMultigraph:
    """``G(n, p)`` with unit weights, redrawn until connected when ``connected`` is set."""
    if not 0 < p <= 1:
        raise InvalidInputRange("p must be in (0, 1].")
    gen = as_generator(rng)
    if not connected:
        return from_networkx(nx.gnp_random_graph(n, p, seed=_seed(gen)), n=n)
    return from_networkx(_connected_gnp(n, p, gen), n=n)


def dumbbell(n: int, p: float = 0.5, rng: RngLike = None) -> WeightedMultigraph:
    """Two ``G(n/2, p)`` halves joined by a single edge."""
    half = n // 2
    gen = as_generator(rng)
    left = nx.convert_node_labels_to_integers(_connected_gnp(half, p, gen))
    right = nx.convert_node_labels_to_integers(_connected_gnp(n - half, p, gen), first_label=half)
    graph = nx.union(left, right)
    graph.add_edge(0, half)
    return from_networkx(graph, n=n)


def _connected_gnp(n: int, p: float, rng: np.random.Generator) -> nx.Graph:
    if not 0 < p <= 1:
        raise InvalidInputRange("p must be in (0, 1].")
    for _ in range(100):
        graph = nx.gnp_random_graph(n, p, seed=_seed(rng))
        if nx.is_connected(graph):
            return graph
    raise InvalidInputRange(f"G({n}, {p}) was disconnected in 100 draws, increase p.")


def two_cliques_matching(k: int) -> WeightedMultigraph:
    """Two ``k``-cliques on ``0..k-1`` and ``k..2k-1`` with the perfect matching ``i, i+k``.

    Examples
    --------
    >>> g = two_cliques_matching(3)
    >>> g.n, g.m
    (6, 9)
    """
    graph = nx.union(nx.complete_graph(k), nx.complete_graph(range(k, 2 * k)))
    graph.add_edges_from((i, i + k) for i in range(k))
    return from_networkx(graph, n=2 * k)


def random_eulerian(
    n: int, cycles: int, rng: RngLike = None, min_length: int = 2, max_weight: int = 1
) -> DirectedGraph:
    """Union of random directed cycles, an Eulerian multigraph.

    Each cycle visits between ``min_length`` and ``n`` distinct random vertices and gets
    a random weight in ``[1, max_weight]``.
    """
    if not 2 <= min_length <= n:
        raise InvalidInputRange("min_length must be in [2, n].")
    gen = as_generator(rng)
    arcs = []
    for _ in range(cycles):
        length = int(gen.integers(min_length, n + 1))
        verts = gen.permutation(n)[:length].tolist()
        w = int(gen.integers(1, max_weight + 1))
        arcs.extend((verts[i], verts[(i + 1) % length], w) for i in range(length))
    return DirectedGraph.from_edges(n, arcs)


def random_multigraph(
    n: int, m: int, rng: RngLike = None, max_weight: int = 1
) -> WeightedMultigraph:
    """``m`` edges between uniformly random distinct endpoints, parallel edges allowed."""
    if n < 2:
        raise InvalidInputRange("n must be at least 2.")
    gen = as_generator(rng)
    u = gen.integers(0, n, size=m)
    v = (u + gen.integers(1, n, size=m)) % n
    w = gen.integers(1, max_weight + 1, size=m)
    return WeightedMultigraph.from_edges(n, zip(u.tolist(), v.tolist(), w.tolist()))
