"""Reduction of weighted Eulerian digraphs to power-of-two classes on few vertices."""
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.utils import UnionFind

from .core import ReduceConfig
from .exceptions import InternalConsistencyError, NotEulerianError, PreconditionError
from .graph import DirectedGraph
from .sparsify import greedy_bipartition

logger = logging.getLogger(__name__)

Arc = Tuple[int, int]

__all__ = [
    "TreeComponent",
    "PowersOfTwo",
    "WeightClass",
    "UnitReduction",
    "decompose_bipartite_dir",
    "local_move",
    "reduce_powers_of_two",
    "reduce_to_unit",
    "reconstruct",
    "reconstruct_degrees",
]


@dataclass
class TreeComponent:
    """Signed arc weights supported on spanning forests.

    ``base`` is the symmetric spanning tree scaled down by the move threshold, with equal
    weight in both directions. ``adjustments`` are the exact integer corrections left by
    rerouted weight; they may be negative on single arcs.
    """

    n: int
    base: Dict[Arc, Fraction] = field(default_factory=dict)
    adjustments: Dict[Arc, int] = field(default_factory=lambda: defaultdict(int))

    def add(self, tail: int, head: int, t: int) -> None:
        self.adjustments[(tail, head)] += t

    def arcs(self, include_base: bool = True) -> Dict[Arc, Fraction]:
        out: Dict[Arc, Fraction] = defaultdict(Fraction)
        if include_base:
            for arc, w in self.base.items():
                out[arc] += w
        for arc, t in self.adjustments.items():
            out[arc] += t
        return {arc: w for arc, w in sorted(out.items()) if w != 0}

    def degree_change(self) -> Tuple[List[int], List[int]]:
        """``(in, out)`` degree contributions of the adjustments."""
        deg_in, deg_out = [0] * self.n, [0] * self.n
        for (u, v), t in self.adjustments.items():
            deg_out[u] += t
            deg_in[v] += t
        return deg_in, deg_out

    def support(self) -> List[Arc]:
        return sorted({(min(a), max(a)) for a in self.arcs()})

    def laplacian(self, include_base: bool = True) -> np.ndarray:
        lap = np.zeros((self.n, self.n))
        for (u, v), w in self.arcs(include_base).items():
            lap[u, u] += float(w)
            lap[v, u] -= float(w)
        return lap

    def merge(self, other: "TreeComponent") -> None:
        for arc, w in other.base.items():
            self.base[arc] = self.base.get(arc, Fraction(0)) + w
        for arc, t in other.adjustments.items():
            self.adjustments[arc] += t


@dataclass(frozen=True)
class PowersOfTwo:
    """A digraph written as a tree component plus classes with weights ``2**i``.

    ``moves`` counts the two-step endpoint moves; ``kept_trailing`` counts arcs whose
    trailing bits failed the move check and stayed in the classes.
    """

    tree: TreeComponent
    classes: Dict[int, DirectedGraph]
    moves: int
    kept_trailing: int

    @property
    def vertex_total(self) -> int:
        return sum(len(h.non_isolated()) for h in self.classes.values())


@dataclass(frozen=True)
class WeightClass:
    """One class of a unit reduction: arcs of weight ``2**index`` inside one bipartite piece."""

    index: int
    bucket: int
    piece: int
    graph: DirectedGraph


@dataclass(frozen=True)
class UnitReduction:
    """Sparse part and shrunk weight classes of a unit reduction.

    Parameters
    ----------
    sparse : TreeComponent
        Scaled spanning trees and all rerouting corrections.
    classes : tuple of WeightClass
        Power-of-two classes after their endpoints moved to component representatives.
    touched : dict
        Components touched per ``(piece, bucket)``, summed over the classes of the bucket.
    moves : int
        Two-step endpoint moves.
    """

    sparse: TreeComponent
    classes: Tuple[WeightClass, ...]
    touched: Dict[Tuple[int, int], int]
    moves: int

    @property
    def vertex_total(self) -> int:
        return sum(len(c.graph.non_isolated()) for c in self.classes)

    @property
    def edge_total(self) -> int:
        return sum(c.graph.m for c in self.classes)


def _arc_weights(g: DirectedGraph) -> Dict[Arc, int]:
    arcs: Dict[Arc, int] = Counter()
    for e in g.edges:
        arcs[(e.u, e.v)] += e.w
    return dict(arcs)


def _support_weights(arcs: Dict[Arc, int]) -> Dict[Arc, int]:
    out: Dict[Arc, int] = Counter()
    for (u, v), w in arcs.items():
        out[(min(u, v), max(u, v))] += w
    return out


def _to_graph(n: int, arcs: Dict[Arc, int]) -> DirectedGraph:
    return DirectedGraph.from_edges(n, [(u, v, w) for (u, v), w in sorted(arcs.items()) if w])


def decompose_bipartite_dir(g: DirectedGraph) -> List[DirectedGraph]:
    """Split the arcs into digraphs whose undirected supports are bipartite.

    The arcs cut by :func:`~cyclesparse.sparsify.greedy_bipartition` form one part and
    the arcs inside each side are decomposed recursively; the two sides are vertex
    disjoint, so every level adds at most ``n`` vertex occurrences.

    Parameters
    ----------
    g : DirectedGraph
        Input digraph.

    Returns
    -------
    list of DirectedGraph
        Parts on the vertex set of ``g`` with the arc ids of ``g``.
    """
    if g.m and nx.is_bipartite(_nx_support(g)):
        return [g]
    parts: List[DirectedGraph] = []
    stack = [g]
    while stack:
        current = stack.pop()
        if current.m == 0:
            continue
        a, _ = greedy_bipartition(current, weighted=False)
        left = set(a)
        crossing = [e for e in current.edges if (e.u in left) != (e.v in left)]
        parts.append(current.with_edges(crossing))
        stack.append(current.with_edges(e for e in current.edges if e.u in left and e.v in left))
        stack.append(
            current.with_edges(e for e in current.edges if e.u not in left and e.v not in left)
        )
    logger.debug(f"Bipartite decomposition: {g.m} arcs in {len(parts)} parts")
    return parts


def _nx_support(g: DirectedGraph, arcs: Optional[Dict[Arc, int]] = None) -> nx.Graph:
    support = _support_weights(arcs if arcs is not None else _arc_weights(g))
    graph = nx.Graph()
    graph.add_weighted_edges_from((u, v, w) for (u, v), w in support.items())
    return graph


def _move_compensation(path: Sequence[int], t: int, head: bool) -> List[Tuple[int, int, int]]:
    """Signed arcs that move an endpoint from ``path[0]`` to ``path[-1]`` two hops at a time."""
    out = []
    for s in range(0, len(path) - 1, 2):
        x1, x2, x3 = path[s], path[s + 1], path[s + 2]
        if head:
            out.extend([(x2, x1, t), (x2, x3, -t)])
        else:
            out.extend([(x1, x2, t), (x3, x2, -t)])
    return out


def _check_move(path: Sequence[int], t: int, support: Dict[Arc, int], threshold: float) -> bool:
    for a, b in zip(path, path[1:]):
        if support.get((min(a, b), max(a, b)), 0) < threshold * t:
            return False
    return True


def local_move(
    g: DirectedGraph,
    u: int,
    x1: int,
    x2: int,
    x3: int,
    t: int = 1,
    reverse: bool = False,
    threshold: Optional[float] = None,
) -> DirectedGraph:
    """Move weight ``t`` of the arc ``u -> x1`` to ``u -> x3`` along ``x1 x2 x3``.

    Weight ``t`` leaves ``u -> x1`` and ``x2 -> x3`` and is added to ``u -> x3`` and
    ``x2 -> x1``. With ``reverse`` the arc is ``x1 -> u``: weight leaves ``x1 -> u`` and
    ``x3 -> x2`` and is added to ``x3 -> u`` and ``x1 -> x2``. In and out degrees are
    unchanged and the Laplacian moves by ``t`` times a rank one matrix.

    Parameters
    ----------
    g : DirectedGraph
        Input digraph; parallel arcs are merged in the output.
    u, x1, x2, x3 : int
        Distinct vertices.
    t : int, optional
        Moved weight, defaults to 1.
    reverse : bool, optional
        Move the tail of ``x1 -> u`` instead of the head of ``u -> x1``.
    threshold : float, optional
        Minimum ratio between the undirected weights of ``x1 x2`` and ``x2 x3`` and ``t``,
        defaults to ``n**4``.

    Returns
    -------
    DirectedGraph
        The digraph after the move.
    """
    if len({u, x1, x2, x3}) != 4:
        raise PreconditionError("local_move", "u, x1, x2, x3 must be distinct")
    if t < 1:
        raise PreconditionError("local_move", "t must be a positive integer")
    threshold = float(max(g.n, 2)) ** 4 if threshold is None else threshold
    arcs = Counter(_arc_weights(g))
    removed = [(x1, u), (x3, x2)] if reverse else [(u, x1), (x2, x3)]
    added = [(x3, u), (x1, x2)] if reverse else [(u, x3), (x2, x1)]
    short = [a for a in removed if arcs[a] < t]
    if short:
        raise PreconditionError("local_move", f"arcs {short} carry less than {t}")
    if not _check_move((x1, x2, x3), t, _support_weights(arcs), threshold):
        raise PreconditionError(
            "local_move", f"weights on {x1}-{x2}-{x3} are below {threshold:.4g} * {t}"
        )
    for a in removed:
        arcs[a] -= t
    for a in added:
        arcs[a] += t
    return _to_graph(g.n, arcs)


def _route(
    tree: TreeComponent, tail: int, head: int, path: Sequence[int], t: int
) -> int:
    """Absorb the arc ``tail -> head`` into ``tree`` along ``path`` from ``head`` to ``tail``."""
    inner = path[: len(path) - 1]
    for a, b, s in _move_compensation(inner, t, head=True):
        tree.add(a, b, s)
    tree.add(tail, inner[-1], t)
    return (len(inner) - 1) // 2


def _check_connected_bipartite(g: DirectedGraph, op: str) -> nx.Graph:
    support = _nx_support(g)
    if support.number_of_nodes() and not nx.is_connected(support):
        raise PreconditionError(op, "the undirected support must be connected")
    if support.number_of_nodes() and not nx.is_bipartite(support):
        raise PreconditionError(op, "the undirected support must be bipartite")
    return support


def reduce_powers_of_two(
    g: DirectedGraph, config: Optional[ReduceConfig] = None
) -> PowersOfTwo:
    """Write ``g`` as a tree component plus power-of-two classes.

    Every arc keeps its ``lead_bits`` leading bits, split into classes by binary
    representation. The trailing bits are rerouted along the maximum weight spanning tree
    of the undirected support by two-step endpoint moves and end up on tree arcs. The
    tree starts as the spanning tree scaled by ``1 / move_threshold`` in both directions.

    Parameters
    ----------
    g : DirectedGraph
        Digraph with a connected bipartite undirected support.
    config : ReduceConfig, optional
        Thresholds.

    Returns
    -------
    PowersOfTwo
        In and out degrees of the classes plus the tree adjustments equal those of ``g``.
    """
    config = config or ReduceConfig()
    support = _check_connected_bipartite(g, "reduce_powers_of_two")
    _, lead, threshold = config.resolve(g.n)
    arcs = _arc_weights(g)
    weights = _support_weights(arcs)
    spanning = nx.maximum_spanning_tree(support) if support.number_of_nodes() else nx.Graph()
    tree = TreeComponent(g.n)
    for a, b, data in sorted(spanning.edges(data=True)):
        w = Fraction(int(data["weight"])) / Fraction(threshold)
        tree.base[(a, b)] = w
        tree.base[(b, a)] = w
    classes: Dict[int, Dict[Arc, int]] = defaultdict(dict)
    moves = kept = 0
    for (u, v), w in sorted(arcs.items()):
        shift = max(w.bit_length() - lead, 0)
        leading = (w >> shift) << shift
        trailing = w - leading
        if trailing:
            path = nx.shortest_path(spanning, v, u)
            if _check_move(path, trailing, weights, threshold):
                moves += _route(tree, u, v, path, trailing)
            else:
                logger.warning(
                    f"Trailing weight {trailing} of {u}->{v} fails the move check, kept"
                )
                leading, kept = w, kept + 1
        for i in range(leading.bit_length()):
            if leading >> i & 1:
                classes[i][(u, v)] = 1 << i
    out = {i: _to_graph(g.n, classes[i]) for i in sorted(classes)}
    deg_in, deg_out = tree.degree_change()
    for h in out.values():
        for e in h.edges:
            deg_out[e.u] += e.w
            deg_in[e.v] += e.w
    if (deg_in, deg_out) != g.weighted_degrees():
        raise InternalConsistencyError("rerouting trailing bits changed an in or out degree")
    logger.debug(f"Powers of two: {len(out)} classes, {moves} moves, {kept} kept trailing")
    return PowersOfTwo(tree, out, moves, kept)


def _representatives(
    uf: UnionFind, vertices: Sequence[int], color: Dict[int, int]
) -> Dict[int, int]:
    """Smallest vertex of the same side in the union-find set of every vertex."""
    best: Dict[Tuple[int, int], int] = {}
    for v in vertices:
        key = (uf[v], color[v])
        best[key] = min(best.get(key, v), v)
    return {v: best[(uf[v], color[v])] for v in vertices}


def _shrink_bucket(
    n: int,
    classes: Dict[int, DirectedGraph],
    indices: Sequence[int],
    color: Dict[int, int],
    sparse: TreeComponent,
) -> Tuple[Dict[int, DirectedGraph], int, int]:
    uf = UnionFind()
    forest = nx.Graph()
    vertices = sorted(color)
    shrunk: Dict[int, DirectedGraph] = {}
    touched = moves = 0
    for i in sorted(indices, reverse=True):
        t = 1 << i
        reps = _representatives(uf, vertices, color)
        kept: Dict[Arc, int] = Counter()
        roots = set()
        for e in classes[i].edges:
            a, b = e.u, e.v
            if uf[a] == uf[b]:
                path = nx.shortest_path(forest, b, a)
                moves += _route(sparse, a, b, path, t)
                continue
            ra, rb = reps[a], reps[b]
            for end, rep, head in ((b, rb, True), (a, ra, False)):
                if end == rep:
                    continue
                path = nx.shortest_path(forest, end, rep)
                for x, y, s in _move_compensation(path, t, head):
                    sparse.add(x, y, s)
                moves += (len(path) - 1) // 2
            kept[(ra, rb)] += t
            roots.update((uf[a], uf[b]))
        touched += len(roots)
        for e in classes[i].edges:
            if uf[e.u] != uf[e.v]:
                uf.union(e.u, e.v)
                forest.add_edge(e.u, e.v)
        shrunk[i] = _to_graph(n, kept)
    return shrunk, touched, moves


def reduce_to_unit(g: DirectedGraph, config: Optional[ReduceConfig] = None) -> UnitReduction:
    """Reduce an Eulerian digraph to a sparse part plus power-of-two classes on few vertices.

    The arcs are split into bipartite parts and every connected component of a part goes
    through :func:`reduce_powers_of_two`. Classes are bucketed by index modulo ``xi``;
    inside a bucket, classes are visited from heavy to light and every arc has its
    endpoints moved to the smallest vertex of the same side in its component of the
    heavier classes. Arcs inside one such component are absorbed into the sparse part.

    Parameters
    ----------
    g : DirectedGraph
        Eulerian digraph with positive integer weights.
    config : ReduceConfig, optional
        Thresholds.

    Returns
    -------
    UnitReduction
        Classes plus the sparse adjustments have the in and out degrees of ``g``.
    """
    if not g.is_eulerian():
        raise NotEulerianError(g.unbalanced_vertices())
    config = config or ReduceConfig()
    xi, _, _ = config.resolve(g.n)
    sparse = TreeComponent(g.n)
    out: List[WeightClass] = []
    touched: Dict[Tuple[int, int], int] = {}
    moves = 0
    pieces = []
    for part in decompose_bipartite_dir(g):
        support = _nx_support(part)
        for comp in sorted(nx.connected_components(support), key=min):
            pieces.append(part.with_edges(e for e in part.edges if e.u in comp))
    for index, piece in enumerate(pieces):
        powers = reduce_powers_of_two(piece, config)
        sparse.merge(powers.tree)
        moves += powers.moves
        color = nx.bipartite.color(_nx_support(piece))
        by_bucket = defaultdict(list)
        for i in powers.classes:
            by_bucket[i % xi].append(i)
        for bucket, indices in sorted(by_bucket.items()):
            shrunk, t_sum, count = _shrink_bucket(g.n, powers.classes, indices, color, sparse)
            if t_sum > 2 * len(color):
                raise InternalConsistencyError(
                    f"bucket {bucket} touched {t_sum} components on {len(color)} vertices"
                )
            touched[(index, bucket)] = t_sum
            moves += count
            out.extend(
                WeightClass(i, bucket, index, h) for i, h in sorted(shrunk.items()) if h.m
            )
    result = UnitReduction(sparse, tuple(out), touched, moves)
    deg_in, deg_out = reconstruct_degrees(result)
    if (deg_in, deg_out) != g.weighted_degrees():
        raise InternalConsistencyError("the unit reduction changed an in or out degree")
    logger.info(
        f"Unit reduction: {len(pieces)} pieces, {len(out)} classes, "
        + f"{result.vertex_total} class vertices, {moves} moves"
    )
    return result


def reconstruct_degrees(red: UnitReduction) -> Tuple[List[int], List[int]]:
    """``(in, out)`` degrees of the classes plus the sparse adjustments."""
    deg_in, deg_out = red.sparse.degree_change()
    for c in red.classes:
        for e in c.graph.edges:
            deg_out[e.u] += e.w
            deg_in[e.v] += e.w
    return deg_in, deg_out


def reconstruct(
    tree: TreeComponent, classes: Sequence[DirectedGraph], include_base: bool = True
) -> np.ndarray:
    """Dense directed Laplacian of a tree component plus classes."""
    lap = tree.laplacian(include_base)
    for h in classes:
        lap += h.laplacian().toarray()
    return lap
