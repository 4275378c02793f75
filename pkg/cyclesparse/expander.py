"""Conductance, lazy random walks and the certified expander decomposers."""
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .core import RngLike, as_generator, split_rng
from .exceptions import InvalidInputRange, PreconditionError
from .graph import _Graph
from .linalg import fiedler, lambda2_normalized

logger = logging.getLogger(__name__)

EXACT_CONDUCTANCE_LIMIT = 20
_CHUNK = 1 << 15

__all__ = [
    "Conductance",
    "ExpanderPartition",
    "EdgeExpanderSplit",
    "RandomWalker",
    "conductance",
    "sweep_cut",
    "expander_decompose",
    "ns_style_decompose",
    "lazy_random_walk",
]


class Conductance(NamedTuple):
    """Conductance of a set; ``exact`` is False for sweep-cut upper bounds."""

    value: float
    exact: bool


@dataclass(frozen=True)
class ExpanderPartition:
    """Vertex partition with per-piece λ₂ certificates.

    Parameters
    ----------
    pieces : tuple of tuples
        Disjoint sorted vertex sets covering all vertices.
    boundary_edges : tuple of int
        Ids of edges whose endpoints lie in different pieces.
    phi_target : float
        Conductance target; certified pieces satisfy ``λ₂ >= 2 phi_target``.
    certificates : tuple of float
        λ₂ of the degree-normalized induced Laplacian of every piece.
    trivial : tuple of bool
        Pieces with at most two vertices, accepted without a λ₂ requirement.
    m : int
        Edge count of the decomposed graph.
    """

    pieces: Tuple[Tuple[int, ...], ...]
    boundary_edges: Tuple[int, ...]
    phi_target: float
    certificates: Tuple[float, ...]
    trivial: Tuple[bool, ...]
    m: int

    @property
    def boundary_ratio(self) -> float:
        """Fraction of edges on the boundary."""
        return len(self.boundary_edges) / self.m if self.m else 0.0

    @property
    def measured_gamma(self) -> float:
        """Boundary fraction relative to ``phi``, floored at 1."""
        return max(1.0, self.boundary_ratio / self.phi_target)

    def piece_index(self) -> Dict[int, int]:
        return {v: i for i, piece in enumerate(self.pieces) for v in piece}


@dataclass(frozen=True)
class EdgeExpanderSplit:
    """Edge partition into a sparse part and edge-expanding dense components.

    Parameters
    ----------
    sparse_part : tuple of int
        Edge ids of ``E^s``.
    dense_components : tuple of tuples
        Vertex sets of the components of ``E^d``.
    expansion_bounds : tuple of float
        Certified lower bounds ``λ₂ d_min / 2`` on the edge expansion per component.
    alpha : float
        Edge expansion target.
    m : int
        Edge count of the decomposed graph.
    """

    sparse_part: Tuple[int, ...]
    dense_components: Tuple[Tuple[int, ...], ...]
    expansion_bounds: Tuple[float, ...]
    alpha: float
    m: int

    @property
    def sparse_ratio(self) -> float:
        return len(self.sparse_part) / self.m if self.m else 0.0


def _degrees(g: _Graph) -> np.ndarray:
    deg = np.zeros(g.n)
    for e in g.edges:
        deg[e.u] += e.w
        deg[e.v] += e.w
    return deg


def _local_edges(g: _Graph, verts: Sequence[int]):
    index = {v: i for i, v in enumerate(verts)}
    inside = [e for e in g.edges if e.u in index and e.v in index]
    a = np.array([index[e.u] for e in inside], dtype=np.int64)
    b = np.array([index[e.v] for e in inside], dtype=np.int64)
    w = np.array([float(e.w) for e in inside])
    return a, b, w


def _exact_conductance(g: _Graph, verts: List[int]) -> float:
    k = len(verts)
    deg = _degrees(g)[verts]
    a, b, w = _local_edges(g, verts)
    vol = deg.sum()
    best = math.inf
    shifts = np.arange(k - 1, dtype=np.int64)
    # the last vertex stays outside, complements give the same ratio
    total = 1 << (k - 1)
    for start in range(1, total, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        bits = np.hstack([bits, np.zeros((len(masks), 1), dtype=bool)])
        vol_in = bits @ deg
        small = np.minimum(vol_in, vol - vol_in)
        cut = (bits[:, a] != bits[:, b]) @ w if len(w) else np.zeros(len(masks))
        ratio = np.divide(cut, small, out=np.full(len(masks), math.inf), where=small > 0)
        best = min(best, float(ratio.min()))
    return best


def sweep_cut(
    g: _Graph, subset: Iterable[int], rng: RngLike = None
) -> Tuple[float, Tuple[int, ...]]:
    """Best prefix of the degree-scaled Fiedler vector of ``G[S]``.

    Parameters
    ----------
    g : WeightedMultigraph
        The full graph; volumes use its degrees.
    subset : iterable of int
        The vertex set ``S`` with at least two vertices.
    rng : int or numpy.random.Generator, optional
        Source for the power iteration on large sets.

    Returns
    -------
    tuple
        Conductance of the best prefix within ``S`` and the prefix itself.
    """
    verts = sorted(set(subset))
    if len(verts) < 2:
        raise PreconditionError("sweep_cut", "the set needs at least two vertices")
    deg = _degrees(g)[verts]
    _, vec = fiedler(g, verts, rng=rng)
    score = np.divide(vec, np.sqrt(deg), out=np.zeros_like(vec), where=deg > 0)
    order = np.lexsort((np.arange(len(verts)), score))
    a, b, w = _local_edges(g, verts)
    k = len(verts)
    adj = sp.coo_matrix((np.r_[w, w], (np.r_[a, b], np.r_[b, a])), shape=(k, k)).tocsr()
    rowsum = np.asarray(adj.sum(axis=1)).ravel()
    vol = deg.sum()
    inside = np.zeros(k)
    cut, vol_in = 0.0, 0.0
    best, best_len = math.inf, 1
    for pos, x in enumerate(order[:-1], start=1):
        cut += rowsum[x] - 2.0 * (adj[x] @ inside).item()
        inside[x] = 1.0
        vol_in += deg[x]
        small = min(vol_in, vol - vol_in)
        ratio = cut / small if small > 0 else math.inf
        if ratio < best:
            best, best_len = ratio, pos
    prefix = tuple(sorted(verts[i] for i in order[:best_len]))
    return best, prefix


def conductance(
    g: _Graph, subset: Iterable[int], exact_limit: int = EXACT_CONDUCTANCE_LIMIT
) -> Conductance:
    """Conductance of ``G[S]`` with volumes taken from the full graph.

    The minimum over all ``Ŝ ⊂ S`` of ``|E(Ŝ, S∖Ŝ)| / min(vol(Ŝ), vol(S∖Ŝ))``, computed by
    enumeration for sets of at most ``exact_limit`` vertices and bounded from above by a
    sweep cut otherwise.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> k4 = WeightedMultigraph.from_edges(4, [(i, j, 1) for i in range(4) for j in range(i + 1, 4)])
    >>> round(conductance(k4, range(4)).value, 6)
    0.666667
    """
    verts = sorted(set(subset))
    if not verts:
        raise PreconditionError("conductance", "the set is empty")
    if len(verts) == 1:
        return Conductance(math.inf, True)
    if len(verts) <= exact_limit:
        return Conductance(_exact_conductance(g, verts), True)
    value, _ = sweep_cut(g, verts)
    logger.debug(f"Conductance of a {len(verts)}-vertex set bounded by a sweep cut.")
    return Conductance(value, False)


def _induced_components(g: _Graph, verts: Iterable[int]) -> List[Tuple[int, ...]]:
    keep = set(verts)
    graph = nx.Graph()
    graph.add_nodes_from(keep)
    graph.add_edges_from((e.u, e.v) for e in g.edges if e.u in keep and e.v in keep)
    return sorted(tuple(sorted(c)) for c in nx.connected_components(graph))


def _check_unit(g: _Graph, op: str) -> None:
    if g.m and g.uniform_weight is None:
        raise PreconditionError(op, "edges must share a single weight")


def expander_decompose(g: _Graph, phi: float, rng: RngLike = None) -> ExpanderPartition:
    """Partition the vertices into pieces certified to have conductance ``>= phi``.

    Recursive spectral bisection: a piece is accepted once the λ₂ of its
    degree-normalized induced Laplacian (full graph degrees) is at least ``2 phi``;
    otherwise its best sweep cut is removed and both sides are processed by
    connected component. Pieces with at most two vertices are accepted as they are.

    Parameters
    ----------
    g : WeightedMultigraph
        Graph whose edges share one weight.
    phi : float
        Conductance target in (0, 0.5).
    rng : int or numpy.random.Generator, optional
        Randomness for power iterations on large pieces; split per recursion path.

    Returns
    -------
    ExpanderPartition
        The pieces, their certificates and the boundary edges.
    """
    if not 0 < phi < 0.5:
        raise InvalidInputRange("phi must be in (0, 0.5).")
    _check_unit(g, "expander_decompose")
    rng = as_generator(rng)
    stack = [(c, rng) for c in reversed(_induced_components(g, range(g.n)))]
    accepted = []
    while stack:
        piece, prng = stack.pop()
        if len(piece) <= 2:
            accepted.append((piece, lambda2_normalized(g, piece), True))
            continue
        lam = lambda2_normalized(g, piece, rng=prng)
        if lam >= 2 * phi:
            accepted.append((piece, lam, False))
            continue
        _, prefix = sweep_cut(g, piece, rng=prng)
        rest = sorted(set(piece) - set(prefix))
        parts = _induced_components(g, prefix) + _induced_components(g, rest)
        stack.extend(zip(reversed(parts), split_rng(prng, len(parts))))

    accepted.sort(key=lambda t: t[0][0])
    pieces = tuple(p for p, _, _ in accepted)
    where = {v: i for i, p in enumerate(pieces) for v in p}
    boundary = tuple(e.eid for e in g.edges if where[e.u] != where[e.v])
    part = ExpanderPartition(
        pieces=pieces,
        boundary_edges=boundary,
        phi_target=phi,
        certificates=tuple(c for _, c, _ in accepted),
        trivial=tuple(t for _, _, t in accepted),
        m=g.m,
    )
    logger.info(
        f"Expander decomposition: {len(pieces)} pieces, {len(boundary)} of {g.m} edges on "
        + f"the boundary (ratio {part.boundary_ratio:.4g}, phi {phi:.4g})"
    )
    return part


def _bridges(g: _Graph, eids: Sequence[int]) -> List[int]:
    mult: Counter = Counter()
    first: Dict[Tuple[int, int], int] = {}
    for eid in eids:
        e = g.edge(eid)
        key = (min(e.u, e.v), max(e.u, e.v))
        mult[key] += 1
        first.setdefault(key, eid)
    simple = nx.Graph(list(mult))
    found = []
    for a, b in nx.bridges(simple):
        key = (min(a, b), max(a, b))
        if mult[key] == 1:
            found.append(first[key])
    return sorted(found)


def ns_style_decompose(g: _Graph, alpha: float, rng: RngLike = None) -> EdgeExpanderSplit:
    """Split edges into a sparse part and components with edge expansion ``>= alpha``.

    Bridges are moved to the sparse part first; a remaining component is certified when
    ``λ₂ · d_min / 2 >= alpha`` (λ₂ and ``d_min`` of the component as its own graph),
    and is otherwise cut along its sweep cut with the cut edges moved to the sparse part.

    Parameters
    ----------
    g : WeightedMultigraph
        Graph whose edges share one weight.
    alpha : float
        Edge expansion target, positive.
    rng : int or numpy.random.Generator, optional
        Randomness for power iterations on large components.

    Returns
    -------
    EdgeExpanderSplit
        Sparse edge ids and certified dense components.
    """
    if alpha <= 0:
        raise InvalidInputRange("alpha must be positive.")
    _check_unit(g, "ns_style_decompose")
    rng = as_generator(rng)
    sparse: List[int] = []
    dense: List[Tuple[Tuple[int, ...], float]] = []
    stack = [g.edge_ids]
    while stack:
        eids = stack.pop()
        bridges = _bridges(g, eids)
        sparse.extend(bridges)
        rest = g.edge_subgraph(set(eids) - set(bridges))
        for comp in _induced_components(rest, rest.non_isolated()):
            h = rest.induced_subgraph(comp)
            if len(comp) < 2:
                continue
            lam = lambda2_normalized(h, comp, rng=rng)
            d_min = min(h.weighted_degrees()[v] for v in comp) / (h.uniform_weight or 1)
            bound = 0.5 * lam * d_min
            if bound >= alpha:
                dense.append((comp, bound))
                continue
            _, prefix = sweep_cut(h, comp, rng=rng)
            side = set(prefix)
            cut = [e.eid for e in h.edges if (e.u in side) != (e.v in side)]
            sparse.extend(cut)
            stack.append([e.eid for e in h.edges if e.u in side and e.v in side])
            stack.append([e.eid for e in h.edges if e.u not in side and e.v not in side])

    dense.sort(key=lambda t: t[0][0])
    split = EdgeExpanderSplit(
        sparse_part=tuple(sorted(sparse)),
        dense_components=tuple(c for c, _ in dense),
        expansion_bounds=tuple(b for _, b in dense),
        alpha=alpha,
        m=g.m,
    )
    logger.info(
        f"Edge expander split: {len(split.sparse_part)} sparse edges of {g.m}, "
        + f"{len(dense)} dense components (alpha {alpha:.4g})"
    )
    return split


class RandomWalker:
    """Batched lazy random walks on the undirected support of a graph.

    Every step stays put with probability 1/2 and otherwise moves along an incident
    edge chosen uniformly, counting parallel edges separately.
    """

    def __init__(self, g: _Graph) -> None:
        self.indptr, self.nbr, self.eid = g.incidence()
        self.deg = np.diff(self.indptr)

    def walk(
        self, starts: Sequence[int], steps: int, rng: np.random.Generator, record: bool = False
    ):
        """Run one walk per start vertex.

        Returns
        -------
        numpy.ndarray or tuple
            End vertices, or ``(ends, vertices, edges)`` with the visited vertices
            (``steps + 1`` columns) and traversed edge ids (``-1`` for lazy steps).
        """
        pos = np.asarray(starts, dtype=np.int64).copy()
        if np.any(self.deg[pos] == 0):
            raise PreconditionError("lazy_random_walk", "a start vertex is isolated")
        if record:
            verts = np.empty((len(pos), steps + 1), dtype=np.int64)
            edges = np.full((len(pos), steps), -1, dtype=np.int64)
            verts[:, 0] = pos
        for t in range(steps):
            move = rng.random(len(pos)) >= 0.5
            slot = self.indptr[pos] + (rng.random(len(pos)) * self.deg[pos]).astype(np.int64)
            if record:
                edges[move, t] = self.eid[slot[move]]
            pos = np.where(move, self.nbr[slot], pos)
            if record:
                verts[:, t + 1] = pos
        if record:
            return pos, verts, edges
        return pos


def lazy_random_walk(g: _Graph, start: int, steps: int, rng: RngLike = None) -> int:
    """Endpoint of a lazy random walk of ``steps`` steps from ``start``.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> lazy_random_walk(WeightedMultigraph.from_edges(2, [(0, 1, 1)]), 0, 0)
    0
    """
    if steps < 0:
        raise InvalidInputRange("steps must be non-negative.")
    return int(RandomWalker(g).walk([start], steps, as_generator(rng))[0])
