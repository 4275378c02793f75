"""Degree preserving and Eulerian sparsification by sampling halves of short cycles."""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    DENSE_LIMIT,
    CycleConfig,
    RngLike,
    SparsifyConfig,
    as_generator,
    rng_stream,
    split_rng,
)
from .cycles import decompose, naive_bounds
from .exceptions import (
    ComponentMismatchError,
    InternalConsistencyError,
    NotEulerianError,
    PreconditionError,
)
from .graph import (
    DirectedGraph,
    Edge,
    WeightedMultigraph,
    _Graph,
    binary_split,
    combine_parallel_edges,
    union_graphs,
)
from .linalg import SpectralCertificate, asym_error_norm, certify_spectral_approx
from .resistance import ResistanceEstimates, approx_effective_resistances

logger = logging.getLogger(__name__)

Estimates = Union[ResistanceEstimates, Sequence[float], np.ndarray]

__all__ = [
    "RoundRecord",
    "SparsifyResult",
    "greedy_bipartition",
    "sample_even_cycle",
    "sample_directed_cycle",
    "sparsify_once",
    "degree_preserving_sparsify",
    "directed_sparsify_once",
    "eulerian_sparsify",
]


@dataclass(frozen=True)
class RoundRecord:
    """One sparsification round.

    ``error`` is the measured certificate of the round (None when not measured) and
    ``refreshed`` tells whether resistance estimates were recomputed before it.
    """

    index: int
    edges_before: int
    edges_after: int
    error: Optional[float]
    refreshed: bool


@dataclass(frozen=True)
class SparsifyResult:
    """Output of a sparsification loop.

    Parameters
    ----------
    graph : WeightedMultigraph or DirectedGraph
        The sparsifier.
    rounds : tuple of RoundRecord
        Per-round bookkeeping.
    stop_threshold : float
        Edge count below which the loop stops.
    certificate : SpectralCertificate, optional
        Dense certificate of the symmetric Laplacians, when measured.
    asym_norm : float, optional
        Final asymmetric error norm for Eulerian inputs, when measured.
    """

    graph: _Graph
    rounds: Tuple[RoundRecord, ...]
    stop_threshold: float
    certificate: Optional[SpectralCertificate] = None
    asym_norm: Optional[float] = None

    @property
    def round_error_sum(self) -> float:
        return sum(r.error for r in self.rounds if r.error is not None)


def greedy_bipartition(
    g: _Graph, weighted: bool = True
) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Bipartition cutting at least half of the incident weight.

    Starting from all vertices on one side, any vertex with more incident weight on its
    own side than across is flipped until no such vertex remains.

    Parameters
    ----------
    g : WeightedMultigraph or DirectedGraph
        Graph whose undirected support is cut.
    weighted : bool, optional
        Balance edge weights (the default) or edge counts. Counting cuts at least half
        of the edges whatever the weights are.

    Returns
    -------
    tuple
        Sorted vertex tuples ``(A, B)``.

    Examples
    --------
    >>> k4 = WeightedMultigraph.from_edges(4, [(i, j, 1) for i in range(4) for j in range(i + 1, 4)])
    >>> greedy_bipartition(k4)
    ((2, 3), (0, 1))
    """
    indptr, nbr, eid = g.incidence()
    if weighted:
        wmap = {e.eid: float(e.w) for e in g.edges}
        w = np.array([wmap[i] for i in eid.tolist()], dtype=float)
    else:
        w = np.ones(eid.size, dtype=float)
    side = np.zeros(g.n, dtype=np.int8)
    owner = np.repeat(np.arange(g.n), np.diff(indptr))
    gain = np.bincount(owner, weights=w, minlength=g.n)
    changed = True
    while changed:
        changed = False
        for v in range(g.n):
            if gain[v] <= 0:
                continue
            side[v] ^= 1
            gain[v] = -gain[v]
            lo, hi = indptr[v], indptr[v + 1]
            for x, wx in zip(nbr[lo:hi], w[lo:hi]):
                gain[x] += 2 * wx if side[x] == side[v] else -2 * wx
            changed = True
    a = tuple(int(v) for v in np.flatnonzero(side == 0))
    b = tuple(int(v) for v in np.flatnonzero(side == 1))
    return a, b


def _check_uniform(edges: Sequence[Edge], op: str) -> int:
    ws = {e.w for e in edges}
    if len(ws) != 1:
        raise PreconditionError(op, "cycle edges must share one weight")
    return ws.pop()


def sample_even_cycle(cycle: Sequence[Edge], rng: RngLike = None) -> List[Edge]:
    """Keep the odd or the even edges of an even cycle with doubled weights.

    Parameters
    ----------
    cycle : sequence of Edge
        Edges in traversal order.
    rng : int or numpy.random.Generator, optional
        Coin for the half.

    Returns
    -------
    list of Edge
        The kept half; edge ids are unchanged.
    """
    if len(cycle) % 2:
        raise PreconditionError("sample_even_cycle", f"cycle of odd length {len(cycle)}")
    w = _check_uniform(cycle, "sample_even_cycle")
    parity = int(as_generator(rng).integers(2))
    return [Edge(e.eid, e.u, e.v, 2 * w) for i, e in enumerate(cycle) if i % 2 == parity]


def _traversal(cycle: Sequence[Edge]) -> List[int]:
    first = cycle[0]
    for start in (first.u, first.v):
        walk, cur = [start], start
        for e in cycle:
            if cur not in (e.u, e.v):
                break
            cur = e.v if cur == e.u else e.u
            walk.append(cur)
        else:
            if cur == start:
                return walk
    raise PreconditionError("sample_directed_cycle", "arcs do not form a cycle of the support")


def sample_directed_cycle(cycle: Sequence[Edge], rng: RngLike = None) -> List[Edge]:
    """Keep the clockwise or the counterclockwise arcs of a cycle with doubled weights.

    Clockwise arcs point along the stored traversal order of the underlying undirected
    cycle. Either half keeps the out-degree minus in-degree of every vertex.

    Parameters
    ----------
    cycle : sequence of Edge
        Arcs ``(eid, tail, head, w)`` in traversal order of their support.
    rng : int or numpy.random.Generator, optional
        Coin for the half.

    Returns
    -------
    list of Edge
        Kept arcs, possibly none.
    """
    w = _check_uniform(cycle, "sample_directed_cycle")
    walk = _traversal(cycle)
    clockwise = [(e.u, e.v) == (walk[i], walk[i + 1]) for i, e in enumerate(cycle)]
    keep_cw = bool(as_generator(rng).integers(2))
    return [Edge(e.eid, e.u, e.v, 2 * w) for e, cw in zip(cycle, clockwise) if cw == keep_cw]


def _aligned(g: _Graph, estimates: Estimates) -> np.ndarray:
    if isinstance(estimates, ResistanceEstimates):
        lookup = estimates.as_dict()
        missing = [e for e in g.edge_ids if e not in lookup]
        if missing or len(lookup) != g.m:
            raise PreconditionError("sparsify", f"{len(estimates)} estimates for {g.m} edges")
        return np.array([lookup[e] for e in g.edge_ids])
    values = np.asarray(estimates, dtype=float)
    if values.shape != (g.m,):
        raise PreconditionError("sparsify", f"{values.size} estimates for {g.m} edges")
    return values


def _check_powers_of_two(g: _Graph, op: str) -> None:
    if any(e.w & (e.w - 1) for e in g.edges):
        raise PreconditionError(op, "weights must be powers of two")


def _high_leverage(g: _Graph, values: np.ndarray) -> np.ndarray:
    weights = np.array([float(e.w) for e in g.edges])
    return weights * values >= 4.0 * g.n / g.m


def _sample_classes(
    g: _Graph, edges: Sequence[Edge], config: CycleConfig, rng: np.random.Generator, directed: bool
) -> List[Edge]:
    by_weight: Dict[int, List[Edge]] = defaultdict(list)
    for e in edges:
        by_weight[e.w].append(e)
    out: List[Edge] = []
    for w, child in zip(sorted(by_weight), split_rng(rng, len(by_weight))):
        cls_edges = tuple(by_weight[w])
        support = WeightedMultigraph(g.n, cls_edges)
        dec_rng, sample_rng = split_rng(child, 2)
        dec = decompose(support, config, rng=dec_rng)
        emap = support.edge_map
        out.extend(emap[eid] for eid in dec.extras)
        for cyc in dec.cycles:
            arcs = [emap[eid] for eid in cyc]
            if directed:
                out.extend(sample_directed_cycle(arcs, sample_rng))
            else:
                out.extend(sample_even_cycle(arcs, sample_rng))
        logger.debug(
            f"Weight class {w}: {len(cls_edges)} edges, {len(dec.cycles)} cycles, "
            + f"{len(dec.extras)} extras"
        )
    return out


def sparsify_once(
    g: WeightedMultigraph,
    estimates: Estimates,
    config: Optional[CycleConfig] = None,
    rng: RngLike = None,
) -> WeightedMultigraph:
    """One round of degree preserving sparsification.

    Edges with ``w_e r_e >= 4n/m`` are kept. The rest is split by
    :func:`greedy_bipartition`; edges inside a side are kept, crossing edges are grouped
    by weight, cycle-decomposed, and every (even) cycle is replaced by one of its halves
    at double weight. Equal-weight parallel edges are merged at the end.

    Parameters
    ----------
    g : WeightedMultigraph
        Graph with power-of-two weights and distinct weights between every pair.
    estimates : ResistanceEstimates or array_like
        Resistance estimates in edge order.
    config : CycleConfig, optional
        Cycle decomposition settings.
    rng : int or numpy.random.Generator, optional
        Randomness for the decompositions and the halves.

    Returns
    -------
    WeightedMultigraph
        Graph with exactly the weighted degrees of ``g`` and fresh edge ids.
    """
    config = config or CycleConfig()
    rng = as_generator(rng)
    values = _aligned(g, estimates)
    _check_powers_of_two(g, "sparsify_once")
    if g.m == 0:
        return g
    heavy = _high_leverage(g, values)
    kept = [e for e, h in zip(g.edges, heavy) if h]
    rest = g.with_edges(e for e, h in zip(g.edges, heavy) if not h)
    a, _ = greedy_bipartition(rest)
    left = set(a)
    crossing = [e for e in rest.edges if (e.u in left) != (e.v in left)]
    kept.extend(e for e in rest.edges if (e.u in left) == (e.v in left))
    kept.extend(_sample_classes(g, crossing, config, rng, directed=False))
    out = combine_parallel_edges(g.with_edges(kept))
    logger.info(
        f"Sparsify round: {g.m} -> {out.m} edges ({int(heavy.sum())} high leverage, "
        + f"{len(crossing)} crossing)"
    )
    return out


def directed_sparsify_once(
    g: DirectedGraph,
    estimates: Estimates,
    config: Optional[CycleConfig] = None,
    rng: RngLike = None,
) -> DirectedGraph:
    """One round of Eulerian sparsification.

    Arcs with ``w_e r_e >= 4n/m`` are kept; the others are grouped by weight, their
    undirected support is cycle-decomposed (antiparallel arcs form 2-cycles), and every
    cycle keeps its clockwise or its counterclockwise arcs at double weight.

    Parameters
    ----------
    g : DirectedGraph
        Eulerian graph with power-of-two weights.
    estimates : ResistanceEstimates or array_like
        Resistance estimates of the undirected support in edge order.
    config : CycleConfig, optional
        Cycle decomposition settings.
    rng : int or numpy.random.Generator, optional
        Randomness.

    Returns
    -------
    DirectedGraph
        Eulerian graph; the ``out - in`` imbalance of every vertex is unchanged.
    """
    if not g.directed:
        raise PreconditionError("directed_sparsify_once", "expected a directed graph")
    unbalanced = g.unbalanced_vertices()
    if unbalanced:
        raise NotEulerianError(unbalanced)
    config = config or CycleConfig()
    rng = as_generator(rng)
    values = _aligned(g, estimates)
    _check_powers_of_two(g, "directed_sparsify_once")
    if g.m == 0:
        return g
    heavy = _high_leverage(g, values)
    kept = [e for e, h in zip(g.edges, heavy) if h]
    light = [e for e, h in zip(g.edges, heavy) if not h]
    kept.extend(_sample_classes(g, light, config, rng, directed=True))
    out = combine_parallel_edges(g.with_edges(kept))
    if not out.is_eulerian():
        raise InternalConsistencyError("directed sampling changed a degree imbalance")
    logger.info(f"Eulerian round: {g.m} -> {out.m} arcs ({int(heavy.sum())} high leverage)")
    return out


def _split_to_powers(g: _Graph) -> _Graph:
    classes = binary_split(g)
    return combine_parallel_edges(union_graphs(classes.values(), n=g.n))


def _stop_threshold(g: _Graph, config: SparsifyConfig, directed: bool) -> float:
    if config.max_edges is not None:
        return float(config.max_edges)
    n = max(len(g.non_isolated()), 2)
    length, mhat = naive_bounds(n)
    logn = math.log(n)
    if directed:
        return config.stop_constant * (8 * mhat * logn + n * length**3 * logn / config.eps**2)
    return config.stop_constant * (mhat * logn + n * length * logn / config.eps**2)


def _pair_estimates(g: _Graph, theta: float, rng) -> Dict[Tuple[int, int], float]:
    support = g.undirected_support() if g.directed else g
    est = approx_effective_resistances(support, theta, rng)
    out = {}
    for e, r in zip(g.edges, est.values):
        out[(min(e.u, e.v), max(e.u, e.v))] = r
    return out


def _certificate(a: _Graph, b: _Graph) -> Optional[SpectralCertificate]:
    try:
        return certify_spectral_approx(a, b)
    except ComponentMismatchError as ex:
        logger.warning(f"No certificate: {ex}")
        return None


def _conserved(g: _Graph) -> List[int]:
    """Weighted degrees, or ``out - in`` per vertex for directed graphs."""
    if g.directed:
        deg_in, deg_out = g.weighted_degrees()
        return [o - i for i, o in zip(deg_in, deg_out)]
    return g.weighted_degrees()


def _run(g: _Graph, config: SparsifyConfig, directed: bool) -> SparsifyResult:
    label = "eulerian" if directed else "sparsify"
    step = directed_sparsify_once if directed else sparsify_once
    threshold = _stop_threshold(g, config, directed)
    current = _split_to_powers(g)
    conserved = _conserved(g)
    certify = config.certify_rounds and g.n <= DENSE_LIMIT
    records: List[RoundRecord] = []
    pair_r: Dict[Tuple[int, int], float] = {}
    drift = math.inf
    index = 0
    while current.m >= threshold and index < config.max_rounds:
        refreshed = drift > config.refresh_drift
        if refreshed:
            est_rng = rng_stream(config.seed, label, "estimates", index)
            pair_r = _pair_estimates(current, config.theta, est_rng)
            drift = 0.0
        values = [pair_r[(min(e.u, e.v), max(e.u, e.v))] for e in current.edges]
        nxt = step(current, values, config.cycle, rng_stream(config.seed, label, "round", index))
        if _conserved(nxt) != conserved:
            raise InternalConsistencyError(f"a {label} round changed a conserved degree")
        error = None
        if certify:
            cert = _certificate(current, nxt)
            error = cert.error if cert else None
            drift = drift + error if cert else math.inf
        else:
            drift = math.inf
        records.append(RoundRecord(index, current.m, nxt.m, error, refreshed))
        index += 1
        if nxt.m >= current.m:
            logger.info(f"Round {index} removed no edges, stopping at {nxt.m} edges")
            current = nxt
            break
        current = nxt
    if current.m >= threshold:
        logger.info(f"Stopped after {index} rounds at {current.m} edges, threshold {threshold:.4g}")

    certificate, asym = None, None
    if g.n <= DENSE_LIMIT:
        certificate = _certificate(g, current)
        if directed:
            asym = asym_error_norm(g.symmetric_laplacian(), g, current).value
    logger.info(
        f"{label}: {g.m} -> {current.m} edges in {index} rounds"
        + (f", certificate {certificate.error:.4g}" if certificate else "")
    )
    return SparsifyResult(current, tuple(records), threshold, certificate, asym)


def degree_preserving_sparsify(
    g: WeightedMultigraph, config: Optional[SparsifyConfig] = None
) -> SparsifyResult:
    """Sparsify while keeping every weighted degree.

    Weights are split into powers of two, then :func:`sparsify_once` runs until the edge
    count falls below ``C_stop (m̂ log n + n L eps^-2 log n)`` or ``config.max_edges``.
    Resistance estimates are recomputed when the summed round certificates exceed
    ``config.refresh_drift``.

    Parameters
    ----------
    g : WeightedMultigraph
        Graph with positive integer weights.
    config : SparsifyConfig, optional
        Accuracy, stopping and randomness settings.

    Returns
    -------
    SparsifyResult
        Sparsifier, round records and the dense certificate for small graphs.
    """
    config = config or SparsifyConfig()
    if g.directed:
        raise PreconditionError("degree_preserving_sparsify", "expected an undirected graph")
    return _run(g, config, directed=False)


def eulerian_sparsify(g: DirectedGraph, config: Optional[SparsifyConfig] = None) -> SparsifyResult:
    """Sparsify an Eulerian graph; every round keeps it Eulerian.

    Runs :func:`directed_sparsify_once` until the arc count falls below
    ``C_stop (8 m̂ log n + n L^3 eps^-2 log n)`` or ``config.max_edges``.
    """
    config = config or SparsifyConfig()
    if not g.directed:
        raise PreconditionError("eulerian_sparsify", "expected a directed graph")
    unbalanced = g.unbalanced_vertices()
    if unbalanced:
        raise NotEulerianError(unbalanced)
    return _run(g, config, directed=True)
