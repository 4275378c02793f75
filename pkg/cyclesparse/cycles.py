"""Short cycle decompositions: the peel-and-search routine and the random walk recursion."""
import json
import logging
import math
import warnings
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from .core import CycleConfig, RngLike, as_generator, log2_ceil, split_rng
from .exceptions import InternalConsistencyError, PreconditionError, RetryBudgetExhausted
from .expander import RandomWalker, ns_style_decompose
from .graph import WeightedMultigraph, _Graph

logger = logging.getLogger(__name__)

_WALK_BATCH = 1 << 16

__all__ = [
    "CycleDecomposition",
    "PartialCycle",
    "PartialCycleDecomposition",
    "BoundedDegreeGraph",
    "naive_cycle_decomposition",
    "extract_bounded_degree",
    "move_edges_expander",
    "move_edges",
    "build_auxiliary",
    "extend_partial",
    "short_cycle_decomposition",
    "decompose",
    "split_circuit",
]


@dataclass(frozen=True)
class CycleDecomposition:
    """Edge-disjoint cycles (edge id sequences in traversal order) plus leftover edges.

    Parameters
    ----------
    cycles : tuple of tuples
        Every cycle is a closed walk with distinct edges.
    extras : tuple of int
        Edge ids outside all cycles.
    length_bound : int
        ``L``, no cycle is longer.
    extras_bound : int
        ``m̂``, there are at most this many extras.
    """

    cycles: Tuple[Tuple[int, ...], ...]
    extras: Tuple[int, ...]
    length_bound: int
    extras_bound: int

    @property
    def max_length(self) -> int:
        return max((len(c) for c in self.cycles), default=0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "cycles": [list(c) for c in self.cycles],
                "extras": list(self.extras),
                "L": self.length_bound,
                "mhat": self.extras_bound,
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> "CycleDecomposition":
        data = json.loads(doc)
        return cls(
            cycles=tuple(tuple(c) for c in data["cycles"]),
            extras=tuple(data["extras"]),
            length_bound=int(data["L"]),
            extras_bound=int(data["mhat"]),
        )


class PartialCycle(NamedTuple):
    """A cycle of ``G/S`` with its walk in ``G``.

    ``vertices`` has one more entry than ``edges``. When ``anchors`` is None the walk is
    closed in ``G``; otherwise it runs from ``anchors[0]`` to ``anchors[1]``, both in ``S``,
    and closes through the contracted vertex.
    """

    edges: Tuple[int, ...]
    vertices: Tuple[int, ...]
    anchors: Optional[Tuple[int, int]]


@dataclass(frozen=True)
class PartialCycleDecomposition:
    """Edge-disjoint cycles of ``G/S``.

    Parameters
    ----------
    target : tuple of int
        The contracted vertex set ``S``.
    cycles : tuple of PartialCycle
        The cycles.
    length_bound : int
        ``l̂``, the largest contracted cycle length.
    walk_length : int
        Random walk length used, 0 if no walks were needed.
    congestion : int
        Largest number of walk traversals of a single edge.
    rounds : int
        Walk rounds performed.
    """

    target: Tuple[int, ...]
    cycles: Tuple[PartialCycle, ...]
    length_bound: int
    walk_length: int = 0
    congestion: int = 0
    rounds: int = 0

    @property
    def count(self) -> int:
        """``k̂``, the number of cycles."""
        return len(self.cycles)


@dataclass(frozen=True)
class BoundedDegreeGraph:
    """A bounded degree multigraph ``H`` whose edge ids are those of the source graph.

    ``vertex_map[x]`` is the source vertex of ``H`` vertex ``x``.
    """

    h: WeightedMultigraph
    vertex_map: Tuple[int, ...]
    delta: int


class _Adjacency:
    """Mutable incidence lists of a multigraph, ordered by edge position."""

    def __init__(self, g: _Graph) -> None:
        self.adj: Dict[int, Dict[int, int]] = {v: {} for v in range(g.n)}
        for e in g.edges:
            self.adj[e.u][e.eid] = e.v
            self.adj[e.v][e.eid] = e.u
        self.ends = {e.eid: (e.u, e.v) for e in g.edges}

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def remove(self, eid: int) -> Tuple[int, int]:
        u, v = self.ends[eid]
        del self.adj[u][eid]
        del self.adj[v][eid]
        return u, v

    def peel(self, below: int, queue: Iterable[int]) -> List[int]:
        """Remove every edge at vertices with ``0 < degree < below``, repeatedly."""
        removed = []
        todo = deque(queue)
        while todo:
            v = todo.popleft()
            if not 0 < self.degree(v) < below:
                continue
            for eid, other in list(self.adj[v].items()):
                self.remove(eid)
                removed.append(eid)
                if 0 < self.degree(other) < below:
                    todo.append(other)
        return removed


def _check_unit(g: _Graph, op: str) -> None:
    if g.m and g.uniform_weight is None:
        raise PreconditionError(op, "edges must share a single weight")


def naive_bounds(n_active: int) -> Tuple[int, int]:
    """``(L, m̂) = (2 ceil(log2 n), 2n)`` of the peel-and-search routine."""
    return max(2, 2 * log2_ceil(n_active)), 2 * n_active


def _bfs_cycle(adj: _Adjacency, root: int) -> Tuple[List[int], List[int]]:
    parent: Dict[int, Tuple[int, int]] = {root: (-1, -1)}
    depth = {root: 0}
    todo = deque([root])
    while todo:
        x = todo.popleft()
        for eid, y in adj.adj[x].items():
            if eid == parent[x][1]:
                continue
            if y not in parent:
                parent[y] = (x, eid)
                depth[y] = depth[x] + 1
                todo.append(y)
                continue
            # first non-tree edge closes the cycle x -> y -> lca -> x
            up_x, up_y = [], []
            a, b = x, y
            while depth[a] > depth[b]:
                up_x.append((a, parent[a][1]))
                a = parent[a][0]
            while depth[b] > depth[a]:
                up_y.append((b, parent[b][1]))
                b = parent[b][0]
            while a != b:
                up_x.append((a, parent[a][1]))
                up_y.append((b, parent[b][1]))
                a, b = parent[a][0], parent[b][0]
            edges = [eid] + [e for _, e in up_y] + [e for _, e in reversed(up_x)]
            verts = [x] + [v for v, _ in up_y] + [a] + [v for v, _ in reversed(up_x)]
            return edges, verts
    raise InternalConsistencyError("a graph with minimum degree 3 has no cycle")


def _naive(g: _Graph) -> Tuple[List[Tuple[List[int], List[int]]], List[int]]:
    adj = _Adjacency(g)
    cycles, extras = [], []
    extras.extend(adj.peel(3, range(g.n)))
    root = 0
    while True:
        while root < g.n and adj.degree(root) == 0:
            root += 1
        if root == g.n:
            break
        edges, verts = _bfs_cycle(adj, root)
        for eid in edges:
            adj.remove(eid)
        cycles.append((edges, verts))
        extras.extend(adj.peel(3, set(verts)))
    return cycles, extras


def naive_cycle_decomposition(g: _Graph) -> CycleDecomposition:
    """Cycle decomposition by peeling low degree vertices and breadth-first search.

    Vertices of degree at most two are peeled and their edges become extras; then a
    breadth-first search from the smallest remaining vertex stops at its first non-tree
    edge, whose cycle through the search tree is removed. The two steps alternate until
    no edges remain.

    Parameters
    ----------
    g : WeightedMultigraph
        Multigraph whose edges share one weight.

    Returns
    -------
    CycleDecomposition
        Cycles of length at most ``2 ceil(log2 n)`` and at most ``2n`` extras.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> tri = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])
    >>> dec = naive_cycle_decomposition(tri)
    >>> dec.cycles, sorted(dec.extras)
    ((), [0, 1, 2])
    """
    _check_unit(g, "naive_cycle_decomposition")
    cycles, extras = _naive(g)
    length, mhat = naive_bounds(len(g.non_isolated()))
    return CycleDecomposition(
        cycles=tuple(tuple(c) for c, _ in cycles),
        extras=tuple(extras),
        length_bound=length,
        extras_bound=mhat,
    )


def extract_bounded_degree(g: _Graph, delta: int) -> BoundedDegreeGraph:
    """Keep ``delta`` edges per vertex and split vertices of degree above ``2 delta``.

    Every vertex contributes its first ``delta`` incident edges (in edge order); a vertex
    whose degree in the kept graph exceeds ``2 delta`` is split into
    ``degree // delta`` copies of near equal degree. Unsplit vertices and the first copy
    of a split vertex keep their ids, further copies are numbered from ``g.n`` on.

    Parameters
    ----------
    g : WeightedMultigraph
        Multigraph whose non-isolated vertices all have degree at least ``delta``.
    delta : int
        Degree target.

    Returns
    -------
    BoundedDegreeGraph
        ``H`` with degrees in ``[delta, 2 delta]`` and its vertex map to ``g``.
    """
    if delta < 1:
        raise PreconditionError("extract_bounded_degree", "delta must be positive")
    adj = _Adjacency(g)
    low = [v for v in range(g.n) if 0 < adj.degree(v) < delta]
    if low:
        raise PreconditionError(
            "extract_bounded_degree", f"{len(low)} vertices have degree below {delta}"
        )
    keep: Set[int] = set()
    for v in range(g.n):
        keep.update(list(adj.adj[v])[:delta])
    kept = [e for e in g.edges if e.eid in keep]

    incident: Dict[int, List[int]] = defaultdict(list)
    for e in kept:
        incident[e.u].append(e.eid)
        incident[e.v].append(e.eid)
    vertex_map = list(range(g.n))
    slot: Dict[Tuple[int, int], int] = {}
    for v in range(g.n):
        eids = incident.get(v, [])
        parts = len(eids) // delta if len(eids) > 2 * delta else 1
        for i, chunk in enumerate(np.array_split(np.array(eids, dtype=np.int64), parts)):
            copy = v if i == 0 else len(vertex_map)
            if i:
                vertex_map.append(v)
            for eid in chunk.tolist():
                slot[(eid, v)] = copy
    h_edges = [(e.eid, slot[(e.eid, e.u)], slot[(e.eid, e.v)], e.w) for e in kept]
    h = WeightedMultigraph(len(vertex_map), tuple(h_edges))
    logger.debug(
        f"Bounded degree graph: {h.n} vertices ({h.n - g.n} split copies), {h.m} of {g.m} edges"
    )
    return BoundedDegreeGraph(h=h, vertex_map=tuple(vertex_map), delta=delta)


def _compress_walk(verts: np.ndarray, edges: np.ndarray, in_s: np.ndarray):
    """Drop lazy steps, cut at the first vertex of ``S`` and erase loops."""
    moved = edges >= 0
    vs = [int(verts[0])] + verts[1:][moved].tolist()
    es = edges[moved].tolist()
    hit = next((i for i, v in enumerate(vs) if in_s[v]), None)
    if hit is None:
        return None
    vs, es = vs[: hit + 1], es[:hit]
    path_v, path_e, pos = [vs[0]], [], {vs[0]: 0}
    for v, e in zip(vs[1:], es):
        if v in pos:
            cut = pos[v]
            for x in path_v[cut + 1 :]:
                del pos[x]
            del path_v[cut + 1 :]
            del path_e[cut:]
        else:
            pos[v] = len(path_v)
            path_v.append(v)
            path_e.append(e)
    return path_v, path_e


def _join_paths(eid: int, u: int, v: int, pu, pv, in_s: np.ndarray) -> PartialCycle:
    au, eu = pu
    bv, ev = pv
    on_u = {x: i for i, x in enumerate(au)}
    for j, b in enumerate(bv):
        if in_s[b]:
            break
        if b in on_u:
            i = on_u[b]
            # closed in G: u .. a_i = b_j .. v, back to u along eid
            verts = au[: i + 1] + bv[:j][::-1] + [u]
            edges = eu[:i] + ev[:j][::-1] + [eid]
            return PartialCycle(tuple(edges), tuple(verts), None)
    s1, s2 = au[-1], bv[j]
    verts = au[::-1] + bv[: j + 1]
    edges = eu[::-1] + [eid] + ev[:j]
    if s1 == s2:
        return PartialCycle(tuple(edges), tuple(verts), None)
    return PartialCycle(tuple(edges), tuple(verts), (s1, s2))


def _pair_parallel(g: _Graph) -> Tuple[List[PartialCycle], Set[int]]:
    groups: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for e in g.edges:
        groups[g.pair(e)].append(e.eid)
    cycles, used = [], set()
    for (a, b), eids in groups.items():
        for i in range(0, len(eids) - 1, 2):
            cycles.append(PartialCycle((eids[i], eids[i + 1]), (a, b, a), None))
            used.update(eids[i : i + 2])
    return cycles, used


def _top_degree(g: _Graph, k: int) -> Tuple[int, ...]:
    deg = g.edge_counts()
    active = [v for v in range(g.n) if deg[v] > 0]
    size = math.ceil(len(active) / k)
    ranked = sorted(active, key=lambda v: (-deg[v], v))
    return tuple(sorted(ranked[:size]))


def _walk_length(config: CycleConfig, phi: float, n: int) -> int:
    if config.walk_length is not None:
        return config.walk_length
    derived = math.ceil(10 * math.log(max(n, 2)) / phi**2)
    if derived > config.max_walk_length:
        logger.info(f"Walk length {derived} capped at {config.max_walk_length}")
    return min(derived, config.max_walk_length)


def _check_size(config: CycleConfig, op: str, ok: bool, reason: str) -> None:
    if ok:
        return
    if config.strict:
        raise PreconditionError(op, reason)
    logger.warning(f"{op}: {reason}")


def move_edges_expander(
    g: _Graph,
    phi: float,
    k: int,
    rng: RngLike = None,
    config: Optional[CycleConfig] = None,
) -> Tuple[Tuple[int, ...], PartialCycleDecomposition]:
    """Route edges onto the ``ceil(n/k)`` highest degree vertices with paired random walks.

    Parallel edges are paired into 2-cycles first. For every other edge ``uv``,
    ``4k`` lazy walks start at each endpoint; the first walk from each side that reaches
    ``S`` without using ``uv`` is cut at ``S`` and loop-erased, and the two paths with
    ``uv`` form a cycle of ``G/S``. Cycles are then chosen greedily by length (ties by
    first edge id) so that they are edge-disjoint. A round is repeated until the cycle
    count reaches ``phi^4 m / (2000 k log^2 n)``; the requirement is halved after
    ``halve_after`` failed rounds.

    Parameters
    ----------
    g : WeightedMultigraph
        Connected multigraph with one edge weight and conductance at least ``phi``.
    phi : float
        Certified conductance.
    k : int
        Size parameter.
    rng : int or numpy.random.Generator, optional
        Walk randomness.
    config : CycleConfig, optional
        Walk length, retry budget and strictness.

    Returns
    -------
    tuple
        The target set ``S`` and the partial cycle decomposition.
    """
    config = config or CycleConfig()
    rng = as_generator(rng)
    _check_unit(g, "move_edges_expander")
    n = max(len(g.non_isolated()), 2)
    logn = math.log(n)
    deg = g.edge_counts()
    d_min = int(deg[deg > 0].min()) if g.m else 0
    _check_size(
        config,
        "move_edges_expander",
        10 * logn <= k <= phi**2 * d_min / (100 * logn),
        f"k={k} is outside [10 log n, phi^2 d_min / (100 log n)] "
        + f"(n={n}, phi={phi:.3g}, d_min={d_min})",
    )
    paired, used = _pair_parallel(g)
    target = _top_degree(g, k)
    rest = g.remove_edges(used)
    if not rest.m:
        bound = max((len(c.edges) for c in paired), default=0)
        return target, PartialCycleDecomposition(target, tuple(paired), bound)

    in_s = np.zeros(g.n, dtype=bool)
    in_s[list(target)] = True
    walker = RandomWalker(rest)
    length = _walk_length(config, phi, n)
    # compared rounded down
    required = phi**4 * g.m / (2e3 * k * logn**2)
    candidates = [e for e in rest.edges if not (in_s[e.u] and in_s[e.v])]
    per_batch = max(1, _WALK_BATCH // (8 * k))
    congestion = np.zeros(max(rest.next_edge_id(), 1), dtype=np.int64)
    best: List[PartialCycle] = []
    failures = 0
    for round_no in range(1, config.retry_budget + 1):
        found = []
        for start in range(0, len(candidates), per_batch):
            batch = candidates[start : start + per_batch]
            starts = np.concatenate(
                [np.repeat([e.u for e in batch], 4 * k), np.repeat([e.v for e in batch], 4 * k)]
            )
            _, verts, edges = walker.walk(starts, length, rng, record=True)
            moved = edges[edges >= 0]
            congestion += np.bincount(moved, minlength=len(congestion))[: len(congestion)]
            half = len(batch) * 4 * k
            for i, e in enumerate(batch):
                paths = []
                for side, x in ((0, e.u), (1, e.v)):
                    if in_s[x]:
                        paths.append(([x], []))
                        continue
                    rows = range(side * half + i * 4 * k, side * half + (i + 1) * 4 * k)
                    path = None
                    for r in rows:
                        if e.eid in edges[r]:
                            continue
                        path = _compress_walk(verts[r], edges[r], in_s)
                        if path is not None and e.eid not in path[1]:
                            break
                        path = None
                    if path is None:
                        break
                    paths.append(path)
                if len(paths) == 2:
                    found.append(_join_paths(e.eid, e.u, e.v, paths[0], paths[1], in_s))
        chosen, taken = [], set()
        for cyc in sorted(found, key=lambda c: (len(c.edges), c.edges[0])):
            if taken.isdisjoint(cyc.edges):
                chosen.append(cyc)
                taken.update(cyc.edges)
        if len(chosen) > len(best):
            best = chosen
        if len(chosen) >= math.floor(required):
            break
        failures += 1
        if failures == config.halve_after:
            required /= 2
            warnings.warn(
                f"Only {len(chosen)} cycles after {failures} rounds, "
                + f"halving the required count to {required:.3g}.",
                UserWarning,
            )
    else:
        raise RetryBudgetExhausted(len(best), math.ceil(required), config.retry_budget)

    cycles = tuple(paired) + tuple(best)
    partial = PartialCycleDecomposition(
        target=target,
        cycles=cycles,
        length_bound=max((len(c.edges) for c in cycles), default=0),
        walk_length=length,
        congestion=int(congestion.max()),
        rounds=round_no,
    )
    logger.info(
        f"Moved {len(best)} edges onto {len(target)} vertices with {len(paired)} parallel "
        + f"pairs, walk length {length}, congestion {partial.congestion}, rounds {round_no}"
    )
    return target, partial


def move_edges(
    g: _Graph, k: int, rng: RngLike = None, config: Optional[CycleConfig] = None
) -> Tuple[Tuple[int, ...], PartialCycleDecomposition]:
    """Partial cycle decomposition of a bounded degree graph.

    The graph is split with :func:`ns_style_decompose` at ``alpha = d_min / (4 gamma)``;
    dense components with at most ``k`` vertices are decomposed by the naive routine and
    larger ones by :func:`move_edges_expander` at ``phi = alpha / d_max``. Edges of the
    sparse part and naive extras stay outside all cycles.
    """
    config = config or CycleConfig()
    rng = as_generator(rng)
    _check_unit(g, "move_edges")
    deg = g.edge_counts()
    if not g.m:
        return (), PartialCycleDecomposition((), (), 0)
    d_min, d_max = int(deg[deg > 0].min()), int(deg.max())
    alpha = d_min / (4 * config.gamma)
    split = ns_style_decompose(g, alpha, rng=rng)
    n_active = max(len(g.non_isolated()), 2)
    logn = math.log(n_active)
    measured = max(1.0, len(split.sparse_part) / (alpha * n_active))
    _check_size(
        config,
        "move_edges",
        d_min >= 8000 * (d_max / d_min) ** 2 * measured**3 * k * logn,
        f"d_min={d_min} is below the degree threshold (measured gamma {measured:.3g})",
    )
    logger.info(f"move_edges: alpha {alpha:.4g}, sparse ratio {split.sparse_ratio:.4g}")

    sparse = set(split.sparse_part)
    dense_edges = g.remove_edges(sparse)
    target: Set[int] = set()
    cycles: List[PartialCycle] = []
    rounds, congestion, walk_length = 0, 0, 0
    for comp, child in zip(split.dense_components, split_rng(rng, len(split.dense_components))):
        sub = dense_edges.induced_subgraph(comp)
        if len(comp) <= k:
            found, _ = _naive(sub)
            cycles.extend(PartialCycle(tuple(e), tuple(v), None) for e, v in found)
            continue
        s_i, part = move_edges_expander(sub, alpha / d_max, k, rng=child, config=config)
        target.update(s_i)
        cycles.extend(part.cycles)
        rounds += part.rounds
        congestion = max(congestion, part.congestion)
        walk_length = max(walk_length, part.walk_length)
    return tuple(sorted(target)), PartialCycleDecomposition(
        target=tuple(sorted(target)),
        cycles=tuple(cycles),
        length_bound=max((len(c.edges) for c in cycles), default=0),
        walk_length=walk_length,
        congestion=congestion,
        rounds=rounds,
    )


def build_auxiliary(partial: PartialCycleDecomposition, n: int) -> WeightedMultigraph:
    """Graph ``G_S`` with an edge ``s1 s2`` for every cycle through the contracted vertex.

    The auxiliary edge id is the index of the partial cycle it stands for.
    """
    edges = [
        (i, c.anchors[0], c.anchors[1], 1)
        for i, c in enumerate(partial.cycles)
        if c.anchors is not None
    ]
    return WeightedMultigraph(n, tuple(edges))


def split_circuit(
    vertices: Sequence[int], edges: Sequence[int]
) -> List[Tuple[List[int], List[int]]]:
    """Split a closed walk with distinct edges into cycles.

    Parameters
    ----------
    vertices : sequence of int
        Visited vertices, one more than ``edges``, first equal to last.
    edges : sequence of int
        Edge ids in traversal order.

    Returns
    -------
    list of tuple
        ``(edges, vertices)`` per cycle; cycle vertices are not repeated at the end.
    """
    if len(vertices) != len(edges) + 1 or vertices[0] != vertices[-1]:
        raise InternalConsistencyError("a circuit must be a closed walk")
    stack_v, stack_e = [vertices[0]], []
    pos = {vertices[0]: 0}
    out = []
    for eid, nxt in zip(edges, vertices[1:]):
        stack_e.append(eid)
        if nxt in pos:
            i = pos[nxt]
            out.append((stack_e[i:], stack_v[i:]))
            for x in stack_v[i + 1 :]:
                del pos[x]
            del stack_v[i + 1 :]
            del stack_e[i:]
        else:
            pos[nxt] = len(stack_v)
            stack_v.append(nxt)
    return out


def _orient(ends: Sequence[Tuple[int, int]]) -> List[int]:
    for start in (ends[0][0], ends[0][1]):
        walk, cur, ok = [start], start, True
        for a, b in ends:
            if cur == a:
                cur = b
            elif cur == b:
                cur = a
            else:
                ok = False
                break
            walk.append(cur)
        if ok and cur == start:
            return walk
    raise InternalConsistencyError("auxiliary cycle is not a closed walk")


def _extend(
    partial: PartialCycleDecomposition, cycles_on_gs: Iterable[Sequence[int]]
) -> List[Tuple[List[int], List[int]]]:
    out = []
    for c in partial.cycles:
        if c.anchors is None:
            out.append((list(c.edges), list(c.vertices[:-1])))
    for aux in cycles_on_gs:
        paths = []
        for aid in aux:
            if not 0 <= aid < len(partial.cycles) or partial.cycles[aid].anchors is None:
                raise InternalConsistencyError(f"auxiliary edge {aid} has no recorded path")
            paths.append(partial.cycles[aid])
        walk = _orient([p.anchors for p in paths])
        verts, edges = [walk[0]], []
        for p, here in zip(paths, walk[:-1]):
            forward = p.vertices[0] == here
            pv = p.vertices if forward else p.vertices[::-1]
            pe = p.edges if forward else p.edges[::-1]
            verts.extend(pv[1:])
            edges.extend(pe)
        out.extend(split_circuit(verts, edges))
    return out


def extend_partial(
    g: _Graph,
    target: Sequence[int],
    partial: PartialCycleDecomposition,
    cycles_on_gs: Iterable[Sequence[int]],
) -> Tuple[Tuple[int, ...], ...]:
    """Expand cycles of the auxiliary graph into cycles of ``g``.

    Every auxiliary edge is replaced by its recorded path, which closes each auxiliary
    cycle into a circuit of ``g``; circuits are split into edge-disjoint cycles. Partial
    cycles that avoid the contracted vertex are returned unchanged.

    Parameters
    ----------
    g : WeightedMultigraph
        The graph the partial decomposition was built on.
    target : sequence of int
        The contracted set ``S``.
    partial : PartialCycleDecomposition
        Partial decomposition of ``g/S``.
    cycles_on_gs : iterable of sequences
        Edge-disjoint cycles of :func:`build_auxiliary` output, as auxiliary edge ids.

    Returns
    -------
    tuple of tuples
        Cycles of ``g`` as edge id sequences.
    """
    if not set(target) >= {a for c in partial.cycles if c.anchors for a in c.anchors}:
        raise InternalConsistencyError("anchors outside the target set")
    known = g.edge_map
    cycles = _extend(partial, cycles_on_gs)
    for edges, _ in cycles:
        if any(e not in known for e in edges):
            raise InternalConsistencyError("extended cycle uses an unknown edge")
    return tuple(tuple(e) for e, _ in cycles)


def short_cycle_decomposition(
    g: _Graph,
    levels: int,
    k: int,
    rng: RngLike = None,
    config: Optional[CycleConfig] = None,
) -> CycleDecomposition:
    """Recursive short cycle decomposition.

    With ``levels == 0`` or fewer than ``k`` non-isolated vertices the naive routine is
    used. Otherwise, repeatedly: vertices of degree below ``delta = delta_base**levels * k``
    are peeled into the extras, a bounded degree graph is extracted, its edges are moved
    onto a small vertex set with :func:`move_edges`, the auxiliary graph is decomposed
    one level down, and the resulting cycles are extended back and removed.

    Parameters
    ----------
    g : WeightedMultigraph
        Multigraph whose edges share one weight.
    levels : int
        Recursion depth ``l``.
    k : int
        Size parameter.
    rng : int or numpy.random.Generator, optional
        Randomness, split per level and iteration.
    config : CycleConfig, optional
        Degree threshold base, walk and retry settings.

    Returns
    -------
    CycleDecomposition
        Cycles and extras with measured length and extras counts as bounds.
    """
    config = config or CycleConfig()
    _check_unit(g, "short_cycle_decomposition")
    if levels < 0:
        raise PreconditionError("short_cycle_decomposition", "levels must be non-negative")
    rng = as_generator(rng)
    if levels == 0 or len(g.non_isolated()) < k:
        return naive_cycle_decomposition(g)

    delta = max(1, math.ceil(config.delta_base**levels * k))
    adj = _Adjacency(g)
    extras: List[int] = []
    cycles: List[Tuple[int, ...]] = []
    iteration = 0
    while True:
        extras.extend(adj.peel(delta, range(g.n)))
        alive = [eid for eid, (u, v) in adj.ends.items() if eid in adj.adj[u]]
        if not alive:
            break
        iteration += 1
        current = g.edge_subgraph(alive)
        bounded = extract_bounded_degree(current, delta)
        move_rng, inner_rng = split_rng(rng, 2)
        target, partial = move_edges(bounded.h, k, rng=move_rng, config=config)
        aux = build_auxiliary(partial, bounded.h.n)
        inner = short_cycle_decomposition(aux, levels - 1, k, rng=inner_rng, config=config)
        found = []
        for edges, verts in _extend(partial, inner.cycles):
            mapped = [bounded.vertex_map[v] for v in verts] + [bounded.vertex_map[verts[0]]]
            found.extend(tuple(c) for c, _ in split_circuit(mapped, edges))
        if not found:
            logger.info(f"No cycles moved at iteration {iteration}, finishing naively")
            rest = naive_cycle_decomposition(current)
            cycles.extend(rest.cycles)
            extras.extend(rest.extras)
            break
        for cyc in found:
            for eid in cyc:
                adj.remove(eid)
        cycles.extend(found)

    lengths = [len(c) for c in cycles]
    logger.info(
        f"Short cycle decomposition (l={levels}, k={k}, delta={delta}): {len(cycles)} cycles, "
        + f"max length {max(lengths, default=0)}, {len(extras)} extras, {iteration} iterations"
    )
    return CycleDecomposition(
        cycles=tuple(cycles),
        extras=tuple(extras),
        length_bound=max(2, max(lengths, default=0)),
        extras_bound=len(extras),
    )


def decompose(
    g: _Graph, config: Optional[CycleConfig] = None, rng: RngLike = None
) -> CycleDecomposition:
    """Run the cycle decomposition selected by ``config.algo``."""
    config = config or CycleConfig()
    if config.algo == "naive":
        return naive_cycle_decomposition(g)
    k = config.resolve_k(max(len(g.non_isolated()), 2))
    return short_cycle_decomposition(g, config.levels, k, rng=rng, config=config)
