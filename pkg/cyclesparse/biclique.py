"""Sums of bicliques: balancing, matching samplers, implicit sketches and the squared Schur step."""
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import cytoolz as tlz
import numpy as np
import scipy.sparse as sp

from .core import BicliqueConfig, RngLike, as_generator, split_rng
from .exceptions import InvalidInputType, PreconditionError
from .expander import ExpanderPartition, expander_decompose
from .graph import WeightedMultigraph, _Graph
from .linalg import schur_complement

logger = logging.getLogger(__name__)

Weight = Union[int, Fraction]

__all__ = [
    "Biclique",
    "WeightedBiclique",
    "WeightedClique",
    "BicliqueCollection",
    "FractionalGraph",
    "SchurBlocks",
    "SchurStep",
    "BicliquePlan",
    "PartitionSample",
    "make_balanced",
    "sample_matchings",
    "plan_bicliques",
    "sample_bicliques",
    "biclique_split_by_partition",
    "implicit_partition_and_sample",
    "implicit_sketch_bicliques",
    "schur_step_cliques",
    "schur_squared_matrix",
    "dd_subset",
    "clique_to_bicliques",
    "biclique_to_unit",
    "sketch_schur_step",
    "schur_identity_error",
]


def _power_of_two_exponent(w: Fraction) -> Optional[int]:
    num, den = w.numerator, w.denominator
    if num & (num - 1) == 0 and den == 1:
        return num.bit_length() - 1
    if num == 1 and den & (den - 1) == 0:
        return -(den.bit_length() - 1)
    return None


@dataclass(frozen=True)
class Biclique:
    """All edges between two disjoint vertex sets, each of weight ``w``."""

    left: Tuple[int, ...]
    right: Tuple[int, ...]
    w: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", tuple(int(v) for v in self.left))
        object.__setattr__(self, "right", tuple(int(v) for v in self.right))
        object.__setattr__(self, "w", Fraction(self.w))
        if not self.left or not self.right:
            raise PreconditionError("Biclique", "both sides must be non-empty")
        if set(self.left) & set(self.right):
            raise PreconditionError("Biclique", "sides must be disjoint")
        if self.w <= 0:
            raise PreconditionError("Biclique", "weight must be positive")

    @property
    def balanced(self) -> bool:
        return len(self.left) == len(self.right)

    @property
    def r(self) -> int:
        """Vertices per side of a balanced biclique."""
        if not self.balanced:
            raise PreconditionError("Biclique", "r is only defined for balanced bicliques")
        return len(self.left)

    @property
    def vertex_count(self) -> int:
        return len(self.left) + len(self.right)

    @property
    def edge_count(self) -> int:
        return len(self.left) * len(self.right)

    def edges(self) -> List[Tuple[int, int, Fraction]]:
        return [(a, b, self.w) for a in self.left for b in self.right]


@dataclass(frozen=True)
class WeightedBiclique:
    """Biclique whose edge ``ab`` has weight ``left_weights[a] * right_weights[b]``."""

    left: Tuple[int, ...]
    right: Tuple[int, ...]
    left_weights: Tuple[float, ...]
    right_weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.left) != len(self.left_weights) or len(self.right) != len(self.right_weights):
            raise PreconditionError("WeightedBiclique", "one weight per vertex is required")
        if set(self.left) & set(self.right):
            raise PreconditionError("WeightedBiclique", "sides must be disjoint")

    @property
    def vertex_count(self) -> int:
        return len(self.left) + len(self.right)

    @property
    def edge_count(self) -> int:
        return len(self.left) * len(self.right)

    def edges(self) -> List[Tuple[int, int, Fraction]]:
        return [
            (a, b, Fraction(wa) * Fraction(wb))
            for a, wa in zip(self.left, self.left_weights)
            for b, wb in zip(self.right, self.right_weights)
        ]


@dataclass(frozen=True)
class WeightedClique:
    """Clique whose edge ``uv`` has weight ``weights[u] * weights[v]``."""

    vertices: Tuple[int, ...]
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.weights):
            raise PreconditionError("WeightedClique", "one weight per vertex is required")
        if len(set(self.vertices)) != len(self.vertices):
            raise PreconditionError("WeightedClique", "vertices must be distinct")

    def edges(self) -> List[Tuple[int, int, Fraction]]:
        pairs = list(zip(self.vertices, self.weights))
        return [
            (a, b, Fraction(wa) * Fraction(wb))
            for i, (a, wa) in enumerate(pairs)
            for b, wb in pairs[i + 1 :]
        ]


@dataclass(frozen=True)
class FractionalGraph:
    """Undirected multigraph with exact rational edge weights."""

    n: int
    edges: Tuple[Tuple[int, int, Fraction], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int, Weight]]) -> "FractionalGraph":
        return cls(n, tuple((int(u), int(v), Fraction(w)) for u, v, w in edges))

    @classmethod
    def from_graph(cls, g: _Graph) -> "FractionalGraph":
        return cls.from_edges(g.n, ((e.u, e.v, e.w) for e in g.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    def weighted_degrees(self) -> List[Fraction]:
        deg = [Fraction(0)] * self.n
        for u, v, w in self.edges:
            deg[u] += w
            deg[v] += w
        return deg

    def union(self, *others: "FractionalGraph") -> "FractionalGraph":
        n = max([self.n] + [o.n for o in others])
        return FractionalGraph(n, self.edges + tuple(tlz.concat(o.edges for o in others)))

    def combined(self) -> "FractionalGraph":
        """Parallel edges summed into one edge per vertex pair, pairs sorted."""
        total: Dict[Tuple[int, int], Fraction] = defaultdict(Fraction)
        for u, v, w in self.edges:
            total[(min(u, v), max(u, v))] += w
        return FractionalGraph(self.n, tuple((u, v, w) for (u, v), w in sorted(total.items())))

    def laplacian(self) -> sp.csr_matrix:
        if not self.edges:
            return sp.csr_matrix((self.n, self.n))
        u = np.array([e[0] for e in self.edges])
        v = np.array([e[1] for e in self.edges])
        w = np.array([float(e[2]) for e in self.edges])
        a = sp.coo_matrix((w, (u, v)), shape=(self.n, self.n))
        a = (a + a.T).tocsr()
        return (sp.diags(np.asarray(a.sum(axis=1)).ravel()) - a).tocsr()


AnyBiclique = Union[Biclique, WeightedBiclique]


@dataclass(frozen=True)
class BicliqueCollection:
    """A sum of bicliques on ``n`` vertices.

    ``vertex_total`` is ``n(K)``, the summed side sizes, and ``edge_total`` is ``m(K)``.
    """

    n: int
    bicliques: Tuple[AnyBiclique, ...]

    def __len__(self) -> int:
        return len(self.bicliques)

    @property
    def vertex_total(self) -> int:
        return sum(k.vertex_count for k in self.bicliques)

    @property
    def edge_total(self) -> int:
        return sum(k.edge_count for k in self.bicliques)

    def edge_degrees(self) -> np.ndarray:
        """Edge counts per vertex in the materialized graph."""
        deg = np.zeros(self.n, dtype=np.int64)
        for k in self.bicliques:
            deg[list(k.left)] += len(k.right)
            deg[list(k.right)] += len(k.left)
        return deg

    def uniform_weight(self) -> Fraction:
        ws = {k.w for k in self.bicliques if isinstance(k, Biclique)}
        if len(ws) != 1 or any(isinstance(k, WeightedBiclique) for k in self.bicliques):
            raise PreconditionError("BicliqueCollection", "bicliques must share one weight")
        return ws.pop()

    def materialize(self) -> FractionalGraph:
        return FractionalGraph(self.n, tuple(tlz.concat(k.edges() for k in self.bicliques)))

    def to_json(self) -> str:
        items = []
        for k in self.bicliques:
            if isinstance(k, Biclique):
                exp = _power_of_two_exponent(k.w)
                w = f"2^{exp}" if exp is not None else str(k.w)
                items.append({"A": list(k.left), "B": list(k.right), "w": w})
            else:
                weights = dict(zip(k.left, k.left_weights))
                weights.update(zip(k.right, k.right_weights))
                items.append(
                    {
                        "A": list(k.left),
                        "B": list(k.right),
                        "w": {"vertex_weights": {str(v): w for v, w in weights.items()}},
                    }
                )
        return json.dumps(items, sort_keys=True)

    @classmethod
    def from_json(cls, doc: str, n: Optional[int] = None) -> "BicliqueCollection":
        items = json.loads(doc)
        if not isinstance(items, list):
            raise InvalidInputType("doc", "JSON list of bicliques")
        out: List[AnyBiclique] = []
        for item in items:
            w = item["w"]
            if isinstance(w, dict):
                vw = {int(v): float(x) for v, x in w["vertex_weights"].items()}
                out.append(
                    WeightedBiclique(
                        tuple(item["A"]),
                        tuple(item["B"]),
                        tuple(vw[v] for v in item["A"]),
                        tuple(vw[v] for v in item["B"]),
                    )
                )
            else:
                weight = Fraction(2) ** int(w[2:]) if w.startswith("2^") else Fraction(w)
                out.append(Biclique(tuple(item["A"]), tuple(item["B"]), weight))
        size = n if n is not None else 1 + max(
            (max(k.left + k.right) for k in out), default=-1
        )
        return cls(size, tuple(out))


def _binary_groups(side: Sequence[int]) -> List[Tuple[int, ...]]:
    groups, start = [], 0
    for bit in reversed(range(len(side).bit_length())):
        size = 1 << bit
        if len(side) & size:
            groups.append(tuple(side[start : start + size]))
            start += size
    return groups


def make_balanced(k: Biclique) -> List[Biclique]:
    """Split a biclique into balanced bicliques with power-of-two sides.

    Both sides are cut into groups following the binary representation of their sizes,
    and every pair of groups is cut along its larger side into chunks of the smaller.

    Examples
    --------
    >>> [(b.left, b.right) for b in make_balanced(Biclique((0, 1), (2, 3, 4, 5)))]
    [((0, 1), (2, 3)), ((0, 1), (4, 5))]
    """
    out = []
    for ga in _binary_groups(k.left):
        for gb in _binary_groups(k.right):
            if len(ga) <= len(gb):
                out.extend(
                    Biclique(ga, gb[i : i + len(ga)], k.w) for i in range(0, len(gb), len(ga))
                )
            else:
                out.extend(
                    Biclique(ga[i : i + len(gb)], gb, k.w) for i in range(0, len(ga), len(gb))
                )
    return out


def _matchings(k: Biclique, s: int, rng: np.random.Generator) -> List[Tuple[int, int, Fraction]]:
    r = k.r
    w = k.w * Fraction(r, s)
    edges = []
    for _ in range(s):
        perm = rng.permutation(r)
        edges.extend((k.left[i], k.right[int(j)], w) for i, j in enumerate(perm))
    return edges


def sample_matchings(
    collection: BicliqueCollection, s: int, rng: RngLike = None
) -> FractionalGraph:
    """Replace every balanced biclique by ``s`` random perfect matchings of weight ``w r / s``.

    Every vertex keeps its weighted degree within each biclique exactly.

    Parameters
    ----------
    collection : BicliqueCollection
        Balanced bicliques.
    s : int
        Matchings per biclique.
    rng : int or numpy.random.Generator, optional
        Randomness.

    Returns
    -------
    FractionalGraph
        The union of all matchings.
    """
    if s < 1:
        raise PreconditionError("sample_matchings", "s must be at least 1")
    rng = as_generator(rng)
    edges: List[Tuple[int, int, Fraction]] = []
    for k in collection.bicliques:
        if not isinstance(k, Biclique) or not k.balanced:
            raise PreconditionError("sample_matchings", "bicliques must be balanced")
        edges.extend(_matchings(k, s, rng))
    return FractionalGraph(collection.n, tuple(edges))


@dataclass(frozen=True)
class BicliquePlan:
    """Bicliques kept explicit and balanced bicliques sampled with ``s`` matchings.

    ``sampled`` holds ``(biclique, s, j)`` with ``j`` the degree bucket.
    """

    explicit: Tuple[Biclique, ...]
    sampled: Tuple[Tuple[Biclique, int, int], ...]


def _matching_count(r: int, j: int, eps: float, rule: str) -> int:
    if rule == "tight":
        return math.ceil(max(eps**-0.5, r * eps**-1.5 / 2 ** (j - 1)))
    return math.ceil(max(eps**-0.5, 4 * r / (eps * 2**j)))


def plan_bicliques(
    collection: BicliqueCollection, eps: float, rule: str = "stated"
) -> BicliquePlan:
    """Decide which edges of a unit biclique sum are kept and which are sampled.

    Edges at a vertex of degree at most ``eps**-1.5`` stay explicit. The others are
    bucketed by ``j``, the bit length of the smaller endpoint degree, balanced, and
    sampled with ``s = max(eps**-0.5, 4 r / (eps 2**j))`` matchings (``rule="tight"`` uses
    ``s = max(eps**-0.5, r eps**-1.5 / 2**(j-1))``). Balanced pieces with
    ``r <= eps**-0.5`` or ``s >= r`` stay explicit.
    """
    w = collection.uniform_weight() if collection.bicliques else Fraction(1)
    deg = collection.edge_degrees()
    low = deg <= eps**-1.5
    bucket = np.array([int(d).bit_length() for d in deg])
    explicit: List[Biclique] = []
    pieces: List[Tuple[int, Biclique]] = []
    for k in collection.bicliques:
        a_low = [a for a in k.left if low[a]]
        a_high = [a for a in k.left if not low[a]]
        b_low = [b for b in k.right if low[b]]
        b_high = [b for b in k.right if not low[b]]
        if a_low:
            explicit.append(Biclique(a_low, k.right, w))
        if a_high and b_low:
            explicit.append(Biclique(a_high, b_low, w))
        if not (a_high and b_high):
            continue
        for j in sorted({bucket[v] for v in a_high + b_high}):
            s_a = [a for a in a_high if bucket[a] == j]
            t_b = [b for b in b_high if bucket[b] >= j]
            s_b = [b for b in b_high if bucket[b] == j]
            t_a = [a for a in a_high if bucket[a] > j]
            if s_a and t_b:
                pieces.append((j, Biclique(s_a, t_b, w)))
            if s_b and t_a:
                pieces.append((j, Biclique(t_a, s_b, w)))
    sampled = []
    for j, piece in pieces:
        for bal in make_balanced(piece):
            r = bal.r
            s = _matching_count(r, j, eps, rule)
            if r <= eps**-0.5 or s >= r:
                explicit.append(bal)
            else:
                sampled.append((bal, s, j))
    return BicliquePlan(tuple(explicit), tuple(sampled))


def sample_bicliques(
    collection: BicliqueCollection,
    eps: float,
    rng: RngLike = None,
    rule: str = "stated",
) -> FractionalGraph:
    """Sparsify a sum of equal-weight bicliques, see :func:`plan_bicliques`.

    The expectation of the output is the materialized collection.
    """
    rng = as_generator(rng)
    plan = plan_bicliques(collection, eps, rule)
    edges = list(tlz.concat(k.edges() for k in plan.explicit))
    for bal, s, _ in plan.sampled:
        edges.extend(_matchings(bal, s, rng))
    n_k = collection.vertex_total
    scale = (collection.n * eps**-1.5 + n_k * eps**-0.5) * math.log(max(collection.n, 2))
    logger.debug(
        f"Biclique sample: {len(edges)} edges from {collection.edge_total}, "
        + f"size constant {len(edges) / max(scale, 1.0):.4g}"
    )
    return FractionalGraph(collection.n, tuple(edges))


def biclique_split_by_partition(
    collection: BicliqueCollection, pieces: Sequence[Sequence[int]]
) -> Tuple[Dict[int, BicliqueCollection], BicliqueCollection]:
    """Split every biclique into parts inside the pieces and boundary bicliques.

    The list of pieces is halved recursively; at every level the edges between the two
    halves form the bicliques ``(A ∩ L) x (B ∩ R)`` and ``(A ∩ R) x (B ∩ L)``.

    Parameters
    ----------
    collection : BicliqueCollection
        Bicliques with a uniform weight per biclique.
    pieces : sequence of vertex sets
        A partition of the vertices touched by the collection.

    Returns
    -------
    tuple
        Per-piece collections keyed by piece index, and the boundary collection.
    """
    where = {v: i for i, piece in enumerate(pieces) for v in piece}
    inside: Dict[int, List[Biclique]] = defaultdict(list)
    boundary: List[Biclique] = []

    def split(left: List[int], right: List[int], ids: List[int], w: Fraction) -> None:
        if not left or not right:
            return
        if len(ids) == 1:
            inside[ids[0]].append(Biclique(left, right, w))
            return
        half = set(ids[: len(ids) // 2])
        l_a = [a for a in left if where[a] in half]
        r_a = [a for a in left if where[a] not in half]
        l_b = [b for b in right if where[b] in half]
        r_b = [b for b in right if where[b] not in half]
        if l_a and r_b:
            boundary.append(Biclique(l_a, r_b, w))
        if r_a and l_b:
            boundary.append(Biclique(r_a, l_b, w))
        split(l_a, l_b, ids[: len(ids) // 2], w)
        split(r_a, r_b, ids[len(ids) // 2 :], w)

    for k in collection.bicliques:
        if not isinstance(k, Biclique):
            raise PreconditionError("biclique_split_by_partition", "expected uniform bicliques")
        missing = [v for v in k.left + k.right if v not in where]
        if missing:
            raise PreconditionError(
                "biclique_split_by_partition", f"vertices {missing[:5]} are in no piece"
            )
        ids = sorted({where[v] for v in k.left + k.right})
        split(list(k.left), list(k.right), ids, k.w)

    n = collection.n
    per_piece = {i: BicliqueCollection(n, tuple(ks)) for i, ks in sorted(inside.items())}
    return per_piece, BicliqueCollection(n, tuple(boundary))


@dataclass(frozen=True)
class PartitionSample:
    """Partition of a crude sparsifier, the sampled piece interiors and the boundary."""

    partition: ExpanderPartition
    graph: FractionalGraph
    boundary: BicliqueCollection
    crude: FractionalGraph


def _crude(collection: BicliqueCollection, s: int, rng) -> FractionalGraph:
    r = {k.r for k in collection.bicliques}
    if len(r) != 1:
        raise PreconditionError("implicit_partition_and_sample", "bicliques must share one size")
    if s >= r.pop():
        return collection.materialize()
    return sample_matchings(collection, s, rng)


def implicit_partition_and_sample(
    collection: BicliqueCollection,
    eps: float,
    phi: float,
    rng: RngLike = None,
    config: Optional[BicliqueConfig] = None,
) -> PartitionSample:
    """Partition through a crude matching sparsifier and sample inside the pieces.

    The crude sparsifier unions ``ceil(c_s ln n)`` random matchings per biclique (the
    whole biclique when that is not fewer than ``r``); it keeps every weighted degree.
    Its expander decomposition splits the bicliques, and the parts inside each piece
    are sampled with :func:`sample_bicliques`.

    Parameters
    ----------
    collection : BicliqueCollection
        Balanced bicliques of one size and one weight.
    eps : float
        Target error.
    phi : float
        Conductance target.
    rng : int or numpy.random.Generator, optional
        Randomness.
    config : BicliqueConfig, optional
        ``c_s`` and the matching rule.

    Returns
    -------
    PartitionSample
        The partition, the sampled graph, the boundary bicliques and the crude sparsifier.
    """
    config = config or BicliqueConfig(eps=eps)
    rng = as_generator(rng)
    crude_rng, part_rng, sample_rng = split_rng(rng, 3)
    s = math.ceil(config.c_s * math.log(max(collection.n, 2)))
    crude = _crude(collection, s, crude_rng)
    unit = WeightedMultigraph.from_edges(collection.n, [(u, v, 1) for u, v, _ in crude.edges])
    partition = expander_decompose(unit, phi, rng=part_rng)
    per_piece, boundary = biclique_split_by_partition(collection, partition.pieces)
    graphs = [
        sample_bicliques(piece, eps, prng, config.matching_rule)
        for piece, prng in zip(per_piece.values(), split_rng(sample_rng, len(per_piece)))
    ]
    graph = FractionalGraph(collection.n, ()).union(*graphs)
    reference = 4 * partition.measured_gamma * phi * collection.edge_total
    logger.info(
        f"Partition and sample: {len(partition.pieces)} pieces, {boundary.edge_total} of "
        + f"{collection.edge_total} edges on the boundary "
        + f"(reference 4 gamma phi m = {reference:.4g})"
    )
    return PartitionSample(partition, graph, boundary, crude)


def implicit_sketch_bicliques(
    collection: BicliqueCollection,
    eps: float,
    phi: float,
    q: int,
    rng: RngLike = None,
    config: Optional[BicliqueConfig] = None,
) -> FractionalGraph:
    """Sketch a sum of uniform bicliques without materializing it.

    Bicliques are balanced and grouped by size and weight; each group is partitioned
    and sampled by :func:`implicit_partition_and_sample`, and the boundary bicliques are
    sketched recursively with ``q - 1``. At ``q = 0`` the collection is materialized.
    """
    if q < 0:
        raise PreconditionError("implicit_sketch_bicliques", "q must be non-negative")
    if q == 0 or not collection.bicliques:
        return collection.materialize()
    config = config or BicliqueConfig(eps=eps)
    rng = as_generator(rng)
    balanced = [bal for k in collection.bicliques for bal in _as_uniform(k)]
    groups = tlz.groupby(lambda k: (k.r, k.w), balanced)
    keys = sorted(groups)
    graphs, boundary = [], []
    group_rngs = split_rng(rng, len(keys) + 1)
    for key, child in zip(keys, group_rngs):
        part = implicit_partition_and_sample(
            BicliqueCollection(collection.n, tuple(groups[key])), eps, phi, child, config
        )
        graphs.append(part.graph)
        boundary.extend(part.boundary.bicliques)
    rest = BicliqueCollection(collection.n, tuple(boundary))
    logger.info(
        f"Implicit sketch level q={q}: boundary keeps {rest.edge_total} of "
        + f"{collection.edge_total} edges"
    )
    deeper = implicit_sketch_bicliques(rest, eps, phi, q - 1, group_rngs[-1], config)
    return deeper.union(*graphs)


def _as_uniform(k: AnyBiclique) -> List[Biclique]:
    if not isinstance(k, Biclique):
        raise PreconditionError(
            "implicit_sketch_bicliques", "weighted bicliques need biclique_to_unit"
        )
    return make_balanced(k)


@dataclass(frozen=True)
class SchurBlocks:
    """Blocks of a dense Laplacian for the split ``F``, ``C``."""

    lap: np.ndarray
    f: Tuple[int, ...]
    c: Tuple[int, ...]

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        return self.lap[np.ix_(list(rows), list(cols))]

    @property
    def ff(self) -> np.ndarray:
        return self.block(self.f, self.f)

    @property
    def fc(self) -> np.ndarray:
        return self.block(self.f, self.c)

    @property
    def cf(self) -> np.ndarray:
        return self.block(self.c, self.f)

    @property
    def cc(self) -> np.ndarray:
        return self.block(self.c, self.c)

    def schur_complement(self) -> np.ndarray:
        """``L_CC - L_CF L_FF^+ L_FC``."""
        if not self.f:
            return self.cc.copy()
        return self.cc - self.cf @ np.linalg.pinv(self.ff) @ self.fc


@dataclass(frozen=True)
class SchurStep:
    """Clique families and explicit edges whose Laplacian is the squared Schur form.

    Parameters
    ----------
    f_cliques : tuple of WeightedClique
        Cliques on ``F``, one per eliminated vertex with at least two neighbors in ``F``.
    c_cliques : tuple of WeightedClique
        Cliques on ``C``, one per eliminated vertex with at least two neighbors in ``C``.
    bicliques : tuple of WeightedBiclique
        ``F`` to ``C`` bicliques, one per eliminated vertex with neighbors on both sides.
    explicit : WeightedMultigraph
        The ``F``-``C`` edges of the input, and its ``C``-``C`` edges at double weight.
    f, c : tuple of int
        The split.
    """

    f_cliques: Tuple[WeightedClique, ...]
    c_cliques: Tuple[WeightedClique, ...]
    bicliques: Tuple[WeightedBiclique, ...]
    explicit: WeightedMultigraph
    f: Tuple[int, ...]
    c: Tuple[int, ...]

    def weighted_bicliques(self) -> List[WeightedBiclique]:
        """Every family as weighted bicliques."""
        out = list(self.bicliques)
        for clique in self.f_cliques + self.c_cliques:
            out.extend(clique_to_bicliques(clique))
        return out

    def materialize(self) -> FractionalGraph:
        edges = list(tlz.concat(k.edges() for k in self.f_cliques + self.c_cliques))
        edges.extend(tlz.concat(k.edges() for k in self.bicliques))
        return FractionalGraph.from_graph(self.explicit).union(
            FractionalGraph(self.explicit.n, tuple(edges))
        )

    def squared_matrix(self) -> np.ndarray:
        return self.materialize().laplacian().toarray()


def _split(g: _Graph, f: Iterable[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    fs = tuple(sorted(set(int(v) for v in f)))
    if any(not 0 <= v < g.n for v in fs):
        raise PreconditionError("schur_step_cliques", "F has vertices outside the graph")
    cs = tuple(v for v in range(g.n) if v not in set(fs))
    return fs, cs


def schur_step_cliques(g: WeightedMultigraph, f: Iterable[int]) -> SchurStep:
    """Write the squared Schur form of ``L`` for eliminating ``F`` as cliques.

    With ``L_FF = D - A``, the matrix
    ``[[D - A D^-1 A, L_FC + A D^-1 L_FC], [L_CF + L_CF D^-1 A, 2 L_CC - L_CF D^-1 L_FC]]``
    has half of ``SC(L, C)`` as its Schur complement onto ``C``. It is the Laplacian of
    the ``F``-``C`` edges, the ``C``-``C`` edges at double weight, and for every
    ``f`` in ``F`` the clique on its neighbors with vertex weights
    ``w_x / sqrt(d_f)``, split into its ``F`` part, ``C`` part and ``F``-``C`` biclique.

    Parameters
    ----------
    g : WeightedMultigraph
        The graph of ``L``.
    f : iterable of int
        Vertices to eliminate; none may be isolated.

    Returns
    -------
    SchurStep
        The clique families and the explicit edges.

    Examples
    --------
    >>> star = WeightedMultigraph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
    >>> step = schur_step_cliques(star, [0])
    >>> [round(w * w, 6) for w in step.c_cliques[0].weights]
    [0.333333, 0.333333, 0.333333]
    """
    fs, cs = _split(g, f)
    in_f = set(fs)
    nbrs: Dict[int, Dict[int, int]] = {v: defaultdict(int) for v in fs}
    for e in g.edges:
        if e.u in in_f:
            nbrs[e.u][e.v] += e.w
        if e.v in in_f:
            nbrs[e.v][e.u] += e.w
    isolated = [v for v in fs if not nbrs[v]]
    if isolated:
        raise PreconditionError("schur_step_cliques", f"F vertices {isolated[:5]} are isolated")
    f_cliques, c_cliques, bicliques = [], [], []
    for v in fs:
        root = math.sqrt(sum(nbrs[v].values()))
        f_side = sorted(x for x in nbrs[v] if x in in_f)
        c_side = sorted(x for x in nbrs[v] if x not in in_f)
        fw = tuple(nbrs[v][x] / root for x in f_side)
        cw = tuple(nbrs[v][x] / root for x in c_side)
        if len(f_side) > 1:
            f_cliques.append(WeightedClique(tuple(f_side), fw))
        if len(c_side) > 1:
            c_cliques.append(WeightedClique(tuple(c_side), cw))
        if f_side and c_side:
            bicliques.append(WeightedBiclique(tuple(f_side), tuple(c_side), fw, cw))
    explicit = []
    for e in g.edges:
        inside_u, inside_v = e.u in in_f, e.v in in_f
        if inside_u != inside_v:
            explicit.append((e.u, e.v, e.w))
        elif not inside_u:
            explicit.append((e.u, e.v, 2 * e.w))
    return SchurStep(
        f_cliques=tuple(f_cliques),
        c_cliques=tuple(c_cliques),
        bicliques=tuple(bicliques),
        explicit=WeightedMultigraph.from_edges(g.n, explicit),
        f=fs,
        c=cs,
    )


def schur_squared_matrix(g: WeightedMultigraph, f: Iterable[int]) -> np.ndarray:
    """Dense squared Schur form, assembled block by block in ``[F, C]`` order of vertex ids."""
    fs, cs = _split(g, f)
    blocks = SchurBlocks(g.laplacian().toarray(), fs, cs)
    out = np.zeros((g.n, g.n))
    if not fs:
        out[np.ix_(cs, cs)] = 2 * blocks.cc
        return out
    l_ff = blocks.ff
    d = np.diag(l_ff).copy()
    if np.any(d <= 0):
        raise PreconditionError("schur_squared_matrix", "F has isolated vertices")
    a = np.diag(d) - l_ff
    d_inv = np.diag(1.0 / d)
    top = np.diag(d) - a @ d_inv @ a
    cross = blocks.fc + a @ d_inv @ blocks.fc
    bottom = 2 * blocks.cc - blocks.cf @ d_inv @ blocks.fc
    out[np.ix_(fs, fs)] = top
    out[np.ix_(fs, cs)] = cross
    out[np.ix_(cs, fs)] = cross.T
    out[np.ix_(cs, cs)] = bottom
    return out


def dd_subset(g: _Graph, alpha: float = 0.1, rng: RngLike = None) -> Tuple[int, ...]:
    """Greedy ``(1 + alpha)``-diagonally dominant vertex subset.

    Vertices are visited in random order and added while every chosen vertex keeps at
    most a ``1 / (1 + alpha)`` share of its weighted degree inside the subset.
    """
    rng = as_generator(rng)
    deg = np.zeros(g.n)
    adj: Dict[int, Dict[int, float]] = defaultdict(lambda: defaultdict(float))
    for e in g.edges:
        deg[e.u] += e.w
        deg[e.v] += e.w
        adj[e.u][e.v] += e.w
        adj[e.v][e.u] += e.w
    limit = deg / (1.0 + alpha)
    inside = np.zeros(g.n)
    chosen: set = set()
    for v in rng.permutation(g.n).tolist():
        if deg[v] == 0:
            continue
        own = sum(w for x, w in adj[v].items() if x in chosen)
        if own > limit[v]:
            continue
        if any(inside[x] + w > limit[x] for x, w in adj[v].items() if x in chosen):
            continue
        chosen.add(v)
        inside[v] = own
        for x, w in adj[v].items():
            if x in chosen and x != v:
                inside[x] += w
    return tuple(sorted(chosen))


def clique_to_bicliques(clique: WeightedClique) -> List[WeightedBiclique]:
    """Exact split of a weighted clique into bicliques by recursive halving.

    Examples
    --------
    >>> parts = clique_to_bicliques(WeightedClique((0, 1, 2, 3), (1.0, 1.0, 1.0, 1.0)))
    >>> [(b.left, b.right) for b in parts]
    [((0, 1), (2, 3)), ((0,), (1,)), ((2,), (3,))]
    """
    out = []
    stack = [(clique.vertices, clique.weights)]
    while stack:
        verts, weights = stack.pop(0)
        if len(verts) < 2:
            continue
        mid = len(verts) // 2
        out.append(WeightedBiclique(verts[:mid], verts[mid:], weights[:mid], weights[mid:]))
        stack.append((verts[:mid], weights[:mid]))
        stack.append((verts[mid:], weights[mid:]))
    return out


def _bit_sets(side: Sequence[int], weights: Sequence[float], bits: int) -> Dict[int, List[int]]:
    values = [Fraction(w) for w in weights]
    if any(w <= 0 for w in values):
        raise PreconditionError("biclique_to_unit", "vertex weights must be positive")
    top = max(values)
    lead = top.numerator.bit_length() - top.denominator.bit_length()
    if Fraction(2) ** lead > top:
        lead -= 1
    low = lead - bits + 1
    sets: Dict[int, List[int]] = defaultdict(list)
    for v, w in zip(side, values):
        scaled = math.floor(w / Fraction(2) ** low)
        for i in range(scaled.bit_length()):
            if scaled >> i & 1:
                sets[low + i].append(v)
    return sets


def biclique_to_unit(k: WeightedBiclique, bits: int = 40) -> List[Biclique]:
    """Approximate a weighted biclique by uniform bicliques with power-of-two weights.

    Every vertex weight is truncated to ``bits`` binary digits below the largest weight
    of its side. The vertices with bit ``i`` set on one side and bit ``j`` on the other
    form a biclique of weight ``2**(i + j)``.

    Examples
    --------
    >>> [(b.left, b.right, b.w) for b in biclique_to_unit(WeightedBiclique((0, 1), (2,), (3, 1), (1,)))]
    [((0, 1), (2,), Fraction(1, 1)), ((0,), (2,), Fraction(2, 1))]
    """
    if bits < 1:
        raise PreconditionError("biclique_to_unit", "bits must be positive")
    left = _bit_sets(k.left, k.left_weights, bits)
    right = _bit_sets(k.right, k.right_weights, bits)
    return [
        Biclique(left[i], right[j], Fraction(2) ** (i + j))
        for i in sorted(left)
        for j in sorted(right)
    ]


def sketch_schur_step(
    g: WeightedMultigraph,
    f: Iterable[int],
    config: Optional[BicliqueConfig] = None,
    rng: RngLike = None,
    bits: int = 40,
) -> FractionalGraph:
    """Sketch the squared Schur form without materializing its cliques.

    The clique families are split into weighted bicliques, reduced to uniform
    power-of-two bicliques, grouped by weight and sketched with
    :func:`implicit_sketch_bicliques`; the explicit edges are added unchanged.
    """
    config = config or BicliqueConfig()
    rng = as_generator(rng)
    step = schur_step_cliques(g, f)
    unit = list(tlz.concat(biclique_to_unit(k, bits) for k in step.weighted_bicliques()))
    groups = tlz.groupby(lambda k: k.w, unit)
    q = config.resolve_q(g.n)
    phi = config.resolve_phi(g.n)
    graphs = []
    for w, child in zip(sorted(groups), split_rng(rng, len(groups))):
        collection = BicliqueCollection(g.n, tuple(groups[w]))
        graphs.append(implicit_sketch_bicliques(collection, config.eps, phi, q, child, config))
    out = FractionalGraph.from_graph(step.explicit).union(*graphs)
    logger.info(
        f"Schur step on |F|={len(step.f)}: {len(unit)} unit bicliques in {len(groups)} weight "
        + f"classes, {out.m} sketch edges"
    )
    return out


def schur_identity_error(
    g: WeightedMultigraph, f: Iterable[int], squared: Optional[np.ndarray] = None
) -> float:
    """Largest entry of ``|SC(L, C) - SC(M, C) / 2|`` for a squared form ``M``.

    ``M`` defaults to :func:`schur_squared_matrix`.
    """
    fs, cs = _split(g, f)
    if not cs:
        return 0.0
    m = schur_squared_matrix(g, fs) if squared is None else squared
    diff = schur_complement(g.laplacian(), cs) - 0.5 * schur_complement(m, cs)
    return float(np.abs(diff).max())
