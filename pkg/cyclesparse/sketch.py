"""Graphical spectral sketches: expander-partitioned degree preserving sampling."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import CycleConfig, RngLike, SketchConfig, as_generator, rng_stream, split_rng
from .cycles import decompose, naive_bounds
from .exceptions import InternalConsistencyError, PreconditionError
from .expander import expander_decompose
from .generators import two_cliques_matching
from .graph import Edge, WeightedMultigraph, _Graph, combine_parallel_edges
from .linalg import (
    MatrixLike,
    as_dense,
    certify_spectral_approx,
    component_labels,
    dense_pinv,
    project_out_constants,
)
from .sparsify import _split_to_powers, greedy_bipartition, sample_even_cycle, sparsify_once

logger = logging.getLogger(__name__)

__all__ = [
    "SketchResult",
    "InverseFormCheck",
    "decompose_and_sample",
    "spectral_sketch",
    "inverse_form_check",
    "quadratic_form_errors",
    "counterexample_graph",
    "naive_degree_preserving_sample",
]


@dataclass(frozen=True)
class SketchResult:
    """A spectral sketch with the per-round measurements.

    ``edge_counts`` starts with the edge count after weight splitting, then one entry
    per round; ``alphas`` and ``gammas`` hold the degree threshold and the measured
    boundary ratio used in every round.
    """

    graph: WeightedMultigraph
    edge_counts: Tuple[int, ...]
    alphas: Tuple[float, ...]
    gammas: Tuple[float, ...]

    @property
    def rounds(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class InverseFormCheck:
    """Outcome of transferring a quadratic form guarantee to pseudoinverses.

    Parameters
    ----------
    spectral_error : float
        Certified ``eps'`` with ``P ≈_eps' Q``; the first hypothesis needs ``<= sqrt(eps)``.
    form_log_ratio : float
        ``log((P^+ x)^T Q (P^+ x) / x^T P^+ x)``; the second hypothesis needs ``|.| <= eps``.
    ratio : float
        ``x^T Q^+ x / x^T P^+ x``.
    eps : float
        Target.
    """

    spectral_error: float
    form_log_ratio: float
    ratio: float
    eps: float

    @property
    def spectral_hypothesis(self) -> bool:
        return self.spectral_error <= math.sqrt(self.eps) + 1e-12

    @property
    def form_hypothesis(self) -> bool:
        return abs(self.form_log_ratio) <= self.eps + 1e-12

    @property
    def hypotheses_hold(self) -> bool:
        return self.spectral_hypothesis and self.form_hypothesis

    @property
    def conclusion_holds(self) -> bool:
        return abs(math.log(self.ratio)) <= 7 * self.eps

    def __bool__(self) -> bool:
        return self.conclusion_holds


def _check_simple(g: _Graph, op: str) -> int:
    if not g.is_simple():
        raise PreconditionError(op, "the graph must be simple")
    w = g.uniform_weight
    if g.m and w is None:
        raise PreconditionError(op, "edges must share a single weight")
    return w or 1


def decompose_and_sample(
    g: WeightedMultigraph,
    alpha: float,
    config: Optional[CycleConfig] = None,
    rng: RngLike = None,
) -> WeightedMultigraph:
    """Sample halves of short cycles among the vertices of degree at least ``alpha``.

    Edges with an endpoint of degree below ``alpha`` are kept. On the rest, edges inside
    the sides of :func:`greedy_bipartition` are kept and the crossing edges are
    cycle-decomposed; every cycle keeps one of its alternating halves at double weight.

    Parameters
    ----------
    g : WeightedMultigraph
        Simple graph with one edge weight ``w``.
    alpha : float
        Degree threshold, counted in edges.
    config : CycleConfig, optional
        Cycle decomposition settings.
    rng : int or numpy.random.Generator, optional
        Randomness.

    Returns
    -------
    WeightedMultigraph
        Graph with weights in ``{w, 2w}``, the same weighted degrees and the edge ids of
        ``g``.
    """
    _check_simple(g, "decompose_and_sample")
    config = config or CycleConfig()
    rng = as_generator(rng)
    deg = g.edge_counts()
    big = deg >= alpha
    kept: List[Edge] = [e for e in g.edges if not (big[e.u] and big[e.v])]
    core = g.with_edges(e for e in g.edges if big[e.u] and big[e.v])
    if core.m == 0:
        return g
    a, _ = greedy_bipartition(core)
    left = set(a)
    crossing = core.with_edges(e for e in core.edges if (e.u in left) != (e.v in left))
    kept.extend(e for e in core.edges if (e.u in left) == (e.v in left))
    dec_rng, sample_rng = split_rng(rng, 2)
    dec = decompose(crossing, config, rng=dec_rng)
    emap = crossing.edge_map
    kept.extend(emap[eid] for eid in dec.extras)
    for cyc in dec.cycles:
        kept.extend(sample_even_cycle([emap[eid] for eid in cyc], sample_rng))
    out = g.with_edges(sorted(kept, key=lambda e: e.eid))
    logger.debug(
        f"Sampled {len(dec.cycles)} cycles among {int(big.sum())} high degree vertices: "
        + f"{g.m} -> {out.m} edges"
    )
    return out


def _derived_alpha(config: SketchConfig, n: int, gamma: float) -> float:
    if config.alpha is not None:
        return config.alpha
    length, _ = naive_bounds(n)
    return config.alpha_constant * length * gamma**4 * math.log(n) ** 4 / config.eps


def spectral_sketch(g: WeightedMultigraph, config: Optional[SketchConfig] = None) -> SketchResult:
    """Graphical spectral sketch with degrees kept exactly.

    Weights are split into powers of two. Every round partitions each weight class
    with :func:`expander_decompose` at ``phi = 1 / (2 gamma)``, keeps the boundary, and
    runs :func:`decompose_and_sample` in every piece. The threshold is
    ``alpha = alpha_constant * L * gamma**4 * log(n)**4 / eps`` unless ``config.alpha``
    is set, where ``gamma`` is the largest measured boundary ratio of the previous round.
    Rounds stop once the edge count drops by less than 1/16, or after ``ceil(4 log2 n)``.

    Parameters
    ----------
    g : WeightedMultigraph
        Graph with positive integer weights.
    config : SketchConfig, optional
        Accuracy, threshold and randomness settings.

    Returns
    -------
    SketchResult
        The sketch and the per-round measurements.
    """
    config = config or SketchConfig()
    if g.directed:
        raise PreconditionError("spectral_sketch", "expected an undirected graph")
    n = max(len(g.non_isolated()), 2)
    max_rounds = config.max_rounds or max(1, math.ceil(4 * math.log2(n)))
    degrees = g.weighted_degrees()
    current = _split_to_powers(g)
    counts, alphas, gammas = [current.m], [], []
    gamma = config.gamma
    for index in range(max_rounds):
        alpha = _derived_alpha(config, n, gamma)
        phi = min(0.49, 1.0 / (2.0 * gamma))
        rng = rng_stream(config.seed, "sketch", "round", index)
        classes = sorted({e.w for e in current.edges})
        edges: List[Edge] = []
        measured = [1.0]
        for w, child in zip(classes, split_rng(rng, len(classes))):
            cls = current.with_edges(e for e in current.edges if e.w == w)
            part_rng, sample_rng = split_rng(child, 2)
            part = expander_decompose(cls, phi, rng=part_rng)
            measured.append(part.measured_gamma)
            boundary = set(part.boundary_edges)
            emap = cls.edge_map
            edges.extend(emap[eid] for eid in part.boundary_edges)
            inside = cls.remove_edges(boundary)
            piece_rngs = split_rng(sample_rng, len(part.pieces))
            for piece, prng in zip(part.pieces, piece_rngs):
                sub = inside.induced_subgraph(piece)
                if sub.m:
                    edges.extend(decompose_and_sample(sub, alpha, config.cycle, prng).edges)
        nxt = combine_parallel_edges(current.with_edges(edges))
        if nxt.weighted_degrees() != degrees:
            raise InternalConsistencyError("a sketch round changed a weighted degree")
        alphas.append(alpha)
        gammas.append(max(measured))
        counts.append(nxt.m)
        logger.info(
            f"Sketch round {index}: {current.m} -> {nxt.m} edges, alpha {alpha:.4g}, "
            + f"measured gamma {gammas[-1]:.4g}"
        )
        shrunk = current.m - nxt.m >= current.m / 16
        current = nxt
        gamma = gammas[-1]
        if not shrunk:
            break
    return SketchResult(current, tuple(counts), tuple(alphas), tuple(gammas))


def inverse_form_check(
    P: MatrixLike, Q: MatrixLike, x: Sequence[float], eps: float
) -> InverseFormCheck:
    """Check that a quadratic form guarantee transfers to the pseudoinverses.

    The hypotheses are ``P ≈_{sqrt(eps)} Q`` and
    ``(P^+ x)^T Q (P^+ x) ∈ exp(±eps) x^T P^+ x``; the conclusion is
    ``x^T Q^+ x ∈ exp(±7 eps) x^T P^+ x``. Hypotheses and conclusion are reported
    separately.

    Parameters
    ----------
    P, Q : graph or matrix
        Symmetric Laplacians with the same components.
    x : array_like
        Test vector; it is projected onto the range.
    eps : float
        Target.

    Returns
    -------
    InverseFormCheck
        The measured quantities.

    Examples
    --------
    >>> c4 = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    >>> check = inverse_form_check(c4, c4, [1.0, -1.0, 0.0, 0.0], 0.1)
    >>> check.hypotheses_hold, check.conclusion_holds, round(check.ratio, 6)
    (True, True, 1.0)
    """
    if not 0 < eps <= 1:
        raise PreconditionError("inverse_form_check", "eps must be in (0, 1]")
    p = as_dense(P)
    q = as_dense(Q)
    cert = certify_spectral_approx(p, q)
    _, labels = component_labels(p)
    xp = project_out_constants(np.asarray(x, dtype=float), labels)
    p_inv, q_inv = dense_pinv(p), dense_pinv(q)
    y = p_inv @ xp
    base = float(xp @ y)
    if base <= 0:
        raise PreconditionError("inverse_form_check", "x lies in the nullspace")
    form = float(y @ q @ y)
    return InverseFormCheck(
        spectral_error=cert.error,
        form_log_ratio=math.log(form / base),
        ratio=float(xp @ q_inv @ xp) / base,
        eps=eps,
    )


def quadratic_form_errors(g: MatrixLike, h: MatrixLike, vectors: np.ndarray) -> np.ndarray:
    """Relative errors ``|x^T L_H x - x^T L_G x| / x^T L_G x`` per row of ``vectors``.

    Rows in the nullspace of ``L_G`` get an error of 0 when ``L_H`` vanishes on them too.
    """
    lg, lh = as_dense(g), as_dense(h)
    xs = np.atleast_2d(np.asarray(vectors, dtype=float))
    fg = np.einsum("ij,jk,ik->i", xs, lg, xs)
    fh = np.einsum("ij,jk,ik->i", xs, lh, xs)
    diff = np.abs(fh - fg)
    scale = np.where(fg > 1e-12, fg, 1.0)
    return np.where(fg > 1e-12, diff / scale, np.where(diff > 1e-12, np.inf, 0.0))


def counterexample_graph(k: int) -> WeightedMultigraph:
    """Two ``k``-cliques joined by a perfect matching.

    The indicator of one clique has a quadratic form of ``k``; sampling that ignores
    the clique structure moves it by about ``sqrt(k)``.
    """
    return two_cliques_matching(k)


def naive_degree_preserving_sample(
    g: WeightedMultigraph, config: Optional[CycleConfig] = None, rng: RngLike = None
) -> WeightedMultigraph:
    """One round of cycle sampling on the whole graph, without partitioning or degree thresholds."""
    split = _split_to_powers(g)
    return sparsify_once(split, np.zeros(split.m), config, rng)
