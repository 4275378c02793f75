"""Effective resistances: exact oracle, random projection estimates and Foster sums."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple, Union

import dask
import numpy as np
import pandas as pd
import scipy.sparse as sp

from .core import DENSE_LIMIT, RngLike, as_generator
from .exceptions import ComponentMismatchError, InvalidInputRange, PreconditionError
from .graph import LaplacianView, _Graph
from .linalg import dense_pinv, solve_laplacian

logger = logging.getLogger(__name__)

RESISTANCE_METHODS = ["exact", "projected"]

__all__ = [
    "ResistanceEstimates",
    "exact_effective_resistances",
    "exact_edge_resistances",
    "approx_effective_resistances",
    "foster_residual",
]


@dataclass(frozen=True)
class ResistanceEstimates:
    """Per-edge resistance values aligned with the edge order of a graph.

    Parameters
    ----------
    edge_ids : tuple of int
        Edge ids in graph order.
    values : tuple of float
        ``r_e`` per edge.
    method : str
        ``exact`` or ``projected``.
    theta : float
        Claimed accuracy, ``r_e`` is within ``exp(+-theta)`` of the exact value.
    """

    edge_ids: Tuple[int, ...]
    values: Tuple[float, ...]
    method: str
    theta: float

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self) -> Dict[int, float]:
        return dict(zip(self.edge_ids, self.values))

    def to_frame(self, g: _Graph) -> pd.DataFrame:
        """Table of ``u v w r`` rows in edge order."""
        emap = g.edge_map
        rows = [(emap[e].u, emap[e].v, emap[e].w, r) for e, r in zip(self.edge_ids, self.values)]
        return pd.DataFrame(rows, columns=["u", "v", "w", "r"])


def _labels(g: _Graph) -> np.ndarray:
    return g.components()[1]


def _undirected_laplacian(g: _Graph) -> sp.csr_matrix:
    return LaplacianView(g, "undirected").matrix()


def exact_effective_resistances(
    g: _Graph, pairs: Iterable[Sequence[int]]
) -> np.ndarray:
    """Effective resistances ``chi_uv^T L^+ chi_uv`` between vertex pairs.

    Parameters
    ----------
    g : WeightedMultigraph
        The graph; directed graphs are read through their undirected support.
    pairs : iterable of (u, v)
        Vertex pairs, each within one connected component.

    Returns
    -------
    numpy.ndarray
        One resistance per pair.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> path = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    >>> exact_effective_resistances(path, [(0, 3), (1, 2)]).round(6)
    array([3., 1.])
    """
    pairs = [(int(u), int(v)) for u, v in pairs]
    labels = _labels(g)
    bad = [(u, v) for u, v in pairs if labels[u] != labels[v]]
    if bad:
        raise ComponentMismatchError(f"pairs {bad[:3]} join different components")
    lap = _undirected_laplacian(g)
    out = np.zeros(len(pairs))
    if not pairs:
        return out
    if g.n <= DENSE_LIMIT:
        pinv = dense_pinv(lap)
        u = np.array([p[0] for p in pairs])
        v = np.array([p[1] for p in pairs])
        out = pinv[u, u] + pinv[v, v] - 2 * pinv[u, v]
    else:
        for i, (u, v) in enumerate(pairs):
            if u == v:
                continue
            chi = np.zeros(g.n)
            chi[u], chi[v] = 1.0, -1.0
            out[i] = chi @ solve_laplacian(lap, chi)
    return np.maximum(out, 0.0)


def exact_edge_resistances(g: _Graph) -> ResistanceEstimates:
    """Exact resistances of every edge of ``g``."""
    values = exact_effective_resistances(g, [(e.u, e.v) for e in g.edges])
    return ResistanceEstimates(tuple(g.edge_ids), tuple(values.tolist()), "exact", 0.0)


def _projection_count(n: int, theta: float) -> int:
    return math.ceil(24 * math.log(max(n, 2)) / theta**2)


def approx_effective_resistances(
    g: _Graph, theta: float = math.log(1.5), rng: RngLike = None
) -> ResistanceEstimates:
    """Random projection estimates of the edge resistances.

    With ``q = ceil(24 ln(n) / theta**2)`` rows of random signs ``Q`` scaled by
    ``1/sqrt(q)``, the estimate of edge ``uv`` is ``||Z (chi_u - chi_v)||^2`` where
    ``Z = Q W^{1/2} B L^+``. The ``q`` solves run on a dense pseudoinverse up to 500
    vertices and as threaded ``dask.delayed`` tasks above.

    Parameters
    ----------
    g : WeightedMultigraph
        The graph; components are handled independently.
    theta : float, optional
        Accuracy as a log factor in (0, 1), defaults to ``ln 1.5``.
    rng : int or numpy.random.Generator, optional
        Source of the random signs.

    Returns
    -------
    ResistanceEstimates
        Projected estimates.
    """
    if not 0 < theta < 1:
        raise InvalidInputRange("theta must be in (0, 1).")
    rng = as_generator(rng)
    if g.m == 0:
        return ResistanceEstimates((), (), "projected", theta)
    q = _projection_count(len(g.non_isolated()), theta)
    u = np.array([e.u for e in g.edges])
    v = np.array([e.v for e in g.edges])
    sqrt_w = np.sqrt(np.array([float(e.w) for e in g.edges]))
    rows = np.arange(g.m)
    incidence = sp.csr_matrix(
        (np.concatenate([sqrt_w, -sqrt_w]), (np.concatenate([rows, rows]), np.concatenate([u, v]))),
        shape=(g.m, g.n),
    )
    signs = rng.choice([-1.0, 1.0], size=(q, g.m)) / math.sqrt(q)
    y = np.asarray((incidence.T @ signs.T).T)
    lap = _undirected_laplacian(g)
    if g.n <= DENSE_LIMIT:
        z = y @ dense_pinv(lap)
    else:
        tasks = [dask.delayed(solve_laplacian)(lap, y[i]) for i in range(q)]
        z = np.vstack(dask.compute(*tasks, scheduler="threads"))
    diff = z[:, u] - z[:, v]
    values = np.einsum("ij,ij->j", diff, diff)
    logger.debug(f"Resistance sketch with {q} projections on {g.m} edges")
    return ResistanceEstimates(tuple(g.edge_ids), tuple(values.tolist()), "projected", theta)


def foster_residual(
    g: _Graph, estimates: Union[ResistanceEstimates, Sequence[float], np.ndarray]
) -> float:
    """``sum_e w_e r_e - (n - c)`` with ``c`` the number of components, isolated vertices included.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> tree = WeightedMultigraph.from_edges(3, [(0, 1, 1), (1, 2, 1)])
    >>> foster_residual(tree, [1.0, 1.0])
    0.0
    """
    if isinstance(estimates, ResistanceEstimates):
        lookup = estimates.as_dict()
        if set(lookup) != set(g.edge_ids):
            raise PreconditionError("foster_residual", "estimates do not match the edges")
        values = np.array([lookup[e] for e in g.edge_ids])
    else:
        values = np.asarray(estimates, dtype=float)
        if len(values) != g.m:
            raise PreconditionError(
                "foster_residual", f"{len(values)} estimates for {g.m} edges"
            )
    ncomp = g.components()[0]
    weights = np.array([float(e.w) for e in g.edges])
    return float(weights @ values) - (g.n - ncomp)
