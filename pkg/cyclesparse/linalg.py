"""Laplacian solves, pseudoinverse quadratic forms and spectral certificates."""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse import csgraph

from .core import DENSE_LIMIT, RngLike, as_generator
from .exceptions import ComponentMismatchError, ConvergenceError, InvalidInputValue
from .graph import LaplacianView, _Graph

logger = logging.getLogger(__name__)

MatrixLike = Union[LaplacianView, _Graph, sp.spmatrix, np.ndarray]
SOLVE_METHODS = ["auto", "dense", "iterative"]

__all__ = [
    "SpectralCertificate",
    "AsymErrorNorm",
    "solve_laplacian",
    "pseudo_quadratic",
    "certify_spectral_approx",
    "asym_error_norm",
    "lambda2_normalized",
    "dense_pinv",
    "pinv_sqrt",
    "schur_complement",
]


@dataclass(frozen=True)
class SpectralCertificate:
    """Natural logs of the extreme generalized eigenvalues of ``(L_H, L_G)`` on the range."""

    log_ratio_min: float
    log_ratio_max: float
    tolerance: float

    @property
    def error(self) -> float:
        """The smallest ``eps`` with ``H ≈_eps G``."""
        return max(abs(self.log_ratio_min), abs(self.log_ratio_max))

    def holds(self, eps: float) -> bool:
        return self.error <= eps


@dataclass(frozen=True)
class AsymErrorNorm:
    """``||L_G^{+/2} (L_A - L_B) L_G^{+/2}||_2``."""

    value: float

    def __float__(self) -> float:
        return self.value


def as_matrix(obj: MatrixLike) -> Union[sp.csr_matrix, np.ndarray]:
    """Read a view, a graph (its symmetric Laplacian), or a matrix."""
    if isinstance(obj, LaplacianView):
        return obj.matrix()
    if isinstance(obj, _Graph):
        return LaplacianView(obj).matrix()
    if sp.issparse(obj):
        return obj.tocsr()
    return np.asarray(obj, dtype=float)


def as_dense(obj: MatrixLike) -> np.ndarray:
    mat = as_matrix(obj)
    return mat.toarray() if sp.issparse(mat) else np.array(mat, dtype=float)


def component_labels(mat: Union[sp.spmatrix, np.ndarray]) -> Tuple[int, np.ndarray]:
    """Connected components of the off-diagonal sparsity pattern."""
    a = sp.csr_matrix(mat)
    a = abs(a) + abs(a.T)
    a = (a - sp.diags(a.diagonal())).tocsr()
    a.eliminate_zeros()
    return csgraph.connected_components(a, directed=False)


def project_out_constants(x: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Subtract the per-component mean, i.e., project onto the range of the Laplacian."""
    x = np.asarray(x, dtype=float)
    counts = np.bincount(labels)
    means = np.bincount(labels, weights=x) / counts
    return x - means[labels]


def _range_basis(dense: np.ndarray, ncomp: int) -> Tuple[np.ndarray, np.ndarray]:
    lam, vec = sla.eigh(dense)
    r = dense.shape[0] - ncomp
    return lam[ncomp:][: max(r, 0)], vec[:, ncomp:][:, : max(r, 0)]


def dense_pinv(obj: MatrixLike) -> np.ndarray:
    """Pseudoinverse of a symmetric Laplacian through its eigendecomposition."""
    dense = as_dense(obj)
    ncomp, _ = component_labels(dense)
    lam, vec = _range_basis(dense, ncomp)
    return (vec / lam) @ vec.T


def pinv_sqrt(obj: MatrixLike) -> np.ndarray:
    """``L^{+/2}`` of a symmetric Laplacian."""
    dense = as_dense(obj)
    ncomp, _ = component_labels(dense)
    lam, vec = _range_basis(dense, ncomp)
    return (vec / np.sqrt(lam)) @ vec.T


def _jacobi_pcg(
    mat: sp.csr_matrix, b: np.ndarray, labels: np.ndarray, tol: float, maxiter: int
) -> np.ndarray:
    diag = mat.diagonal()
    inv_diag = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 0.0)
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    d = z.copy()
    delta = r @ z
    bnorm = np.linalg.norm(b)
    for i in range(maxiter):
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        q = mat @ d
        alpha = delta / (d @ q)
        x += alpha * d
        # recompute the residual periodically against drift
        if i % 50 == 49:
            r = b - mat @ x
        else:
            r -= alpha * q
        z = inv_diag * r
        delta_old, delta = delta, r @ z
        d = z + (delta / delta_old) * d
        d = project_out_constants(d, labels)
    res = np.linalg.norm(b - mat @ x) / bnorm
    if res <= tol:
        return x
    raise ConvergenceError(maxiter, res)


def solve_laplacian(
    lap: MatrixLike,
    b: np.ndarray,
    tol: float = 1e-10,
    maxiter: Optional[int] = None,
    method: str = "auto",
) -> np.ndarray:
    """Solve ``L x = b`` on the range of a symmetric Laplacian.

    Parameters
    ----------
    lap : LaplacianView, graph, or matrix
        Symmetric Laplacian.
    b : array_like
        Right-hand side; it is projected against the per-component constants.
    tol : float, optional
        Relative residual target, defaults to ``1e-10``.
    maxiter : int, optional
        Iteration cap of the iterative path, defaults to ``10 n``.
    method : str, optional
        ``dense`` (eigendecomposition), ``iterative`` (Jacobi-preconditioned conjugate
        gradients) or ``auto`` (dense up to 500 vertices). Defaults to ``auto``.

    Returns
    -------
    numpy.ndarray
        Solution orthogonal to the constants on every component.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> solve_laplacian(WeightedMultigraph.from_edges(2, [(0, 1, 1)]), [1.0, -1.0])
    array([ 0.5, -0.5])
    """
    if method not in SOLVE_METHODS:
        raise InvalidInputValue("method", SOLVE_METHODS)
    mat = as_matrix(lap)
    n = mat.shape[0]
    _, labels = component_labels(mat)
    b = np.asarray(b, dtype=float)
    bp = project_out_constants(b, labels)
    if np.linalg.norm(b - bp) > 1e-9 * max(np.linalg.norm(b), 1.0):
        logger.debug("Right-hand side projected against the constant vectors.")
    if not np.any(bp):
        return np.zeros(n)
    if method == "dense" or (method == "auto" and n <= DENSE_LIMIT):
        dense = mat.toarray() if sp.issparse(mat) else mat
        x = dense_pinv(dense) @ bp
    else:
        x = _jacobi_pcg(sp.csr_matrix(mat), bp, labels, tol, maxiter or 10 * n)
    return project_out_constants(x, labels)


def pseudo_quadratic(lap: MatrixLike, x: np.ndarray) -> float:
    """Return ``x^T L^+ x``; ``x`` is projected onto the range first.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> c4 = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    >>> round(pseudo_quadratic(c4, [1.0, -1.0, 0.0, 0.0]), 6)
    0.75
    """
    mat = as_matrix(lap)
    _, labels = component_labels(mat)
    x = np.asarray(x, dtype=float)
    xp = project_out_constants(x, labels)
    if np.linalg.norm(x - xp) > 1e-9 * max(np.linalg.norm(x), 1.0):
        warnings.warn("Vector is not orthogonal to the nullspace, it was projected.", UserWarning)
    y = solve_laplacian(mat, xp)
    return max(float(xp @ y), 0.0)


def _same_partition(la: np.ndarray, lb: np.ndarray) -> bool:
    pairs = set(zip(la.tolist(), lb.tolist()))
    return len(pairs) == len(set(la.tolist())) == len(set(lb.tolist()))


def certify_spectral_approx(
    lap_g: MatrixLike, lap_h: MatrixLike, tolerance: float = 1e-12
) -> SpectralCertificate:
    """Extreme generalized eigenvalues of ``(L_H, L_G)`` off the common nullspace.

    Parameters
    ----------
    lap_g, lap_h : LaplacianView, graph, or matrix
        Symmetric Laplacians on the same vertex set with the same components.
    tolerance : float, optional
        Relative eigenvalue tolerance recorded in the certificate.

    Returns
    -------
    SpectralCertificate
        Natural logs of the smallest and largest ratio ``x^T L_H x / x^T L_G x``.
    """
    g = as_dense(lap_g)
    h = as_dense(lap_h)
    if g.shape != h.shape:
        raise ComponentMismatchError(f"dimensions {g.shape} and {h.shape} differ")
    if g.shape[0] > DENSE_LIMIT:
        warnings.warn(f"Dense certificate on {g.shape[0]} vertices.", UserWarning)
    cg, lg = component_labels(g)
    ch, lh = component_labels(h)
    if not _same_partition(lg, lh):
        raise ComponentMismatchError(f"{cg} components versus {ch}")
    lam, vec = _range_basis(g, cg)
    if lam.size == 0:
        return SpectralCertificate(0.0, 0.0, tolerance)
    s = vec / np.sqrt(lam)
    ratios = sla.eigvalsh(s.T @ h @ s)
    if ratios[0] <= 0:
        raise ComponentMismatchError("the second Laplacian is singular on the range")
    return SpectralCertificate(float(np.log(ratios[0])), float(np.log(ratios[-1])), tolerance)


def asym_error_norm(
    lap_g_sym: MatrixLike, lap_a: MatrixLike, lap_b: Optional[MatrixLike] = None
) -> AsymErrorNorm:
    """Operator norm of ``L_G^{+/2} (L_A - L_B) L_G^{+/2}``.

    Parameters
    ----------
    lap_g_sym : LaplacianView, graph, or matrix
        Symmetric Laplacian that normalizes the error.
    lap_a : LaplacianView, graph, or matrix
        First (directed) Laplacian, or the difference itself when ``lap_b`` is None.
    lap_b : LaplacianView, graph, or matrix, optional
        Second (directed) Laplacian.

    Returns
    -------
    AsymErrorNorm
        The largest singular value of the projected difference.
    """
    g = as_dense(lap_g_sym)
    diff = _as_directed_dense(lap_a)
    if lap_b is not None:
        diff = diff - _as_directed_dense(lap_b)
    if diff.shape != g.shape:
        raise ComponentMismatchError(f"dimensions {g.shape} and {diff.shape} differ")
    ncomp, labels = component_labels(g)
    rows, cols = np.nonzero(diff)
    crossing = labels[rows] != labels[cols]
    if crossing.any():
        i, j = int(rows[crossing][0]), int(cols[crossing][0])
        raise ComponentMismatchError(f"entry ({i}, {j}) joins two components of the norm")
    lam, vec = _range_basis(g, ncomp)
    if lam.size == 0:
        return AsymErrorNorm(0.0)
    s = vec / np.sqrt(lam)
    return AsymErrorNorm(float(np.linalg.norm(s.T @ diff @ s, 2)))


def _as_directed_dense(obj: MatrixLike) -> np.ndarray:
    if isinstance(obj, _Graph) and obj.directed:
        return obj.laplacian().toarray()
    return as_dense(obj)


def lambda2_normalized(
    g: _Graph,
    subset: Optional[Iterable[int]] = None,
    method: str = "auto",
    rng: RngLike = None,
) -> float:
    """Second smallest eigenvalue of ``D_S^{-1/2} L_{G[S]} D_S^{-1/2}``.

    Degrees are taken from the full graph ``g``; sets with fewer than two vertices
    return 0.

    Parameters
    ----------
    g : WeightedMultigraph
        The full graph.
    subset : iterable of int, optional
        Vertex set ``S``, defaults to all vertices.
    method : str, optional
        ``dense``, ``iterative`` (deflated power iteration) or ``auto``.
    rng : int or numpy.random.Generator, optional
        Start vector source of the power iteration.

    Returns
    -------
    float
        The eigenvalue.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> k5 = WeightedMultigraph.from_edges(5, [(i, j, 1) for i in range(5) for j in range(i + 1, 5)])
    >>> round(lambda2_normalized(k5), 6)
    1.25
    """
    if method not in SOLVE_METHODS:
        raise InvalidInputValue("method", SOLVE_METHODS)
    verts = sorted(set(range(g.n) if subset is None else subset))
    if len(verts) < 2:
        return 0.0
    lam, _ = fiedler(g, verts, method=method, rng=rng)
    return lam


def normalized_induced_laplacian(
    g: _Graph, verts: Sequence[int], degrees: Optional[Sequence[float]] = None
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """``D_S^{-1/2} L_{G[S]} D_S^{-1/2}`` on ``verts`` (in the given order) and ``D_S^{1/2} 1``.

    ``degrees`` defaults to the weighted degrees of the full graph.
    """
    index = {v: i for i, v in enumerate(verts)}
    full = _undirected_degrees(g) if degrees is None else degrees
    deg = np.array([float(full[v]) for v in verts])
    k = len(verts)
    rows, cols, vals = [], [], []
    for e in g.edges:
        if e.u in index and e.v in index:
            a, b = index[e.u], index[e.v]
            rows += [a, b]
            cols += [b, a]
            vals += [float(e.w), float(e.w)]
    adj = sp.coo_matrix((vals, (rows, cols)), shape=(k, k)).tocsr()
    lap = sp.diags(np.asarray(adj.sum(axis=1)).ravel()) - adj
    inv = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    return (sp.diags(inv) @ lap @ sp.diags(inv)).tocsr(), np.sqrt(deg)


def fiedler(
    g: _Graph,
    verts: Sequence[int],
    method: str = "auto",
    rng: RngLike = None,
    degrees: Optional[Sequence[float]] = None,
) -> Tuple[float, np.ndarray]:
    """λ₂ of the normalized induced Laplacian and its eigenvector, see :func:`lambda2_normalized`."""
    norm_lap, sqrt_deg = normalized_induced_laplacian(g, verts, degrees)
    if method == "dense" or (method == "auto" and len(verts) <= DENSE_LIMIT):
        lam, vec = sla.eigh(norm_lap.toarray())
        return float(lam[1]), vec[:, 1]
    return _lambda2_power(norm_lap, sqrt_deg, as_generator(rng))


def _undirected_degrees(g: _Graph):
    if g.directed:
        ins, outs = g.weighted_degrees()
        return [a + b for a, b in zip(ins, outs)]
    return g.weighted_degrees()


def _lambda2_power(
    norm_lap: sp.csr_matrix, null_vec: np.ndarray, rng
) -> Tuple[float, np.ndarray]:
    n = norm_lap.shape[0]
    if not np.any(null_vec):
        return 0.0, rng.standard_normal(n)
    v0 = null_vec / np.linalg.norm(null_vec)
    shifted = 2.0 * sp.identity(n, format="csr") - norm_lap
    x = rng.standard_normal(n)
    x -= (v0 @ x) * v0
    x /= np.linalg.norm(x)
    for _ in range(int(200 * math.log(max(n, 2)))):
        x = shifted @ x
        x -= (v0 @ x) * v0
        x /= np.linalg.norm(x)
    estimate = 2.0 - float(x @ (shifted @ x))
    logger.debug(f"Power iteration estimate of lambda_2 on {n} vertices: {estimate:.6g}")
    return estimate, x


def schur_complement(lap: MatrixLike, keep: Iterable[int]) -> np.ndarray:
    """Dense ``L_CC - L_CF L_FF^+ L_FC`` for the kept vertex set ``C``."""
    dense = as_dense(lap)
    keep = sorted(set(keep))
    elim = sorted(set(range(dense.shape[0])) - set(keep))
    if not elim:
        return dense[np.ix_(keep, keep)].copy()
    l_ff = dense[np.ix_(elim, elim)]
    l_fc = dense[np.ix_(elim, keep)]
    l_cf = dense[np.ix_(keep, elim)]
    return dense[np.ix_(keep, keep)] - l_cf @ np.linalg.pinv(l_ff, hermitian=True) @ l_fc
