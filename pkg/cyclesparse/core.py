"""Configuration models and random streams shared by all cyclesparse routines."""
import math
import zlib
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, validator

from .exceptions import InvalidInputRange, InvalidInputValue

DENSE_LIMIT = 500
CYCLE_ALGOS = ["naive", "short"]
MATCHING_RULES = ["stated", "tight"]

__all__ = [
    "CycleConfig",
    "SparsifyConfig",
    "SketchConfig",
    "BicliqueConfig",
    "ReduceConfig",
    "rng_stream",
    "split_rng",
]

RngLike = Union[None, int, np.random.Generator]


def _key_to_int(key: Union[str, int]) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFF
    return zlib.crc32(str(key).encode("utf-8"))


def rng_stream(seed: int, *key: Union[str, int]) -> np.random.Generator:
    """Derive a reproducible generator from a seed and a (module, op, path-index) key.

    Parameters
    ----------
    seed : int
        The user facing seed.
    *key : str or int
        Labels that identify the consumer of the stream, e.g.,
        ``("sparsify", "round", 3)``.

    Returns
    -------
    numpy.random.Generator
        A generator whose state depends only on ``seed`` and ``key``.

    Examples
    --------
    >>> a = rng_stream(7, "cycles", "walk", 0).integers(1000)
    >>> b = rng_stream(7, "cycles", "walk", 0).integers(1000)
    >>> bool(a == b)
    True
    """
    if seed < 0:
        raise InvalidInputRange("seed must be a non-negative integer.")
    spawn_key = tuple(_key_to_int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=spawn_key))


def split_rng(rng: np.random.Generator, count: int) -> List[np.random.Generator]:
    """Derive ``count`` independent child generators from ``rng`` in a fixed order."""
    seeds = rng.integers(0, 2**63 - 1, size=count, dtype=np.int64)
    return [np.random.default_rng(int(s)) for s in seeds]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept a seed, a generator, or None and return a generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return rng_stream(int(rng), "default")


def log2_ceil(n: int) -> int:
    """Return ``ceil(log2(n))`` for positive integers using integer arithmetic."""
    return max(0, (int(n) - 1).bit_length())


class CycleConfig(BaseModel):
    """Knobs of the cycle decomposition routines.

    Parameters
    ----------
    algo : str, optional
        Cycle decomposition algorithm, ``naive`` or ``short``. Defaults to ``naive``.
    levels : int, optional
        Recursion depth of the short cycle decomposition, defaults to 1.
    k : int, optional
        Size parameter; the target set has ``ceil(n/k)`` vertices. Defaults to
        ``ceil(10 log2 n)`` at run time.
    delta_base : float, optional
        The degree threshold is ``delta_base**levels * k``, defaults to 2.
    walk_length : int, optional
        Fixed random walk length. Defaults to ``ceil(10 ln(n) / phi**2)`` capped at
        ``max_walk_length``.
    max_walk_length : int, optional
        Upper bound on the derived walk length, defaults to 256.
    retry_budget : int, optional
        Number of walk rounds before giving up, defaults to 20.
    halve_after : int, optional
        Failed rounds after which the required cycle count is halved, defaults to 10.
    gamma : float, optional
        Boundary ratio used for the edge expansion target ``d_min / (4 gamma)``,
        defaults to 1.
    strict : bool, optional
        Raise on violated size preconditions instead of logging them, defaults to False.
    """

    algo: str = "naive"
    levels: int = 1
    k: Optional[int] = None
    delta_base: float = 2.0
    walk_length: Optional[int] = None
    max_walk_length: int = 256
    retry_budget: int = 20
    halve_after: int = 10
    gamma: float = 1.0
    strict: bool = False

    @validator("algo")
    def _valid_algo(cls, v):
        if v not in CYCLE_ALGOS:
            raise InvalidInputValue("algo", CYCLE_ALGOS)
        return v

    @validator("levels")
    def _valid_levels(cls, v):
        if v < 0:
            raise InvalidInputRange("levels must be non-negative.")
        return v

    @validator("k")
    def _valid_k(cls, v):
        if v is not None and v < 2:
            raise InvalidInputRange("k must be at least 2.")
        return v

    @validator("delta_base", "gamma")
    def _valid_positive(cls, v):
        if v <= 0:
            raise InvalidInputRange("delta_base and gamma must be positive.")
        return v

    @validator("walk_length", "max_walk_length", "retry_budget", "halve_after")
    def _valid_counts(cls, v):
        if v is not None and v < 1:
            raise InvalidInputRange("Walk lengths and retry counts must be positive.")
        return v

    def resolve_k(self, n: int) -> int:
        """Return ``k`` or its default for an ``n`` vertex graph."""
        if self.k is not None:
            return self.k
        return max(2, math.ceil(10 * math.log2(max(n, 2))))


class _EpsModel(BaseModel):
    eps: float = 0.5

    @validator("eps")
    def _valid_eps(cls, v):
        if not 0 < v <= 1:
            raise InvalidInputRange("eps must be in (0, 1].")
        return v


class SparsifyConfig(_EpsModel):
    """Settings of the degree preserving and Eulerian sparsifiers.

    Parameters
    ----------
    eps : float, optional
        Target spectral error, must be in (0, 1]. Defaults to 0.5.
    stop_constant : float, optional
        Constant of the stopping threshold, at least 1. Defaults to 8.
    cycle : CycleConfig, optional
        Cycle decomposition settings.
    seed : int, optional
        Seed of all random streams, defaults to 0.
    theta : float, optional
        Accuracy of resistance estimates as a log factor, defaults to ``ln 1.5``.
    refresh_drift : float, optional
        Accumulated certificate drift that triggers re-estimation, defaults to ``ln(4/3)``.
    max_edges : int, optional
        Explicit stopping edge count that replaces the asymptotic threshold.
    max_rounds : int, optional
        Hard cap on sparsification rounds, defaults to 64.
    certify_rounds : bool, optional
        Measure a dense certificate after every round (only for small graphs),
        defaults to True.
    """

    stop_constant: float = 8.0
    cycle: CycleConfig = CycleConfig()
    seed: int = 0
    theta: float = math.log(1.5)
    refresh_drift: float = math.log(4.0 / 3.0)
    max_edges: Optional[int] = None
    max_rounds: int = 64
    certify_rounds: bool = True

    @validator("stop_constant")
    def _valid_stop(cls, v):
        if v < 1:
            raise InvalidInputRange("stop_constant must be at least 1.")
        return v

    @validator("theta")
    def _valid_theta(cls, v):
        if not 0 < v < 1:
            raise InvalidInputRange("theta must be in (0, 1).")
        return v

    @validator("seed")
    def _valid_seed(cls, v):
        if v < 0:
            raise InvalidInputRange("seed must be a non-negative integer.")
        return v

    @validator("max_edges", "max_rounds")
    def _valid_caps(cls, v):
        if v is not None and v < 1:
            raise InvalidInputRange("max_edges and max_rounds must be positive.")
        return v


class SketchConfig(_EpsModel):
    """Settings of the spectral sketch.

    Parameters
    ----------
    eps : float, optional
        Target per-vector error, must be in (0, 1]. Defaults to 0.5.
    alpha : float, optional
        Degree threshold of the sampling step. Derived from the measured boundary
        ratio when not given.
    alpha_constant : float, optional
        Leading constant of the derived threshold, defaults to 32.
    gamma : float, optional
        Initial boundary ratio estimate, defaults to 4.
    cycle : CycleConfig, optional
        Cycle decomposition settings.
    seed : int, optional
        Seed of all random streams, defaults to 0.
    max_rounds : int, optional
        Cap on rounds, defaults to ``ceil(4 log2 n)``.
    """

    alpha: Optional[float] = None
    alpha_constant: float = 32.0
    gamma: float = 4.0
    cycle: CycleConfig = CycleConfig()
    seed: int = 0
    max_rounds: Optional[int] = None

    @validator("alpha", "alpha_constant", "gamma")
    def _valid_positive(cls, v):
        if v is not None and v <= 0:
            raise InvalidInputRange("alpha, alpha_constant and gamma must be positive.")
        return v


class BicliqueConfig(_EpsModel):
    """Settings of the implicit biclique sketch.

    Parameters
    ----------
    eps : float, optional
        Target error, defaults to 0.5.
    phi : float, optional
        Conductance target of the decomposition, defaults to ``n**(-2/q)``.
    q : int, optional
        Recursion depth, defaults to ``ceil(sqrt(log n / log log n))``.
    c_s : float, optional
        Matchings per biclique in the crude sparsifier are ``ceil(c_s * ln n)``,
        defaults to 48.
    matching_rule : str, optional
        ``stated`` uses ``s = max(eps**-0.5, 4 r / (eps 2**j))``; ``tight`` uses
        ``s = max(eps**-0.5, r eps**-1.5 / d)``. Defaults to ``stated``.
    """

    phi: Optional[float] = None
    q: Optional[int] = None
    c_s: float = 48.0
    matching_rule: str = "stated"

    @validator("phi")
    def _valid_phi(cls, v):
        if v is not None and not 0 < v < 0.5:
            raise InvalidInputRange("phi must be in (0, 0.5).")
        return v

    @validator("q")
    def _valid_q(cls, v):
        if v is not None and v < 0:
            raise InvalidInputRange("q must be non-negative.")
        return v

    @validator("matching_rule")
    def _valid_rule(cls, v):
        if v not in MATCHING_RULES:
            raise InvalidInputValue("matching_rule", MATCHING_RULES)
        return v

    def resolve_q(self, n: int) -> int:
        """Return ``q`` or its default for an ``n`` vertex instance."""
        if self.q is not None:
            return self.q
        ln = math.log(max(n, 3))
        return max(1, math.ceil(math.sqrt(ln / max(math.log(ln), 1e-12))))

    def resolve_phi(self, n: int) -> float:
        """Return ``phi`` or ``n**(-2/q)`` clipped into (0, 0.5)."""
        if self.phi is not None:
            return self.phi
        q = max(self.resolve_q(n), 1)
        return min(0.49, max(float(n) ** (-2.0 / q), 1e-3))


class ReduceConfig(BaseModel):
    """Separation thresholds of the weight reduction.

    Parameters
    ----------
    xi : int, optional
        Bucket period of the weight classes, defaults to ``ceil(4 log2 n)``.
    lead_bits : int, optional
        Leading bits kept per weight, defaults to ``ceil(10 log2 n)``.
    move_threshold : float, optional
        Minimum ratio between the weights of the path a move uses and the moved weight,
        defaults to ``n**4``.
    """

    xi: Optional[int] = None
    lead_bits: Optional[int] = None
    move_threshold: Optional[float] = None

    @validator("xi", "lead_bits")
    def _valid_bits(cls, v):
        if v is not None and v < 1:
            raise InvalidInputRange("xi and lead_bits must be positive.")
        return v

    @validator("move_threshold")
    def _valid_threshold(cls, v):
        if v is not None and v < 1:
            raise InvalidInputRange("move_threshold must be at least 1.")
        return v

    def resolve(self, n: int):
        """Return ``(xi, lead_bits, move_threshold)`` for an ``n`` vertex graph."""
        lg = math.log2(max(n, 2))
        xi = self.xi if self.xi is not None else math.ceil(4 * lg)
        lead = self.lead_bits if self.lead_bits is not None else math.ceil(10 * lg)
        thr = self.move_threshold if self.move_threshold is not None else float(max(n, 2)) ** 4
        return xi, lead, thr
