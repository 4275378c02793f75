"""Independent checks of cycle decompositions."""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .cycles import CycleDecomposition, PartialCycleDecomposition
from .graph import _Graph

logger = logging.getLogger(__name__)

_STAR = -1

__all__ = ["ValidationReport", "validate_decomposition", "validate_partial"]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validation, with one message per violated check."""

    problems: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


def _is_closed_walk(ends: Sequence[Tuple[int, int]]) -> bool:
    """Whether the edges, in order, form a closed walk for some start orientation."""
    if not ends:
        return False
    for start in set(ends[0]):
        cur = start
        for a, b in ends:
            if cur == a:
                cur = b
            elif cur == b:
                cur = a
            else:
                break
        else:
            if cur == start:
                return True
    return False


def _check_cycles(
    g: _Graph, cycles: Iterable[Sequence[int]], contract: Optional[set], bound: int
) -> List[str]:
    problems = []
    emap = g.edge_map
    seen: Counter = Counter()
    for i, cyc in enumerate(cycles):
        missing = [e for e in cyc if e not in emap]
        if missing:
            problems.append(f"cycle {i} uses unknown edges {missing[:5]}")
            continue
        if len(set(cyc)) != len(cyc):
            problems.append(f"cycle {i} repeats an edge")
        if len(cyc) > bound:
            problems.append(f"cycle {i} has length {len(cyc)} above {bound}")
        ends = []
        for eid in cyc:
            e = emap[eid]
            u, v = e.u, e.v
            if contract is not None:
                u = _STAR if u in contract else u
                v = _STAR if v in contract else v
            ends.append((u, v))
        if not _is_closed_walk(ends):
            problems.append(f"cycle {i} is not a closed walk")
        seen.update(cyc)
    shared = sorted(e for e, c in seen.items() if c > 1)
    if shared:
        problems.append(f"{len(shared)} edges lie on more than one cycle, e.g. {shared[:5]}")
    return problems


def validate_decomposition(g: _Graph, dec: CycleDecomposition) -> ValidationReport:
    """Check that ``dec`` partitions the edges of ``g`` into short cycles and few extras.

    Parameters
    ----------
    g : WeightedMultigraph
        The decomposed graph.
    dec : CycleDecomposition
        Candidate decomposition.

    Returns
    -------
    ValidationReport
        Empty ``problems`` when every check passes.

    Examples
    --------
    >>> from cyclesparse.graph import WeightedMultigraph
    >>> from cyclesparse.cycles import CycleDecomposition
    >>> sq = WeightedMultigraph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    >>> validate_decomposition(sq, CycleDecomposition(((0, 1, 2, 3),), (), 4, 0)).ok
    True
    >>> validate_decomposition(sq, CycleDecomposition(((0, 2),), (1, 3), 4, 2)).ok
    False
    """
    problems = _check_cycles(g, dec.cycles, None, dec.length_bound)
    extras = list(dec.extras)
    if len(extras) > dec.extras_bound:
        problems.append(f"{len(extras)} extras exceed the bound {dec.extras_bound}")
    if len(set(extras)) != len(extras):
        problems.append("an extra edge is listed twice")
    covered = Counter(e for c in dec.cycles for e in c)
    covered.update(extras)
    ids = set(g.edge_ids)
    lost = ids - set(covered)
    unknown = set(covered) - ids
    doubled = sorted(e for e in dec.extras if covered[e] > 1)
    if lost:
        problems.append(f"{len(lost)} edges are neither on a cycle nor extra")
    if unknown:
        problems.append(f"{len(unknown)} listed edges are not in the graph")
    if doubled:
        problems.append(f"edges {doubled[:5]} are both extra and on a cycle")
    if problems:
        logger.debug(f"Decomposition failed {len(problems)} checks")
    return ValidationReport(tuple(problems))


def validate_partial(
    g: _Graph, target: Iterable[int], partial: PartialCycleDecomposition
) -> ValidationReport:
    """Check that ``partial`` holds edge-disjoint cycles of ``g`` with ``target`` contracted."""
    contract = set(target)
    if set(partial.target) != contract:
        return ValidationReport(("partial decomposition was built for another target set",))
    problems = _check_cycles(
        g, (c.edges for c in partial.cycles), contract, partial.length_bound
    )
    return ValidationReport(tuple(problems))
