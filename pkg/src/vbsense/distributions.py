"""Node-perspective degree distributions and their finite-size integerization.

A distribution is a list of (degree, fraction) pairs with fractions summing
to one; fraction_i is the fraction of *nodes* with degree i (not the coding
convention of edge fractions).  Text form mirrors the polynomial notation,
e.g. ``0.9x^3+0.1x^13``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DuplicateDegree,
    InfeasibleEdgeBudget,
    NonPositiveDegree,
    NonUnitMass,
    ValidationError,
)

MASS_TOLERANCE = 1e-9
_TERM_RE = re.compile(r"^(?P<coef>[^x]*)x(?:\^(?P<deg>\d+))?$")


@dataclass(frozen=True)
class DegreeDistribution:
    """Immutable validated degree distribution.

    entries are (degree, fraction) pairs sorted by ascending degree; side
    tags which side of the bipartite graph the distribution describes.
    """

    entries: tuple[tuple[int, float], ...]
    side: str = "variable"

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.entries)

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(f for _, f in self.entries)

    @property
    def mean_degree(self) -> float:
        return float(sum(d * f for d, f in self.entries))

    @property
    def max_degree(self) -> int:
        return self.entries[-1][0]

    @property
    def num_components(self) -> int:
        return len(self.entries)

    def is_regular(self) -> bool:
        return len(self.entries) == 1

    def with_side(self, side: str) -> "DegreeDistribution":
        return DegreeDistribution(self.entries, side)

    def to_text(self) -> str:
        return "+".join(
            (f"x^{d}" if f == 1.0 else f"{f:.12g}x^{d}") for d, f in self.entries
        )

    def to_json(self) -> str:
        return json.dumps([[d, f] for d, f in self.entries])

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.to_text()


def make_distribution(
    entries: Iterable[tuple[int, float]],
    side: str = "variable",
    normalize: bool = False,
) -> DegreeDistribution:
    """Validate (degree, fraction) pairs into a DegreeDistribution.

    Rejects duplicate or non-positive degrees, non-positive fractions, and
    total mass off one by more than 1e-9 unless ``normalize`` is set, in
    which case fractions are rescaled to unit mass.
    """
    pairs = [(int(d), float(f)) for d, f in entries]
    if not pairs:
        raise ValidationError("degree distribution needs at least one entry")
    if side not in ("variable", "check"):
        raise ValidationError(f"unknown side {side!r}")
    for d, f in pairs:
        if d < 1:
            raise NonPositiveDegree(f"degree {d} must be >= 1")
        if f <= 0:
            raise NonPositiveDegree(f"fraction {f} for degree {d} must be > 0")
    degrees = [d for d, _ in pairs]
    if len(set(degrees)) != len(degrees):
        dup = sorted(d for d in set(degrees) if degrees.count(d) > 1)
        raise DuplicateDegree(f"degree(s) {dup} repeated")
    mass = sum(f for _, f in pairs)
    if abs(mass - 1.0) > MASS_TOLERANCE:
        if not normalize:
            raise NonUnitMass(f"fractions sum to {mass!r}, not 1")
        pairs = [(d, f / mass) for d, f in pairs]
    pairs.sort()
    return DegreeDistribution(tuple(pairs), side)


def mean_degree(dd: DegreeDistribution) -> float:
    """Average degree, sum of degree times node fraction."""
    return dd.mean_degree


def parse_distribution(text: str, side: str = "variable") -> DegreeDistribution:
    """Parse polynomial text like ``0.9x^3+0.1x^13`` or ``14/15x^3+1/15x^18``.

    Whitespace-insensitive; a bare ``x^k`` term has coefficient 1; ``x``
    means degree 1; coefficients may be decimals or rationals ``p/q``.
    """
    compact = text.replace(" ", "")
    if not compact:
        raise ValidationError("empty distribution string")
    entries = []
    for term in compact.split("+"):
        m = _TERM_RE.match(term)
        if m is None:
            raise ValidationError(f"cannot parse term {term!r} in {text!r}")
        coef_s = m.group("coef")
        if coef_s in ("", "1", "1.0"):
            coef = 1.0
        elif "/" in coef_s:
            coef = float(Fraction(coef_s))
        else:
            try:
                coef = float(coef_s)
            except ValueError as exc:
                raise ValidationError(f"bad coefficient {coef_s!r} in {text!r}") from exc
        deg = int(m.group("deg")) if m.group("deg") else 1
        entries.append((deg, coef))
    return make_distribution(entries, side=side)


def distribution_from_json(text: str, side: str = "variable") -> DegreeDistribution:
    data = json.loads(text)
    return make_distribution([(int(d), float(f)) for d, f in data], side=side)


def node_counts(dd: DegreeDistribution, count: int, edge_budget: int) -> dict[int, int]:
    """Integer node counts per degree hitting ``count`` nodes and exactly
    ``edge_budget`` edge endpoints.

    Starts from largest-remainder rounding of fraction*count, then repairs
    the edge sum by moving single nodes between adjacent support degrees.
    Raises InfeasibleEdgeBudget when no assignment can hit the budget.
    """
    if count < 1 or edge_budget < 1:
        raise ValidationError("count and edge_budget must be positive")
    degrees = list(dd.degrees)
    fractions = list(dd.fractions)
    raw = [f * count for f in fractions]
    base = [int(x) for x in raw]
    deficit = count - sum(base)
    remainders = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), degrees[i]))
    for i in remainders[:deficit]:
        base[i] += 1

    lo = min(degrees) * count
    hi = max(degrees) * count
    if not lo <= edge_budget <= hi:
        raise InfeasibleEdgeBudget(
            f"budget {edge_budget} outside [{lo}, {hi}] for {count} nodes on support {degrees}"
        )

    counts = base
    diff = edge_budget - sum(d * c for d, c in zip(degrees, counts))
    # Move one node between adjacent support degrees per step; each step
    # changes the edge sum by that gap and strictly shrinks |diff| when a
    # usable gap exists, so the loop is bounded.
    guard = 4 * count * max(1, len(degrees))
    while diff != 0 and guard > 0:
        guard -= 1
        moved = False
        if diff > 0:
            for k in range(len(degrees) - 1):
                gap = degrees[k + 1] - degrees[k]
                if counts[k] > 0 and gap <= diff:
                    counts[k] -= 1
                    counts[k + 1] += 1
                    diff -= gap
                    moved = True
                    break
        else:
            for k in range(len(degrees) - 1, 0, -1):
                gap = degrees[k] - degrees[k - 1]
                if counts[k] > 0 and gap <= -diff:
                    counts[k] -= 1
                    counts[k - 1] += 1
                    diff += gap
                    moved = True
                    break
        if not moved:
            # No single move fits inside |diff|; take the smallest overshoot.
            best = None
            if diff > 0:
                for k in range(len(degrees) - 1):
                    if counts[k] > 0:
                        gap = degrees[k + 1] - degrees[k]
                        if best is None or gap < best[0]:
                            best = (gap, k, k + 1)
            else:
                for k in range(len(degrees) - 1, 0, -1):
                    if counts[k] > 0:
                        gap = degrees[k] - degrees[k - 1]
                        if best is None or gap < best[0]:
                            best = (gap, k, k - 1)
            if best is None:
                raise InfeasibleEdgeBudget(
                    f"cannot reach budget {edge_budget} on support {degrees}"
                )
            gap, src, dst = best
            counts[src] -= 1
            counts[dst] += 1
            diff += gap if dst < src else -gap
    if diff != 0:
        raise InfeasibleEdgeBudget(
            f"no integer assignment on support {degrees} hits budget {edge_budget}"
        )
    return {d: c for d, c in zip(degrees, counts) if c > 0}


def expand_degrees(counts: dict[int, int]) -> Sequence[int]:
    """Per-node degree list, ascending node index gets ascending degree."""
    out = []
    for d in sorted(counts):
        out.extend([d] * counts[d])
    return out
