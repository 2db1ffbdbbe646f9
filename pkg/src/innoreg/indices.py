"""Entropy-based diversity and specialization measures for regional employment.

Implements the Theil entropy index over two-digit industry shares, its
decomposition into unrelated variety (between one-digit sectors) and related
variety (within them), and the Hoover specialization index. Natural
logarithms throughout: the decomposition identity ``theil = related +
unrelated`` only holds with a single base.

Zero shares follow the standard entropy continuity convention
``p * log(p) -> 0`` and therefore never change any index value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

__all__ = [
    "ShareVector",
    "VarietyResult",
    "HooverResult",
    "theil_index",
    "unrelated_variety",
    "related_variety",
    "variety_decomposition",
    "hoover_index",
    "indices_table",
]

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ShareVector:
    """Industry employment shares of one region-year plus the sector map.

    shares: industry code -> share p_i (non-negative, summing to 1).
    parents: industry code -> one-digit parent sector. Coverage is only
    required for industries with positive share; zero-share strays are inert.
    """

    shares: Mapping[str, float]
    parents: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.shares:
            raise ValueError("empty share vector")
        for code, p in self.shares.items():
            if p < 0:
                raise ValueError(f"negative share for industry {code!r}")
        total = math.fsum(self.shares.values())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"shares sum to {total!r}, expected 1 within {_SUM_TOL}")

    @classmethod
    def from_employment(cls, counts: Mapping[str, float],
                        parents: Mapping[str, str] | None = None) -> "ShareVector":
        """Normalize raw employment counts into shares."""
        total = math.fsum(counts.values())
        if total <= 0:
            raise ValueError("total employment must be strictly positive")
        shares = {code: e / total for code, e in counts.items()}
        return cls(shares=shares, parents=dict(parents or {}))

    def positive_items(self):
        return [(code, p) for code, p in self.shares.items() if p > 0]


@dataclass(frozen=True)
class VarietyResult:
    """Entropy decomposition: theil = related + unrelated (within 1e-9)."""

    theil: float
    related: float
    unrelated: float


@dataclass(frozen=True)
class HooverResult:
    """Hoover specialization value in [0, 1] plus its display-scale variant."""

    value: float
    display: float


def theil_index(shares: ShareVector) -> float:
    """Entropy of the share vector: ``sum_i p_i ln(1 / p_i)``.

    0 when a single industry holds everything; ln(n) for n uniform shares.
    """
    items = shares.positive_items()
    if not items:
        raise ValueError("share vector has no positive entries")
    return math.fsum(p * math.log(1.0 / p) for _, p in items)


def _group_sums(shares: ShareVector) -> dict:
    groups: dict = {}
    for code, p in shares.positive_items():
        parent = shares.parents.get(code)
        if parent is None:
            raise ValueError(f"industry {code!r} has no parent sector mapping")
        groups.setdefault(parent, []).append((code, p))
    return groups


def unrelated_variety(shares: ShareVector) -> float:
    """Between-sector entropy: ``sum_g P_g ln(1 / P_g)`` over one-digit sums."""
    groups = _group_sums(shares)
    out = 0.0
    for members in groups.values():
        pg = math.fsum(p for _, p in members)
        if pg > 0:
            out += pg * math.log(1.0 / pg)
    return out


def related_variety(shares: ShareVector) -> float:
    """Within-sector entropy, weighted by sector shares.

    ``sum_g P_g H_g`` with ``H_g = sum_{i in g} (p_i / P_g) ln(P_g / p_i)``;
    sectors with zero share contribute nothing.
    """
    groups = _group_sums(shares)
    out = 0.0
    for members in groups.values():
        pg = math.fsum(p for _, p in members)
        if pg <= 0:
            continue
        out += math.fsum(p * math.log(pg / p) for _, p in members)
    return out


def variety_decomposition(shares: ShareVector) -> VarietyResult:
    """All three measures at once; the identity is the caller's to assert."""
    return VarietyResult(
        theil=theil_index(shares),
        related=related_variety(shares),
        unrelated=unrelated_variety(shares),
    )


def hoover_index(regional: Mapping[str, float], national: Mapping[str, float],
                 scale: float = 100.0) -> HooverResult:
    """Half the L1 distance between regional and national industry shares.

    Codes missing on one side are treated as zero employment there. The raw
    value lives in [0, 1]; ``display`` multiplies by ``scale`` (percentage
    points by default).
    """
    tot_r = math.fsum(regional.values())
    tot_n = math.fsum(national.values())
    if tot_r <= 0 or tot_n <= 0:
        raise ValueError("total employment must be strictly positive on both sides")
    codes = set(regional) | set(national)
    value = 0.5 * math.fsum(
        abs(regional.get(code, 0.0) / tot_r - national.get(code, 0.0) / tot_n)
        for code in codes)
    return HooverResult(value=value, display=value * scale)


def indices_table(employment, industries=None, scale: float = 100.0) -> list:
    """All four measures for every region-year of an employment table.

    Parameters
    ----------
    employment : EmploymentTable-like
        Needs region_years(), employment(region, year), national(year), and a
        parents mapping.
    industries : optional collection restricting the industry codes used (the
        Hoover index in particular is sometimes computed on a subset, e.g.
        manufacturing only).
    scale : display multiplier for the hoover column.

    Returns a list of dicts with keys region, year, theil, related,
    unrelated, hoover.
    """
    keep = None if industries is None else set(industries)
    rows = []
    for region, year in employment.region_years():
        counts = employment.employment(region, year)
        national = employment.national(year)
        if keep is not None:
            counts = {k: v for k, v in counts.items() if k in keep}
            national = {k: v for k, v in national.items() if k in keep}
        sv = ShareVector.from_employment(counts, employment.parents)
        dec = variety_decomposition(sv)
        hv = hoover_index(counts, national, scale=scale)
        rows.append({
            "region": region,
            "year": year,
            "theil": dec.theil,
            "related": dec.related,
            "unrelated": dec.unrelated,
            "hoover": hv.display,
        })
    return rows
