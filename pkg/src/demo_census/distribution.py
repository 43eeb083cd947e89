"""Canonical demographic distributions shared by ingestion and analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import DomainError
from .model import GeoScope

SHARE_BASIS_TOTAL = "total"
SHARE_BASIS_CLASSIFIED = "classified"
SHARE_BASES = (SHARE_BASIS_TOTAL, SHARE_BASIS_CLASSIFIED)


@dataclass(frozen=True)
class DemographicDistribution:
    """One geography's distribution over one dimension's canonical categories.

    counts are persons per canonical category. unspecified is the mass inside
    the shared universe that no canonical category classifies (blank
    education, income the platform cannot infer, ages 13-14 outside the
    buckets); excluded is mass outside the shared universe entirely (census
    population under 13). shares are fractions of the universe total
    (categories plus unspecified), so they sum to 1 together with the
    unspecified share. Loss accounting holds exactly:
    sum(counts) + unspecified + excluded == source total.

    Share-only distributions (counts=None, e.g. party-affiliation baselines
    published as percentages) carry shares directly; for those, unspecified
    holds the residual share mass rather than persons.
    """

    geography: GeoScope
    dimension: str
    counts: Mapping[str, float] | None
    shares: Mapping[str, float]
    unspecified: float = 0.0
    excluded: float = 0.0
    floor_tainted: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def from_counts(
        cls,
        geography: GeoScope,
        dimension: str,
        counts: Mapping[str, float],
        unspecified: float = 0.0,
        excluded: float = 0.0,
        floor_tainted=(),
    ) -> "DemographicDistribution":
        counts = dict(counts)
        total = sum(counts.values()) + unspecified
        if total <= 0:
            raise DomainError(
                f"{geography} {dimension}: distribution universe is empty"
            )
        shares = {cat: value / total for cat, value in counts.items()}
        return cls(
            geography=geography,
            dimension=dimension,
            counts=counts,
            shares=shares,
            unspecified=unspecified,
            excluded=excluded,
            floor_tainted=frozenset(floor_tainted),
        )

    @classmethod
    def from_shares(
        cls,
        geography: GeoScope,
        dimension: str,
        shares: Mapping[str, float],
        unspecified_share: float = 0.0,
    ) -> "DemographicDistribution":
        return cls(
            geography=geography,
            dimension=dimension,
            counts=None,
            shares=dict(shares),
            unspecified=unspecified_share,
        )

    @property
    def counts_known(self) -> bool:
        return self.counts is not None

    @property
    def total(self) -> float:
        """Universe total: classified persons plus unspecified (excluded is outside)."""
        if self.counts is None:
            raise DomainError(f"{self.geography} {self.dimension}: share-only distribution")
        return sum(self.counts.values()) + self.unspecified

    @property
    def classified_total(self) -> float:
        if self.counts is None:
            raise DomainError(f"{self.geography} {self.dimension}: share-only distribution")
        return sum(self.counts.values())

    @property
    def unspecified_share(self) -> float:
        if self.counts is None:
            return self.unspecified
        return self.unspecified / self.total

    def classified_shares(self) -> dict[str, float]:
        """Shares renormalized over the classified categories only."""
        mass = sum(self.shares.values())
        if mass <= 0:
            raise DomainError(
                f"{self.geography} {self.dimension}: no classified mass to renormalize"
            )
        return {cat: s / mass for cat, s in self.shares.items()}

    def shares_for(self, basis: str) -> dict[str, float]:
        if basis == SHARE_BASIS_TOTAL:
            return dict(self.shares)
        if basis == SHARE_BASIS_CLASSIFIED:
            return self.classified_shares()
        raise DomainError(f"unknown share basis {basis!r}; expected one of {SHARE_BASES}")
