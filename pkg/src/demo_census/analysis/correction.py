"""Correction factors and post-stratification adjustment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..distribution import SHARE_BASIS_TOTAL, DemographicDistribution
from ..errors import DomainError, MissingStratumCF, ZeroPlatformShare
from ..model import GeoScope

ON_ZERO_RAISE = "raise"
ON_ZERO_SKIP = "skip"

CF_PRODUCT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CorrectionFactor:
    """Multiplier turning one stratum's platform share into its census share.

    cf < 1 means the platform over-represents the stratum. Values are carried
    at full precision; rounding (the published tables use 5 decimals) happens
    only at serialization.
    """

    geography: GeoScope
    dimension: str
    category: str
    platform_share: float
    census_share: float
    cf: float
    floor_tainted: bool = False

    def __post_init__(self):
        if self.platform_share <= 0:
            raise ZeroPlatformShare(
                f"{self.geography} {self.dimension}/{self.category}: "
                f"cf is undefined at platform share {self.platform_share}"
            )
        if abs(self.cf * self.platform_share - self.census_share) > CF_PRODUCT_TOLERANCE:
            raise DomainError(
                f"{self.geography} {self.dimension}/{self.category}: "
                "cf × platform share does not reproduce the census share"
            )


def correction_factors(
    platform_dist: DemographicDistribution,
    census_dist: DemographicDistribution,
    *,
    share_basis: str = SHARE_BASIS_TOTAL,
    on_zero: str = ON_ZERO_RAISE,
) -> list[CorrectionFactor]:
    """Per-category census_share / platform_share for one geography cell.

    Both distributions must describe the same geography, dimension, and
    canonical categories. A category the platform reports as empty has no
    defined factor: on_zero selects whether that raises ZeroPlatformShare or
    skips the cell (callers can detect skips by the missing category).
    """
    if platform_dist.geography.key != census_dist.geography.key:
        raise DomainError(
            f"geography mismatch: {platform_dist.geography} vs {census_dist.geography}"
        )
    if platform_dist.dimension != census_dist.dimension:
        raise DomainError(
            f"dimension mismatch: {platform_dist.dimension} vs {census_dist.dimension}"
        )
    if set(platform_dist.shares) != set(census_dist.shares):
        raise DomainError(
            f"{platform_dist.geography} {platform_dist.dimension}: "
            "category sets differ between platform and census"
        )
    if on_zero not in (ON_ZERO_RAISE, ON_ZERO_SKIP):
        raise DomainError(f"on_zero must be raise or skip, got {on_zero!r}")

    platform_shares = platform_dist.shares_for(share_basis)
    census_shares = census_dist.shares_for(share_basis)
    factors = []
    for category in platform_dist.shares:
        p = platform_shares[category]
        c = census_shares[category]
        if p <= 0:
            if on_zero == ON_ZERO_SKIP:
                continue
            raise ZeroPlatformShare(
                f"{platform_dist.geography} {platform_dist.dimension}/{category}: "
                "platform share is zero"
            )
        factors.append(
            CorrectionFactor(
                geography=platform_dist.geography,
                dimension=platform_dist.dimension,
                category=category,
                platform_share=p,
                census_share=c,
                cf=c / p,
                floor_tainted=category in platform_dist.floor_tainted,
            )
        )
    return factors


def representation_ranking(cfs: Iterable[CorrectionFactor]) -> list[CorrectionFactor]:
    """Strata ordered from most over-represented (lowest cf) to most under-
    represented; ties break by geography name, then category."""
    cfs = list(cfs)
    if not cfs:
        raise DomainError("ranking needs at least one correction factor")
    return sorted(cfs, key=lambda f: (f.cf, f.geography.name, f.category))


@dataclass(frozen=True)
class AdjustedAudience:
    """Post-stratified audience: per-stratum adjusted counts and their total."""

    adjusted: Mapping[str, float]
    total: float
    floor_tainted: frozenset[str] = frozenset()


def post_stratify(
    audience_counts: Mapping[str, float],
    cfs: Iterable[CorrectionFactor],
) -> AdjustedAudience:
    """Scale each stratum's platform count by its correction factor.

    Every audience stratum must have a factor; strata whose factor came from
    a floor-tainted cell are flagged, not dropped, in the result.
    """
    by_category = {cf.category: cf for cf in cfs}
    missing = sorted(set(audience_counts) - set(by_category))
    if missing:
        raise MissingStratumCF(f"no correction factor for strata: {missing}")
    adjusted = {
        stratum: count * by_category[stratum].cf
        for stratum, count in audience_counts.items()
    }
    return AdjustedAudience(
        adjusted=adjusted,
        total=sum(adjusted.values()),
        floor_tainted=frozenset(
            stratum for stratum in audience_counts if by_category[stratum].floor_tainted
        ),
    )
