"""Regional rollups of per-country immigrant counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..errors import DomainError


@dataclass(frozen=True)
class RegionRollup:
    """Immigrant totals for one world region, restricted to countries the
    platform can target; the coverage gap is reported, never imputed."""

    region: str
    platform_total: float
    census_total: float
    missing_country_fraction: float
    missing_countries: tuple[str, ...] = ()


def aggregate_regions(
    platform_counts: Mapping[str, float],
    census_counts: Mapping[str, float],
    region_map: Mapping[str, str],
) -> list[RegionRollup]:
    """Sum per-country counts into regions, tracking platform coverage.

    Both totals sum only over countries present on the platform side (a
    zero platform count still means "present"); the missing-country fraction
    is the share of the region's census countries absent from the platform.
    """
    unmapped = sorted(set(census_counts) - set(region_map))
    if unmapped:
        raise DomainError(f"countries with no region assignment: {unmapped}")

    countries_by_region: dict[str, list[str]] = {}
    for country in census_counts:
        countries_by_region.setdefault(region_map[country], []).append(country)

    rollups = []
    for region in sorted(countries_by_region):
        countries = countries_by_region[region]
        present = [c for c in countries if c in platform_counts]
        missing = tuple(sorted(set(countries) - set(present)))
        rollups.append(
            RegionRollup(
                region=region,
                platform_total=sum(platform_counts[c] for c in present),
                census_total=sum(census_counts[c] for c in present),
                missing_country_fraction=len(missing) / len(countries),
                missing_countries=missing,
            )
        )
    return rollups
