"""Compile the platform-side census by enumerating targeting formulas.

For one geography and dimension, the compiler asks the reach backend one
question per canonical category (a union of that category's platform source
categories), plus the geography's unconstrained total. A dimension with a
residual category (race) gets that category by exclusion instead: everyone
the platform does not classify into any named category, which folds the
platform's Unknowns into the residual.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..backends import ReachBackend, ReachEstimate
from ..distribution import DemographicDistribution
from ..errors import DomainError, MissingGeography, NegativeResidual
from ..model import (
    DIM_AGE,
    DIM_GENDER,
    SIDE_PLATFORM,
    GeoScope,
    TargetingSpec,
    age_bin_range,
)


def base_spec(geo: GeoScope) -> TargetingSpec:
    """The widest spec for a geography: every platform member 13+, any gender."""
    return TargetingSpec(geo=geo)


def platform_total(backend: ReachBackend, geo: GeoScope) -> ReachEstimate:
    return backend.reach(base_spec(geo))


def _category_estimates(
    backend: ReachBackend, geo: GeoScope, dimension: str
) -> dict[str, ReachEstimate | None]:
    """One reach estimate per canonical category (None: not platform-taggable)."""
    reg_dim = backend.registry.dimension(dimension)
    base = base_spec(geo)
    estimates: dict[str, ReachEstimate | None] = {}

    if dimension == DIM_AGE:
        for cat in reg_dim.category_ids():
            lo, hi = age_bin_range(cat)
            estimates[cat] = backend.reach(base.with_age(lo, hi))
        return estimates

    if dimension == DIM_GENDER:
        for cat in reg_dim.category_ids():
            estimates[cat] = backend.reach(base.with_gender(cat))
        return estimates

    mapping = reg_dim.mapping
    for cat in reg_dim.category_ids():
        if cat == reg_dim.residual:
            continue
        sources = mapping.sources_for(SIDE_PLATFORM, cat)
        if not sources:
            estimates[cat] = None
            continue
        spec = base
        for source in sources:
            spec = spec.with_include(dimension, source)
        estimates[cat] = backend.reach(spec)
    if reg_dim.residual is not None:
        spec = base
        for cat in reg_dim.category_ids():
            if cat == reg_dim.residual:
                continue
            for source in mapping.sources_for(SIDE_PLATFORM, cat):
                spec = spec.with_exclude(dimension, source)
        # Everyone not classified into a named category: the residual group
        # plus the platform's Unknowns.
        estimates[reg_dim.residual] = backend.reach(spec)
    return estimates


def compile_distribution(
    backend: ReachBackend, geo: GeoScope, dimension: str
) -> DemographicDistribution:
    """Platform-side distribution of one dimension inside one geography.

    Counts come straight from reach answers; unspecified is the gap between
    the geography's total reach and the classified counts (platform members
    the dimension says nothing about). Shares are over total reach. Cells
    whose reach may have been censored by the privacy floor are marked
    floor_tainted; a censored total taints every cell.
    """
    total = platform_total(backend, geo)
    estimates = _category_estimates(backend, geo, dimension)
    counts = {cat: (est.count if est is not None else 0) for cat, est in estimates.items()}
    if total.floor_tainted:
        tainted = set(estimates)
    else:
        tainted = {cat for cat, est in estimates.items() if est is not None and est.floor_tainted}
    unspecified = max(0, total.count - sum(counts.values()))
    return DemographicDistribution.from_counts(
        geo,
        dimension,
        counts,
        unspecified=unspecified,
        floor_tainted=tainted,
    )


def compile_platform_census(
    backend: ReachBackend,
    geos: Iterable[GeoScope],
    dimensions: Iterable[str],
    *,
    workers: int = 1,
) -> list[DemographicDistribution]:
    """Compile every geography × dimension cell, in input order.

    workers > 1 fans the pure per-cell compilations out over threads; the
    result order is the submission order either way.
    """
    jobs = [(geo, dim) for geo in geos for dim in dimensions]
    if workers <= 1:
        return [compile_distribution(backend, geo, dim) for geo, dim in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(compile_distribution, backend, geo, dim) for geo, dim in jobs]
        return [future.result() for future in futures]


def derive_residual_race(
    total: float, hispanic: float, african_american: float, asian_american: float
) -> float:
    """White count as the arithmetic remainder of the three named audiences.

    The remainder also absorbs everyone the platform left unclassified, so it
    is an upper bound on the named group. Conservation is exact:
    residual + the three named groups == total.
    """
    named = hispanic + african_american + asian_american
    if named > total:
        raise NegativeResidual(
            f"named categories sum to {named}, more than the total {total}"
        )
    return total - named


@dataclass(frozen=True)
class PyramidRow:
    """One age bin of the male/female population pyramid."""

    age_bin: str
    male: int
    female: int
    male_tainted: bool = False
    female_tainted: bool = False


def age_pyramid_series(backend: ReachBackend, geo: GeoScope) -> list[PyramidRow]:
    """Plot-ready male/female counts per canonical age bin."""
    reg_dim = backend.registry.dimension(DIM_AGE)
    base = base_spec(geo)
    rows = []
    for cat in reg_dim.category_ids():
        lo, hi = age_bin_range(cat)
        male = backend.reach(base.with_age(lo, hi).with_gender("male"))
        female = backend.reach(base.with_age(lo, hi).with_gender("female"))
        rows.append(
            PyramidRow(
                age_bin=cat,
                male=male.count,
                female=female.count,
                male_tainted=male.floor_tainted,
                female_tainted=female.floor_tainted,
            )
        )
    return rows


def coverage_ratio(
    geo: GeoScope,
    platform_totals: Mapping[str, float],
    census_totals: Mapping[str, float],
) -> float:
    """Platform population over census population for one geography.

    Both totals mappings are keyed by GeoScope.key. The ratio can exceed 1:
    platform audiences count devices and duplicates, censuses count persons.
    """
    for side, totals in (("platform", platform_totals), ("census", census_totals)):
        if geo.key not in totals:
            raise MissingGeography(f"no {side} total for {geo}")
    platform = platform_totals[geo.key]
    census = census_totals[geo.key]
    if platform <= 0 or census <= 0:
        raise DomainError(f"{geo}: coverage needs positive totals, got {platform}/{census}")
    return platform / census


@dataclass(frozen=True)
class CoverageRow:
    geography: GeoScope
    platform_total: float
    census_total: float
    ratio: float


def coverage_table(
    geos: Sequence[GeoScope],
    platform_totals: Mapping[str, float],
    census_totals: Mapping[str, float],
) -> list[CoverageRow]:
    """Coverage ratios for many geographies, in input order."""
    return [
        CoverageRow(
            geography=geo,
            platform_total=platform_totals[geo.key],
            census_total=census_totals[geo.key],
            ratio=coverage_ratio(geo, platform_totals, census_totals),
        )
        for geo in geos
    ]
