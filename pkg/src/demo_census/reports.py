"""File emission for compiled distributions and comparison analytics.

Two output formats share the same row schemas: ``delim`` writes CSV, and
``struct`` writes a JSON array of row objects. Numeric presentation is fixed
here (correction factors at 5 decimals, shares at 6) so outputs are
deterministic byte-for-byte for a given input; every file is written to a
temporary sibling and renamed into place, so failures never leave partial
files.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .analysis.compile import CoverageRow, PyramidRow
from .analysis.correction import AdjustedAudience, CorrectionFactor
from .analysis.regions import RegionRollup
from .analysis.stats import CorrelationReport
from .distribution import DemographicDistribution
from .errors import DomainError
from .model import EXCLUDED, UNSPECIFIED, GeoScope

FORMAT_DELIM = "delim"
FORMAT_STRUCT = "struct"
FORMATS = (FORMAT_DELIM, FORMAT_STRUCT)

CF_DECIMALS = 5
SHARE_DECIMALS = 6
RATIO_DECIMALS = 4

Row = dict[str, object]


def sanitize(name: str) -> str:
    """Geography and category names as filename-safe tokens."""
    return re.sub(r"[^A-Za-z0-9.+-]+", "_", name).strip("_")


def geo_token(geo: GeoScope) -> str:
    return f"{geo.level}__{sanitize(geo.name)}"


def write_rows(path: Path, fieldnames: Sequence[str], rows: Iterable[Row], fmt: str) -> Path:
    """Write rows atomically in the chosen format; returns the final path."""
    rows = list(rows)
    if fmt == FORMAT_DELIM:
        path = path.with_suffix(".csv")
    elif fmt == FORMAT_STRUCT:
        path = path.with_suffix(".json")
    else:
        raise DomainError(f"unknown output format {fmt!r}; expected one of {FORMATS}")

    tmp = path.with_name(path.name + ".tmp")
    path.parent.mkdir(parents=True, exist_ok=True)
    with tmp.open("w", encoding="utf-8", newline="") as handle:
        if fmt == FORMAT_DELIM:
            writer = csv.DictWriter(handle, fieldnames=list(fieldnames))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_value(row.get(k)) for k in fieldnames})
        else:
            json.dump(rows, handle, indent=2, sort_keys=True)
            handle.write("\n")
    tmp.replace(path)
    return path


def _csv_value(value: object) -> str:
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    return str(value)


def _round(value: float, decimals: int) -> float:
    return round(float(value), decimals)


# -- row builders ----------------------------------------------------------


def distribution_rows(dist: DemographicDistribution) -> list[Row]:
    rows: list[Row] = []
    classified = None
    try:
        classified = dist.classified_shares()
    except DomainError:
        pass  # no classified mass; leave the column empty
    for category, share in dist.shares.items():
        rows.append(
            {
                "category": category,
                "count": None if dist.counts is None else dist.counts[category],
                "share": _round(share, SHARE_DECIMALS),
                "share_classified": (
                    None if classified is None else _round(classified[category], SHARE_DECIMALS)
                ),
                "floor_tainted": category in dist.floor_tainted,
            }
        )
    rows.append(
        {
            "category": UNSPECIFIED,
            "count": None if dist.counts is None else dist.unspecified,
            "share": _round(dist.unspecified_share, SHARE_DECIMALS),
            "share_classified": None,
            "floor_tainted": False,
        }
    )
    if dist.excluded:
        rows.append(
            {
                "category": EXCLUDED,
                "count": dist.excluded,
                "share": None,  # outside the universe the shares describe
                "share_classified": None,
                "floor_tainted": False,
            }
        )
    return rows


def correlation_rows(reports: Iterable[CorrelationReport]) -> list[Row]:
    return [
        {
            "dimension": r.dimension,
            "category": r.category,
            "baseline_category": r.baseline,
            "level": r.level,
            "n": r.n,
            "r": _round(r.r, RATIO_DECIMALS),
            "ci_lo": _round(r.ci95[0], RATIO_DECIMALS),
            "ci_hi": _round(r.ci95[1], RATIO_DECIMALS),
        }
        for r in reports
    ]


def correction_rows(factors: Iterable[CorrectionFactor]) -> list[Row]:
    return [
        {
            "geography": f.geography.name,
            "level": f.geography.level,
            "dimension": f.dimension,
            "category": f.category,
            "platform_share": _round(f.platform_share, SHARE_DECIMALS),
            "census_share": _round(f.census_share, SHARE_DECIMALS),
            "cf": _round(f.cf, CF_DECIMALS),
            "floor_tainted": f.floor_tainted,
        }
        for f in factors
    ]


def ranking_rows(ranked: Sequence[CorrectionFactor]) -> list[Row]:
    return [
        {
            "rank": i + 1,
            "geography": f.geography.name,
            "dimension": f.dimension,
            "category": f.category,
            "cf": _round(f.cf, CF_DECIMALS),
        }
        for i, f in enumerate(ranked)
    ]


def coverage_rows(rows: Iterable[CoverageRow], basis: str) -> list[Row]:
    return [
        {
            "geography": row.geography.name,
            "level": row.geography.level,
            "census_basis": basis,
            "platform_total": row.platform_total,
            "census_total": row.census_total,
            "ratio": _round(row.ratio, RATIO_DECIMALS),
        }
        for row in rows
    ]


def pyramid_rows(rows: Iterable[PyramidRow]) -> list[Row]:
    return [
        {
            "age_bin": row.age_bin,
            "male": row.male,
            "female": row.female,
            "male_tainted": row.male_tainted,
            "female_tainted": row.female_tainted,
        }
        for row in rows
    ]


def scatter_rows(
    platform_dists: Iterable[DemographicDistribution],
    census_dists: Iterable[DemographicDistribution],
    category: str,
    basis: str,
) -> list[Row]:
    """Per-geography (platform share, census share) points for one category."""
    census_by_geo = {d.geography.key: d for d in census_dists}
    rows: list[Row] = []
    for platform in platform_dists:
        census = census_by_geo.get(platform.geography.key)
        if census is None:
            continue
        p = platform.shares_for(basis).get(category)
        c = census.shares_for(basis).get(category)
        if p is None or c is None:
            continue
        rows.append(
            {
                "geography": platform.geography.name,
                "platform_share": _round(p, SHARE_DECIMALS),
                "census_share": _round(c, SHARE_DECIMALS),
                "floor_tainted": category in platform.floor_tainted,
            }
        )
    rows.sort(key=lambda row: str(row["geography"]))
    return rows


def adjusted_rows(audience: Mapping[str, float], adjusted: AdjustedAudience) -> list[Row]:
    rows: list[Row] = [
        {
            "stratum": stratum,
            "count": audience[stratum],
            "adjusted": _round(adjusted.adjusted[stratum], RATIO_DECIMALS),
            "floor_tainted": stratum in adjusted.floor_tainted,
        }
        for stratum in audience
    ]
    rows.append(
        {
            "stratum": "@total",
            "count": sum(audience.values()),
            "adjusted": _round(adjusted.total, RATIO_DECIMALS),
            "floor_tainted": bool(adjusted.floor_tainted),
        }
    )
    return rows


def region_rows(rollups: Iterable[RegionRollup]) -> list[Row]:
    return [
        {
            "region": r.region,
            "platform_total": r.platform_total,
            "census_total": r.census_total,
            "missing_country_fraction": _round(r.missing_country_fraction, RATIO_DECIMALS),
            "missing_countries": ";".join(r.missing_countries),
        }
        for r in rollups
    ]


# -- whole-file writers ----------------------------------------------------


DISTRIBUTION_FIELDS = ("category", "count", "share", "share_classified", "floor_tainted")
CORRELATION_FIELDS = (
    "dimension", "category", "baseline_category", "level", "n", "r", "ci_lo", "ci_hi",
)
CORRECTION_FIELDS = (
    "geography", "level", "dimension", "category",
    "platform_share", "census_share", "cf", "floor_tainted",
)
RANKING_FIELDS = ("rank", "geography", "dimension", "category", "cf")
COVERAGE_FIELDS = (
    "geography", "level", "census_basis", "platform_total", "census_total", "ratio",
)
PYRAMID_FIELDS = ("age_bin", "male", "female", "male_tainted", "female_tainted")
SCATTER_FIELDS = ("geography", "platform_share", "census_share", "floor_tainted")
ADJUSTED_FIELDS = ("stratum", "count", "adjusted", "floor_tainted")
REGION_FIELDS = (
    "region", "platform_total", "census_total",
    "missing_country_fraction", "missing_countries",
)


def write_distribution(out_dir: Path, dist: DemographicDistribution, fmt: str) -> Path:
    name = f"distribution__{geo_token(dist.geography)}__{dist.dimension}"
    return write_rows(out_dir / name, DISTRIBUTION_FIELDS, distribution_rows(dist), fmt)


def write_correlations(
    out_dir: Path, level: str, dimension: str, reports: Iterable[CorrelationReport], fmt: str
) -> Path:
    name = f"correlations__{level}__{dimension}"
    return write_rows(out_dir / name, CORRELATION_FIELDS, correlation_rows(reports), fmt)


def write_correction_factors(
    out_dir: Path, level: str, dimension: str, factors: Iterable[CorrectionFactor], fmt: str
) -> Path:
    name = f"correction_factors__{level}__{dimension}"
    return write_rows(out_dir / name, CORRECTION_FIELDS, correction_rows(factors), fmt)


def write_ranking(
    out_dir: Path, level: str, dimension: str, ranked: Sequence[CorrectionFactor], fmt: str
) -> Path:
    name = f"representation_ranking__{level}__{dimension}"
    return write_rows(out_dir / name, RANKING_FIELDS, ranking_rows(ranked), fmt)


def write_coverage(out_dir: Path, level: str, rows: list[Row], fmt: str) -> Path:
    return write_rows(out_dir / f"coverage__{level}", COVERAGE_FIELDS, rows, fmt)


def write_pyramid(out_dir: Path, geo: GeoScope, rows: Iterable[PyramidRow], fmt: str) -> Path:
    name = f"age_pyramid__{geo_token(geo)}"
    return write_rows(out_dir / name, PYRAMID_FIELDS, pyramid_rows(rows), fmt)


def write_scatter(
    out_dir: Path, level: str, dimension: str, category: str, rows: list[Row], fmt: str
) -> Path:
    name = f"scatter__{level}__{dimension}__{sanitize(category)}"
    return write_rows(out_dir / name, SCATTER_FIELDS, rows, fmt)


def write_adjusted(
    out_dir: Path,
    name: str,
    audience: Mapping[str, float],
    adjusted: AdjustedAudience,
    fmt: str,
) -> Path:
    path = out_dir / f"adjusted__{sanitize(name)}"
    return write_rows(path, ADJUSTED_FIELDS, adjusted_rows(audience, adjusted), fmt)


def write_regions(out_dir: Path, geo: GeoScope, rollups: Iterable[RegionRollup], fmt: str) -> Path:
    name = f"regions__{geo_token(geo)}"
    return write_rows(out_dir / name, REGION_FIELDS, region_rows(rollups), fmt)
