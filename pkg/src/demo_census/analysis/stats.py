"""Correlation statistics between platform and baseline share series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..distribution import SHARE_BASIS_CLASSIFIED, DemographicDistribution
from ..errors import DegenerateVariance, DomainError

Z_95 = 1.96  # two-sided normal quantile behind the 95% interval


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient, clamped into [-1, 1]."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DomainError("pearson needs two equal-length vectors")
    if xs.size < 2:
        raise DomainError("pearson needs at least two observations")
    xm = xs - xs.mean()
    ym = ys - ys.mean()
    sx = float(xm @ xm)
    sy = float(ym @ ym)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateVariance("pearson is undefined for a constant vector")
    denom = math.sqrt(sx * sy)
    if denom == 0.0 or math.isinf(denom):
        # sx * sy under/overflowed even though both factors are finite and
        # nonzero; multiplying the square roots instead stays in range
        denom = math.sqrt(sx) * math.sqrt(sy)
    r = float(xm @ ym) / denom
    return min(1.0, max(-1.0, r))


def pearson_ci95(r: float, n: int) -> tuple[float, float]:
    """95% confidence interval for r via the Fisher z transform."""
    if n <= 3:
        raise DomainError(f"confidence interval needs n > 3 samples, got {n}")
    if not -1.0 < r < 1.0:
        raise DomainError(f"confidence interval is undefined at |r| = 1 (r={r})")
    z = math.atanh(r)
    half_width = Z_95 / math.sqrt(n - 3)
    return (math.tanh(z - half_width), math.tanh(z + half_width))


@dataclass(frozen=True)
class CorrelationReport:
    """Correlation of one category's shares across geographies of one level.

    category is the platform-side category; baseline_category differs only
    for shifted-bucket diagnostics (platform bucket k against baseline bucket
    k-1 and the like).
    """

    dimension: str
    category: str
    level: str
    n: int
    r: float
    ci95: tuple[float, float]
    baseline_category: str | None = None

    def __post_init__(self):
        if self.n < 4:
            raise DomainError(f"correlation report needs n >= 4, got {self.n}")
        lo, hi = self.ci95
        if not lo <= self.r <= hi:
            raise DomainError(f"interval [{lo}, {hi}] does not contain r={self.r}")

    @property
    def baseline(self) -> str:
        return self.baseline_category if self.baseline_category is not None else self.category


def _paired_shares(
    platform_dists: Iterable[DemographicDistribution],
    census_dists: Iterable[DemographicDistribution],
    platform_cat: str,
    census_cat: str,
    basis: str,
    include_tainted: bool,
) -> tuple[list[float], list[float], str, str]:
    """Per-geography (platform share, baseline share) pairs for two categories."""
    platform_by_geo: dict[str, DemographicDistribution] = {}
    census_by_geo: dict[str, DemographicDistribution] = {}
    dimension = None
    for side, dists in (("platform", platform_dists), ("baseline", census_dists)):
        for dist in dists:
            if dimension is None:
                dimension = dist.dimension
            elif dist.dimension != dimension:
                raise DomainError(
                    f"mixed dimensions in correlation input: {dimension} vs {dist.dimension}"
                )
            by_geo = platform_by_geo if side == "platform" else census_by_geo
            if dist.geography.key in by_geo:
                raise DomainError(f"duplicate {side} distribution for {dist.geography}")
            by_geo[dist.geography.key] = dist
    common = sorted(set(platform_by_geo) & set(census_by_geo))
    if not common:
        raise DomainError("no geography appears on both sides")
    levels = {platform_by_geo[key].geography.level for key in common}
    if len(levels) != 1:
        raise DomainError(f"correlation spans mixed geography levels: {sorted(levels)}")

    xs: list[float] = []
    ys: list[float] = []
    for key in common:
        platform = platform_by_geo[key]
        census = census_by_geo[key]
        if not include_tainted and platform_cat in platform.floor_tainted:
            continue
        p_shares = platform.shares_for(basis)
        c_shares = census.shares_for(basis)
        if platform_cat not in p_shares:
            raise DomainError(f"platform side lacks category {platform_cat!r}")
        if census_cat not in c_shares:
            raise DomainError(f"baseline side lacks category {census_cat!r}")
        xs.append(p_shares[platform_cat])
        ys.append(c_shares[census_cat])
    assert dimension is not None
    return xs, ys, levels.pop(), dimension


def shifted_bucket_correlation(
    platform_dists: Iterable[DemographicDistribution],
    census_dists: Iterable[DemographicDistribution],
    platform_cat: str,
    census_cat: str,
    *,
    basis: str = SHARE_BASIS_CLASSIFIED,
    include_tainted: bool = False,
) -> CorrelationReport:
    """Correlate the platform share of one category with the baseline share
    of a (possibly different) category across geographies.

    With distinct categories this is the bucket-misalignment diagnostic; with
    identical categories it reduces to the ordinary per-category correlation.
    Floor-tainted platform cells are dropped unless include_tainted is set.
    """
    xs, ys, level, dimension = _paired_shares(
        platform_dists, census_dists, platform_cat, census_cat, basis, include_tainted
    )
    if len(xs) < 4:
        raise DomainError(
            f"{dimension}/{platform_cat}: only {len(xs)} usable geography pairs, need 4"
        )
    r = pearson(xs, ys)
    if not -1.0 < r < 1.0:
        raise DomainError(f"{dimension}/{platform_cat}: |r| = 1, interval undefined")
    return CorrelationReport(
        dimension=dimension,
        category=platform_cat,
        level=level,
        n=len(xs),
        r=r,
        ci95=pearson_ci95(r, len(xs)),
        baseline_category=None if census_cat == platform_cat else census_cat,
    )


def correlate_category(
    platform_dists: Iterable[DemographicDistribution],
    census_dists: Iterable[DemographicDistribution],
    category: str,
    *,
    basis: str = SHARE_BASIS_CLASSIFIED,
    include_tainted: bool = False,
) -> CorrelationReport:
    """Per-category share correlation across geographies."""
    return shifted_bucket_correlation(
        platform_dists,
        census_dists,
        category,
        category,
        basis=basis,
        include_tainted=include_tainted,
    )


def correlation_table(
    platform_dists: Sequence[DemographicDistribution],
    census_dists: Sequence[DemographicDistribution],
    *,
    basis: str = SHARE_BASIS_CLASSIFIED,
    include_tainted: bool = False,
) -> tuple[list[CorrelationReport], list[str]]:
    """One report per canonical category of one dimension's distributions.

    Categories that cannot be correlated (too few usable geographies, a
    constant series, a side missing the category) are skipped and explained
    in the second return value rather than failing the whole table.
    """
    if not platform_dists:
        raise DomainError("correlation table needs at least one platform distribution")
    categories = list(platform_dists[0].shares)
    reports: list[CorrelationReport] = []
    skipped: list[str] = []
    for category in categories:
        try:
            reports.append(
                correlate_category(
                    platform_dists,
                    census_dists,
                    category,
                    basis=basis,
                    include_tainted=include_tainted,
                )
            )
        except (DegenerateVariance, DomainError) as exc:
            skipped.append(f"{platform_dists[0].dimension}/{category}: {exc}")
    return reports, skipped
