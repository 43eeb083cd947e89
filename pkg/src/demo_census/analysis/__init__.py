"""Comparison and correction analytics over compiled and baseline distributions."""

from .compile import (
    CoverageRow,
    PyramidRow,
    age_pyramid_series,
    base_spec,
    compile_distribution,
    compile_platform_census,
    coverage_ratio,
    coverage_table,
    derive_residual_race,
    platform_total,
)
from .correction import (
    AdjustedAudience,
    CorrectionFactor,
    correction_factors,
    post_stratify,
    representation_ranking,
)
from .regions import RegionRollup, aggregate_regions
from .stats import (
    CorrelationReport,
    correlate_category,
    correlation_table,
    pearson,
    pearson_ci95,
    shifted_bucket_correlation,
)

__all__ = [
    "AdjustedAudience",
    "CorrectionFactor",
    "CorrelationReport",
    "CoverageRow",
    "PyramidRow",
    "RegionRollup",
    "age_pyramid_series",
    "aggregate_regions",
    "base_spec",
    "compile_distribution",
    "compile_platform_census",
    "correlate_category",
    "correlation_table",
    "correction_factors",
    "coverage_ratio",
    "coverage_table",
    "derive_residual_race",
    "pearson",
    "pearson_ci95",
    "platform_total",
    "post_stratify",
    "representation_ranking",
    "shifted_bucket_correlation",
]
