"""Demographics of an ad platform's audience versus official baselines.

The package turns an ad platform's audience-reach estimator into a
demographic data source: enumerate targeting formulas per geography, compile
the answers into distributions, compare them against official baselines
(correlations, coverage), derive correction factors, and post-stratify
audiences of interest back to population scale. A seeded synthetic
population stands in for the real platform so every number is reproducible
and checkable against ground truth.
"""

from .analysis import (
    AdjustedAudience,
    CorrectionFactor,
    CorrelationReport,
    CoverageRow,
    PyramidRow,
    RegionRollup,
    age_pyramid_series,
    aggregate_regions,
    base_spec,
    compile_distribution,
    compile_platform_census,
    correlate_category,
    correlation_table,
    correction_factors,
    coverage_ratio,
    coverage_table,
    derive_residual_race,
    pearson,
    pearson_ci95,
    platform_total,
    post_stratify,
    representation_ranking,
    shifted_bucket_correlation,
)
from .backends import (
    DIM_INTEREST,
    PRIVACY_FLOOR,
    FixtureBackend,
    FixtureStore,
    ReachEstimate,
    SyntheticBackend,
    load_fixtures,
    record_fixture,
    save_fixtures,
    significant_digits_policy,
    spec_key,
)
from .distribution import (
    SHARE_BASIS_CLASSIFIED,
    SHARE_BASIS_TOTAL,
    DemographicDistribution,
)
from .errors import (
    ConflictingConstraint,
    DegenerateVariance,
    DemoCensusError,
    DomainError,
    FixtureMiss,
    FloorViolation,
    GeographyUnknown,
    MalformedTable,
    MissingGeography,
    MissingStratumCF,
    NegativeResidual,
    RegistryError,
    UnmappedCategory,
    UnsupportedGranularity,
    ZeroPlatformShare,
)
from .ingest import (
    CensusTable,
    ImmigrantCounts,
    ingest_acs,
    ingest_immigrants,
    ingest_party_affiliation,
    parse_extract,
    parse_extract_file,
)
from .model import (
    DIM_AGE,
    DIM_EDUCATION,
    DIM_GENDER,
    DIM_INCOME,
    DIM_ORIGIN,
    DIM_POLITICAL,
    DIM_RACE,
    DIMENSIONS,
    PLATFORM_MIN_AGE,
    Category,
    CategoryMapping,
    Dimension,
    GeoScope,
    MappingEntry,
    TargetingSpec,
    age_bin_range,
    map_to_canonical,
    with_exclude,
    with_include,
)
from .population import (
    GenerationConfig,
    Individual,
    SyntheticPopulation,
    generate_population,
)
from .registry import (
    Registry,
    default_registry_path,
    iter_geographies,
    load_default_registry,
    load_registry,
    parse_registry,
    validate_registry,
)

__version__ = "0.1.0"
