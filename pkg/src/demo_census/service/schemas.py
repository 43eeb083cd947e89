"""Request/response models for the reach-and-correction service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..analysis.correction import AdjustedAudience, CorrectionFactor
from ..distribution import DemographicDistribution
from ..model import GENDER_ALL, PLATFORM_MIN_AGE, GeoScope, TargetingSpec


class GeoModel(BaseModel):
    level: Literal["country", "state", "city"]
    name: str
    radius_miles: float | None = None

    def to_scope(self) -> GeoScope:
        return GeoScope(self.level, self.name, self.radius_miles)

    @classmethod
    def from_scope(cls, geo: GeoScope) -> "GeoModel":
        return cls(level=geo.level, name=geo.name, radius_miles=geo.radius_miles)


class ConstraintModel(BaseModel):
    dimension: str
    category: str


class ReachRequest(BaseModel):
    geo: GeoModel
    age_lo: int = PLATFORM_MIN_AGE
    age_hi: int | None = None
    gender: str = GENDER_ALL
    includes: list[ConstraintModel] = Field(default_factory=list)
    excludes: list[ConstraintModel] = Field(default_factory=list)

    def to_spec(self) -> TargetingSpec:
        return TargetingSpec(
            geo=self.geo.to_scope(),
            age_lo=self.age_lo,
            age_hi=self.age_hi,
            gender=self.gender,
            includes=[(c.dimension, c.category) for c in self.includes],
            excludes=[(c.dimension, c.category) for c in self.excludes],
        )


class ReachResponse(BaseModel):
    count: int
    floor_applied: bool
    ambiguous_floor: bool
    floor_tainted: bool
    source: str
    spec_key: str


class DistributionModel(BaseModel):
    geography: GeoModel
    dimension: str
    counts: dict[str, float] | None = None
    shares: dict[str, float]
    unspecified: float = 0.0
    excluded: float = 0.0
    floor_tainted: list[str] = Field(default_factory=list)

    @classmethod
    def from_distribution(cls, dist: DemographicDistribution) -> "DistributionModel":
        return cls(
            geography=GeoModel.from_scope(dist.geography),
            dimension=dist.dimension,
            counts=None if dist.counts is None else dict(dist.counts),
            shares=dict(dist.shares),
            unspecified=dist.unspecified,
            excluded=dist.excluded,
            floor_tainted=sorted(dist.floor_tainted),
        )

    def to_distribution(self) -> DemographicDistribution:
        return DemographicDistribution(
            geography=self.geography.to_scope(),
            dimension=self.dimension,
            counts=None if self.counts is None else dict(self.counts),
            shares=dict(self.shares),
            unspecified=self.unspecified,
            excluded=self.excluded,
            floor_tainted=frozenset(self.floor_tainted),
        )


class CompileRequest(BaseModel):
    geo: GeoModel
    dimensions: list[str]


class CompileResponse(BaseModel):
    distributions: list[DistributionModel]


class CorrectionRequest(BaseModel):
    platform: DistributionModel
    census: DistributionModel
    share_basis: Literal["total", "classified"] = "total"


class CorrectionFactorModel(BaseModel):
    geography: GeoModel
    dimension: str
    category: str
    platform_share: float
    census_share: float
    cf: float
    floor_tainted: bool = False

    @classmethod
    def from_factor(cls, factor: CorrectionFactor) -> "CorrectionFactorModel":
        return cls(
            geography=GeoModel.from_scope(factor.geography),
            dimension=factor.dimension,
            category=factor.category,
            platform_share=factor.platform_share,
            census_share=factor.census_share,
            cf=factor.cf,
            floor_tainted=factor.floor_tainted,
        )

    def to_factor(self) -> CorrectionFactor:
        return CorrectionFactor(
            geography=self.geography.to_scope(),
            dimension=self.dimension,
            category=self.category,
            platform_share=self.platform_share,
            census_share=self.census_share,
            cf=self.census_share / self.platform_share,
            floor_tainted=self.floor_tainted,
        )


class CorrectionResponse(BaseModel):
    factors: list[CorrectionFactorModel]


class AdjustRequest(BaseModel):
    audience: dict[str, float]
    factors: list[CorrectionFactorModel]


class AdjustResponse(BaseModel):
    adjusted: dict[str, float]
    total: float
    floor_tainted: list[str]

    @classmethod
    def from_adjusted(cls, adjusted: AdjustedAudience) -> "AdjustResponse":
        return cls(
            adjusted=dict(adjusted.adjusted),
            total=adjusted.total,
            floor_tainted=sorted(adjusted.floor_tainted),
        )


class HealthResponse(BaseModel):
    status: str
    backend: str
    registry_states: int
