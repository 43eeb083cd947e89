"""Audience model: geographies, dimensions, category mappings, targeting specs.

The vocabulary lives in a registry file (see registry.py); this module defines
the immutable types and the targeting-spec algebra. A targeting spec is a
conjunctive audience definition: geography, age range, gender, plus attribute
includes and excludes. Within one dimension multiple includes are a union;
across dimensions constraints intersect. Excludes subtract only
positively-classified users, so individuals with an unknown value for an
excluded dimension are retained.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ConflictingConstraint, UnmappedCategory

# Platform rules: no users under 13, and no stratification above 65.
PLATFORM_MIN_AGE = 13
OPEN_AGE_BUCKET_START = 65

CITY_RADIUS_MIN = 10.0
CITY_RADIUS_MAX = 30.0
CITY_RADIUS_DEFAULT = 30.0

LEVEL_COUNTRY = "country"
LEVEL_STATE = "state"
LEVEL_CITY = "city"
GEO_LEVELS = (LEVEL_COUNTRY, LEVEL_STATE, LEVEL_CITY)

GENDER_ALL = "all"
GENDER_MALE = "male"
GENDER_FEMALE = "female"
GENDERS = (GENDER_ALL, GENDER_MALE, GENDER_FEMALE)

SIDE_PLATFORM = "platform"
SIDE_CENSUS = "census"
SIDES = (SIDE_PLATFORM, SIDE_CENSUS)

DIM_GENDER = "gender"
DIM_AGE = "age"
DIM_RACE = "race"
DIM_INCOME = "income"
DIM_EDUCATION = "education"
DIM_POLITICAL = "political_leaning"
DIM_ORIGIN = "country_of_origin"
DIMENSIONS = (
    DIM_GENDER,
    DIM_AGE,
    DIM_RACE,
    DIM_INCOME,
    DIM_EDUCATION,
    DIM_POLITICAL,
    DIM_ORIGIN,
)

# Reserved mapping targets for loss accounting: rows inside the shared
# universe but outside the canonical buckets, and rows outside the shared
# universe entirely (e.g. census population under 13).
UNSPECIFIED = "@unspecified"
EXCLUDED = "@excluded"
RESERVED_TARGETS = (UNSPECIFIED, EXCLUDED)

_AGE_BIN = re.compile(r"^(\d+)-(\d+)$")
_AGE_OPEN = re.compile(r"^(\d+)\+$")


def age_bin_range(category_id: str) -> tuple[int, int | None]:
    """Return the (lo, hi) year range of an age bucket id like '15-19' or '65+'."""
    m = _AGE_BIN.match(category_id)
    if m:
        return int(m.group(1)), int(m.group(2))
    m = _AGE_OPEN.match(category_id)
    if m:
        return int(m.group(1)), None
    raise ValueError(f"not an age bucket id: {category_id!r}")


@dataclass(frozen=True)
class GeoScope:
    """A geography: the whole country, one state, or a city disc.

    City scopes carry a radius in miles (platform minimum 10, default 30);
    membership is a closed disc around the registered city center in the
    state's planar coordinate frame.
    """

    level: str
    name: str
    radius_miles: float | None = None

    def __post_init__(self):
        if self.level not in GEO_LEVELS:
            raise ValueError(f"unknown geography level {self.level!r}")
        if not self.name:
            raise ValueError("geography name must be nonempty")
        if self.level == LEVEL_CITY:
            radius = CITY_RADIUS_DEFAULT if self.radius_miles is None else float(self.radius_miles)
            if not CITY_RADIUS_MIN <= radius <= CITY_RADIUS_MAX:
                raise ValueError(
                    f"city radius must lie in [{CITY_RADIUS_MIN:g}, {CITY_RADIUS_MAX:g}] miles, got {radius:g}"
                )
            object.__setattr__(self, "radius_miles", radius)
        elif self.radius_miles is not None:
            raise ValueError("radius_miles only applies to city scopes")

    @property
    def key(self) -> str:
        if self.level == LEVEL_CITY:
            return f"{self.level}:{self.name}:r{self.radius_miles:g}"
        return f"{self.level}:{self.name}"

    def __str__(self) -> str:
        return self.key


Constraint = tuple[str, str]  # (dimension id, category id)


def _constraint_set(value) -> frozenset[Constraint]:
    out = set()
    for item in value:
        dim, cat = item
        out.add((str(dim), str(cat)))
    return frozenset(out)


@dataclass(frozen=True)
class TargetingSpec:
    """An audience definition as submitted to a reach estimator.

    Includes and excludes are sets of (dimension, category) pairs; the pairs
    use platform-side category ids. Dimensions beyond the registered seven are
    accepted as opaque extra include keys (e.g. an interest) and interpreted
    only by backends that know them. A dimension may not appear in both the
    includes and the excludes: a user could match both sides at once (e.g. a
    multiracial affinity), and rather than guess the platform's behavior such
    specs are rejected at construction.
    """

    geo: GeoScope
    age_lo: int = PLATFORM_MIN_AGE
    age_hi: int | None = None
    gender: str = GENDER_ALL
    includes: frozenset[Constraint] = field(default_factory=frozenset)
    excludes: frozenset[Constraint] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "includes", _constraint_set(self.includes))
        object.__setattr__(self, "excludes", _constraint_set(self.excludes))
        if not isinstance(self.geo, GeoScope):
            raise TypeError("geo must be a GeoScope")
        if not isinstance(self.age_lo, int) or isinstance(self.age_lo, bool):
            raise TypeError("age_lo must be an integer")
        if self.age_lo < PLATFORM_MIN_AGE:
            raise ValueError(f"platform does not allow ages under {PLATFORM_MIN_AGE}")
        if self.age_lo > OPEN_AGE_BUCKET_START:
            raise ValueError(f"age_lo cannot exceed {OPEN_AGE_BUCKET_START}")
        if self.age_hi is not None:
            if not isinstance(self.age_hi, int) or isinstance(self.age_hi, bool):
                raise TypeError("age_hi must be an integer or None")
            if self.age_hi < self.age_lo:
                raise ValueError("age_hi must be >= age_lo")
            if self.age_hi >= OPEN_AGE_BUCKET_START:
                raise ValueError(
                    f"ages {OPEN_AGE_BUCKET_START}+ cannot be stratified; use age_hi=None"
                )
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}")
        included_dims = {dim for dim, _ in self.includes}
        excluded_dims = {dim for dim, _ in self.excludes}
        conflict = included_dims & excluded_dims
        if conflict:
            raise ConflictingConstraint(
                "dimension(s) both included and excluded: " + ", ".join(sorted(conflict))
            )

    def with_include(self, dim: str, cat: str) -> "TargetingSpec":
        """Return a copy with (dim, cat) added to the includes."""
        if any(d == dim for d, _ in self.excludes):
            raise ConflictingConstraint(f"dimension {dim!r} already excluded")
        return TargetingSpec(
            geo=self.geo,
            age_lo=self.age_lo,
            age_hi=self.age_hi,
            gender=self.gender,
            includes=self.includes | {(dim, cat)},
            excludes=self.excludes,
        )

    def with_exclude(self, dim: str, cat: str) -> "TargetingSpec":
        """Return a copy with (dim, cat) added to the excludes."""
        if any(d == dim for d, _ in self.includes):
            raise ConflictingConstraint(f"dimension {dim!r} already included")
        return TargetingSpec(
            geo=self.geo,
            age_lo=self.age_lo,
            age_hi=self.age_hi,
            gender=self.gender,
            includes=self.includes,
            excludes=self.excludes | {(dim, cat)},
        )

    def with_age(self, lo: int, hi: int | None) -> "TargetingSpec":
        return TargetingSpec(
            geo=self.geo, age_lo=lo, age_hi=hi, gender=self.gender,
            includes=self.includes, excludes=self.excludes,
        )

    def with_gender(self, gender: str) -> "TargetingSpec":
        return TargetingSpec(
            geo=self.geo, age_lo=self.age_lo, age_hi=self.age_hi, gender=gender,
            includes=self.includes, excludes=self.excludes,
        )

    def includes_by_dimension(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {}
        for dim, cat in self.includes:
            out.setdefault(dim, set()).add(cat)
        return {dim: frozenset(cats) for dim, cats in out.items()}


def with_include(spec: TargetingSpec, dim: str, cat: str) -> TargetingSpec:
    return spec.with_include(dim, cat)


def with_exclude(spec: TargetingSpec, dim: str, cat: str) -> TargetingSpec:
    return spec.with_exclude(dim, cat)


@dataclass(frozen=True)
class Category:
    """A canonical category of one dimension (source-side ids live in the mapping)."""

    dimension: str
    id: str
    label: str
    attrs: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class MappingEntry:
    """One source category's mapping onto the canonical vocabulary.

    weight is the fraction of the source row carried to the target; the
    remainder is excluded from the shared universe (used for the census
    10-14 age bin, of which only the 13-14 share is inside the platform's
    support).
    """

    side: str
    source: str
    target: str
    weight: float = 1.0


@dataclass(frozen=True)
class CategoryMapping:
    """Per-dimension mapping from source categories (both sides) to canonical ids."""

    dimension: str
    canonical: tuple[str, ...]
    entries: Mapping[Constraint, MappingEntry]  # keyed (side, source id)

    def lookup(self, side: str, source: str) -> MappingEntry:
        entry = self.entries.get((side, source))
        if entry is None:
            raise UnmappedCategory(
                f"{self.dimension}: no {side}-side mapping for category {source!r}"
            )
        return entry

    def map_to_canonical(self, side: str, source: str) -> str:
        """Return the canonical id for a source category (reserved targets included)."""
        return self.lookup(side, source).target

    def sources(self, side: str) -> tuple[str, ...]:
        return tuple(src for (s, src) in self.entries if s == side)

    def sources_for(self, side: str, canonical_id: str) -> tuple[str, ...]:
        return tuple(
            src for (s, src), e in self.entries.items()
            if s == side and e.target == canonical_id
        )


def map_to_canonical(mapping: CategoryMapping, side: str, category: str) -> str:
    return mapping.map_to_canonical(side, category)


@dataclass(frozen=True)
class Dimension:
    """A demographic dimension: ordered canonical categories plus the source mapping.

    exhaustive says whether the canonical categories partition the platform
    population. residual names a canonical category that the platform cannot
    target directly and that is instead derived by excluding every
    platform-taggable category (the race dimension's white bucket).
    """

    id: str
    exhaustive: bool
    categories: tuple[Category, ...]
    mapping: CategoryMapping
    residual: str | None = None

    def category_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.categories)

    def category(self, category_id: str) -> Category:
        for c in self.categories:
            if c.id == category_id:
                return c
        raise UnmappedCategory(f"{self.id}: unknown canonical category {category_id!r}")
