"""Versioned registry of geographies, dimensions, categories, and mappings.

The registry is a line-oriented text file so the vocabulary is data, not
code. Lines are pipe-delimited records; ``#`` starts a comment. Record kinds:

    version|1
    geography|country|United States
    geography|state|Alabama
    geography|city|Arlington|Texas
    dimension|race|exhaustive=true|residual=white
    canonical|race|hispanic|Hispanic
    canonical|country_of_origin|china|China|region=South and East Asia
    map|education|census|Less than 9th grade (above 25)|incomplete_hs
    map|age|census|10 to 14 years|@unspecified|weight=0.4

A ``map`` target is a canonical category id of the same dimension or one of
the reserved loss-accounting targets ``@unspecified`` / ``@excluded``. An
optional ``weight=W`` carries only fraction W of the source row to the target
(the remainder is excluded from the shared universe).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import RegistryError
from .model import (
    DIM_AGE,
    DIM_EDUCATION,
    DIM_POLITICAL,
    DIMENSIONS,
    GEO_LEVELS,
    LEVEL_CITY,
    LEVEL_COUNTRY,
    LEVEL_STATE,
    RESERVED_TARGETS,
    SIDES,
    Category,
    CategoryMapping,
    Dimension,
    GeoScope,
    MappingEntry,
    age_bin_range,
)

DEFAULT_REGISTRY_RESOURCE = "us_registry.txt"


@dataclass(frozen=True)
class Registry:
    """Parsed registry: one country, its states and cities, and the dimensions."""

    version: int
    country: str
    states: tuple[str, ...]
    cities: Mapping[str, str]  # city name -> state name
    dimensions: Mapping[str, Dimension]
    source: str = "<memory>"

    def dimension(self, dim_id: str) -> Dimension:
        try:
            return self.dimensions[dim_id]
        except KeyError:
            raise RegistryError(f"dimension {dim_id!r} not in registry") from None

    def has_geography(self, geo: GeoScope) -> bool:
        if geo.level == LEVEL_COUNTRY:
            return geo.name == self.country
        if geo.level == LEVEL_STATE:
            return geo.name in self.states
        return geo.name in self.cities

    def city_state(self, city_name: str) -> str:
        try:
            return self.cities[city_name]
        except KeyError:
            raise RegistryError(f"city {city_name!r} not in registry") from None

    def region_map(self) -> dict[str, str]:
        """country canonical id -> region, from the country categories' attrs."""
        dim = self.dimension("country_of_origin")
        return {c.id: c.attrs["region"] for c in dim.categories if "region" in c.attrs}


def _parse_kv(token: str, line_no: int) -> tuple[str, str]:
    if "=" not in token:
        raise RegistryError(f"line {line_no}: expected key=value, got {token!r}")
    key, value = token.split("=", 1)
    return key.strip(), value.strip()


def parse_registry(text: str, source: str = "<memory>") -> Registry:
    """Parse registry text; raises RegistryError on structural problems."""
    version: int | None = None
    country: str | None = None
    states: list[str] = []
    cities: dict[str, str] = {}
    dim_flags: dict[str, dict] = {}
    categories: dict[str, list[Category]] = {}
    entries: dict[str, dict] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        kind = parts[0]
        if kind == "version":
            if len(parts) != 2 or not parts[1].isdigit():
                raise RegistryError(f"line {line_no}: version takes one integer field")
            if version is not None:
                raise RegistryError(f"line {line_no}: duplicate version line")
            version = int(parts[1])
        elif kind == "geography":
            if len(parts) < 3:
                raise RegistryError(f"line {line_no}: geography needs level and name")
            level, name = parts[1], parts[2]
            if level not in GEO_LEVELS:
                raise RegistryError(f"line {line_no}: unknown geography level {level!r}")
            if level == LEVEL_COUNTRY:
                if country is not None:
                    raise RegistryError(f"line {line_no}: more than one country declared")
                country = name
            elif level == LEVEL_STATE:
                if name in states:
                    raise RegistryError(f"line {line_no}: duplicate state {name!r}")
                states.append(name)
            else:
                if len(parts) != 4:
                    raise RegistryError(f"line {line_no}: city needs its state as a fourth field")
                if name in cities:
                    raise RegistryError(f"line {line_no}: duplicate city {name!r}")
                cities[name] = parts[3]
        elif kind == "dimension":
            if len(parts) < 2:
                raise RegistryError(f"line {line_no}: dimension needs an id")
            dim_id = parts[1]
            if dim_id in dim_flags:
                raise RegistryError(f"line {line_no}: duplicate dimension {dim_id!r}")
            flags = {"exhaustive": False, "residual": None}
            for token in parts[2:]:
                key, value = _parse_kv(token, line_no)
                if key == "exhaustive":
                    if value not in ("true", "false"):
                        raise RegistryError(f"line {line_no}: exhaustive must be true or false")
                    flags["exhaustive"] = value == "true"
                elif key == "residual":
                    flags["residual"] = value
                else:
                    raise RegistryError(f"line {line_no}: unknown dimension flag {key!r}")
            dim_flags[dim_id] = flags
            categories[dim_id] = []
            entries[dim_id] = {}
        elif kind == "canonical":
            if len(parts) < 4:
                raise RegistryError(f"line {line_no}: canonical needs dimension, id, label")
            dim_id, cat_id, label = parts[1], parts[2], parts[3]
            if dim_id not in dim_flags:
                raise RegistryError(f"line {line_no}: canonical before dimension {dim_id!r}")
            if any(c.id == cat_id for c in categories[dim_id]):
                raise RegistryError(f"line {line_no}: duplicate canonical {dim_id}:{cat_id}")
            attrs = dict(_parse_kv(tok, line_no) for tok in parts[4:])
            categories[dim_id].append(Category(dim_id, cat_id, label, attrs))
        elif kind == "map":
            if len(parts) < 5:
                raise RegistryError(
                    f"line {line_no}: map needs dimension, side, source, target"
                )
            dim_id, side, src, target = parts[1], parts[2], parts[3], parts[4]
            if dim_id not in dim_flags:
                raise RegistryError(f"line {line_no}: map before dimension {dim_id!r}")
            if side not in SIDES:
                raise RegistryError(f"line {line_no}: side must be one of {SIDES}")
            weight = 1.0
            for token in parts[5:]:
                key, value = _parse_kv(token, line_no)
                if key != "weight":
                    raise RegistryError(f"line {line_no}: unknown map flag {key!r}")
                try:
                    weight = float(value)
                except ValueError:
                    raise RegistryError(f"line {line_no}: bad weight {value!r}") from None
                if not 0.0 < weight <= 1.0:
                    raise RegistryError(f"line {line_no}: weight must be in (0, 1]")
            if (side, src) in entries[dim_id]:
                raise RegistryError(
                    f"line {line_no}: {dim_id} maps {side} source {src!r} twice"
                )
            entries[dim_id][(side, src)] = MappingEntry(side, src, target, weight)
        else:
            raise RegistryError(f"line {line_no}: unknown record kind {kind!r}")

    if version is None:
        raise RegistryError("registry has no version line")
    if country is None:
        raise RegistryError("registry declares no country")

    dimensions: dict[str, Dimension] = {}
    for dim_id, flags in dim_flags.items():
        cat_tuple = tuple(categories[dim_id])
        mapping = CategoryMapping(
            dimension=dim_id,
            canonical=tuple(c.id for c in cat_tuple),
            entries=dict(entries[dim_id]),
        )
        dimensions[dim_id] = Dimension(
            id=dim_id,
            exhaustive=flags["exhaustive"],
            categories=cat_tuple,
            mapping=mapping,
            residual=flags["residual"],
        )

    return Registry(
        version=version,
        country=country,
        states=tuple(states),
        cities=dict(cities),
        dimensions=dimensions,
        source=source,
    )


def validate_registry(registry: Registry) -> list[str]:
    """Return a list of consistency problems (empty when the registry is sound)."""
    problems: list[str] = []

    for city, state in registry.cities.items():
        if state not in registry.states:
            problems.append(f"city {city!r} references undeclared state {state!r}")

    for dim_id, dim in registry.dimensions.items():
        if dim_id not in DIMENSIONS:
            problems.append(f"unknown dimension id {dim_id!r}")
        if not dim.categories:
            problems.append(f"dimension {dim_id} declares no canonical categories")
        canonical = set(dim.category_ids())
        if dim.residual is not None:
            if dim.residual not in canonical:
                problems.append(
                    f"dimension {dim_id} residual {dim.residual!r} is not canonical"
                )
            elif dim.mapping.sources_for("platform", dim.residual):
                problems.append(
                    f"dimension {dim_id} residual {dim.residual!r} must not have a"
                    " platform mapping (it is derived by exclusion)"
                )
        for (side, src), entry in dim.mapping.entries.items():
            if entry.target not in canonical and entry.target not in RESERVED_TARGETS:
                problems.append(
                    f"{dim_id}: {side} source {src!r} maps to unknown target {entry.target!r}"
                )

    if DIM_AGE in registry.dimensions:
        for cat in registry.dimensions[DIM_AGE].categories:
            try:
                age_bin_range(cat.id)
            except ValueError:
                problems.append(f"age category {cat.id!r} is not a parseable bucket")

    if DIM_EDUCATION in registry.dimensions:
        dim = registry.dimensions[DIM_EDUCATION]
        canonical = set(dim.category_ids())
        for side in SIDES:
            covered = {
                e.target for (s, _), e in dim.mapping.entries.items()
                if s == side and e.target in canonical
            }
            missing = canonical - covered
            if missing:
                problems.append(
                    f"education mapping not total on {side} side; uncovered: "
                    + ", ".join(sorted(missing))
                )

    if DIM_POLITICAL in registry.dimensions:
        expected = {"left", "moderate", "right"}
        got = set(registry.dimensions[DIM_POLITICAL].category_ids())
        if got != expected:
            problems.append(
                f"political_leaning canonical categories must be {sorted(expected)}, got {sorted(got)}"
            )

    return problems


def load_registry(path: str | Path) -> Registry:
    path = Path(path)
    registry = parse_registry(path.read_text(encoding="utf-8"), source=str(path))
    problems = validate_registry(registry)
    if problems:
        raise RegistryError(f"{path}: " + "; ".join(problems))
    return registry


def load_default_registry() -> Registry:
    text = resources.files("demo_census.data").joinpath(DEFAULT_REGISTRY_RESOURCE).read_text("utf-8")
    registry = parse_registry(text, source=f"builtin:{DEFAULT_REGISTRY_RESOURCE}")
    problems = validate_registry(registry)
    if problems:  # the bundled registry must always validate
        raise RegistryError("bundled registry is inconsistent: " + "; ".join(problems))
    return registry


def default_registry_path() -> Path:
    """Filesystem path of the bundled registry (for CLI defaults and docs)."""
    with resources.as_file(
        resources.files("demo_census.data").joinpath(DEFAULT_REGISTRY_RESOURCE)
    ) as p:
        return Path(p)


def iter_geographies(registry: Registry, level: str) -> Iterable[GeoScope]:
    if level == LEVEL_COUNTRY:
        yield GeoScope(LEVEL_COUNTRY, registry.country)
    elif level == LEVEL_STATE:
        for name in registry.states:
            yield GeoScope(LEVEL_STATE, name)
    elif level == LEVEL_CITY:
        for name in registry.cities:
            yield GeoScope(LEVEL_CITY, name)
    else:
        raise RegistryError(f"unknown geography level {level!r}")
