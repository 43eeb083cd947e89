"""Parse official baseline extracts into canonical distributions.

The normalized extract format is line-oriented UTF-8 text. An optional first
directive ``delimiter=X`` sets the field delimiter (default ``|``); preamble
lines are ``key<delim>value...`` records; a ``---`` line separates the
preamble from data rows. ``#`` starts a comment.

    table_id|S1501
    geography|state|West Virginia
    vintage|2013-2017
    unit|count
    ---
    Less than 9th grade (above 25)|35840
    ...

Preamble keys: table_id, geography (level + name), vintage (all required);
unit (count|percent, default count); universe (required for percent tables);
dimension (required for S0101, which covers both age and gender); segment
(free-form tag, e.g. male/female for gender-split age tables used by the
age-pyramid report); note (free-form).

A geography name of ``*`` declares a state panel: data rows carry the state
as an extra leading field and the file parses into one table per state
(universe rows are not supported in panels).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .distribution import DemographicDistribution
from .errors import MalformedTable, UnmappedCategory, UnsupportedGranularity
from .model import (
    DIM_AGE,
    DIM_EDUCATION,
    DIM_GENDER,
    DIM_INCOME,
    DIM_ORIGIN,
    DIM_POLITICAL,
    DIM_RACE,
    EXCLUDED,
    LEVEL_STATE,
    UNSPECIFIED,
    CategoryMapping,
    GeoScope,
)

# The registered source tables and the dimensions each may carry.
TABLE_DIMENSIONS: dict[str, tuple[str, ...]] = {
    "S0101": (DIM_AGE, DIM_GENDER),
    "DP05": (DIM_RACE,),
    "S2001": (DIM_INCOME,),
    "S1501": (DIM_EDUCATION,),
    "B05006": (DIM_ORIGIN,),
    "GALLUP_PARTY": (DIM_POLITICAL,),
}

UNIT_COUNT = "count"
UNIT_PERCENT = "percent"

PARTY_ROWS = ("left", "moderate", "right")


@dataclass(frozen=True)
class CensusTable:
    """One parsed extract: one geography, one dimension, raw source rows."""

    table_id: str
    geography: GeoScope
    dimension: str
    vintage: str
    rows: Mapping[str, float]  # source category id -> count or percent
    unit: str = UNIT_COUNT
    universe: float | None = None
    segment: str | None = None
    note: str | None = None


def _parse_value(raw: str, unit: str, line_no: int, source: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedTable(f"{source} line {line_no}: non-numeric value {raw!r}") from None
    if unit == UNIT_PERCENT and not 0.0 <= value <= 100.0:
        raise MalformedTable(f"{source} line {line_no}: percent {value} outside [0, 100]")
    if unit == UNIT_COUNT and value < 0:
        raise MalformedTable(f"{source} line {line_no}: negative count {value}")
    return value


def parse_extract(text: str, source: str = "<memory>") -> list[CensusTable]:
    """Parse extract text into tables (one per geography; panels split)."""
    delimiter = "|"
    preamble: dict[str, list[str]] = {}
    in_data = False
    data_rows: list[tuple[int, list[str]]] = []
    first_directive = True

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if first_directive and line.startswith("delimiter="):
            delimiter = line.split("=", 1)[1]
            if len(delimiter) != 1:
                raise MalformedTable(f"{source} line {line_no}: delimiter must be one character")
            first_directive = False
            continue
        first_directive = False
        if line == "---":
            if in_data:
                raise MalformedTable(f"{source} line {line_no}: second '---' separator")
            in_data = True
            continue
        parts = [p.strip() for p in line.split(delimiter)]
        if not in_data:
            key = parts[0]
            if key in preamble:
                raise MalformedTable(f"{source} line {line_no}: duplicate preamble key {key!r}")
            preamble[key] = parts[1:]
        else:
            data_rows.append((line_no, parts))

    if not in_data:
        raise MalformedTable(f"{source}: missing '---' separator before data rows")
    for required in ("table_id", "geography", "vintage"):
        if required not in preamble:
            raise MalformedTable(f"{source}: preamble is missing {required!r}")

    table_id = preamble["table_id"][0]
    if table_id not in TABLE_DIMENSIONS:
        raise MalformedTable(f"{source}: unknown table_id {table_id!r}")
    allowed_dims = TABLE_DIMENSIONS[table_id]
    if "dimension" in preamble:
        dimension = preamble["dimension"][0]
        if dimension not in allowed_dims:
            raise MalformedTable(
                f"{source}: table {table_id} cannot carry dimension {dimension!r}"
            )
    elif len(allowed_dims) == 1:
        dimension = allowed_dims[0]
    else:
        raise MalformedTable(
            f"{source}: table {table_id} needs an explicit dimension ({'/'.join(allowed_dims)})"
        )

    geo_fields = preamble["geography"]
    if len(geo_fields) < 2:
        raise MalformedTable(f"{source}: geography needs a level and a name")
    level, geo_name = geo_fields[0], geo_fields[1]
    vintage = preamble["vintage"][0]
    unit = preamble.get("unit", [UNIT_COUNT])[0]
    if unit not in (UNIT_COUNT, UNIT_PERCENT):
        raise MalformedTable(f"{source}: unit must be count or percent, got {unit!r}")
    universe = None
    if "universe" in preamble:
        try:
            universe = float(preamble["universe"][0])
        except ValueError:
            raise MalformedTable(f"{source}: non-numeric universe") from None
        if universe <= 0:
            raise MalformedTable(f"{source}: universe must be positive")
    segment = preamble.get("segment", [None])[0]
    note = preamble.get("note", [None])[0]

    radius = None
    if level == "city" and len(geo_fields) > 2:
        try:
            radius = float(geo_fields[2])
        except ValueError:
            raise MalformedTable(f"{source}: bad city radius {geo_fields[2]!r}") from None

    def build(geo: GeoScope, rows: dict[str, float]) -> CensusTable:
        return CensusTable(
            table_id=table_id,
            geography=geo,
            dimension=dimension,
            vintage=vintage,
            rows=rows,
            unit=unit,
            universe=universe,
            segment=segment,
            note=note,
        )

    if geo_name == "*":
        if level != LEVEL_STATE:
            raise MalformedTable(f"{source}: panels are only supported at state level")
        if universe is not None:
            raise MalformedTable(f"{source}: universe rows are not supported in state panels")
        panel: dict[str, dict[str, float]] = {}
        for line_no, parts in data_rows:
            if len(parts) != 3:
                raise MalformedTable(
                    f"{source} line {line_no}: panel rows need state, category, value"
                )
            state, category, raw = parts
            rows = panel.setdefault(state, {})
            if category in rows:
                raise MalformedTable(
                    f"{source} line {line_no}: duplicate row {category!r} for {state!r}"
                )
            rows[category] = _parse_value(raw, unit, line_no, source)
        return [build(GeoScope(LEVEL_STATE, state), rows) for state, rows in panel.items()]

    rows: dict[str, float] = {}
    for line_no, parts in data_rows:
        if len(parts) != 2:
            raise MalformedTable(f"{source} line {line_no}: rows need category and value")
        category, raw = parts
        if category in rows:
            raise MalformedTable(f"{source} line {line_no}: duplicate row {category!r}")
        rows[category] = _parse_value(raw, unit, line_no, source)
    try:
        geo = GeoScope(level, geo_name, radius)
    except ValueError as exc:
        raise MalformedTable(f"{source}: {exc}") from None
    return [build(geo, rows)]


def parse_extract_file(path: str | Path) -> list[CensusTable]:
    path = Path(path)
    return parse_extract(path.read_text(encoding="utf-8"), source=str(path))


def _row_counts(table: CensusTable, source: str = "table") -> dict[str, float]:
    """Rows as counts; percent tables are scaled by their declared universe."""
    if table.unit == UNIT_COUNT:
        return dict(table.rows)
    if table.universe is None:
        raise MalformedTable(
            f"{source} {table.table_id}/{table.geography}: percent rows need a declared universe"
        )
    return {cat: value / 100.0 * table.universe for cat, value in table.rows.items()}


def ingest_acs(table: CensusTable, mapping: CategoryMapping) -> DemographicDistribution:
    """Group an ACS-style table's source rows onto the canonical categories.

    Every source row must be mapped (to a canonical category or to one of the
    reserved loss-accounting targets); weighted entries carry only part of a
    row into the universe. The result satisfies, exactly:
    sum(counts) + unspecified + excluded == sum(source rows as counts).
    """
    if table.dimension != mapping.dimension:
        raise MalformedTable(
            f"table carries {table.dimension!r}, mapping covers {mapping.dimension!r}"
        )
    if table.dimension == DIM_EDUCATION:
        groups = {"(18-24)", "(above 25)"}
        present = {g for g in groups for row in table.rows if row.endswith(g)}
        if present != groups:
            raise MalformedTable(
                "education tables need both the 18-24 and the above-25 row groups"
            )

    counts = {cat: 0.0 for cat in mapping.canonical}
    unspecified = 0.0
    excluded = 0.0
    for source_cat, value in _row_counts(table).items():
        entry = mapping.lookup("census", source_cat)
        carried = value * entry.weight
        remainder = value - carried
        if entry.target == UNSPECIFIED:
            unspecified += carried
        elif entry.target == EXCLUDED:
            excluded += carried
        else:
            counts[entry.target] += carried
        excluded += remainder
    return DemographicDistribution.from_counts(
        table.geography,
        table.dimension,
        counts,
        unspecified=unspecified,
        excluded=excluded,
    )


def ingest_party_affiliation(table: CensusTable) -> DemographicDistribution:
    """Convert a state's party-affiliation percentages into leaning shares.

    The baseline exists only at state level; the named buckets become shares
    and any residual (no lean / don't know) becomes unspecified share mass.
    Counts stay unknown: the source publishes percentages without a universe.
    """
    if table.table_id != "GALLUP_PARTY" or table.dimension != DIM_POLITICAL:
        raise MalformedTable(f"not a party-affiliation table: {table.table_id}")
    if table.geography.level != LEVEL_STATE:
        raise UnsupportedGranularity(
            f"party affiliation baselines exist per state, not {table.geography.level}"
        )
    if table.unit != UNIT_PERCENT:
        raise MalformedTable("party-affiliation tables carry percents")
    unknown_rows = set(table.rows) - set(PARTY_ROWS)
    if unknown_rows:
        raise MalformedTable(f"unknown party rows: {sorted(unknown_rows)}")
    missing = set(PARTY_ROWS) - set(table.rows)
    if missing:
        raise MalformedTable(f"missing party rows: {sorted(missing)}")
    total = sum(table.rows.values())
    if total > 100.0 + 1e-9:
        raise MalformedTable(f"party percentages sum to {total}, over 100")
    shares = {cat: table.rows[cat] / 100.0 for cat in PARTY_ROWS}
    return DemographicDistribution.from_shares(
        table.geography,
        DIM_POLITICAL,
        shares,
        unspecified_share=max(0.0, 1.0 - sum(shares.values())),
    )


@dataclass(frozen=True)
class ImmigrantCounts:
    """Per-country foreign-born counts plus the rows that could not be resolved."""

    geography: GeoScope
    counts: Mapping[str, float]  # canonical country id -> persons
    skipped: tuple[str, ...] = field(default_factory=tuple)

    @property
    def skip_count(self) -> int:
        return len(self.skipped)


def ingest_immigrants(table: CensusTable, mapping: CategoryMapping) -> ImmigrantCounts:
    """Resolve a B05006-style table's country rows to registry country ids.

    Rows naming countries outside the registry are skipped and reported, not
    fatal: the baseline enumerates more origins than any registry needs.
    Zero-count countries are retained.
    """
    if table.dimension != DIM_ORIGIN:
        raise MalformedTable(f"not a country-of-origin table: {table.table_id}")
    counts: dict[str, float] = {}
    skipped: list[str] = []
    for source_cat, value in _row_counts(table).items():
        try:
            entry = mapping.lookup("census", source_cat)
        except UnmappedCategory:
            skipped.append(source_cat)
            continue
        counts[entry.target] = counts.get(entry.target, 0.0) + value * entry.weight
    return ImmigrantCounts(
        geography=table.geography, counts=counts, skipped=tuple(skipped)
    )
