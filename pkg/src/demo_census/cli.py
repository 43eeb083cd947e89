"""Batch front door: ingest baselines, compile the platform census, compare,
correct, and adjust — all from files and flags, no environment variables.

Every command is hermetic: outputs are a pure function of the flags, the
input files, and the seed. Exit codes are stable: 0 success, 2 configuration
problem, 3 backend failure, 4 missing comparison cells, 5 audience/CF
stratum mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Mapping, Sequence

from . import reports
from .analysis import (
    age_pyramid_series,
    aggregate_regions,
    compile_platform_census,
    correction_factors,
    correlation_table,
    coverage_table,
    platform_total,
    post_stratify,
    representation_ranking,
)
from .analysis.correction import ON_ZERO_SKIP, CorrectionFactor
from .backends import FixtureBackend, SyntheticBackend, load_fixtures
from .distribution import (
    SHARE_BASES,
    SHARE_BASIS_CLASSIFIED,
    SHARE_BASIS_TOTAL,
    DemographicDistribution,
)
from .errors import (
    DemoCensusError,
    FixtureMiss,
    GeographyUnknown,
    MalformedTable,
    MissingStratumCF,
    RegistryError,
)
from .ingest import (
    ImmigrantCounts,
    ingest_acs,
    ingest_immigrants,
    ingest_party_affiliation,
    parse_extract_file,
)
from .model import (
    DIM_AGE,
    DIM_ORIGIN,
    DIM_POLITICAL,
    DIMENSIONS,
    GEO_LEVELS,
    LEVEL_CITY,
    LEVEL_STATE,
    SIDE_PLATFORM,
    GeoScope,
)
from .population import GenerationConfig, SyntheticPopulation
from .registry import (
    Registry,
    iter_geographies,
    load_default_registry,
    load_registry,
    parse_registry,
    validate_registry,
)
from .reports import FORMAT_DELIM, FORMATS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_MISSING_CELLS = 4
EXIT_STRATUM = 5

BACKEND_SYNTHETIC = "synthetic"
BACKEND_FIXTURES = "fixtures"


class CliError(Exception):
    """A user-facing failure with a chosen exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


# -- shared flag handling ----------------------------------------------------


def _load_registry_arg(args: argparse.Namespace) -> Registry:
    if args.registry:
        return load_registry(args.registry)
    return load_default_registry()


def _parse_geo_flag(registry: Registry, value: str) -> list[GeoScope]:
    """LEVEL, LEVEL:NAME, or city:NAME:RADIUS — bare LEVEL means every one."""
    parts = value.split(":")
    level = parts[0]
    if level not in GEO_LEVELS:
        raise CliError(EXIT_CONFIG, f"unknown geography level {level!r} in --geo {value!r}")
    if len(parts) == 1:
        return list(iter_geographies(registry, level))
    name = parts[1]
    radius = None
    if len(parts) == 3:
        if level != LEVEL_CITY:
            raise CliError(EXIT_CONFIG, f"--geo {value!r}: only cities take a radius")
        try:
            radius = float(parts[2])
        except ValueError:
            raise CliError(EXIT_CONFIG, f"--geo {value!r}: bad radius {parts[2]!r}") from None
    elif len(parts) > 3:
        raise CliError(EXIT_CONFIG, f"--geo {value!r}: expected LEVEL[:NAME[:RADIUS]]")
    try:
        geo = GeoScope(level, name, radius)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"--geo {value!r}: {exc}") from None
    if not registry.has_geography(geo):
        raise CliError(EXIT_CONFIG, f"geography {geo} is not in the registry")
    return [geo]


def _resolve_geos(registry: Registry, geo_flags: Sequence[str]) -> list[GeoScope]:
    if not geo_flags:
        return list(iter_geographies(registry, "country"))
    geos: list[GeoScope] = []
    for flag in geo_flags:
        for geo in _parse_geo_flag(registry, flag):
            if geo not in geos:
                geos.append(geo)
    return geos


def _build_backend(args: argparse.Namespace, registry: Registry):
    if args.backend == BACKEND_SYNTHETIC:
        if args.fixtures:
            raise CliError(EXIT_CONFIG, "--fixtures belongs to the fixtures backend")
        if not args.population:
            raise CliError(EXIT_CONFIG, "the synthetic backend needs --population CONFIG")
        config = GenerationConfig.from_file(args.population, seed=args.seed)
        try:
            population = SyntheticPopulation(config, registry)
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, f"population config: {exc}") from None
        return SyntheticBackend(population)
    if args.population or args.seed is not None:
        raise CliError(EXIT_CONFIG, "--population/--seed belong to the synthetic backend")
    if not args.fixtures:
        raise CliError(EXIT_CONFIG, "the fixtures backend needs --fixtures PATH")
    return FixtureBackend(load_fixtures(args.fixtures), registry)


def _resolve_dimensions(args: argparse.Namespace) -> list[str]:
    seen: list[str] = []
    for dim in args.dimension or []:
        if dim not in seen:
            seen.append(dim)
    return seen


# -- baseline ingestion shared by ingest/compare/correct ---------------------


def _ingest_baselines(
    paths: Sequence[str], registry: Registry
) -> tuple[
    dict[tuple[str, str], DemographicDistribution],
    dict[str, ImmigrantCounts],
    list[str],
]:
    census: dict[tuple[str, str], DemographicDistribution] = {}
    immigrants: dict[str, ImmigrantCounts] = {}
    notes: list[str] = []
    for path in paths:
        for table in parse_extract_file(path):
            if table.table_id == "B05006":
                found = ingest_immigrants(table, registry.dimension(DIM_ORIGIN).mapping)
                immigrants[table.geography.key] = found
                if found.skipped:
                    notes.append(
                        f"{table.geography}: {found.skip_count} unmapped origin rows skipped"
                    )
                continue
            if table.table_id == "GALLUP_PARTY":
                dist = ingest_party_affiliation(table)
            else:
                dist = ingest_acs(table, registry.dimension(table.dimension).mapping)
            key = (table.geography.key, table.dimension)
            if key in census:
                raise MalformedTable(
                    f"two baselines describe {table.geography} {table.dimension}"
                )
            census[key] = dist
            if dist.counts_known:
                notes.append(
                    f"{table.geography} {table.dimension}: total={dist.total + dist.excluded:g}"
                    f" classified={dist.classified_total:g}"
                    f" unspecified={dist.unspecified:g} excluded={dist.excluded:g}"
                )
    return census, immigrants, notes


def _missing_cells(
    geos: Sequence[GeoScope],
    dims: Sequence[str],
    census: Mapping[tuple[str, str], DemographicDistribution],
    immigrants: Mapping[str, ImmigrantCounts],
) -> list[str]:
    missing = []
    for geo in geos:
        for dim in dims:
            if dim == DIM_ORIGIN:
                if geo.key not in immigrants:
                    missing.append(f"{geo} {dim}")
            elif (geo.key, dim) not in census:
                missing.append(f"{geo} {dim}")
    return missing


def _check_political_city(geos: Sequence[GeoScope], dims: Sequence[str]) -> None:
    if DIM_POLITICAL in dims and any(geo.level == LEVEL_CITY for geo in geos):
        raise CliError(
            EXIT_CONFIG,
            "political leaning has no city-level baseline; "
            "city comparison is structurally disallowed",
        )


# -- commands ----------------------------------------------------------------


def cmd_validate_registry(args: argparse.Namespace) -> int:
    if args.registry:
        path = Path(args.registry)
        registry = parse_registry(path.read_text(encoding="utf-8"), source=str(path))
    else:
        registry = load_default_registry()
    problems = validate_registry(registry)
    for problem in problems:
        print(f"problem: {problem}", file=sys.stderr)
    if problems:
        return EXIT_CONFIG
    print(
        f"registry ok: {len(registry.states)} states, {len(registry.cities)} cities, "
        f"{len(registry.dimensions)} dimensions"
    )
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args)
    out = Path(args.out)
    census, immigrants, notes = _ingest_baselines(args.baseline, registry)
    for key in sorted(census):
        print(reports.write_distribution(out, census[key], args.format))
    for geo_key in sorted(immigrants):
        found = immigrants[geo_key]
        rows = [
            {"country": country, "count": found.counts[country]}
            for country in sorted(found.counts)
        ]
        name = f"immigrants__{reports.geo_token(found.geography)}"
        print(reports.write_rows(out / name, ("country", "count"), rows, args.format))
    for note in notes:
        print(note)
    return EXIT_OK


def cmd_compile(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args)
    backend = _build_backend(args, registry)
    geos = _resolve_geos(registry, args.geo)
    dims = _resolve_dimensions(args)
    if not dims:
        _warn("no dimensions requested; nothing to compile")
        return EXIT_OK
    out = Path(args.out)
    for dist in compile_platform_census(backend, geos, dims, workers=args.workers):
        print(reports.write_distribution(out, dist, args.format))
    if DIM_AGE in dims:
        for geo in geos:
            print(reports.write_pyramid(out, geo, age_pyramid_series(backend, geo), args.format))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args)
    backend = _build_backend(args, registry)
    geos = _resolve_geos(registry, args.geo)
    dims = _resolve_dimensions(args)
    if not dims:
        _warn("no dimensions requested; nothing to compare")
        return EXIT_OK
    _check_political_city(geos, dims)
    census, immigrants, _ = _ingest_baselines(args.baseline, registry)
    missing = _missing_cells(geos, dims, census, immigrants)
    if missing:
        for cell in missing:
            print(f"missing baseline cell: {cell}", file=sys.stderr)
        return EXIT_MISSING_CELLS

    out = Path(args.out)
    platform_dists = compile_platform_census(backend, geos, dims, workers=args.workers)
    by_cell = {(d.geography.key, d.dimension): d for d in platform_dists}
    levels = sorted({geo.level for geo in geos})

    for dim in dims:
        if dim == DIM_ORIGIN:
            continue
        for level in levels:
            level_geos = [g for g in geos if g.level == level]
            platform = [by_cell[(g.key, dim)] for g in level_geos]
            baseline = [census[(g.key, dim)] for g in level_geos]
            table, skipped = correlation_table(
                platform,
                baseline,
                basis=args.share_basis,
                include_tainted=args.include_tainted,
            )
            for reason in skipped:
                _warn(f"correlation skipped ({level}): {reason}")
            if table:
                print(reports.write_correlations(out, level, dim, table, args.format))
            if level == LEVEL_STATE:
                for category in platform[0].shares:
                    rows = reports.scatter_rows(platform, baseline, category, args.share_basis)
                    if len(rows) >= 2:
                        print(
                            reports.write_scatter(out, level, dim, category, rows, args.format)
                        )

    if DIM_AGE in dims:
        for level in levels:
            level_geos = [g for g in geos if g.level == level]
            totals = {g.key: platform_total(backend, g).count for g in level_geos}
            age = {g.key: census[(g.key, DIM_AGE)] for g in level_geos}
            all_ages = {key: dist.total + dist.excluded for key, dist in age.items()}
            thirteen_up = {key: dist.total for key, dist in age.items()}
            rows = reports.coverage_rows(
                coverage_table(level_geos, totals, all_ages), "all"
            ) + reports.coverage_rows(coverage_table(level_geos, totals, thirteen_up), "13+")
            print(reports.write_coverage(out, level, rows, args.format))

    if DIM_ORIGIN in dims:
        region_map = registry.region_map()
        mapping = registry.dimension(DIM_ORIGIN).mapping
        for geo in geos:
            dist = by_cell[(geo.key, DIM_ORIGIN)]
            platform_counts = {
                country: count
                for country, count in dist.counts.items()
                if mapping.sources_for(SIDE_PLATFORM, country)
            }
            rollups = aggregate_regions(
                platform_counts, dict(immigrants[geo.key].counts), region_map
            )
            print(reports.write_regions(out, geo, rollups, args.format))
    return EXIT_OK


def cmd_correct(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args)
    backend = _build_backend(args, registry)
    geos = _resolve_geos(registry, args.geo)
    dims = _resolve_dimensions(args)
    if DIM_ORIGIN in dims:
        _warn("country_of_origin has no correction-factor baseline; skipping it")
        dims = [d for d in dims if d != DIM_ORIGIN]
    if not dims:
        _warn("no dimensions requested; nothing to correct")
        return EXIT_OK
    _check_political_city(geos, dims)
    census, immigrants, _ = _ingest_baselines(args.baseline, registry)
    missing = _missing_cells(geos, dims, census, immigrants)
    if missing:
        for cell in missing:
            print(f"missing baseline cell: {cell}", file=sys.stderr)
        return EXIT_MISSING_CELLS

    out = Path(args.out)
    platform_dists = compile_platform_census(backend, geos, dims, workers=args.workers)
    by_cell = {(d.geography.key, d.dimension): d for d in platform_dists}
    for dim in dims:
        for level in sorted({geo.level for geo in geos}):
            factors: list[CorrectionFactor] = []
            for geo in geos:
                if geo.level != level:
                    continue
                platform = by_cell[(geo.key, dim)]
                cell_factors = correction_factors(
                    platform,
                    census[(geo.key, dim)],
                    share_basis=args.share_basis,
                    on_zero=ON_ZERO_SKIP,
                )
                done = {f.category for f in cell_factors}
                for category in set(platform.shares) - done:
                    _warn(f"{geo} {dim}/{category}: zero platform share, cf undefined")
                factors.extend(cell_factors)
            if factors:
                print(reports.write_correction_factors(out, level, dim, factors, args.format))
                ranked = representation_ranking(factors)
                print(reports.write_ranking(out, level, dim, ranked, args.format))
    return EXIT_OK


def _read_cf_table(path: Path) -> list[dict]:
    required = {"geography", "level", "dimension", "category", "platform_share", "census_share"}
    if path.suffix == ".json":
        rows = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(rows, list):
            raise MalformedTable(f"{path}: expected a JSON array of CF rows")
    else:
        with path.open(encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
    clean = []
    for row in rows:
        if not required <= set(row):
            raise MalformedTable(f"{path}: CF rows need columns {sorted(required)}")
        clean.append(row)
    if not clean:
        raise MalformedTable(f"{path}: no CF rows")
    return clean


def _read_audience(path: Path) -> dict[str, float]:
    """Stratum -> platform count. Accepts a JSON object, a JSON row list, or
    delimited rows with stratum/category and count columns (compiled
    distribution files work as-is; reserved rows are ignored)."""
    reserved = {"@unspecified", "@excluded", "@total"}
    audience: dict[str, float] = {}
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        items = data.items() if isinstance(data, dict) else (
            (row.get("stratum", row.get("category")), row.get("count")) for row in data
        )
        for stratum, count in items:
            if stratum is None or stratum in reserved or count in (None, ""):
                continue
            audience[str(stratum)] = float(count)
    else:
        with path.open(encoding="utf-8", newline="") as handle:
            for row in csv.DictReader(handle):
                stratum = row.get("stratum") or row.get("category")
                count = row.get("count")
                if not stratum or stratum in reserved or not count:
                    continue
                audience[stratum] = float(count)
    if not audience:
        raise MalformedTable(f"{path}: no audience strata found")
    return audience


def cmd_adjust(args: argparse.Namespace) -> int:
    rows = _read_cf_table(Path(args.cf_table))
    if args.geo:
        parts = args.geo[0].split(":")
        if len(args.geo) != 1 or len(parts) != 2:
            raise CliError(EXIT_CONFIG, "adjust takes a single --geo LEVEL:NAME filter")
        level, name = parts
        rows = [r for r in rows if r["level"] == level and r["geography"] == name]
        if not rows:
            raise CliError(EXIT_CONFIG, f"no CF rows for geography {args.geo[0]!r}")
    cells = {(r["level"], r["geography"]) for r in rows}
    if len(cells) > 1:
        raise CliError(
            EXIT_CONFIG,
            f"CF table spans {len(cells)} geographies; narrow it with --geo LEVEL:NAME",
        )
    dims = {r["dimension"] for r in rows}
    if len(dims) > 1:
        raise CliError(EXIT_CONFIG, f"CF table spans several dimensions: {sorted(dims)}")

    factors = []
    for row in rows:
        platform_share = float(row["platform_share"])
        census_share = float(row["census_share"])
        factors.append(
            CorrectionFactor(
                geography=GeoScope(row["level"], row["geography"]),
                dimension=row["dimension"],
                category=row["category"],
                platform_share=platform_share,
                census_share=census_share,
                cf=census_share / platform_share,
                floor_tainted=str(row.get("floor_tainted", "")).lower() == "true",
            )
        )
    audience = _read_audience(Path(args.audience))
    adjusted = post_stratify(audience, factors)
    out = Path(args.out)
    print(reports.write_adjusted(out, Path(args.audience).stem, audience, adjusted, args.format))
    print(f"adjusted total: {adjusted.total:.4f}")
    if adjusted.floor_tainted:
        _warn(f"floor-tainted strata: {', '.join(sorted(adjusted.floor_tainted))}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_registry_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--registry", metavar="PATH", help="registry file (default: the bundled US registry)"
    )


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend", choices=(BACKEND_SYNTHETIC, BACKEND_FIXTURES), required=True
    )
    parser.add_argument(
        "--population", metavar="PATH", help="synthetic population config (JSON)"
    )
    parser.add_argument("--seed", type=int, help="override the population config seed")
    parser.add_argument("--fixtures", metavar="PATH", help="recorded reach fixtures (JSON)")
    parser.add_argument(
        "--workers", type=int, default=1, help="concurrent per-geography compilations"
    )


def _add_cell_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--geo",
        action="append",
        default=[],
        metavar="LEVEL[:NAME[:RADIUS]]",
        help="geography; bare LEVEL expands to all of them (default: country)",
    )
    parser.add_argument(
        "--dimension", action="append", default=[], choices=DIMENSIONS, metavar="DIM"
    )


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, metavar="DIR")
    parser.add_argument("--format", choices=FORMATS, default=FORMAT_DELIM)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="demo-census",
        description="Demographics on an ad platform versus official baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-registry", help="check a registry file for consistency")
    _add_registry_flag(p)
    p.set_defaults(func=cmd_validate_registry)

    p = sub.add_parser("ingest", help="normalize baseline extracts into canonical tables")
    _add_registry_flag(p)
    p.add_argument("--baseline", action="append", required=True, metavar="PATH")
    _add_output_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("compile", help="enumerate reach queries into distributions")
    _add_registry_flag(p)
    _add_backend_flags(p)
    _add_cell_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("compare", help="correlations, scatter series, and coverage")
    _add_registry_flag(p)
    _add_backend_flags(p)
    _add_cell_flags(p)
    _add_output_flags(p)
    p.add_argument("--baseline", action="append", required=True, metavar="PATH")
    p.add_argument("--share-basis", choices=SHARE_BASES, default=SHARE_BASIS_CLASSIFIED)
    p.add_argument(
        "--include-tainted",
        action="store_true",
        help="keep floor-tainted cells in correlation fitting",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("correct", help="correction factors and representation ranking")
    _add_registry_flag(p)
    _add_backend_flags(p)
    _add_cell_flags(p)
    _add_output_flags(p)
    p.add_argument("--baseline", action="append", required=True, metavar="PATH")
    p.add_argument("--share-basis", choices=SHARE_BASES, default=SHARE_BASIS_TOTAL)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("adjust", help="post-stratify an audience file with a CF table")
    p.add_argument("--cf-table", required=True, metavar="PATH")
    p.add_argument("--audience", required=True, metavar="PATH")
    p.add_argument(
        "--geo",
        action="append",
        default=[],
        metavar="LEVEL:NAME",
        help="select one geography from a multi-geography CF table",
    )
    _add_output_flags(p)
    p.set_defaults(func=cmd_adjust)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except MissingStratumCF as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRATUM
    except (FixtureMiss, GeographyUnknown) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (DemoCensusError, RegistryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
