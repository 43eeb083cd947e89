"""Seeded synthetic population: ground truth plus a biased platform membership.

The generator builds a column-oriented population from a JSON config. Every
individual carries ground-truth attributes (census semantics: race includes
white, income includes sub-25k earners, no age floor) and platform-visible
attributes (source categories the platform could target, possibly unknown).
Platform membership is a per-individual Bernoulli draw whose probability is a
base rate times per-stratum multipliers, and is zero under age 13.

All randomness flows from the single config seed through one generator in a
fixed draw order, so regeneration from the same config is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .distribution import DemographicDistribution
from .errors import GeographyUnknown
from .model import (
    DIM_AGE,
    DIM_EDUCATION,
    DIM_GENDER,
    DIM_INCOME,
    DIM_ORIGIN,
    DIM_POLITICAL,
    DIM_RACE,
    EXCLUDED,
    GENDER_FEMALE,
    GENDER_MALE,
    LEVEL_CITY,
    LEVEL_COUNTRY,
    LEVEL_STATE,
    PLATFORM_MIN_AGE,
    UNSPECIFIED,
    GeoScope,
    age_bin_range,
)
from .registry import Registry

AGE_MAX = 85  # open band draws uniformly up to this age

# Ground-truth attributes only defined from these ages on.
INCOME_UNIVERSE_MIN_AGE = 16
EDUCATION_UNIVERSE_MIN_AGE = 18
POLITICS_UNIVERSE_MIN_AGE = 18

INCOME_BELOW_CANONICAL = "under_25k"
RACE_OTHER = "other"
ORIGIN_NATIVE = "none"

# Fixed draw order for per-state category tables and per-individual draws.
_DRAW_ORDER = (
    DIM_AGE, DIM_GENDER, DIM_RACE, DIM_INCOME, DIM_EDUCATION, DIM_POLITICAL, DIM_ORIGIN,
)


@dataclass(frozen=True)
class GenerationConfig:
    """Everything needed to regenerate a population byte-for-byte."""

    seed: int
    size: int
    frame_miles: float
    states: tuple[tuple[str, float], ...]          # (name, weight)
    cities: Mapping[str, tuple[str, float, float]]  # name -> (state, x, y)
    age_weights: Mapping[str, float]                # band id -> weight
    gender_weights: Mapping[str, float]
    race_weights: Mapping[str, float]
    income_weights: Mapping[str, float]
    education_weights: Mapping[str, float]
    politics_weights: Mapping[str, float]
    origin_weights: Mapping[str, float]
    unknown_rates: Mapping[str, float] = field(default_factory=dict)
    bias_base: float = 0.75
    bias_multipliers: Mapping[str, float] = field(default_factory=dict)
    heterogeneity: float = 0.0
    income_shift: float = 0.0
    interests: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GenerationConfig":
        try:
            states = tuple((s["name"], float(s["weight"])) for s in data["states"])
            cities = {
                c["name"]: (c["state"], float(c["x"]), float(c["y"]))
                for c in data.get("cities", [])
            }
            bias = data.get("bias", {})
            return cls(
                seed=int(data["seed"]),
                size=int(data["size"]),
                frame_miles=float(data.get("frame_miles", 200.0)),
                states=states,
                cities=cities,
                age_weights=dict(data["age_weights"]),
                gender_weights=dict(data["gender_weights"]),
                race_weights=dict(data["race_weights"]),
                income_weights=dict(data["income_weights"]),
                education_weights=dict(data["education_weights"]),
                politics_weights=dict(data["politics_weights"]),
                origin_weights=dict(data["origin_weights"]),
                unknown_rates=dict(data.get("unknown_rates", {})),
                bias_base=float(bias.get("base", 0.75)),
                bias_multipliers=dict(bias.get("multipliers", {})),
                heterogeneity=float(data.get("heterogeneity", 0.0)),
                income_shift=float(data.get("income_shift", 0.0)),
                interests=dict(data.get("interests", {})),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"generation config is missing or malformed: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "size": self.size,
            "frame_miles": self.frame_miles,
            "states": [{"name": n, "weight": w} for n, w in self.states],
            "cities": [
                {"name": n, "state": s, "x": x, "y": y}
                for n, (s, x, y) in self.cities.items()
            ],
            "age_weights": dict(self.age_weights),
            "gender_weights": dict(self.gender_weights),
            "race_weights": dict(self.race_weights),
            "income_weights": dict(self.income_weights),
            "education_weights": dict(self.education_weights),
            "politics_weights": dict(self.politics_weights),
            "origin_weights": dict(self.origin_weights),
            "unknown_rates": dict(self.unknown_rates),
            "bias": {"base": self.bias_base, "multipliers": dict(self.bias_multipliers)},
            "heterogeneity": self.heterogeneity,
            "income_shift": self.income_shift,
            "interests": dict(self.interests),
        }

    @classmethod
    def from_file(cls, path: str | Path, seed: int | None = None) -> "GenerationConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if seed is not None:
            data = {**data, "seed": seed}
        return cls.from_dict(data)

    def with_seed(self, seed: int) -> "GenerationConfig":
        return GenerationConfig.from_dict({**self.to_dict(), "seed": seed})

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class Individual:
    """Row view of one person, for tests and inspection (storage is columnar)."""

    age: int
    gender: str
    state: str
    city_coords: tuple[float, float]
    attributes: Mapping[str, str | None]           # ground truth per dimension
    platform_attributes: Mapping[str, str | None]  # platform-visible source categories
    interests: Mapping[str, bool]
    on_platform: bool


def _normalized(weights: Mapping[str, float], what: str) -> tuple[tuple[str, ...], np.ndarray]:
    keys = tuple(weights)
    values = np.asarray([float(weights[k]) for k in keys], dtype=float)
    if len(keys) == 0 or np.any(values < 0) or values.sum() <= 0:
        raise ValueError(f"{what} weights must be nonempty and nonnegative with positive sum")
    return keys, values / values.sum()


def _band_bounds(band: str) -> tuple[int, int]:
    lo, hi = age_bin_range(band)
    return lo, AGE_MAX if hi is None else hi


class SyntheticPopulation:
    """Columnar population with ground-truth and platform-visible attributes."""

    def __init__(self, config: GenerationConfig, registry: Registry):
        self.config = config
        self.registry = registry
        self.seed = config.seed
        self.state_names = tuple(name for name, _ in config.states)
        for name in self.state_names:
            if name not in registry.states:
                raise ValueError(f"config state {name!r} is not in the registry")
        for city, (state, _, _) in config.cities.items():
            if state not in self.state_names:
                raise ValueError(f"config city {city!r} references unknown state {state!r}")
        self._generate()

    # -- generation -------------------------------------------------------

    def _truth_vocabs(self) -> dict[str, tuple[str, ...]]:
        cfg = self.config
        reg = self.registry
        vocabs = {
            DIM_AGE: tuple(cfg.age_weights),
            DIM_GENDER: tuple(cfg.gender_weights),
            DIM_RACE: tuple(cfg.race_weights),
            DIM_INCOME: tuple(cfg.income_weights),
            DIM_EDUCATION: tuple(cfg.education_weights),
            DIM_POLITICAL: tuple(cfg.politics_weights),
            DIM_ORIGIN: tuple(cfg.origin_weights),
        }
        if set(vocabs[DIM_GENDER]) != {GENDER_MALE, GENDER_FEMALE}:
            raise ValueError("gender_weights must cover exactly male and female")
        income_order = (INCOME_BELOW_CANONICAL,) + reg.dimension(DIM_INCOME).category_ids()
        if vocabs[DIM_INCOME] != income_order:
            raise ValueError(f"income_weights keys must be {income_order} in order")
        for dim, allowed_extra in (
            (DIM_RACE, {RACE_OTHER}),
            (DIM_EDUCATION, set()),
            (DIM_POLITICAL, set()),
        ):
            canonical = set(self.registry.dimension(dim).category_ids())
            unknown = set(vocabs[dim]) - canonical - allowed_extra
            if unknown:
                raise ValueError(f"{dim} weights use non-canonical keys: {sorted(unknown)}")
        origin_canonical = set(self.registry.dimension(DIM_ORIGIN).category_ids())
        bad = set(vocabs[DIM_ORIGIN]) - origin_canonical - {ORIGIN_NATIVE}
        if bad:
            raise ValueError(f"origin weights use non-canonical countries: {sorted(bad)}")
        return vocabs

    def _generate(self) -> None:
        cfg = self.config
        n = cfg.size
        rng = np.random.default_rng(cfg.seed)
        self.vocab = self._truth_vocabs()

        # Per-state category tables, drawn before any individual so the
        # stream layout is fixed. heterogeneity > 0 perturbs the base weights
        # per state via a Dirichlet draw.
        n_states = len(cfg.states)
        base_tables: dict[str, np.ndarray] = {}
        weights_by_dim = {
            DIM_AGE: cfg.age_weights,
            DIM_GENDER: cfg.gender_weights,
            DIM_RACE: cfg.race_weights,
            DIM_INCOME: cfg.income_weights,
            DIM_EDUCATION: cfg.education_weights,
            DIM_POLITICAL: cfg.politics_weights,
            DIM_ORIGIN: cfg.origin_weights,
        }
        for dim in _DRAW_ORDER:
            _, probs = _normalized(weights_by_dim[dim], dim)
            if cfg.heterogeneity > 0:
                alpha = np.maximum(probs / cfg.heterogeneity, 1e-3)
                table = rng.dirichlet(alpha, size=n_states)
            else:
                table = np.tile(probs, (n_states, 1))
            base_tables[dim] = table

        state_keys, state_probs = _normalized(dict(cfg.states), "state")
        self.state_col = rng.choice(n_states, size=n, p=state_probs).astype(np.int32)
        self.x = rng.uniform(0.0, cfg.frame_miles, n)
        self.y = rng.uniform(0.0, cfg.frame_miles, n)

        truth: dict[str, np.ndarray] = {}
        for dim in _DRAW_ORDER:
            k = base_tables[dim].shape[1]
            col = np.empty(n, dtype=np.int32)
            for s in range(n_states):
                idx = np.nonzero(self.state_col == s)[0]
                if idx.size:
                    col[idx] = rng.choice(k, size=idx.size, p=base_tables[dim][s])
            truth[dim] = col

        # Ages: uniform integer inside the drawn band.
        bands = [_band_bounds(b) for b in self.vocab[DIM_AGE]]
        lo = np.asarray([b[0] for b in bands])[truth[DIM_AGE]]
        hi = np.asarray([b[1] for b in bands])[truth[DIM_AGE]]
        self.age = (lo + np.floor(rng.random(n) * (hi - lo + 1)).astype(np.int64)).astype(np.int32)

        # Universe restrictions: -1 marks "not defined for this person".
        truth[DIM_INCOME][self.age < INCOME_UNIVERSE_MIN_AGE] = -1
        truth[DIM_EDUCATION][self.age < EDUCATION_UNIVERSE_MIN_AGE] = -1
        truth[DIM_POLITICAL][self.age < POLITICS_UNIVERSE_MIN_AGE] = -1
        self.truth = truth

        # Platform-visible attributes: source-category codes, -1 for unknown.
        self.platform_vocab: dict[str, tuple[str, ...]] = {}
        self.platform_attrs: dict[str, np.ndarray] = {}
        for dim in (DIM_RACE, DIM_INCOME, DIM_EDUCATION, DIM_POLITICAL, DIM_ORIGIN):
            self._derive_platform_attr(dim, rng)

        self.interest_cols: dict[str, np.ndarray] = {}
        for name in cfg.interests:
            rate = float(cfg.interests[name])
            self.interest_cols[name] = rng.random(n) < rate

        # Platform inclusion: base rate times per-stratum multipliers on the
        # ground truth, zero under the platform age floor.
        p = np.full(n, cfg.bias_base, dtype=float)
        for key, mult in cfg.bias_multipliers.items():
            dim, _, cat = key.partition(":")
            if dim not in self.vocab:
                raise ValueError(f"bias multiplier on unknown dimension {dim!r}")
            if cat not in self.vocab[dim]:
                raise ValueError(f"bias multiplier on unknown category {key!r}")
            code = self.vocab[dim].index(cat)
            p[truth[dim] == code] *= float(mult)
        np.clip(p, 0.0, 1.0, out=p)
        p[self.age < PLATFORM_MIN_AGE] = 0.0
        self.on_platform = rng.random(n) < p

        self.n = n

    def _derive_platform_attr(self, dim: str, rng: np.random.Generator) -> None:
        """Map ground truth onto the platform's source vocabulary for one dimension."""
        cfg = self.config
        n = cfg.size
        mapping = self.registry.dimension(dim).mapping
        sources = mapping.sources("platform")
        self.platform_vocab[dim] = sources
        src_code = {src: i for i, src in enumerate(sources)}

        truth_col = self.truth[dim]
        vocab = self.vocab[dim]

        if dim == DIM_INCOME and cfg.income_shift > 0:
            # Partner data may overstate earnings by one bucket.
            shifted = truth_col.copy()
            movable = truth_col >= 0
            bump = movable & (rng.random(n) < cfg.income_shift)
            shifted[bump] = np.minimum(shifted[bump] + 1, len(vocab) - 1)
            truth_col = shifted
        elif dim == DIM_INCOME:
            rng.random(n)  # keep the stream layout independent of the flag

        # For each truth category, the platform reports one of its source
        # categories (several for education/income brackets), or nothing when
        # the category is not platform-taggable (white race, sub-25k income,
        # countries without an expat attribute).
        choice = rng.random(n)
        col = np.full(n, -1, dtype=np.int32)
        for code, canonical_id in enumerate(vocab):
            srcs = [src_code[s] for s in mapping.sources_for("platform", canonical_id)]
            if not srcs:
                continue
            mask = truth_col == code
            if len(srcs) == 1:
                col[mask] = srcs[0]
            else:
                picks = np.floor(choice[mask] * len(srcs)).astype(np.int64)
                col[mask] = np.asarray(srcs, dtype=np.int32)[picks]

        rate = float(cfg.unknown_rates.get(dim, 0.0))
        unknown = rng.random(n) < rate
        col[unknown] = -1
        self.platform_attrs[dim] = col

    # -- views ------------------------------------------------------------

    @property
    def n_platform(self) -> int:
        return int(self.on_platform.sum())

    def state_code(self, state_name: str) -> int:
        try:
            return self.state_names.index(state_name)
        except ValueError:
            raise GeographyUnknown(f"state {state_name!r} not in population") from None

    def geo_mask(self, geo: GeoScope) -> np.ndarray:
        """Boolean mask of individuals inside a geography (all ages, both sides)."""
        if geo.level == LEVEL_COUNTRY:
            if geo.name != self.registry.country:
                raise GeographyUnknown(f"country {geo.name!r} not in population")
            return np.ones(self.n, dtype=bool)
        if geo.level == LEVEL_STATE:
            return self.state_col == self.state_code(geo.name)
        city = self.config.cities.get(geo.name)
        if city is None:
            raise GeographyUnknown(f"city {geo.name!r} not in population")
        state, cx, cy = city
        mask = self.state_col == self.state_code(state)
        # Closed disc: boundary individuals are inside.
        dist2 = (self.x - cx) ** 2 + (self.y - cy) ** 2
        return mask & (dist2 <= geo.radius_miles**2)

    def ground_truth_total(self, geo: GeoScope, ages: str = "all") -> int:
        mask = self.geo_mask(geo)
        if ages == "13+":
            mask = mask & (self.age >= PLATFORM_MIN_AGE)
        elif ages != "all":
            raise ValueError("ages must be 'all' or '13+'")
        return int(mask.sum())

    def ground_truth_distribution(self, geo: GeoScope, dimension: str) -> DemographicDistribution:
        """Census-side distribution of the ground truth, canonicalized.

        Mirrors what ingesting a perfect official table would produce: age is
        truncated to the platform's support (under-13 excluded, 13-14
        unspecified), race's non-canonical groups and native-born origin are
        unspecified, income under 25k is unspecified within the earners
        universe.
        """
        mask = self.geo_mask(geo)
        reg_dim = self.registry.dimension(dimension)
        cat_ids = reg_dim.category_ids()

        if dimension == DIM_AGE:
            counts = {}
            for cat in cat_ids:
                lo, hi = age_bin_range(cat)
                hi = AGE_MAX if hi is None else hi
                counts[cat] = int((mask & (self.age >= lo) & (self.age <= hi)).sum())
            unspecified = int((mask & (self.age >= PLATFORM_MIN_AGE) & (self.age < 15)).sum())
            excluded = int((mask & (self.age < PLATFORM_MIN_AGE)).sum())
            return DemographicDistribution.from_counts(
                geo, dimension, counts, unspecified=unspecified, excluded=excluded
            )

        if dimension == DIM_GENDER:
            col = self.truth[DIM_GENDER]
            vocab = self.vocab[DIM_GENDER]
            counts = {cat: int((mask & (col == vocab.index(cat))).sum()) for cat in cat_ids}
            return DemographicDistribution.from_counts(geo, dimension, counts)

        col = self.truth[dimension]
        vocab = self.vocab[dimension]
        in_universe = mask & (col >= 0)
        counts = {}
        for cat in cat_ids:
            if cat in vocab:
                counts[cat] = int((in_universe & (col == vocab.index(cat))).sum())
            else:
                counts[cat] = 0
        classified = sum(counts.values())
        unspecified = int(in_universe.sum()) - classified
        return DemographicDistribution.from_counts(
            geo, dimension, counts, unspecified=unspecified
        )

    def interest_truth_count(self, name: str, geo: GeoScope) -> int:
        """Ground-truth number of people with an interest inside a geography."""
        if name not in self.interest_cols:
            raise ValueError(f"interest {name!r} not declared in the config")
        return int((self.interest_cols[name] & self.geo_mask(geo)).sum())

    def individuals(self, platform_only: bool = False) -> Iterator[Individual]:
        """Lazy row view; storage stays columnar."""
        dims = (DIM_RACE, DIM_INCOME, DIM_EDUCATION, DIM_POLITICAL, DIM_ORIGIN)
        gender_vocab = self.vocab[DIM_GENDER]
        for i in range(self.n):
            on_platform = bool(self.on_platform[i])
            if platform_only and not on_platform:
                continue
            attributes = {}
            platform_attributes = {}
            for dim in dims:
                t = self.truth[dim][i]
                attributes[dim] = self.vocab[dim][t] if t >= 0 else None
                p = self.platform_attrs[dim][i]
                platform_attributes[dim] = self.platform_vocab[dim][p] if p >= 0 else None
            yield Individual(
                age=int(self.age[i]),
                gender=gender_vocab[self.truth[DIM_GENDER][i]],
                state=self.state_names[self.state_col[i]],
                city_coords=(float(self.x[i]), float(self.y[i])),
                attributes=attributes,
                platform_attributes=platform_attributes,
                interests={k: bool(v[i]) for k, v in self.interest_cols.items()},
                on_platform=on_platform,
            )


def generate_population(config: GenerationConfig, registry: Registry) -> SyntheticPopulation:
    return SyntheticPopulation(config, registry)
