"""Reach backends: answer "how many platform users match this targeting spec".

Two interchangeable oracles share the estimate shape and the privacy floor:

* SyntheticBackend counts matching individuals of a seeded synthetic
  population (exact, deterministic, floor applied on top);
* FixtureBackend replays counts recorded from a real collection run, keyed by
  a canonical spec serialization so lookup is order-insensitive.

Counts below 1000 are never reported: the platform answers 1000 for any
smaller audience, so a stored or returned 1000 may hide a smaller truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol

import numpy as np

from .errors import FixtureMiss, FloorViolation
from .model import (
    DIM_AGE,
    DIM_GENDER,
    GENDER_ALL,
    LEVEL_CITY,
    GeoScope,
    TargetingSpec,
    age_bin_range,
)
from .population import AGE_MAX, SyntheticPopulation
from .registry import Registry

PRIVACY_FLOOR = 1000

SOURCE_SYNTHETIC = "synthetic"
SOURCE_FIXTURE = "fixture"

# Includes on this pseudo-dimension address the population's extra bernoulli
# attributes; the platform's quarter-million behavioral attributes are out of
# scope, but specs carrying them must stay representable.
DIM_INTEREST = "interest"


def spec_key(spec: TargetingSpec) -> str:
    """Canonical serialization of a spec: sorted constraints, stable floats."""
    geo: dict = {"level": spec.geo.level, "name": spec.geo.name}
    if spec.geo.level == LEVEL_CITY:
        geo["radius_miles"] = float(spec.geo.radius_miles)
    payload = {
        "geo": geo,
        "age": [spec.age_lo, spec.age_hi],
        "gender": spec.gender,
        "includes": sorted([d, c] for d, c in spec.includes),
        "excludes": sorted([d, c] for d, c in spec.excludes),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ReachEstimate:
    """A backend's answer for one targeting spec.

    floor_applied is exact on the synthetic backend (the true count is
    known); fixture counts of exactly 1000 are undecidable and flagged
    ambiguous_floor instead. floor_tainted is the union: the cell may have
    been censored.
    """

    spec: TargetingSpec
    count: int
    floor_applied: bool
    source: str
    ambiguous_floor: bool = False

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("reach count cannot be negative")

    @property
    def floor_tainted(self) -> bool:
        return self.floor_applied or self.ambiguous_floor


class ReachBackend(Protocol):
    source: str
    registry: Registry

    def reach(self, spec: TargetingSpec) -> ReachEstimate: ...


RoundPolicy = Callable[[int], int]


def significant_digits_policy(digits: int = 3) -> RoundPolicy:
    """Fixture-realistic rounding to a number of significant digits."""
    if digits < 1:
        raise ValueError("digits must be >= 1")

    def policy(count: int) -> int:
        if count == 0:
            return 0
        magnitude = len(str(abs(count))) - digits
        if magnitude <= 0:
            return count
        step = 10**magnitude
        return int(round(count / step) * step)

    return policy


class SyntheticBackend:
    """Exact reach oracle over a synthetic population, privacy floor on top.

    round_policy (default identity) is applied to the true count before the
    floor; floor_enabled=False is a diagnostics mode that returns raw counts
    (used to check compiled cells against independent scans).
    """

    source = SOURCE_SYNTHETIC

    def __init__(
        self,
        population: SyntheticPopulation,
        floor_enabled: bool = True,
        round_policy: RoundPolicy | None = None,
    ):
        self.population = population
        self.registry = population.registry
        self.floor_enabled = floor_enabled
        self.round_policy = round_policy
        self._geo_masks: dict[str, np.ndarray] = {}
        self._constraint_masks: dict[tuple[str, str], np.ndarray] = {}
        self._gender_codes = {
            g: population.vocab[DIM_GENDER].index(g) for g in population.vocab[DIM_GENDER]
        }

    def _geo_mask(self, geo: GeoScope) -> np.ndarray:
        mask = self._geo_masks.get(geo.key)
        if mask is None:
            mask = self.population.geo_mask(geo)
            self._geo_masks[geo.key] = mask
        return mask

    def _constraint_mask(self, dim: str, cat: str) -> np.ndarray:
        """Positive matches for one (dimension, category); unknowns never match."""
        key = (dim, cat)
        mask = self._constraint_masks.get(key)
        if mask is not None:
            return mask
        pop = self.population
        if dim == DIM_AGE:
            try:
                lo, hi = age_bin_range(cat)
            except ValueError:
                mask = np.zeros(pop.n, dtype=bool)
            else:
                hi = AGE_MAX if hi is None else hi
                mask = (pop.age >= lo) & (pop.age <= hi)
        elif dim == DIM_GENDER:
            code = self._gender_codes.get(cat)
            mask = (
                pop.truth[DIM_GENDER] == code
                if code is not None
                else np.zeros(pop.n, dtype=bool)
            )
        elif dim == DIM_INTEREST:
            col = pop.interest_cols.get(cat)
            mask = col if col is not None else np.zeros(pop.n, dtype=bool)
        elif dim in pop.platform_attrs:
            vocab = pop.platform_vocab[dim]
            if cat in vocab:
                mask = pop.platform_attrs[dim] == vocab.index(cat)
            else:
                mask = np.zeros(pop.n, dtype=bool)
        else:
            # Opaque extra keys the population does not model match nobody.
            mask = np.zeros(pop.n, dtype=bool)
        self._constraint_masks[key] = mask
        return mask

    def true_count(self, spec: TargetingSpec) -> int:
        """Exact matched-individual count over platform members."""
        pop = self.population
        mask = pop.on_platform & self._geo_mask(spec.geo)
        mask = mask & (pop.age >= spec.age_lo)
        if spec.age_hi is not None:
            mask = mask & (pop.age <= spec.age_hi)
        if spec.gender != GENDER_ALL:
            mask = mask & self._constraint_mask(DIM_GENDER, spec.gender)
        for dim, cats in spec.includes_by_dimension().items():
            union = np.zeros(pop.n, dtype=bool)
            for cat in cats:
                union = union | self._constraint_mask(dim, cat)
            mask = mask & union
        for dim, cat in spec.excludes:
            mask = mask & ~self._constraint_mask(dim, cat)
        return int(np.count_nonzero(mask))

    def reach(self, spec: TargetingSpec) -> ReachEstimate:
        true = self.true_count(spec)
        count = self.round_policy(true) if self.round_policy else true
        if self.floor_enabled:
            return ReachEstimate(
                spec=spec,
                count=max(PRIVACY_FLOOR, count),
                floor_applied=true < PRIVACY_FLOOR,
                source=self.source,
            )
        return ReachEstimate(spec=spec, count=count, floor_applied=False, source=self.source)


@dataclass(frozen=True)
class FixtureEntry:
    key: str
    count: int
    date: str | None = None


@dataclass(frozen=True)
class FixtureStore:
    """Immutable recorded-reach store; record_fixture returns an updated copy."""

    entries: Mapping[str, FixtureEntry] = field(default_factory=dict)
    metadata: Mapping[str, str] = field(default_factory=dict)

    def lookup(self, key: str) -> FixtureEntry | None:
        return self.entries.get(key)


def record_fixture(
    store: FixtureStore, spec: TargetingSpec, count: int, date: str | None = None
) -> FixtureStore:
    """Store a reach count for a spec; rejects counts the platform could never report."""
    if count < PRIVACY_FLOOR:
        raise FloorViolation(
            f"cannot record count {count}; the platform reports at least {PRIVACY_FLOOR}"
        )
    key = spec_key(spec)
    entries = dict(store.entries)
    entries[key] = FixtureEntry(key=key, count=int(count), date=date)  # last write wins
    return FixtureStore(entries=entries, metadata=dict(store.metadata))


def save_fixtures(store: FixtureStore, path: str | Path) -> None:
    payload = {
        "metadata": dict(store.metadata),
        "entries": [
            {"key": e.key, "count": e.count, "date": e.date}
            for e in sorted(store.entries.values(), key=lambda e: e.key)
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")


def load_fixtures(path: str | Path) -> FixtureStore:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = {}
    for item in data.get("entries", []):
        entry = FixtureEntry(key=item["key"], count=int(item["count"]), date=item.get("date"))
        if entry.count < PRIVACY_FLOOR:
            raise FloorViolation(f"fixture file holds sub-floor count {entry.count}")
        entries[entry.key] = entry
    return FixtureStore(entries=entries, metadata=dict(data.get("metadata", {})))


class FixtureBackend:
    """Replays recorded reach estimates; misses are errors, not guesses."""

    source = SOURCE_FIXTURE

    def __init__(self, store: FixtureStore, registry: Registry):
        self.store = store
        self.registry = registry

    def reach(self, spec: TargetingSpec) -> ReachEstimate:
        key = spec_key(spec)
        entry = self.store.lookup(key)
        if entry is None:
            raise FixtureMiss(f"no recorded fixture for spec {key}")
        return ReachEstimate(
            spec=spec,
            count=entry.count,
            floor_applied=False,
            source=self.source,
            ambiguous_floor=entry.count == PRIVACY_FLOOR,
        )
