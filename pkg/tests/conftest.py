"""Shared fixtures: the bundled registry, a small deterministic population,
and reach backends over it.

The small population (20k people, six states, four cities) is sized so the
whole unit suite stays fast while every canonical category is populated at
the country level; Montana's weight is tiny on purpose, so state-level cells
there exercise the privacy floor.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from demo_census import (
    FixtureBackend,
    GenerationConfig,
    SyntheticBackend,
    SyntheticPopulation,
    load_default_registry,
    load_fixtures,
)

SMALL_SEED = 7
SMALL_SIZE = 20_000

# name -> (weight); mirrors a slice of the bundled demo config.
SMALL_STATES = (
    ("New York", 0.30),
    ("Texas", 0.30),
    ("California", 0.20),
    ("Ohio", 0.10),
    ("Georgia", 0.08),
    ("Montana", 0.02),
)
SMALL_CITIES = {
    "New York": ("New York", 60.0, 60.0),
    "Dallas": ("Texas", 117.0, 100.0),
    "Fort Worth": ("Texas", 90.0, 100.0),
    "Arlington": ("Texas", 102.0, 100.0),
}


def small_config_dict() -> dict:
    return {
        "seed": SMALL_SEED,
        "size": SMALL_SIZE,
        "frame_miles": 200.0,
        "states": [{"name": n, "weight": w} for n, w in SMALL_STATES],
        "cities": [
            {"name": n, "state": s, "x": x, "y": y}
            for n, (s, x, y) in SMALL_CITIES.items()
        ],
        "age_weights": {
            "0-12": 0.158, "13-14": 0.026, "15-19": 0.066, "20-24": 0.068,
            "25-29": 0.070, "30-34": 0.067, "35-39": 0.065, "40-44": 0.062,
            "45-49": 0.064, "50-54": 0.065, "55-59": 0.067, "60-64": 0.062,
            "65+": 0.160,
        },
        "gender_weights": {"male": 0.492, "female": 0.508},
        "race_weights": {
            "white": 0.613, "hispanic": 0.179, "african_american": 0.124,
            "asian_american": 0.055, "other": 0.029,
        },
        "income_weights": {
            "under_25k": 0.22, "25k_50k": 0.30, "50k_75k": 0.22,
            "75k_100k": 0.13, "above_100k": 0.13,
        },
        "education_weights": {
            "incomplete_hs": 0.11, "high_school": 0.27, "some_college": 0.21,
            "college": 0.30, "grad_degree": 0.11,
        },
        "politics_weights": {"left": 0.30, "moderate": 0.38, "right": 0.32},
        "origin_weights": {
            "none": 0.90, "mexico": 0.04, "china": 0.015, "india": 0.015,
            "philippines": 0.01, "canada": 0.01, "jamaica": 0.01,
        },
        "unknown_rates": {
            "race": 0.15, "education": 0.28, "income": 0.45,
            "political_leaning": 0.35, "country_of_origin": 0.30,
        },
        "bias": {
            "base": 0.74,
            "multipliers": {
                "age:65+": 0.55, "age:13-14": 0.80,
                "race:african_american": 1.12, "race:hispanic": 1.08,
                "income:above_100k": 0.92, "education:college": 1.05,
                "political_leaning:left": 1.06,
            },
        },
        "heterogeneity": 0.12,
        "income_shift": 0.0,
        "interests": {"gadgets": 0.3},
    }


@pytest.fixture(scope="session")
def registry():
    return load_default_registry()


@pytest.fixture(scope="session")
def small_config():
    return GenerationConfig.from_dict(small_config_dict())


@pytest.fixture(scope="session")
def small_pop(small_config, registry):
    return SyntheticPopulation(small_config, registry)


@pytest.fixture(scope="session")
def backend(small_pop):
    """Floored reach backend over the small population."""
    return SyntheticBackend(small_pop)


@pytest.fixture(scope="session")
def raw_backend(small_pop):
    """Floor-disabled diagnostics backend over the same population."""
    return SyntheticBackend(small_pop, floor_enabled=False)


@pytest.fixture(scope="session")
def politics_fixtures_path(tmp_path_factory) -> Path:
    """The bundled political-audience fixture file, materialized to disk."""
    text = resources.files("demo_census.data").joinpath(
        "us_politics_fixtures.json"
    ).read_text("utf-8")
    path = tmp_path_factory.mktemp("fixtures") / "us_politics_fixtures.json"
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def politics_backend(politics_fixtures_path, registry):
    return FixtureBackend(load_fixtures(politics_fixtures_path), registry)


@pytest.fixture(scope="session")
def demo_config_path(tmp_path_factory) -> Path:
    """The bundled demo population config, materialized to disk."""
    text = resources.files("demo_census.data").joinpath(
        "demo_population.json"
    ).read_text("utf-8")
    path = tmp_path_factory.mktemp("config") / "demo_population.json"
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def small_config_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("config") / "small_population.json"
    path.write_text(json.dumps(small_config_dict(), indent=2), encoding="utf-8")
    return path


# -- acceptance verdict reporting ---------------------------------------------
#
# Acceptance tests record one PASS/FAIL line per criterion; the terminal
# summary prints them after capture ends so they are visible on every run.

ACCEPTANCE_VERDICTS: list[str] = []


def record_verdict(line: str) -> None:
    ACCEPTANCE_VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.line(line)
