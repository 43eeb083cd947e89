"""Correlation machinery against numpy oracles and published reference values."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demo_census import (
    CorrelationReport,
    DegenerateVariance,
    DemographicDistribution,
    DomainError,
    GeoScope,
    correlate_category,
    correlation_table,
    pearson,
    pearson_ci95,
    shifted_bucket_correlation,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
vectors = st.lists(finite_floats, min_size=2, max_size=40)


def _state_dist(state: str, shares: dict, tainted=()) -> DemographicDistribution:
    total = 10_000
    counts = {cat: share * total for cat, share in shares.items()}
    return DemographicDistribution.from_counts(
        GeoScope("state", state), "political_leaning", counts,
        floor_tainted=frozenset(tainted),
    )


class TestPearson:
    def test_matches_numpy(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=60)
        y = 0.4 * x + rng.normal(size=60)
        assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)

    def test_perfect_self_correlation(self):
        x = [2.0, 5.0, 3.5, 8.0]
        assert pearson(x, x) == 1.0
        assert pearson(x, [-v for v in x]) == -1.0

    @given(x=vectors, y=vectors)
    def test_symmetry(self, x, y):
        n = min(len(x), len(y))
        x, y = x[:n], y[:n]
        try:
            forward = pearson(x, y)
        except (DegenerateVariance, DomainError):
            return
        assert pearson(y, x) == pytest.approx(forward, abs=1e-12)

    @settings(max_examples=60)
    @given(
        pairs=st.lists(
            st.tuples(
                st.integers(min_value=-1000, max_value=1000),
                st.integers(min_value=-1000, max_value=1000),
            ),
            min_size=4,
            max_size=20,
        ),
        a=st.floats(min_value=1e-3, max_value=1e3),
        b=st.floats(min_value=-1e4, max_value=1e4),
    )
    def test_affine_invariance(self, pairs, a, b):
        x = [float(p) for p, _ in pairs]
        y = [float(q) for _, q in pairs]
        try:
            base = pearson(x, y)
        except DegenerateVariance:
            return
        scaled = pearson([a * v + b for v in x], y)
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_clamped_into_unit_interval(self):
        x = np.linspace(0, 1, 9)
        assert -1.0 <= pearson(x, 3 * x + 2) <= 1.0

    def test_constant_vector_rejected(self):
        with pytest.raises(DegenerateVariance):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_shape_errors(self):
        with pytest.raises(DomainError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(DomainError):
            pearson([1.0], [2.0])


class TestPearsonCI95:
    def test_reference_intervals(self):
        # Fisher z at n=51: published intervals for the state-level analysis
        assert pearson_ci95(0.97, 51) == pytest.approx((0.947770, 0.982852), abs=5e-7)
        assert pearson_ci95(0.83, 51) == pytest.approx((0.718837, 0.899775), abs=5e-7)

    def test_small_or_degenerate_inputs_rejected(self):
        with pytest.raises(DomainError):
            pearson_ci95(0.5, 3)
        with pytest.raises(DomainError):
            pearson_ci95(1.0, 51)
        with pytest.raises(DomainError):
            pearson_ci95(-1.0, 51)

    @given(
        r=st.floats(min_value=-0.999, max_value=0.999),
        n=st.integers(min_value=4, max_value=500),
    )
    def test_interval_contains_r(self, r, n):
        lo, hi = pearson_ci95(r, n)
        assert -1.0 <= lo < r < hi <= 1.0

    @given(r=st.floats(min_value=-0.99, max_value=0.99))
    def test_width_shrinks_with_n(self, r):
        widths = [hi - lo for lo, hi in (pearson_ci95(r, n) for n in (5, 20, 51, 200))]
        assert all(wide > narrow for wide, narrow in zip(widths, widths[1:]))


class TestCorrelationReport:
    def test_requires_enough_samples(self):
        with pytest.raises(DomainError):
            CorrelationReport("race", "hispanic", "state", 3, 0.5, (0.2, 0.7))

    def test_interval_must_contain_r(self):
        with pytest.raises(DomainError):
            CorrelationReport("race", "hispanic", "state", 10, 0.9, (0.2, 0.7))

    def test_baseline_defaults_to_category(self):
        report = CorrelationReport("income", "above_100k", "state", 10, 0.5, (0.2, 0.7))
        assert report.baseline == "above_100k"
        shifted = CorrelationReport(
            "income", "above_100k", "state", 10, 0.5, (0.2, 0.7),
            baseline_category="75k_100k",
        )
        assert shifted.baseline == "75k_100k"


STATES = ("Ohio", "Texas", "Georgia", "Montana", "Vermont", "Iowa")


def _paired_fixture(noise=0.0, tainted_state=None):
    rng = np.random.default_rng(3)
    platform, census = [], []
    for i, state in enumerate(STATES):
        left = 0.22 + 0.06 * i
        moderate = 0.40 - 0.02 * i
        census_shares = {"left": left, "moderate": moderate, "right": 1.0 - left - moderate}
        jitter = noise * rng.normal()
        # "right" stays identical on both sides so the table has a |r| = 1 skip
        platform_shares = {
            "left": left + jitter,
            "moderate": moderate - jitter,
            "right": 1.0 - left - moderate,
        }
        tainted = ("left",) if state == tainted_state else ()
        platform.append(_state_dist(state, platform_shares, tainted))
        census.append(_state_dist(state, census_shares))
    return platform, census


class TestShareCorrelation:
    def test_identical_shares_are_rejected_as_degenerate(self):
        platform, census = _paired_fixture(noise=0.0)
        with pytest.raises(DomainError, match=r"\|r\| = 1"):
            correlate_category(platform, census, "left")

    def test_noisy_shares_give_a_report(self):
        platform, census = _paired_fixture(noise=0.01)
        report = correlate_category(platform, census, "left")
        assert report.dimension == "political_leaning"
        assert report.level == "state"
        assert report.n == len(STATES)
        assert report.ci95[0] <= report.r <= report.ci95[1]
        assert report.baseline_category is None
        # oracle: numpy over the same share pairs
        xs = [d.shares_for("classified")["left"] for d in platform]
        ys = [d.shares_for("classified")["left"] for d in census]
        assert report.r == pytest.approx(np.corrcoef(xs, ys)[0, 1], abs=1e-12)

    def test_tainted_cells_dropped_by_default(self):
        platform, census = _paired_fixture(noise=0.01, tainted_state="Iowa")
        report = correlate_category(platform, census, "left")
        assert report.n == len(STATES) - 1
        included = correlate_category(platform, census, "left", include_tainted=True)
        assert included.n == len(STATES)

    def test_too_few_pairs(self):
        platform, census = _paired_fixture(noise=0.01)
        with pytest.raises(DomainError, match="need 4"):
            correlate_category(platform[:3], census[:3], "left")

    def test_duplicate_geography_rejected(self):
        platform, census = _paired_fixture(noise=0.01)
        with pytest.raises(DomainError, match="duplicate"):
            correlate_category(platform + platform[:1], census, "left")

    def test_no_common_geography_rejected(self):
        platform, census = _paired_fixture(noise=0.01)
        other = [
            DemographicDistribution.from_counts(
                GeoScope("state", f"Elsewhere {i}"), "political_leaning", d.counts
            )
            for i, d in enumerate(census)
        ]
        with pytest.raises(DomainError, match="both sides"):
            correlate_category(platform, other, "left")

    def test_mixed_dimensions_rejected(self):
        platform, census = _paired_fixture(noise=0.01)
        race = DemographicDistribution.from_counts(
            GeoScope("state", "Ohio"), "race",
            {"white": 5, "hispanic": 2, "african_american": 2, "asian_american": 1},
        )
        with pytest.raises(DomainError, match="mixed dimensions"):
            correlate_category(platform, census[:-1] + [race], "left")

    def test_missing_category_rejected(self):
        platform, census = _paired_fixture(noise=0.01)
        with pytest.raises(DomainError, match="lacks category"):
            correlate_category(platform, census, "anarchist")

    def test_shifted_buckets_note_the_baseline(self):
        platform, census = _paired_fixture(noise=0.01)
        report = shifted_bucket_correlation(platform, census, "left", "moderate")
        assert report.category == "left"
        assert report.baseline_category == "moderate"
        assert report.baseline == "moderate"

    def test_table_reports_and_skips(self):
        platform, census = _paired_fixture(noise=0.01)
        reports, skipped = correlation_table(platform, census)
        assert {r.category for r in reports} == {"left", "moderate"}
        # "right" is identical on both sides by construction: |r| = 1
        assert len(skipped) == 1 and skipped[0].startswith("political_leaning/right")

    def test_table_needs_input(self):
        with pytest.raises(DomainError):
            correlation_table([], [])
