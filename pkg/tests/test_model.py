"""Geography scopes, age-bucket parsing, targeting-spec algebra, mappings."""

import pytest

from demo_census import (
    CategoryMapping,
    ConflictingConstraint,
    GeoScope,
    TargetingSpec,
    UnmappedCategory,
    age_bin_range,
    map_to_canonical,
)
from demo_census.model import MappingEntry


class TestGeoScope:
    def test_country_key(self):
        assert GeoScope("country", "United States").key == "country:United States"

    def test_state_key(self):
        geo = GeoScope("state", "Texas")
        assert geo.key == "state:Texas"
        assert str(geo) == "state:Texas"

    def test_city_gets_default_radius(self):
        geo = GeoScope("city", "Dallas")
        assert geo.radius_miles == 30.0
        assert geo.key == "city:Dallas:r30"

    def test_city_explicit_radius_in_key(self):
        assert GeoScope("city", "Dallas", 10).key == "city:Dallas:r10"
        assert GeoScope("city", "Dallas", 12.5).key == "city:Dallas:r12.5"

    @pytest.mark.parametrize("radius", [9.99, 30.01, 0.0, -5.0])
    def test_city_radius_bounds(self, radius):
        with pytest.raises(ValueError):
            GeoScope("city", "Dallas", radius)

    def test_radius_rejected_off_city(self):
        with pytest.raises(ValueError):
            GeoScope("state", "Texas", 20.0)

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            GeoScope("county", "Travis")

    def test_empty_name(self):
        with pytest.raises(ValueError):
            GeoScope("state", "")

    def test_equal_scopes_hash_alike(self):
        assert GeoScope("city", "Dallas", 30.0) == GeoScope("city", "Dallas")
        assert hash(GeoScope("state", "Ohio")) == hash(GeoScope("state", "Ohio"))


class TestAgeBinRange:
    def test_closed_bucket(self):
        assert age_bin_range("15-19") == (15, 19)

    def test_open_bucket(self):
        assert age_bin_range("65+") == (65, None)

    @pytest.mark.parametrize("bad", ["adults", "15-", "-19", "15+19", ""])
    def test_malformed(self, bad):
        with pytest.raises(ValueError):
            age_bin_range(bad)


class TestTargetingSpec:
    def test_defaults(self):
        spec = TargetingSpec(geo=GeoScope("country", "United States"))
        assert spec.age_lo == 13
        assert spec.age_hi is None
        assert spec.gender == "all"
        assert spec.includes == frozenset()
        assert spec.excludes == frozenset()

    def test_with_include_is_pure(self):
        base = TargetingSpec(geo=GeoScope("state", "Texas"))
        refined = base.with_include("race", "Hispanic (US - All)")
        assert base.includes == frozenset()
        assert refined.includes == {("race", "Hispanic (US - All)")}

    def test_with_exclude(self):
        base = TargetingSpec(geo=GeoScope("state", "Texas"))
        refined = base.with_exclude("race", "Asian American (US)")
        assert refined.excludes == {("race", "Asian American (US)")}

    def test_same_dimension_include_then_exclude_rejected(self):
        spec = TargetingSpec(geo=GeoScope("state", "Texas")).with_include("race", "a")
        with pytest.raises(ConflictingConstraint):
            spec.with_exclude("race", "b")

    def test_same_dimension_exclude_then_include_rejected(self):
        spec = TargetingSpec(geo=GeoScope("state", "Texas")).with_exclude("race", "a")
        with pytest.raises(ConflictingConstraint):
            spec.with_include("race", "b")

    def test_conflict_rejected_at_construction(self):
        with pytest.raises(ConflictingConstraint):
            TargetingSpec(
                geo=GeoScope("state", "Texas"),
                includes=[("race", "a")],
                excludes=[("race", "b")],
            )

    def test_underage_rejected(self):
        with pytest.raises(ValueError):
            TargetingSpec(geo=GeoScope("state", "Texas"), age_lo=12)

    def test_age_hi_cannot_reach_open_bucket(self):
        with pytest.raises(ValueError):
            TargetingSpec(geo=GeoScope("state", "Texas"), age_lo=13, age_hi=65)

    def test_age_hi_below_lo(self):
        with pytest.raises(ValueError):
            TargetingSpec(geo=GeoScope("state", "Texas"), age_lo=30, age_hi=20)

    def test_with_age_open_bucket(self):
        spec = TargetingSpec(geo=GeoScope("state", "Texas")).with_age(65, None)
        assert (spec.age_lo, spec.age_hi) == (65, None)

    def test_bad_gender(self):
        with pytest.raises(ValueError):
            TargetingSpec(geo=GeoScope("state", "Texas"), gender="other")

    def test_includes_by_dimension_groups(self):
        spec = (
            TargetingSpec(geo=GeoScope("state", "Texas"))
            .with_include("political_leaning", "US politics (liberal)")
            .with_include("political_leaning", "US politics (very liberal)")
            .with_include("education", "College grad")
        )
        grouped = spec.includes_by_dimension()
        assert grouped["political_leaning"] == {
            "US politics (liberal)",
            "US politics (very liberal)",
        }
        assert grouped["education"] == {"College grad"}


class TestCategoryMapping:
    @pytest.fixture()
    def mapping(self):
        return CategoryMapping(
            dimension="race",
            canonical=("hispanic", "white"),
            entries={
                ("platform", "Hispanic (US - All)"): MappingEntry(
                    "platform", "Hispanic (US - All)", "hispanic"
                ),
                ("census", "Hispanic or Latino (of any race)"): MappingEntry(
                    "census", "Hispanic or Latino (of any race)", "hispanic"
                ),
                ("census", "Two or more races"): MappingEntry(
                    "census", "Two or more races", "@unspecified"
                ),
            },
        )

    def test_lookup_returns_entry(self, mapping):
        entry = mapping.lookup("platform", "Hispanic (US - All)")
        assert entry.target == "hispanic"
        assert entry.weight == 1.0

    def test_lookup_misses_raise(self, mapping):
        with pytest.raises(UnmappedCategory):
            mapping.lookup("platform", "Unknown attr")
        with pytest.raises(UnmappedCategory):
            mapping.lookup("census", "Hispanic (US - All)")  # wrong side

    def test_map_to_canonical_reserved_target(self, mapping):
        assert map_to_canonical(mapping, "census", "Two or more races") == "@unspecified"

    def test_sources_filters_by_side(self, mapping):
        assert mapping.sources("platform") == ("Hispanic (US - All)",)
        assert set(mapping.sources("census")) == {
            "Hispanic or Latino (of any race)",
            "Two or more races",
        }

    def test_sources_for_unknown_canonical_is_empty(self, mapping):
        assert mapping.sources_for("platform", "white") == ()
        assert mapping.sources_for("platform", "no_such") == ()
