"""Registry grammar, validation rules, and the bundled US registry."""

import pytest

from demo_census import (
    GeoScope,
    Registry,
    RegistryError,
    iter_geographies,
    load_default_registry,
    parse_registry,
    validate_registry,
)

MINIMAL = """
version|1
geography|country|United States
geography|state|Texas
geography|city|Dallas|Texas
dimension|political_leaning|exhaustive=false
canonical|political_leaning|left|Left
canonical|political_leaning|moderate|Moderate
canonical|political_leaning|right|Right
map|political_leaning|census|left|left
map|political_leaning|platform|US politics (liberal)|left
"""


class TestParseRegistry:
    def test_minimal_parses(self):
        reg = parse_registry(MINIMAL)
        assert reg.version == 1
        assert reg.country == "United States"
        assert reg.states == ("Texas",)
        assert reg.cities == {"Dallas": "Texas"}
        assert reg.dimension("political_leaning").category_ids() == (
            "left", "moderate", "right",
        )

    def test_comments_and_blanks_ignored(self):
        reg = parse_registry("# comment\n\n" + MINIMAL)
        assert reg.country == "United States"

    def test_missing_version(self):
        with pytest.raises(RegistryError, match="version"):
            parse_registry("geography|country|United States")

    def test_missing_country(self):
        with pytest.raises(RegistryError, match="country"):
            parse_registry("version|1\ngeography|state|Texas")

    def test_duplicate_state(self):
        text = MINIMAL + "geography|state|Texas\n"
        with pytest.raises(RegistryError, match="duplicate state"):
            parse_registry(text)

    def test_city_needs_state_field(self):
        with pytest.raises(RegistryError, match="fourth field"):
            parse_registry("version|1\ngeography|country|X\ngeography|city|Dallas")

    def test_unknown_record_kind(self):
        with pytest.raises(RegistryError, match="unknown record kind"):
            parse_registry(MINIMAL + "frobnicate|x\n")

    def test_canonical_before_dimension(self):
        with pytest.raises(RegistryError, match="before dimension"):
            parse_registry("version|1\ngeography|country|X\ncanonical|race|hispanic|H")

    def test_duplicate_map_entry(self):
        text = MINIMAL + "map|political_leaning|census|left|left\n"
        with pytest.raises(RegistryError, match="twice"):
            parse_registry(text)

    @pytest.mark.parametrize("weight", ["0", "1.5", "-0.2", "x"])
    def test_bad_weights(self, weight):
        text = MINIMAL + f"map|political_leaning|census|lean right|right|weight={weight}\n"
        with pytest.raises(RegistryError):
            parse_registry(text)

    def test_weight_carried_into_entry(self):
        text = MINIMAL + "map|political_leaning|census|lean left|left|weight=0.4\n"
        reg = parse_registry(text)
        entry = reg.dimension("political_leaning").mapping.lookup("census", "lean left")
        assert entry.weight == pytest.approx(0.4)

    def test_duplicate_version(self):
        with pytest.raises(RegistryError, match="duplicate version"):
            parse_registry("version|1\nversion|2\ngeography|country|X")

    def test_category_attrs_parsed(self):
        text = MINIMAL + (
            "dimension|country_of_origin|exhaustive=false\n"
            "canonical|country_of_origin|cuba|Cuba|region=Caribbean\n"
        )
        reg = parse_registry(text)
        assert reg.dimension("country_of_origin").category("cuba").attrs == {
            "region": "Caribbean"
        }


class TestValidateRegistry:
    def test_minimal_is_sound(self):
        assert validate_registry(parse_registry(MINIMAL)) == []

    def test_city_with_unknown_state(self):
        text = MINIMAL.replace("geography|city|Dallas|Texas", "geography|city|Dallas|Narnia")
        problems = validate_registry(parse_registry(text))
        assert any("Narnia" in p for p in problems)

    def test_unknown_dimension_id(self):
        text = MINIMAL + "dimension|shoe_size|exhaustive=false\ncanonical|shoe_size|big|Big\n"
        problems = validate_registry(parse_registry(text))
        assert any("shoe_size" in p for p in problems)

    def test_residual_must_lack_platform_mapping(self):
        text = MINIMAL + (
            "dimension|race|exhaustive=true|residual=white\n"
            "canonical|race|white|White\n"
            "map|race|platform|White attr|white\n"
        )
        problems = validate_registry(parse_registry(text))
        assert any("residual" in p for p in problems)

    def test_map_target_must_exist(self):
        text = MINIMAL + "map|political_leaning|census|centrist|center\n"
        problems = validate_registry(parse_registry(text))
        assert any("unknown target" in p for p in problems)

    def test_political_canonical_set_is_fixed(self):
        text = MINIMAL.replace("canonical|political_leaning|moderate|Moderate\n", "")
        problems = validate_registry(parse_registry(text))
        assert any("political_leaning" in p for p in problems)

    def test_age_buckets_must_parse(self):
        text = MINIMAL + "dimension|age|exhaustive=false\ncanonical|age|teens|Teens\n"
        problems = validate_registry(parse_registry(text))
        assert any("teens" in p for p in problems)

    def test_education_totality_both_sides(self):
        text = MINIMAL + (
            "dimension|education|exhaustive=false\n"
            "canonical|education|college|College\n"
            "canonical|education|grad_degree|Graduate\n"
            "map|education|census|Bachelor's degree (above 25)|college\n"
            "map|education|census|Graduate or professional degree (above 25)|grad_degree\n"
            "map|education|platform|College grad|college\n"
        )
        problems = validate_registry(parse_registry(text))
        assert any("platform" in p and "grad_degree" in p for p in problems)


class TestBundledRegistry:
    def test_loads_and_validates(self, registry):
        assert isinstance(registry, Registry)
        assert validate_registry(registry) == []

    def test_shape(self, registry):
        assert len(registry.states) == 51  # 50 states plus the federal district
        assert len(registry.cities) == 13
        assert set(registry.dimensions) == {
            "gender", "age", "race", "income", "education",
            "political_leaning", "country_of_origin",
        }

    def test_race_residual(self, registry):
        dim = registry.dimension("race")
        assert dim.residual == "white"
        assert dim.mapping.sources_for("platform", "white") == ()
        assert len(dim.mapping.sources("platform")) == 3

    def test_region_map_covers_every_country(self, registry):
        dim = registry.dimension("country_of_origin")
        regions = registry.region_map()
        assert set(regions) == set(dim.category_ids())

    def test_caribbean_platform_coverage_gap(self, registry):
        dim = registry.dimension("country_of_origin")
        regions = registry.region_map()
        caribbean = [c for c, r in regions.items() if r == "Caribbean"]
        assert len(caribbean) == 6
        mapped = [c for c in caribbean if dim.mapping.sources_for("platform", c)]
        assert mapped == ["jamaica"]

    def test_age_buckets_cover_15_to_65_plus(self, registry):
        ids = registry.dimension("age").category_ids()
        assert ids[0] == "15-19"
        assert ids[-1] == "65+"
        assert len(ids) == 11

    def test_has_geography(self, registry):
        assert registry.has_geography(GeoScope("country", "United States"))
        assert registry.has_geography(GeoScope("state", "Montana"))
        assert registry.has_geography(GeoScope("city", "Fort Worth"))
        assert not registry.has_geography(GeoScope("state", "Puerto Rico"))

    def test_city_state_lookup(self, registry):
        assert registry.city_state("Arlington") == "Texas"
        with pytest.raises(RegistryError):
            registry.city_state("Gotham")

    def test_iter_geographies(self, registry):
        assert len(list(iter_geographies(registry, "state"))) == 51
        assert len(list(iter_geographies(registry, "city"))) == 13
        (country,) = iter_geographies(registry, "country")
        assert country == GeoScope("country", "United States")
        with pytest.raises(RegistryError):
            list(iter_geographies(registry, "planet"))

    def test_default_loader_is_cached_consistent(self):
        assert load_default_registry().country == "United States"
