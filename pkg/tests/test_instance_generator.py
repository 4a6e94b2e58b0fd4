import json
from fractions import Fraction

import allure
import pytest

from market_base.exceptions import GeneratorConfigError
from market_base.instance_generator import (
    FamilyWeights,
    GeneratorConfig,
    MarketDatasetGenerator,
    generate,
    random_config,
)
from market_base.market_model import validate_instance
from market_base.market_serializer import read_instance, write_instance


@allure.suite("Instance Generator Suite")
@allure.feature("Instance Toolkit")
class TestInstanceGenerator:

    @allure.story("Determinism")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.description("An instance is a pure function of its configuration.")
    def test_same_config_gives_identical_bytes(self):
        config = GeneratorConfig(seed=42, num_sellers=3, num_buyers=2)
        assert write_instance(generate(config)) == write_instance(generate(config))

    def test_different_seeds_differ(self):
        first = generate(GeneratorConfig(seed=1, num_sellers=3, num_buyers=3))
        second = generate(GeneratorConfig(seed=2, num_sellers=3, num_buyers=3))
        assert write_instance(first) != write_instance(second)

    def test_shape_follows_config(self):
        inst = generate(GeneratorConfig(seed=7, num_sellers=4, num_buyers=2, price_range=(3, 9)))
        assert inst.sellers == ("1", "2", "3", "4")
        assert inst.buyers == ("1", "2")
        assert len(inst.pairs) == 8
        assert all(3 <= t.lower <= t.upper <= 9 for t in inst.terms.values())

    # -------------------------------------------------------------------------

    @allure.story("Validity")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.description("Generated instances always pass validation.")
    @pytest.mark.parametrize("seed", range(40))
    def test_random_configs_produce_valid_instances(self, seed):
        report = validate_instance(generate(random_config(seed)))
        assert report.ok, report.violations

    def test_zero_exponential_weight_keeps_exact_mode(self):
        config = GeneratorConfig(seed=3, num_sellers=3, num_buyers=3, family_weights=FamilyWeights(exponential=0))
        assert generate(config).is_exact

    def test_exponential_only_switches_to_float_mode(self):
        weights = FamilyWeights(linear=0, piecewise_linear=0, exponential=1)
        inst = generate(GeneratorConfig(seed=3, family_weights=weights))
        assert not inst.is_exact
        assert validate_instance(inst).ok

    def test_valuations_vanish_at_the_reservation_price(self):
        config = GeneratorConfig(
            seed=11,
            num_sellers=3,
            num_buyers=3,
            reservation_range=(5, 5),
            family_weights=FamilyWeights(piecewise_linear=0, exponential=0),
        )
        inst = generate(config)
        for seller, buyer in inst.pairs:
            terms = inst.terms[(seller, buyer)]
            if terms.lower <= 5 <= terms.upper:
                assert inst.evaluate_seller(seller, buyer, 5) == 0
                assert inst.evaluate_buyer(seller, buyer, 5) == 0

    # -------------------------------------------------------------------------

    @allure.story("Configuration Errors")
    @allure.severity(allure.severity_level.NORMAL)
    @allure.description("Configurations that cannot yield a valid instance are refused.")
    @pytest.mark.parametrize(
        "overrides, message",
        [
            ({"price_range": (5, 3)}, "price_range lower 5 exceeds upper 3"),
            ({"family_weights": FamilyWeights(linear=0, piecewise_linear=0, exponential=0)}, "all zero"),
            ({"slope_range": (Fraction(-1), Fraction(0))}, "slope_range has no positive slope"),
            ({"breakpoints_range": (1, 3)}, "breakpoints_range"),
        ],
    )
    def test_invalid_config_is_refused(self, overrides, message):
        with pytest.raises(GeneratorConfigError) as info:
            generate(GeneratorConfig(**overrides))
        assert message in str(info.value)

    @pytest.mark.parametrize(
        "document",
        ['{"seed": -1}', '{"num_sellers": 0}', '{"colour": "blue"}', "not json"],
    )
    def test_invalid_config_document(self, document):
        with pytest.raises(GeneratorConfigError):
            GeneratorConfig.from_json(document)

    def test_config_document_round_trip(self):
        config = GeneratorConfig.from_json(json.dumps({"seed": 9, "num_sellers": 2, "price_range": [1, 4]}))
        assert config.seed == 9
        assert config.price_range == (1, 4)

    # -------------------------------------------------------------------------

    @allure.story("Dataset Suites")
    @allure.severity(allure.severity_level.MINOR)
    @allure.description("Seeded suites are written with a manifest for data-driven tests.")
    def test_generate_suite(self, tmp_path, logger):
        generator = MarketDatasetGenerator("sweep", base_dir=tmp_path, logger=logger)
        manifest_path = generator.generate_suite(GeneratorConfig(seed=100, num_buyers=3), count=3)

        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        assert [entry["seed"] for entry in manifest] == [100, 101, 102]
        assert manifest[0]["file"] == "sweep_0100.json"
        for entry in manifest:
            inst = read_instance((tmp_path / "dataset" / "sweep" / entry["file"]).read_bytes())
            assert len(inst.buyers) == 3

    def test_generate_suite_needs_a_positive_count(self, tmp_path):
        with pytest.raises(GeneratorConfigError):
            MarketDatasetGenerator("sweep", base_dir=tmp_path).generate_suite(GeneratorConfig(), count=0)
