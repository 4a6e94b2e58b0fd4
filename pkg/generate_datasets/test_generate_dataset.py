from pathlib import Path

from market_base.instance_generator import FamilyWeights, GeneratorConfig, MarketDatasetGenerator


class TestMarketDatasetGenerator:

    def test_generate_exact_suite(self, logger):
        """Seeded suite of exact-arithmetic markets under dataset/random_markets."""
        feature_name = "random_markets"  # only this changes

        generator = MarketDatasetGenerator(
            name=feature_name,
            base_dir=Path.cwd(),  # dynamically uses current working directory
            logger=logger
        )

        config = GeneratorConfig(
            seed=0,
            num_sellers=4,
            num_buyers=4,
            price_range=(0, 20),
            family_weights=FamilyWeights(exponential=0),
        )
        output_path = generator.generate_suite(config, count=25)
        logger.info(f"✅ Dataset generated successfully: {output_path}")

    def test_generate_mixed_suite(self, logger):
        """Seeded suite mixing all three valuation families under dataset/mixed_markets."""
        feature_name = "mixed_markets"

        generator = MarketDatasetGenerator(
            name=feature_name,
            base_dir=Path.cwd(),
            logger=logger
        )

        output_path = generator.generate_suite(GeneratorConfig(seed=1000, num_sellers=3, num_buyers=5), count=25)
        logger.info(f"✅ Dataset generated successfully: {output_path}")
