import pytest
from dotenv import load_dotenv

from market_base.market_model import MarketInstance, PairTerms
from market_base.valuations import LinearValuation
from utilities.assertions import Assertions
from utilities.ironman import IronMan
from utilities.logger import LoggerFactory

# ---------------------------------------
# Load .env variables
# ---------------------------------------
load_dotenv()

# ---------------------------------------
# Pytest options
# ---------------------------------------
def pytest_addoption(parser):
    parser.addini("acceptance_instances", help="Seeded instances in the stability sweep", default="1000")
    parser.addini("oracle_instances", help="Seeded instances cross-checked against the oracle", default="200")
    parser.addini("decrement_triples", help="Random (valuation, price, target) triples", default="10000")
    parser.addini("matching_graphs", help="Random graphs checked against enumeration", default="500")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: long seeded sweeps over generated instances")

# ---------------------------------------
# Logger fixture
# ---------------------------------------
@pytest.fixture(scope="session")
def logger():
    return LoggerFactory.get_logger("pytest_logger")

@pytest.fixture
def assertions(logger):
    return Assertions(logger)

@pytest.fixture
def ironman(logger):
    return IronMan(logger)

# ---------------------------------------
# Sweep sizes
# ---------------------------------------
@pytest.fixture(scope="session")
def sweep_sizes(request):
    return {
        name: int(request.config.getini(name))
        for name in ("acceptance_instances", "oracle_instances", "decrement_triples", "matching_graphs")
    }

# ---------------------------------------
# Market builders
# ---------------------------------------
def linear_pair(seller_ab, buyer_ab, lower=0, upper=10):
    return PairTerms(lower, upper, LinearValuation(*seller_ab), LinearValuation(*buyer_ab))


@pytest.fixture
def single_pair_instance():
    """Seller f(x) = x - 3, buyer g(y) = y + 7, prices in [0, 10]."""
    return MarketInstance(("1",), ("1",), {("1", "1"): linear_pair((1, -3), (1, 7))})


@pytest.fixture
def competition_instance():
    """Two sellers competing for one buyer who values seller 1 two units higher."""
    return MarketInstance(
        ("1", "2"),
        ("1",),
        {
            ("1", "1"): linear_pair((1, 0), (1, 10)),
            ("2", "1"): linear_pair((1, 0), (1, 8)),
        },
    )


@pytest.fixture
def square_instance():
    """A well-formed 2x2 market."""
    return MarketInstance(
        ("1", "2"),
        ("1", "2"),
        {
            ("1", "1"): linear_pair((1, -2), (1, 9)),
            ("1", "2"): linear_pair((2, -4), (1, 6)),
            ("2", "1"): linear_pair((1, -1), (2, 14)),
            ("2", "2"): linear_pair((1, -3), (1, 8)),
        },
    )

# ---------------------------------------
# Clean pytest metadata
# ---------------------------------------
def pytest_metadata(metadata):
    metadata.pop("Packages", None)
    metadata.pop("Plugins", None)
