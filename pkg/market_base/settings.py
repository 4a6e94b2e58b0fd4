from functools import lru_cache

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# ---------------------------------------
# Load .env variables
# ---------------------------------------
load_dotenv()


class MarketSettings(BaseSettings):
    """
    Runtime knobs, read from the environment (prefix STABLE_MARKET_) or a .env file.

    eps is the comparison tolerance used whenever a transcendental valuation forces
    floating arithmetic; rational instances never consult it.
    """

    model_config = SettingsConfigDict(env_prefix="STABLE_MARKET_", extra="ignore")

    eps: float = 1e-9
    log_level: str = "INFO"
    max_enumeration_edges: int = 25
    oracle_max_pairs: int = 4
    oracle_max_range: int = 12


@lru_cache(maxsize=1)
def get_settings() -> MarketSettings:
    return MarketSettings()
