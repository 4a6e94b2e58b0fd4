"""
Seeded random market instances.

Every pair draws from its own PCG64 stream spawned from `SeedSequence(seed)`, so an
instance is a pure function of its configuration and pairs never share randomness.
Valuations are built around a zero point (the reservation price) drawn per pair and per
side, which keeps a useful share of pairs mutually acceptable.
"""
from __future__ import annotations

import json
import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveInt, ValidationError

from market_base.exceptions import GeneratorConfigError
from market_base.market_model import MarketInstance, PairTerms
from market_base.market_serializer import write_instance
from market_base.valuations import (
    ExponentialValuation,
    LinearValuation,
    PiecewiseLinearValuation,
    Valuation,
    ValuationKind,
)

_FAMILIES = (ValuationKind.LINEAR, ValuationKind.PIECEWISE_LINEAR, ValuationKind.EXPONENTIAL)
_SLOPE_STEPS = 8


class FamilyWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    linear: NonNegativeFloat = 1.0
    piecewise_linear: NonNegativeFloat = 1.0
    exponential: NonNegativeFloat = 1.0

    def as_probabilities(self) -> list[float]:
        weights = [self.linear, self.piecewise_linear, self.exponential]
        total = sum(weights)
        return [w / total for w in weights]


class GeneratorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(0, ge=0, lt=2**64)
    num_sellers: PositiveInt = 2
    num_buyers: PositiveInt = 2
    price_range: tuple[int, int] = (0, 10)
    family_weights: FamilyWeights = FamilyWeights()
    slope_range: tuple[Fraction, Fraction] = (Fraction(1, 2), Fraction(3))
    reservation_range: Optional[tuple[int, int]] = None
    breakpoints_range: tuple[int, int] = (2, 4)
    exp_scale_range: tuple[int, int] = (1, 5)
    exp_rate_bound: int = 40

    @classmethod
    def from_json(cls, data) -> "GeneratorConfig":
        try:
            return cls.model_validate_json(data)
        except ValidationError as exc:
            raise GeneratorConfigError(f"Invalid generator config: {exc.errors()[0]['msg']}") from exc

    def problems(self) -> list[str]:
        found = []
        lo, hi = self.price_range
        if lo > hi:
            found.append(f"price_range lower {lo} exceeds upper {hi}")
        if self.reservation_range is not None and self.reservation_range[0] > self.reservation_range[1]:
            found.append(f"reservation_range {list(self.reservation_range)} is empty")
        weights = self.family_weights
        if not any((weights.linear, weights.piecewise_linear, weights.exponential)):
            found.append("family_weights are all zero")
        if self.slope_range[1] <= 0:
            found.append("slope_range has no positive slope; valuations could not increase")
        elif self.slope_range[0] <= 0 or self.slope_range[0] > self.slope_range[1]:
            found.append(f"slope_range {[str(s) for s in self.slope_range]} must be positive and ordered")
        if self.breakpoints_range[0] < 2 or self.breakpoints_range[0] > self.breakpoints_range[1]:
            found.append("breakpoints_range must be ordered and start at 2 or more")
        if self.exp_scale_range[0] <= 0 or self.exp_scale_range[0] > self.exp_scale_range[1]:
            found.append("exp_scale_range must be positive and ordered")
        if self.exp_rate_bound <= 0:
            found.append("exp_rate_bound must be positive")
        return found


def random_config(seed: int, max_sellers: int = 6, max_buyers: int = 6, max_width: int = 20) -> GeneratorConfig:
    """A sweep configuration whose market shape is itself drawn from the seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 1])))
    lo = int(rng.integers(0, 6))
    width = int(rng.integers(0, max_width + 1))
    # half of the sweep stays on exact arithmetic
    exact = bool(rng.integers(0, 2))
    return GeneratorConfig(
        seed=seed,
        num_sellers=int(rng.integers(1, max_sellers + 1)),
        num_buyers=int(rng.integers(1, max_buyers + 1)),
        price_range=(lo, lo + width),
        family_weights=FamilyWeights(exponential=0.0 if exact else 1.0),
    )


# -----------------------------------------------------------------------------
# Valuation draws
# -----------------------------------------------------------------------------
def _slope(rng: np.random.Generator, config: GeneratorConfig) -> Fraction:
    low, high = config.slope_range
    return low + (high - low) * Fraction(int(rng.integers(0, _SLOPE_STEPS + 1)), _SLOPE_STEPS)


def _draw_valuation(
    rng: np.random.Generator,
    config: GeneratorConfig,
    family: ValuationKind,
    zero_at: int,
    domain: tuple[int, int],
) -> Valuation:
    """A strictly increasing valuation vanishing at `zero_at`, built for arguments in `domain`."""
    if family is ValuationKind.LINEAR:
        a = _slope(rng, config)
        return LinearValuation(a, -a * zero_at)

    if family is ValuationKind.PIECEWISE_LINEAR:
        count = int(rng.integers(config.breakpoints_range[0], config.breakpoints_range[1] + 1))
        spread = max(domain[1] - domain[0], 1) + 1
        candidates = np.arange(zero_at - spread, zero_at + spread + 1)
        xs = sorted(int(x) for x in rng.choice(candidates, size=min(count, len(candidates)), replace=False))
        ys = [Fraction(0)]
        for x0, x1 in zip(xs, xs[1:]):
            ys.append(ys[-1] + _slope(rng, config) * (x1 - x0))
        shape = PiecewiseLinearValuation(tuple(zip(xs, ys)))
        offset = shape.value(zero_at)
        return PiecewiseLinearValuation(tuple((x, y - offset) for x, y in zip(xs, ys)))

    a = Fraction(int(rng.integers(config.exp_scale_range[0], config.exp_scale_range[1] + 1)))
    reach = max(abs(domain[0]), abs(domain[1]), abs(zero_at), 1)
    c = Fraction(int(rng.integers(1, _SLOPE_STEPS + 1)), _SLOPE_STEPS)
    c = min(c, Fraction(config.exp_rate_bound, reach))
    b = -Fraction(float(a) * math.exp(float(c) * zero_at)).limit_denominator(_SLOPE_STEPS ** 2)
    return ExponentialValuation(a, b, c)


def generate(config: GeneratorConfig) -> MarketInstance:
    """
    Raises:
        GeneratorConfigError: the configuration cannot produce a valid instance.
    """
    problems = config.problems()
    if problems:
        raise GeneratorConfigError("; ".join(problems))

    sellers = tuple(str(k + 1) for k in range(config.num_sellers))
    buyers = tuple(str(k + 1) for k in range(config.num_buyers))
    probabilities = config.family_weights.as_probabilities()
    lo, hi = config.price_range
    res_lo, res_hi = config.reservation_range or config.price_range
    streams = np.random.SeedSequence(config.seed).spawn(len(sellers) * len(buyers))

    terms = {}
    for stream, (seller, buyer) in zip(streams, ((i, j) for i in sellers for j in buyers)):
        rng = np.random.Generator(np.random.PCG64(stream))
        lower, upper = sorted(int(v) for v in rng.integers(lo, hi + 1, size=2))
        seller_family = _FAMILIES[int(rng.choice(len(_FAMILIES), p=probabilities))]
        buyer_family = _FAMILIES[int(rng.choice(len(_FAMILIES), p=probabilities))]
        seller_reserve = int(rng.integers(res_lo, res_hi + 1))
        buyer_reserve = int(rng.integers(res_lo, res_hi + 1))
        terms[(seller, buyer)] = PairTerms(
            lower=lower,
            upper=upper,
            # the seller values receipts x, the buyer values balances y = -x
            seller_valuation=_draw_valuation(rng, config, seller_family, seller_reserve, (lower, upper)),
            buyer_valuation=_draw_valuation(rng, config, buyer_family, -buyer_reserve, (-upper, -lower)),
        )
    return MarketInstance(sellers, buyers, terms)


class MarketDatasetGenerator:
    """
    Writes seeded instance suites to dataset/<name>/ together with a manifest that the
    data-driven tests load through IronMan.
    """

    def __init__(self, name: str, base_dir: Path = None, logger=None):
        self.logger = logger
        self.name = name
        self.project_root = Path(base_dir) if base_dir else Path(__file__).resolve().parent.parent
        self.output_dir = self.project_root / "dataset" / name
        self.manifest_path = self.output_dir / f"{name}_dataset.json"

        if self.logger:
            self.logger.info(f"💾 Output Directory: {self.output_dir}")

    def generate_suite(self, config: GeneratorConfig, count: int) -> Path:
        """Instances for seeds config.seed .. config.seed + count - 1."""
        if count < 1:
            raise GeneratorConfigError(f"Suite size must be positive, got {count}")
        os.makedirs(self.output_dir, exist_ok=True)

        manifest = []
        for k in range(count):
            seeded = config.model_copy(update={"seed": config.seed + k})
            file_name = f"{self.name}_{seeded.seed:04d}.json"
            (self.output_dir / file_name).write_bytes(write_instance(generate(seeded)))
            manifest.append(
                {
                    "seed": seeded.seed,
                    "num_sellers": seeded.num_sellers,
                    "num_buyers": seeded.num_buyers,
                    "price_range": list(seeded.price_range),
                    "file": file_name,
                }
            )

        with open(self.manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, ensure_ascii=False)

        if self.logger:
            self.logger.info(f"✅ {count} instances written, manifest at: {self.manifest_path}")
        return self.manifest_path
