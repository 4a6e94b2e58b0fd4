"""
Two-sided market instances: sellers U, buyers V, the complete pair set E = U x V,
integer price bounds per pair and one valuation per side of every pair.

The buyer valuation g_ji is stored as a function of the buyer's money balance, so the
buyer's utility when paying a price x is g_ji(-x).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Optional

from market_base.comparator import Comparator
from market_base.exceptions import UnknownPairError, ValuationDomainError
from market_base.settings import get_settings
from market_base.valuations import Number, Valuation

Pair = tuple[str, str]


class Preference(str, Enum):
    PREFERS_FIRST = "prefers_first"
    PREFERS_SECOND = "prefers_second"
    INDIFFERENT = "indifferent"


@dataclass(frozen=True)
class PairTerms:
    lower: int
    upper: int
    seller_valuation: Valuation
    buyer_valuation: Valuation


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations), "warnings": list(self.warnings)}


# -----------------------------------------------------------------------------
# Monotone integer searches
# -----------------------------------------------------------------------------
def last_true(lo: int, hi: int, predicate: Callable[[int], bool]) -> Optional[int]:
    """Largest x in [lo, hi] with predicate(x), for a predicate that is true then false."""
    if lo > hi or not predicate(lo):
        return None
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if predicate(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def first_true(lo: int, hi: int, predicate: Callable[[int], bool]) -> Optional[int]:
    """Smallest x in [lo, hi] with predicate(x), for a predicate that is false then true."""
    if lo > hi or not predicate(hi):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class MarketInstance:
    sellers: tuple[str, ...]
    buyers: tuple[str, ...]
    terms: Mapping[Pair, PairTerms] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sellers", tuple(self.sellers))
        object.__setattr__(self, "buyers", tuple(self.buyers))
        object.__setattr__(self, "terms", dict(self.terms))

    # -------------------------------------------------------------------------
    # Structure
    # -------------------------------------------------------------------------
    @cached_property
    def seller_index(self) -> dict[str, int]:
        return {seller: k for k, seller in enumerate(self.sellers)}

    @cached_property
    def buyer_index(self) -> dict[str, int]:
        return {buyer: k for k, buyer in enumerate(self.buyers)}

    @cached_property
    def pairs(self) -> tuple[Pair, ...]:
        """E in seller-major order."""
        return tuple((i, j) for i in self.sellers for j in self.buyers if (i, j) in self.terms)

    def pair_key(self, pair: Pair) -> tuple[int, int]:
        return self.seller_index[pair[0]], self.buyer_index[pair[1]]

    def sort_pairs(self, pairs) -> tuple[Pair, ...]:
        return tuple(sorted(pairs, key=self.pair_key))

    def terms_for(self, i: str, j: str) -> PairTerms:
        try:
            return self.terms[(i, j)]
        except KeyError:
            raise UnknownPairError(i, j) from None

    @cached_property
    def is_exact(self) -> bool:
        """Exact rational arithmetic holds iff no valuation is transcendental."""
        return all(
            t.seller_valuation.is_exact and t.buyer_valuation.is_exact for t in self.terms.values()
        )

    @cached_property
    def comparator(self) -> Comparator:
        return Comparator(exact=self.is_exact, eps=get_settings().eps)

    @property
    def zero(self) -> Number:
        return Fraction(0) if self.is_exact else 0.0

    @cached_property
    def max_range(self) -> int:
        return max((t.upper - t.lower for t in self.terms.values()), default=0)

    def _normalize(self, value) -> Number:
        return Fraction(value) if self.is_exact else float(value)

    def _checked_terms(self, i: str, j: str, x: int) -> PairTerms:
        terms = self.terms_for(i, j)
        if not terms.lower <= x <= terms.upper:
            raise ValuationDomainError(
                f"Price {x} outside [{terms.lower}, {terms.upper}] for pair ({i},{j})"
            )
        return terms

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------
    def evaluate_seller(self, i: str, j: str, x: int, check_bounds: bool = True) -> Number:
        """f_ij(x): the seller's valuation when receiving x from buyer j."""
        terms = self._checked_terms(i, j, x) if check_bounds else self.terms_for(i, j)
        return self._normalize(terms.seller_valuation.value(x))

    def evaluate_buyer(self, i: str, j: str, x: int, check_bounds: bool = True) -> Number:
        """g_ji(-x): the buyer's valuation when paying x to seller i."""
        terms = self._checked_terms(i, j, x) if check_bounds else self.terms_for(i, j)
        return self._normalize(terms.buyer_valuation.value(-x))

    # -------------------------------------------------------------------------
    # Thresholds
    # -------------------------------------------------------------------------
    def max_acceptable_price(self, i: str, j: str) -> Optional[int]:
        """Largest feasible price the buyer still accepts, or None if no price is accepted."""
        terms = self.terms_for(i, j)
        cmp = self.comparator
        return last_true(
            terms.lower,
            terms.upper,
            lambda x: cmp.ge(self.evaluate_buyer(i, j, x, check_bounds=False), 0),
        )

    def min_decrement(self, i: str, j: str, p: int, target: Number) -> Optional[int]:
        """
        Smallest m >= 1 with g_ji(-(p - m)) >= target and p - m still feasible.

        Returns None (overflow) when even the lower bound does not reach the target.
        """
        terms = self._checked_terms(i, j, p)
        cmp = self.comparator
        return first_true(
            1,
            p - terms.lower,
            lambda m: cmp.ge(self.evaluate_buyer(i, j, p - m, check_bounds=False), target),
        )

    # -------------------------------------------------------------------------
    # Acceptability and preferences
    # -------------------------------------------------------------------------
    def seller_accepts(self, i: str, j: str, x: int) -> bool:
        return self.comparator.ge(self.evaluate_seller(i, j, x), 0)

    def buyer_accepts(self, i: str, j: str, x: int) -> bool:
        return self.comparator.ge(self.evaluate_buyer(i, j, x), 0)

    def _preference(self, first: Number, second: Number) -> Preference:
        cmp = self.comparator
        if cmp.eq(first, second):
            return Preference.INDIFFERENT
        return Preference.PREFERS_FIRST if first > second else Preference.PREFERS_SECOND

    def seller_preference(self, i: str, j0: str, j1: str, x: int) -> Preference:
        """How seller i ranks buyers j0 and j1 when both would pay x."""
        return self._preference(self.evaluate_seller(i, j0, x), self.evaluate_seller(i, j1, x))

    def buyer_preference(self, j: str, i0: str, i1: str, x: int) -> Preference:
        """How buyer j ranks sellers i0 and i1 when both would charge x."""
        return self._preference(self.evaluate_buyer(i0, j, x), self.evaluate_buyer(i1, j, x))


def validate_instance(inst: MarketInstance) -> ValidationReport:
    """
    Collects every defect of an instance instead of stopping at the first one.

    An empty side of the market is reported as a warning: the solver handles it and
    returns the empty matching.
    """
    violations: list[str] = []
    warnings: list[str] = []

    if not inst.sellers:
        warnings.append("market has no sellers")
    if not inst.buyers:
        warnings.append("market has no buyers")
    for side, ids in (("seller", inst.sellers), ("buyer", inst.buyers)):
        seen = set()
        for agent in ids:
            if agent in seen:
                violations.append(f"duplicate {side} id '{agent}'")
            seen.add(agent)

    for pair in inst.terms:
        if pair[0] not in inst.seller_index or pair[1] not in inst.buyer_index:
            violations.append(f"pair ({pair[0]},{pair[1]}) refers to an unknown agent")

    for i in inst.sellers:
        for j in inst.buyers:
            terms = inst.terms.get((i, j))
            if terms is None:
                violations.append(f"missing pair ({i},{j})")
                continue
            if terms.lower > terms.upper:
                violations.append(f"bounds reversed at ({i},{j}): lower {terms.lower} > upper {terms.upper}")
            for side, valuation in (("seller", terms.seller_valuation), ("buyer", terms.buyer_valuation)):
                for defect in valuation.monotonicity_defects():
                    violations.append(f"{side} valuation at ({i},{j}) {defect}")
            if terms.lower <= terms.upper:
                # buyers are evaluated at -x
                domains = (
                    ("seller", terms.seller_valuation, terms.lower, terms.upper),
                    ("buyer", terms.buyer_valuation, -terms.upper, -terms.lower),
                )
                for side, valuation, lo, hi in domains:
                    for defect in valuation.domain_defects(lo, hi):
                        violations.append(f"{side} valuation at ({i},{j}) {defect}")

    return ValidationReport(violations=tuple(violations), warnings=tuple(warnings))
