"""
Brute-force checks that do not trust the solver.

`verify` quantifies over every pair and every feasible integer price, `audit_trace`
replays the monotonicity guarantees of the price-adjustment loop pass by pass, and
`enumerate_stable_outcomes` lists all stable outcomes of a tiny market.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from market_base.bipartite_matching import Matching, WeightedBipartiteGraph, enumerate_matchings
from market_base.exceptions import EnumerationGuardError, OutcomeStructureError
from market_base.market_model import MarketInstance, Pair
from market_base.price_adjustment_solver import IterationState, IterationTrace, Outcome, payoffs
from market_base.settings import get_settings
from market_base.valuations import Number
from utilities.logger import LoggerFactory


@dataclass(frozen=True)
class BlockingWitness:
    seller: str
    buyer: str
    c: int

    def to_dict(self) -> dict:
        return {"seller": self.seller, "buyer": self.buyer, "c": self.c}


@dataclass(frozen=True)
class StabilityReport:
    p1_ok: bool
    feasibility_ok: bool
    matching_ok: bool
    payoffs_ok: bool = True
    witnesses: tuple[BlockingWitness, ...] = ()
    defects: tuple[str, ...] = ()

    @property
    def stable(self) -> bool:
        return self.p1_ok and self.feasibility_ok and self.matching_ok and self.payoffs_ok and not self.witnesses

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "p1_ok": self.p1_ok,
            "feasibility_ok": self.feasibility_ok,
            "matching_ok": self.matching_ok,
            "payoffs_ok": self.payoffs_ok,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "defects": list(self.defects),
        }


@dataclass(frozen=True)
class AuditViolation:
    check: str
    pass_index: int
    detail: str

    def __str__(self):
        return f"{self.check} at pass {self.pass_index}: {self.detail}"

    def to_dict(self) -> dict:
        return {"check": self.check, "pass": self.pass_index, "detail": self.detail}


@dataclass(frozen=True)
class AuditReport:
    passes: int
    bound: int
    violations: tuple[AuditViolation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Optional[AuditViolation]:
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "passes": self.passes,
            "bound": self.bound,
            "violations": [v.to_dict() for v in self.violations],
        }


class StabilityVerifier:
    """
    Checks outcomes and traces of one market instance.

    Valuations are tabulated once per pair over its whole price interval, so repeated
    checks against the same instance never re-evaluate a valuation.
    """

    def __init__(self, inst: MarketInstance, logger=None):
        self.inst = inst
        self.cmp = inst.comparator
        self.logger = logger or LoggerFactory.get_logger(__name__)
        self._table: dict[Pair, tuple[list[Number], list[Number]]] = {}

    def _values(self, pair: Pair) -> tuple[list[Number], list[Number]]:
        """(f_ij(c), g_ji(-c)) for c = lower..upper."""
        if pair not in self._table:
            terms = self.inst.terms_for(*pair)
            prices = range(terms.lower, terms.upper + 1)
            self._table[pair] = (
                [self.inst.evaluate_seller(*pair, c) for c in prices],
                [self.inst.evaluate_buyer(*pair, c) for c in prices],
            )
        return self._table[pair]

    # -------------------------------------------------------------------------
    # Stability of one outcome
    # -------------------------------------------------------------------------
    def _structural_defects(self, outcome: Outcome) -> list[str]:
        inst = self.inst
        defects = []
        for seller, buyer in outcome.matching:
            if seller not in inst.seller_index:
                defects.append(f"unknown seller '{seller}'")
            elif buyer not in inst.buyer_index:
                defects.append(f"unknown buyer '{buyer}'")
            elif (seller, buyer) not in inst.terms:
                defects.append(f"pair ({seller},{buyer}) is not in E")
            elif (seller, buyer) not in outcome.prices:
                defects.append(f"matched pair ({seller},{buyer}) has no price")
        for pair, price in outcome.prices.items():
            if pair not in inst.terms:
                defects.append(f"price given for unknown pair ({pair[0]},{pair[1]})")
            elif isinstance(price, bool) or not isinstance(price, int):
                defects.append(f"price of ({pair[0]},{pair[1]}) is not an integer: {price!r}")
        defects.extend(f"unknown seller '{s}' in q" for s in outcome.q if s not in inst.seller_index)
        defects.extend(f"unknown buyer '{b}' in r" for b in outcome.r if b not in inst.buyer_index)
        return defects

    def verify(self, outcome: Outcome) -> StabilityReport:
        """
        Raises:
            OutcomeStructureError: the outcome refers to agents, pairs or prices outside the market.
        """
        inst, cmp = self.inst, self.cmp
        structural = self._structural_defects(outcome)
        if structural:
            raise OutcomeStructureError(structural)

        defects: list[str] = []
        matching_ok = True
        try:
            Matching(frozenset(outcome.matching))
        except ValueError as exc:
            matching_ok = False
            defects.append(str(exc))
        if len(set(outcome.matching)) != len(outcome.matching):
            matching_ok = False
            defects.append("matching lists a pair twice")

        feasibility_ok = True
        for pair, price in outcome.prices.items():
            terms = inst.terms[pair]
            if not terms.lower <= price <= terms.upper:
                feasibility_ok = False
                defects.append(f"price {price} of ({pair[0]},{pair[1]}) outside [{terms.lower}, {terms.upper}]")

        q = {seller: outcome.q.get(seller) for seller in inst.sellers}
        r = {buyer: outcome.r.get(buyer) for buyer in inst.buyers}
        payoffs_ok = True
        for agent, value in itertools.chain(q.items(), r.items()):
            if value is None:
                payoffs_ok = False
                defects.append(f"no payoff for agent '{agent}'")
        q = {k: inst.zero if v is None else v for k, v in q.items()}
        r = {k: inst.zero if v is None else v for k, v in r.items()}

        p1_ok = True
        expected_q = {seller: inst.zero for seller in inst.sellers}
        expected_r = {buyer: inst.zero for buyer in inst.buyers}
        for seller, buyer in outcome.matching:
            price = outcome.prices[(seller, buyer)]
            expected_q[seller] = inst.evaluate_seller(seller, buyer, price, check_bounds=False)
            expected_r[buyer] = inst.evaluate_buyer(seller, buyer, price, check_bounds=False)
        for side, expected, reported in (("q", expected_q, q), ("r", expected_r, r)):
            for agent, value in expected.items():
                if not cmp.eq(value, reported[agent]):
                    payoffs_ok = False
                    defects.append(f"{side}[{agent}] = {reported[agent]} but the matching gives {value}")
                if cmp.lt(value, 0) or cmp.lt(reported[agent], 0):
                    p1_ok = False
                    defects.append(f"{side}[{agent}] is negative")

        witnesses = []
        for pair in inst.pairs:
            lower = inst.terms[pair].lower
            seller_values, buyer_values = self._values(pair)
            for offset, (f_value, g_value) in enumerate(zip(seller_values, buyer_values)):
                if cmp.gt(f_value, q[pair[0]]) and cmp.gt(g_value, r[pair[1]]):
                    witnesses.append(BlockingWitness(pair[0], pair[1], lower + offset))

        report = StabilityReport(
            p1_ok=p1_ok,
            feasibility_ok=feasibility_ok,
            matching_ok=matching_ok,
            payoffs_ok=payoffs_ok,
            witnesses=tuple(witnesses),
            defects=tuple(defects),
        )
        if not report.stable:
            self.logger.debug(f"Unstable outcome: {len(witnesses)} blocking witnesses, {len(defects)} defects")
        return report

    def _is_blocked(self, q: dict, r: dict) -> bool:
        """
        Whether any pair blocks. f rises and g(-c) falls with c, so on each pair only the
        smallest c the seller strictly prefers needs checking.
        """
        cmp = self.cmp
        for pair in self.inst.pairs:
            seller_values, buyer_values = self._values(pair)
            for f_value, g_value in zip(seller_values, buyer_values):
                if cmp.gt(f_value, q[pair[0]]):
                    if cmp.gt(g_value, r[pair[1]]):
                        return True
                    break
        return False

    # -------------------------------------------------------------------------
    # Exhaustive oracle
    # -------------------------------------------------------------------------
    def enumerate_stable_outcomes(self) -> list[Outcome]:
        """
        Raises:
            EnumerationGuardError: the market has too many pairs or too wide a price range.
        """
        inst, cmp = self.inst, self.cmp
        settings = get_settings()
        if len(inst.pairs) > settings.oracle_max_pairs or inst.max_range > settings.oracle_max_range:
            raise EnumerationGuardError(
                f"Refusing to enumerate outcomes of {len(inst.pairs)} pairs with price range "
                f"{inst.max_range} (limits {settings.oracle_max_pairs} pairs, range {settings.oracle_max_range})"
            )

        complete = WeightedBipartiteGraph(inst.sellers, inst.buyers, {pair: 0 for pair in inst.pairs})
        stable = []
        for matching in enumerate_matchings(complete):
            pairs = inst.sort_pairs(matching.pairs)
            ranges = [range(inst.terms[p].lower, inst.terms[p].upper + 1) for p in pairs]
            for chosen in itertools.product(*ranges):
                prices = dict(zip(pairs, chosen))
                q, r = payoffs(inst, pairs, prices)
                if any(cmp.lt(v, 0) for v in itertools.chain(q.values(), r.values())):
                    continue
                if self._is_blocked(q, r):
                    continue
                stable.append(Outcome(matching=pairs, prices=prices, q=q, r=r))

        self.logger.debug(f"Oracle found {len(stable)} stable outcomes over {len(inst.pairs)} pairs")
        return stable

    # -------------------------------------------------------------------------
    # Trace audit
    # -------------------------------------------------------------------------
    def _state_checks(self, state: IterationState, pass_index: int) -> list[AuditViolation]:
        inst = self.inst
        found = []

        def flag(check: str, detail: str):
            found.append(AuditViolation(check, pass_index, detail))

        for pair, price in state.prices.items():
            terms = inst.terms[pair]
            if not terms.lower <= price <= terms.upper:
                flag("price feasibility", f"p{pair} = {price} outside [{terms.lower}, {terms.upper}]")

        e_tilde, ep_tilde, ep_hat = set(state.e_tilde), set(state.ep_tilde), set(state.ep_hat)
        if e_tilde & (set(state.k0) | set(state.t0)):
            flag("set structure", "E_tilde meets K0 or T0")
        if not ep_hat <= ep_tilde <= e_tilde:
            flag("set structure", "EP_hat, EP_tilde and E_tilde are not nested")
        if not set(state.matching) <= ep_hat:
            flag("set structure", "matching uses a pair outside EP_hat")
        matched_sellers = {seller for seller, _ in state.matching}
        for pair in state.k_pairs:
            if pair not in ep_tilde or pair[0] in matched_sellers:
                flag("set structure", f"K contains {pair} which is not an unmatched seller's optimal pair")
        return found

    def _step_checks(self, prev: IterationState, cur: IterationState, pass_index: int) -> list[AuditViolation]:
        inst, cmp = self.inst, self.cmp
        found = []

        def flag(check: str, detail: str):
            found.append(AuditViolation(check, pass_index, detail))

        missing = set(prev.matching) - set(cur.ep_hat)
        if missing:
            flag("matched pairs retained", f"{sorted(missing)} left EP_hat")

        shrunk = set(cur.e_tilde) <= set(prev.e_tilde)
        if not shrunk:
            flag("acceptable set shrinks", "E_tilde gained pairs")
        elif (cur.l_pairs or cur.t0_tilde) and set(cur.e_tilde) == set(prev.e_tilde):
            flag("acceptable set shrinks", "L or T0_tilde non-empty but E_tilde unchanged")

        removed = set(cur.l_pairs) | set(cur.t0_tilde)
        for pair, price in cur.prices.items():
            before = prev.prices.get(pair, price)
            if price > before:
                flag("prices non-increasing", f"p{pair} rose from {before} to {price}")
            elif pair in prev.k_pairs and pair not in removed and price == before:
                flag("prices non-increasing", f"p{pair} stayed at {price} although the pair is in K")

        for buyer in inst.buyers:
            before, after = prev.r.get(buyer, inst.zero), cur.r.get(buyer, inst.zero)
            if cmp.lt(after, before):
                flag("buyer payoffs non-decreasing", f"r[{buyer}] fell from {before} to {after}")

        matched_buyers = {buyer for _, buyer in cur.matching}
        dropped = [buyer for buyer in prev.v_tilde if buyer not in matched_buyers]
        if dropped:
            flag("matched buyers kept", f"buyers {dropped} lost their partner")

        if len(cur.matching) < len(prev.matching):
            flag("matching size non-decreasing", f"|X| fell from {len(prev.matching)} to {len(cur.matching)}")

        if set(cur.m) != set(prev.k_pairs) or not removed <= set(prev.k_pairs):
            flag("set structure", "price update touched pairs outside the previous K")

        for pair, m in cur.m.items():
            if pair not in prev.prices or pair not in cur.prices:
                continue
            seller, buyer = pair
            target = prev.r.get(buyer, inst.zero)
            if m is None:
                lower = inst.terms[pair].lower
                if pair not in cur.l_pairs or cur.prices[pair] != lower:
                    flag("overflow clamp", f"{pair} overflowed but was not clamped to {lower} and moved to L")
                elif pair not in cur.k0:
                    flag("overflow clamp", f"{pair} overflowed but did not enter K0")
                elif not cmp.le(inst.evaluate_buyer(*pair, lower, check_bounds=False), target):
                    flag("overflow clamp", f"buyer {buyer} strictly gains on {pair} at the lower bound")
                continue
            new_price = prev.prices[pair] - m
            if m < 1 or cur.prices[pair] != new_price:
                flag("decrement minimality", f"m{pair} = {m} does not match the recorded price {cur.prices[pair]}")
                continue
            if not cmp.ge(inst.evaluate_buyer(*pair, new_price, check_bounds=False), target):
                flag("decrement minimality", f"buyer {buyer} still prefers the current payoff {target} at p{pair} = {new_price}")
            elif m > 1 and cmp.ge(inst.evaluate_buyer(*pair, new_price + 1, check_bounds=False), target):
                flag("decrement minimality", f"m{pair} = {m} is not the smallest sufficient decrement")
        return found

    def audit_trace(self, trace: IterationTrace) -> AuditReport:
        states: Sequence[IterationState] = trace.states
        violations: list[AuditViolation] = []
        for position, state in enumerate(states):
            violations.extend(self._state_checks(state, position))
            if position:
                violations.extend(self._step_checks(states[position - 1], state, position))

        if len(states) > trace.iteration_bound:
            violations.append(
                AuditViolation("iteration bound", len(states) - 1, f"{len(states)} passes exceed {trace.iteration_bound}")
            )
        if states and states[-1].k_pairs:
            violations.append(AuditViolation("exit stability", len(states) - 1, "final K is not empty"))
        report = self.verify(trace.outcome)
        if not report.stable:
            violations.append(
                AuditViolation(
                    "exit stability",
                    max(len(states) - 1, 0),
                    f"final outcome is not stable ({len(report.witnesses)} blocking witnesses)",
                )
            )

        audit = AuditReport(passes=len(states), bound=trace.iteration_bound, violations=tuple(violations))
        if audit.ok:
            self.logger.debug(f"Trace of {audit.passes} passes audited clean (bound {audit.bound})")
        else:
            self.logger.warning(f"❌ Trace audit failed: {audit.first_violation}")
        return audit


# -----------------------------------------------------------------------------
# Functional surface
# -----------------------------------------------------------------------------
def verify(inst: MarketInstance, outcome: Outcome) -> StabilityReport:
    return StabilityVerifier(inst).verify(outcome)


def audit_trace(inst: MarketInstance, trace: IterationTrace) -> AuditReport:
    return StabilityVerifier(inst).audit_trace(trace)


def enumerate_stable_outcomes(inst: MarketInstance) -> list[Outcome]:
    return StabilityVerifier(inst).enumerate_stable_outcomes()
