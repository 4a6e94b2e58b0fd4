"""
Descending price-adjustment algorithm for pairwise-stable outcomes with integer prices.

Each pass keeps, per seller, the buyers that are mutually acceptable at the current
prices (E_tilde), the seller-optimal ones among them (EP_tilde) and those that also do
not leave the buyer worse off than the current payoff (EP_hat). A constrained matching
on EP_hat is chosen; sellers left unmatched although they have an optimal partner form
K, and every pair of K gets its price cut by the smallest integer that makes the buyer
weakly prefer it. Pairs that cannot be cut further, or whose seller stops accepting,
leave E_tilde for good. The loop stops when K is empty.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from market_base.bipartite_matching import WeightedBipartiteGraph, solve_constrained_matching
from market_base.exceptions import InstanceValidationError, InternalInvariantError, MatchingInfeasibleError
from market_base.market_model import MarketInstance, Pair, validate_instance
from market_base.valuations import Number
from utilities.logger import LoggerFactory


@dataclass(frozen=True)
class Outcome:
    """
    A matching together with prices and the payoffs they induce.

    `prices` holds the full price vector when produced by the solver; outcomes read
    from elsewhere only need prices for their matched pairs.
    """

    matching: tuple[Pair, ...]
    prices: dict[Pair, int]
    q: dict[str, Number]
    r: dict[str, Number]
    iterations: int = 0

    def matched_prices(self) -> dict[Pair, int]:
        return {pair: self.prices[pair] for pair in self.matching if pair in self.prices}

    def signature(self) -> tuple:
        """Identity of the outcome as far as stability is concerned."""
        return tuple(sorted(self.matching)), tuple(sorted(self.matched_prices().items()))


@dataclass(frozen=True)
class IterationState:
    """
    Snapshot of one pass. `m`, `l_pairs` and `t0_tilde` describe the price update that
    produced this pass from the previous one and are empty for the initial pass.
    """

    index: int
    k0: tuple[Pair, ...]
    t0: tuple[Pair, ...]
    e_tilde: tuple[Pair, ...]
    q_tilde: dict[str, Number]
    ep_tilde: tuple[Pair, ...]
    ep_hat: tuple[Pair, ...]
    v_tilde: tuple[str, ...]
    k_pairs: tuple[Pair, ...]
    prices: dict[Pair, int]
    matching: tuple[Pair, ...]
    r: dict[str, Number]
    m: dict[Pair, Optional[int]] = field(default_factory=dict)
    l_pairs: tuple[Pair, ...] = ()
    t0_tilde: tuple[Pair, ...] = ()


@dataclass(frozen=True)
class IterationTrace:
    states: tuple[IterationState, ...]
    outcome: Outcome
    iteration_bound: int

    @property
    def passes(self) -> int:
        return len(self.states)


def iteration_bound(inst: MarketInstance) -> int:
    """
    Upper bound on the number of passes: each price update either shrinks E_tilde
    (at most |E| times) or lowers some bounded integer price by at least one.
    """
    n_pairs = len(inst.pairs)
    return max(1, n_pairs * (1 + inst.max_range) + n_pairs)


def payoffs(inst: MarketInstance, matching, prices: dict[Pair, int]) -> tuple[dict[str, Number], dict[str, Number]]:
    """Seller payoffs q and buyer payoffs r; unmatched agents get zero."""
    q = {seller: inst.zero for seller in inst.sellers}
    r = {buyer: inst.zero for buyer in inst.buyers}
    for seller, buyer in matching:
        price = prices[(seller, buyer)]
        q[seller] = inst.evaluate_seller(seller, buyer, price)
        r[buyer] = inst.evaluate_buyer(seller, buyer, price)
    return q, r


class PriceAdjustmentSolver:
    """
    Runs the price-adjustment loop on one market instance.

    A solver is single-threaded; distinct solvers on distinct instances are independent.
    """

    def __init__(self, inst: MarketInstance, logger=None):
        self.inst = inst
        self.logger = logger or LoggerFactory.get_logger(__name__)

    # -------------------------------------------------------------------------
    # Derived sets of one pass
    # -------------------------------------------------------------------------
    def _derive(
        self,
        index: int,
        prices: dict[Pair, int],
        k0: set,
        t0: set,
        e_tilde: set,
        r_prev: dict[str, Number],
        v_prev: tuple[str, ...],
        m: Optional[dict] = None,
        l_pairs: tuple = (),
        t0_tilde: tuple = (),
    ) -> IterationState:
        inst, cmp = self.inst, self.inst.comparator

        seller_values = {pair: inst.evaluate_seller(*pair, prices[pair]) for pair in e_tilde}
        q_tilde = {seller: inst.zero for seller in inst.sellers}
        for seller in inst.sellers:
            values = [v for (i, _), v in seller_values.items() if i == seller]
            if values:
                q_tilde[seller] = max(values)

        ep_tilde = {pair for pair, value in seller_values.items() if cmp.eq(value, q_tilde[pair[0]])}
        buyer_values = {pair: inst.evaluate_buyer(*pair, prices[pair]) for pair in ep_tilde}
        ep_hat = {pair for pair in ep_tilde if cmp.ge(buyer_values[pair], r_prev[pair[1]])}

        graph = WeightedBipartiteGraph(
            inst.sellers,
            inst.buyers,
            {pair: max(buyer_values[pair], inst.zero) for pair in ep_hat},
        )
        matching = solve_constrained_matching(graph, frozenset(v_prev), eps=cmp.eps)
        _, r = payoffs(inst, matching, prices)
        k_pairs = {pair for pair in ep_tilde if pair[0] not in matching.matched_sellers}

        return IterationState(
            index=index,
            k0=inst.sort_pairs(k0),
            t0=inst.sort_pairs(t0),
            e_tilde=inst.sort_pairs(e_tilde),
            q_tilde=q_tilde,
            ep_tilde=inst.sort_pairs(ep_tilde),
            ep_hat=inst.sort_pairs(ep_hat),
            v_tilde=tuple(b for b in inst.buyers if b in matching.matched_buyers),
            k_pairs=inst.sort_pairs(k_pairs),
            prices=dict(prices),
            matching=inst.sort_pairs(matching.pairs),
            r=r,
            m=dict(m or {}),
            l_pairs=inst.sort_pairs(l_pairs),
            t0_tilde=inst.sort_pairs(t0_tilde),
        )

    # -------------------------------------------------------------------------
    # Initial prices
    # -------------------------------------------------------------------------
    def initialize(self) -> IterationState:
        inst, cmp = self.inst, self.inst.comparator
        report = validate_instance(inst)
        if not report.ok:
            raise InstanceValidationError(report)

        prices = {}
        for pair in inst.pairs:
            acceptable = inst.max_acceptable_price(*pair)
            prices[pair] = inst.terms[pair].lower if acceptable is None else acceptable

        k0 = {pair for pair in inst.pairs if cmp.lt(inst.evaluate_buyer(*pair, prices[pair]), 0)}
        t0 = {pair for pair in inst.pairs if cmp.lt(inst.evaluate_seller(*pair, prices[pair]), 0)}
        e_tilde = set(inst.pairs) - k0 - t0
        r_zero = {buyer: inst.zero for buyer in inst.buyers}
        try:
            return self._derive(0, prices, k0, t0, e_tilde, r_zero, ())
        except MatchingInfeasibleError as exc:
            raise InternalInvariantError(f"Initial matching infeasible: {exc}") from exc

    # -------------------------------------------------------------------------
    # Price update
    # -------------------------------------------------------------------------
    def price_update_step(self, state: IterationState) -> IterationState:
        inst, cmp = self.inst, self.inst.comparator
        if not state.k_pairs:
            raise ValueError("A price update needs a non-empty K")

        prices = dict(state.prices)
        m: dict[Pair, Optional[int]] = {}
        l_pairs, t0_tilde = [], []
        for pair in state.k_pairs:
            decrement = inst.min_decrement(*pair, state.prices[pair], state.r[pair[1]])
            m[pair] = decrement
            if decrement is None:
                l_pairs.append(pair)
                prices[pair] = inst.terms[pair].lower
            else:
                prices[pair] = state.prices[pair] - decrement
            if cmp.lt(inst.evaluate_seller(*pair, prices[pair]), 0):
                t0_tilde.append(pair)

        k0 = set(state.k0) | set(l_pairs)
        t0 = set(state.t0) | set(t0_tilde)
        e_tilde = set(state.e_tilde) - k0 - t0
        try:
            return self._derive(
                state.index + 1, prices, k0, t0, e_tilde, state.r, state.v_tilde,
                m=m, l_pairs=tuple(l_pairs), t0_tilde=tuple(t0_tilde),
            )
        except MatchingInfeasibleError as exc:
            raise InternalInvariantError(
                f"Pass {state.index + 1}: previously matched buyers cannot all be kept ({exc})",
                states=(state,),
            ) from exc

    # -------------------------------------------------------------------------
    # Full loop
    # -------------------------------------------------------------------------
    def run(self) -> tuple[Outcome, IterationTrace]:
        inst = self.inst
        bound = iteration_bound(inst)
        states = [self.initialize()]
        self.logger.debug(
            f"Pass 0: |E~|={len(states[0].e_tilde)} |X|={len(states[0].matching)} |K|={len(states[0].k_pairs)}"
        )

        while states[-1].k_pairs:
            if len(states) >= bound:
                raise InternalInvariantError(
                    f"No termination within {bound} passes", states=states
                )
            try:
                state = self.price_update_step(states[-1])
            except InternalInvariantError as exc:
                raise InternalInvariantError(str(exc), states=states) from exc
            states.append(state)
            self.logger.debug(
                f"Pass {state.index}: |K|={len(state.k_pairs)} |L|={len(state.l_pairs)} "
                f"|T0~|={len(state.t0_tilde)} |E~|={len(state.e_tilde)} |X|={len(state.matching)}"
            )

        final = states[-1]
        q, r = payoffs(inst, final.matching, final.prices)
        outcome = Outcome(
            matching=final.matching,
            prices=dict(final.prices),
            q=q,
            r=r,
            iterations=len(states),
        )
        self.logger.info(
            f"✅ Stable outcome after {len(states)} passes (bound {bound}): {len(final.matching)} matched pairs"
        )
        return outcome, IterationTrace(states=tuple(states), outcome=outcome, iteration_bound=bound)


# -----------------------------------------------------------------------------
# Functional surface
# -----------------------------------------------------------------------------
def initialize(inst: MarketInstance) -> IterationState:
    return PriceAdjustmentSolver(inst).initialize()


def price_update_step(state: IterationState, inst: MarketInstance) -> IterationState:
    return PriceAdjustmentSolver(inst).price_update_step(state)


def run(inst: MarketInstance) -> tuple[Outcome, IterationTrace]:
    return PriceAdjustmentSolver(inst).run()
