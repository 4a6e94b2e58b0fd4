"""
JSON (de)serialization of instances, outcomes and traces.

Documents are validated with pydantic models; any schema violation is re-raised as
`InstanceParseError` carrying the JSON pointer of the first offending location.
Rationals travel as strings ("7/2") or integers so that exact values survive a round
trip; float-mode payoffs are written as JSON numbers.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, PlainValidator, StrictInt, StrictStr, TypeAdapter, ValidationError

from market_base.exceptions import InstanceParseError, UnsupportedValuationKindError
from market_base.market_model import MarketInstance, PairTerms
from market_base.price_adjustment_solver import IterationState, IterationTrace, Outcome, iteration_bound, payoffs
from market_base.valuations import (
    ExponentialValuation,
    LinearValuation,
    Number,
    PiecewiseLinearValuation,
    Valuation,
    ValuationKind,
    format_rational,
    parse_rational,
)


def _rational(value) -> Fraction:
    try:
        return parse_rational(value)
    except TypeError as exc:
        raise ValueError(str(exc)) from exc


def _payoff(value) -> Number:
    if isinstance(value, float):
        return value
    return _rational(value)


RationalValue = Annotated[Fraction, PlainValidator(_rational)]
PayoffValue = Annotated[Union[Fraction, float], PlainValidator(_payoff)]


# -----------------------------------------------------------------------------
# Schemas
# -----------------------------------------------------------------------------
class LinearPayload(BaseModel):
    kind: Literal["linear"]
    a: RationalValue
    b: RationalValue


class PiecewiseLinearPayload(BaseModel):
    kind: Literal["piecewise_linear"]
    points: list[tuple[RationalValue, RationalValue]]


class ExponentialPayload(BaseModel):
    kind: Literal["exponential"]
    a: RationalValue
    b: RationalValue
    c: RationalValue


ValuationPayload = Annotated[
    Union[LinearPayload, PiecewiseLinearPayload, ExponentialPayload],
    Field(discriminator="kind"),
]


class PairPayload(BaseModel):
    seller: StrictStr
    buyer: StrictStr
    lower: StrictInt
    upper: StrictInt
    seller_valuation: ValuationPayload
    buyer_valuation: ValuationPayload


class InstancePayload(BaseModel):
    sellers: list[StrictStr]
    buyers: list[StrictStr]
    pairs: list[PairPayload]


class PricedPairPayload(BaseModel):
    seller: StrictStr
    buyer: StrictStr
    price: StrictInt


class OutcomePayload(BaseModel):
    matching: list[PricedPairPayload]
    prices: Optional[list[PricedPairPayload]] = None
    q: dict[str, PayoffValue]
    r: dict[str, PayoffValue]
    iterations: StrictInt = 0


class DecrementPayload(BaseModel):
    seller: StrictStr
    buyer: StrictStr
    m: Optional[StrictInt]


class PassPayload(BaseModel):
    index: StrictInt = Field(alias="pass")
    K0: list[tuple[StrictStr, StrictStr]]
    T0: list[tuple[StrictStr, StrictStr]]
    E_tilde: list[tuple[StrictStr, StrictStr]]
    q_tilde: dict[str, PayoffValue]
    EP_tilde: list[tuple[StrictStr, StrictStr]]
    EP_hat: list[tuple[StrictStr, StrictStr]]
    V_tilde: list[StrictStr]
    K: list[tuple[StrictStr, StrictStr]]
    L: list[tuple[StrictStr, StrictStr]] = []
    T0_tilde: list[tuple[StrictStr, StrictStr]] = []
    m: list[DecrementPayload] = []
    p: list[PricedPairPayload]
    X: list[tuple[StrictStr, StrictStr]]
    r: dict[str, PayoffValue]


_TRACE_ADAPTER = TypeAdapter(list[PassPayload])
_VALUATION_FIELDS = {"seller_valuation", "buyer_valuation"}
_KINDS = {kind.value for kind in ValuationKind}


# -----------------------------------------------------------------------------
# Error mapping
# -----------------------------------------------------------------------------
def _pointer(loc) -> str:
    """JSON pointer for a pydantic error location, without discriminator tags."""
    parts, previous = [], None
    for part in loc:
        if previous in _VALUATION_FIELDS and part in _KINDS:
            previous = part
            continue
        parts.append(str(part).replace("~", "~0").replace("/", "~1"))
        previous = part
    return "/" + "/".join(parts) if parts else ""


def _parse(model, data: Union[bytes, str]):
    try:
        if isinstance(model, TypeAdapter):
            return model.validate_json(data)
        return model.model_validate_json(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        pointer = _pointer(error["loc"])
        if error["type"] == "union_tag_invalid":
            tag = error.get("ctx", {}).get("tag", "?")
            raise UnsupportedValuationKindError(f"unsupported kind '{tag}'", pointer) from exc
        raise InstanceParseError(error["msg"], pointer) from exc


def dump_document(payload) -> bytes:
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _value(value: Number):
    return value if isinstance(value, float) else format_rational(value)


# -----------------------------------------------------------------------------
# Instances
# -----------------------------------------------------------------------------
def _valuation(payload) -> Valuation:
    if isinstance(payload, LinearPayload):
        return LinearValuation(payload.a, payload.b)
    if isinstance(payload, PiecewiseLinearPayload):
        return PiecewiseLinearValuation(tuple(payload.points))
    return ExponentialValuation(payload.a, payload.b, payload.c)


def read_instance(data: Union[bytes, str]) -> MarketInstance:
    """
    Raises:
        InstanceParseError: schema violation, a pair naming an unknown agent, a duplicate
            pair, or a pair of U x V without an entry.
        UnsupportedValuationKindError: a valuation kind outside the supported families.
    """
    payload = _parse(InstancePayload, data)
    sellers, buyers = set(payload.sellers), set(payload.buyers)
    terms = {}
    for k, entry in enumerate(payload.pairs):
        if entry.seller not in sellers:
            raise InstanceParseError(f"unknown seller '{entry.seller}'", f"/pairs/{k}/seller")
        if entry.buyer not in buyers:
            raise InstanceParseError(f"unknown buyer '{entry.buyer}'", f"/pairs/{k}/buyer")
        pair = (entry.seller, entry.buyer)
        if pair in terms:
            raise InstanceParseError(f"duplicate pair ({entry.seller},{entry.buyer})", f"/pairs/{k}")
        terms[pair] = PairTerms(
            lower=entry.lower,
            upper=entry.upper,
            seller_valuation=_valuation(entry.seller_valuation),
            buyer_valuation=_valuation(entry.buyer_valuation),
        )

    for seller in payload.sellers:
        for buyer in payload.buyers:
            if (seller, buyer) not in terms:
                raise InstanceParseError(f"missing pair ({seller},{buyer})", "/pairs")
    return MarketInstance(tuple(payload.sellers), tuple(payload.buyers), terms)


def write_instance(inst: MarketInstance) -> bytes:
    return dump_document(
        {
            "sellers": list(inst.sellers),
            "buyers": list(inst.buyers),
            "pairs": [
                {
                    "seller": seller,
                    "buyer": buyer,
                    "lower": inst.terms[(seller, buyer)].lower,
                    "upper": inst.terms[(seller, buyer)].upper,
                    "seller_valuation": inst.terms[(seller, buyer)].seller_valuation.to_dict(),
                    "buyer_valuation": inst.terms[(seller, buyer)].buyer_valuation.to_dict(),
                }
                for seller, buyer in inst.pairs
            ],
        }
    )


# -----------------------------------------------------------------------------
# Outcomes
# -----------------------------------------------------------------------------
def outcome_to_dict(outcome: Outcome) -> dict:
    return {
        "matching": [
            {"seller": seller, "buyer": buyer, "price": outcome.prices[(seller, buyer)]}
            for seller, buyer in outcome.matching
        ],
        "prices": [{"seller": seller, "buyer": buyer, "price": price} for (seller, buyer), price in outcome.prices.items()],
        "q": {seller: _value(value) for seller, value in outcome.q.items()},
        "r": {buyer: _value(value) for buyer, value in outcome.r.items()},
        "iterations": outcome.iterations,
    }


def read_outcome(data: Union[bytes, str]) -> Outcome:
    payload = _parse(OutcomePayload, data)
    prices = {(entry.seller, entry.buyer): entry.price for entry in payload.prices or ()}
    matching = []
    for k, entry in enumerate(payload.matching):
        pair = (entry.seller, entry.buyer)
        if prices.get(pair, entry.price) != entry.price:
            raise InstanceParseError(
                f"matched price {entry.price} of ({entry.seller},{entry.buyer}) contradicts the price vector",
                f"/matching/{k}/price",
            )
        prices[pair] = entry.price
        matching.append(pair)
    return Outcome(
        matching=tuple(matching),
        prices=prices,
        q=dict(payload.q),
        r=dict(payload.r),
        iterations=payload.iterations,
    )


def write_outcome(outcome: Outcome) -> bytes:
    return dump_document(outcome_to_dict(outcome))


# -----------------------------------------------------------------------------
# Traces
# -----------------------------------------------------------------------------
def _state_to_dict(state: IterationState) -> dict:
    return {
        "pass": state.index,
        "K0": [list(pair) for pair in state.k0],
        "T0": [list(pair) for pair in state.t0],
        "E_tilde": [list(pair) for pair in state.e_tilde],
        "q_tilde": {seller: _value(value) for seller, value in state.q_tilde.items()},
        "EP_tilde": [list(pair) for pair in state.ep_tilde],
        "EP_hat": [list(pair) for pair in state.ep_hat],
        "V_tilde": list(state.v_tilde),
        "K": [list(pair) for pair in state.k_pairs],
        "L": [list(pair) for pair in state.l_pairs],
        "T0_tilde": [list(pair) for pair in state.t0_tilde],
        "m": [{"seller": seller, "buyer": buyer, "m": m} for (seller, buyer), m in state.m.items()],
        "p": [{"seller": seller, "buyer": buyer, "price": price} for (seller, buyer), price in state.prices.items()],
        "X": [list(pair) for pair in state.matching],
        "r": {buyer: _value(value) for buyer, value in state.r.items()},
    }


def write_trace(trace: IterationTrace) -> bytes:
    return dump_document([_state_to_dict(state) for state in trace.states])


def read_trace(data: Union[bytes, str], inst: MarketInstance) -> IterationTrace:
    """
    Rebuilds a trace for auditing. The outcome is recomputed from the last pass, so a
    trace file never has to repeat the outcome it ends in.
    """
    passes = _parse(_TRACE_ADAPTER, data)
    if not passes:
        raise InstanceParseError("a trace needs at least one pass", "")

    known = set(inst.terms)
    states = []
    for k, entry in enumerate(passes):
        prices = {(item.seller, item.buyer): item.price for item in entry.p}
        unknown = [pair for pair in prices if pair not in known]
        if unknown:
            raise InstanceParseError(f"price for unknown pair {unknown[0]}", f"/{k}/p")
        states.append(
            IterationState(
                index=entry.index,
                k0=tuple(entry.K0),
                t0=tuple(entry.T0),
                e_tilde=tuple(entry.E_tilde),
                q_tilde=dict(entry.q_tilde),
                ep_tilde=tuple(entry.EP_tilde),
                ep_hat=tuple(entry.EP_hat),
                v_tilde=tuple(entry.V_tilde),
                k_pairs=tuple(entry.K),
                prices=prices,
                matching=tuple(entry.X),
                r=dict(entry.r),
                m={(item.seller, item.buyer): item.m for item in entry.m},
                l_pairs=tuple(entry.L),
                t0_tilde=tuple(entry.T0_tilde),
            )
        )

    final = states[-1]
    if set(final.prices) != known:
        raise InstanceParseError("last pass does not price every pair of E", f"/{len(states) - 1}/p")
    q, r = payoffs(inst, final.matching, final.prices)
    outcome = Outcome(matching=final.matching, prices=dict(final.prices), q=q, r=r, iterations=len(states))
    return IterationTrace(states=tuple(states), outcome=outcome, iteration_bound=iteration_bound(inst))
