"""
Valuation functions of money.

Three declarative families are supported, each strictly increasing by construction
once its parameters pass `monotonicity_defects()`:

    linear            f(x) = a*x + b                    (exact rational)
    piecewise_linear  breakpoints [(x_k, y_k)], extended linearly past both ends
                      (exact rational)
    exponential       f(x) = a*exp(c*x) + b, a*c > 0    (binary float)
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Union

from market_base.exceptions import ValuationDomainError

Number = Union[Fraction, float]


class ValuationKind(str, Enum):
    LINEAR = "linear"
    PIECEWISE_LINEAR = "piecewise_linear"
    EXPONENTIAL = "exponential"


def parse_rational(value) -> Fraction:
    """
    Coerces an integer, a Fraction or a "num/den" string into a Fraction.

    Floats are refused: a rational parameter must be written exactly.
    """
    if isinstance(value, bool):
        raise TypeError(f"Boolean {value!r} is not a rational number")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"Invalid rational literal {value!r}") from exc
    raise TypeError(f"Expected an integer or a rational string, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


@dataclass(frozen=True)
class Valuation(ABC):
    """Common surface of the valuation families."""

    @property
    @abstractmethod
    def kind(self) -> ValuationKind:
        ...

    @property
    def is_exact(self) -> bool:
        return True

    @abstractmethod
    def value(self, x) -> Number:
        ...

    @abstractmethod
    def monotonicity_defects(self) -> list[str]:
        ...

    def domain_defects(self, lo, hi) -> list[str]:
        """Problems evaluating on [lo, hi]; rational families are defined everywhere."""
        return []

    @abstractmethod
    def to_dict(self) -> dict:
        ...


@dataclass(frozen=True)
class LinearValuation(Valuation):
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", parse_rational(self.a))
        object.__setattr__(self, "b", parse_rational(self.b))

    @property
    def kind(self) -> ValuationKind:
        return ValuationKind.LINEAR

    def value(self, x) -> Fraction:
        return self.a * x + self.b

    def monotonicity_defects(self) -> list[str]:
        if self.a <= 0:
            return [f"not strictly increasing: slope a={format_rational(self.a)} must be > 0"]
        return []

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "a": format_rational(self.a), "b": format_rational(self.b)}


@dataclass(frozen=True)
class PiecewiseLinearValuation(Valuation):
    points: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        points = tuple((parse_rational(x), parse_rational(y)) for x, y in self.points)
        object.__setattr__(self, "points", points)

    @property
    def kind(self) -> ValuationKind:
        return ValuationKind.PIECEWISE_LINEAR

    def value(self, x) -> Fraction:
        if len(self.points) < 2:
            raise ValueError("A piecewise-linear valuation needs at least two breakpoints")
        xs = [px for px, _ in self.points]
        # segment index k uses points k and k+1; outer segments extend linearly
        k = min(max(bisect_right(xs, x) - 1, 0), len(self.points) - 2)
        (x0, y0), (x1, y1) = self.points[k], self.points[k + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def monotonicity_defects(self) -> list[str]:
        if len(self.points) < 2:
            return ["not strictly increasing: at least two breakpoints are required"]
        defects = []
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            if not (x1 > x0 and y1 > y0):
                defects.append(
                    f"not strictly increasing: breakpoints ({format_rational(x0)},{format_rational(y0)}) "
                    f"-> ({format_rational(x1)},{format_rational(y1)})"
                )
        return defects

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "points": [[format_rational(x), format_rational(y)] for x, y in self.points],
        }


@dataclass(frozen=True)
class ExponentialValuation(Valuation):
    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))

    @property
    def kind(self) -> ValuationKind:
        return ValuationKind.EXPONENTIAL

    @property
    def is_exact(self) -> bool:
        return False

    def value(self, x) -> float:
        try:
            result = float(self.a) * math.exp(float(self.c) * float(x)) + float(self.b)
        except OverflowError as exc:
            raise ValuationDomainError(f"exp({format_rational(self.c)}*{x}) overflows a double") from exc
        if not math.isfinite(result):
            raise ValuationDomainError(f"{self.to_dict()} is not finite at {x}")
        return result

    def monotonicity_defects(self) -> list[str]:
        if self.a * self.c <= 0:
            return [
                f"not strictly increasing: a*c = {format_rational(self.a * self.c)} must be > 0"
            ]
        return []

    def domain_defects(self, lo, hi) -> list[str]:
        # |a*exp(c*x)| is monotone in x, so the endpoints bound the whole interval
        defects = []
        for x in (lo, hi):
            try:
                self.value(x)
            except ValuationDomainError as exc:
                defects.append(f"overflows a double at {x}: {exc}")
        return defects

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "c": format_rational(self.c),
        }

