from dataclasses import dataclass


@dataclass(frozen=True)
class Comparator:
    """
    Order relations over valuation values.

    Exact mode compares rationals as they are. Float mode widens every relation by eps
    so that values equal up to eps count as equal:

        a < b   iff  a < b - eps
        a > b   iff  a > b + eps
        a >= b  iff  not a < b
        a <= b  iff  not a > b
        a == b  iff  |a - b| <= eps
    """

    exact: bool
    eps: float = 1e-9

    def lt(self, a, b) -> bool:
        return a < b if self.exact else a < b - self.eps

    def gt(self, a, b) -> bool:
        return a > b if self.exact else a > b + self.eps

    def ge(self, a, b) -> bool:
        return not self.lt(a, b)

    def le(self, a, b) -> bool:
        return not self.gt(a, b)

    def eq(self, a, b) -> bool:
        return a == b if self.exact else abs(a - b) <= self.eps
