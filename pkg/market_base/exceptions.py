class MarketError(Exception):
    """Base class for every error raised by the market solver."""


class ValuationDomainError(MarketError, ValueError):
    """A valuation is evaluated outside its feasible interval or beyond the range of a double."""


class UnknownPairError(MarketError, KeyError):
    """A seller/buyer pair is not part of the market."""

    def __init__(self, seller, buyer):
        self.seller = seller
        self.buyer = buyer
        super().__init__(f"Unknown pair ({seller},{buyer})")

    def __str__(self):
        return self.args[0]


class InstanceValidationError(MarketError):
    """The instance failed validation; the report lists every violation."""

    def __init__(self, report):
        self.report = report
        super().__init__("Instance rejected: " + "; ".join(report.violations))


class MatchingInfeasibleError(MarketError):
    """No matching saturates the required buyers; carries a Hall-style witness."""

    def __init__(self, deficient_buyers, neighbours):
        self.deficient_buyers = tuple(deficient_buyers)
        self.neighbours = tuple(neighbours)
        super().__init__(
            f"Buyers {list(self.deficient_buyers)} have only {len(self.neighbours)} "
            f"admissible sellers {list(self.neighbours)}"
        )


class EnumerationGuardError(MarketError):
    """Brute-force enumeration refused because the input exceeds its size guard."""


class InternalInvariantError(MarketError):
    """The solver broke one of its own guarantees. Carries the partial trace."""

    def __init__(self, message, states=()):
        self.states = tuple(states)
        super().__init__(message)


class InstanceParseError(MarketError):
    """A JSON document does not follow the expected schema."""

    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(f"{message} (at '{pointer or '/'}')")


class UnsupportedValuationKindError(InstanceParseError):
    pass


class OutcomeStructureError(MarketError):
    """An outcome refers to agents or pairs that do not exist."""

    def __init__(self, defects):
        self.defects = tuple(defects)
        super().__init__("Malformed outcome: " + "; ".join(self.defects))


class GeneratorConfigError(MarketError):
    pass
