"""Exception types raised by the LFPP Lab back-ends."""


class LFPPError(Exception):
    """Base class for all LFPP Lab errors."""


class DomainError(LFPPError, ValueError):
    """An argument lies outside the domain of a formula or operation."""


class GridTooLargeError(DomainError):
    """The requested grid exceeds the exact sampler's size cap."""


class WeightRangeError(LFPPError, ArithmeticError):
    """Vertex weights e^{xi h + log eps} would overflow or are not finite."""


class InsufficientSignalError(LFPPError, ValueError):
    """Too few usable scales remain to fit an exponent."""


class MissingCellError(LFPPError, KeyError):
    """An (xi, k) cell of an experiment plan has too few records."""


class MemoryBudgetError(LFPPError, MemoryError):
    """The memory estimate of a run exceeds the configured budget."""

    def __init__(self, required_bytes: int, budget_bytes: int):
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes
        super().__init__(
            f"Run needs about {required_bytes} bytes but the budget is {budget_bytes} bytes"
        )
