"""Exception hierarchy shared across the package."""


class QConsensusError(Exception):
    """Base class for all package errors."""


class DisconnectedGraph(QConsensusError):
    pass


class NonSquare(QConsensusError):
    pass


class BaseNotDominating(QConsensusError):
    pass


class CapReached(QConsensusError):
    """Power-ratio iteration hit its cap before settling (near-defective matrix)."""


class NonFinite(QConsensusError):
    pass


class NotRepresentable(QConsensusError):
    pass


class InvalidParams(QConsensusError):
    pass


class NoAttacks(QConsensusError):
    pass


class BudgetTooLarge(QConsensusError):
    pass


class NotScalar(QConsensusError):
    pass


class InvalidRange(QConsensusError):
    pass


class SaturationAbort(QConsensusError):
    """Raised in strict mode when a quantizer overflows; carries the step index."""

    def __init__(self, step: int):
        super().__init__(f"quantizer saturated at step k={step}")
        self.step = step


class DimensionMismatch(QConsensusError):
    pass


class SelectionViolated(QConsensusError):
    pass


class DegenerateFactors(QConsensusError):
    pass


class ParseError(QConsensusError):
    pass


class ValidationError(QConsensusError):
    """Aggregates every violation found in a scenario document."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)
