"""Exception hierarchy.

Every domain error derives from :class:`MnemosimError` so the CLI can map
them to exit code 1 in one place.
"""

from __future__ import annotations


class MnemosimError(Exception):
    """Base class for all domain errors raised by mnemosim."""


class ScenarioFormatError(MnemosimError, ValueError):
    """A scenario document has the wrong shape (unknown key, wrong type)."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class ValidationFailed(MnemosimError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"scenario failed validation: {lines}")


class UnknownProposition(MnemosimError, KeyError):
    def __init__(self, prop_id: str):
        super().__init__(prop_id)
        self.prop_id = prop_id

    def __str__(self) -> str:
        return f"unknown proposition {self.prop_id!r}"


# temporal
class EmptyTrace(MnemosimError, ValueError):
    pass


class NotLasso(MnemosimError, ValueError):
    pass


class UnknownBranch(MnemosimError, KeyError):
    pass


class StepOutOfRange(MnemosimError, IndexError):
    pass


# decay
class TimeBeforeCurveStart(MnemosimError, ValueError):
    pass


class NotDecayed(MnemosimError, ValueError):
    pass


class NonMonotoneTime(MnemosimError, ValueError):
    pass


# hierarchy
class UnknownContext(MnemosimError, KeyError):
    pass


class NotContained(MnemosimError, ValueError):
    pass


class PathExplosion(MnemosimError, RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"path enumeration exceeded cap of {cap} paths")
        self.cap = cap


# recall
class NonPositiveInput(MnemosimError, ValueError):
    pass


class NegativeTime(MnemosimError, ValueError):
    pass


class UnresolvedLatency(MnemosimError, ValueError):
    pass


# influence
class NonPositiveLatency(MnemosimError, ValueError):
    pass


class NoIncomingInfluence(MnemosimError, ValueError):
    pass


class Divergence(MnemosimError, RuntimeError):
    pass


class ZeroTotalInfluence(MnemosimError, ValueError):
    pass


class UnassignedChain(MnemosimError, KeyError):
    pass


class OutOfRange(MnemosimError, ValueError):
    pass


# bayes
class ZeroEvidence(MnemosimError, ZeroDivisionError):
    pass


class ZeroMarginal(MnemosimError, ZeroDivisionError):
    pass


class EmptyContext(MnemosimError, ValueError):
    pass


class ZeroPosterior(MnemosimError, ZeroDivisionError):
    pass


# metrics
class InvalidDistribution(MnemosimError, ValueError):
    pass


class NegativeEntropy(MnemosimError, ValueError):
    pass


class EmptyChain(MnemosimError, ValueError):
    pass


class InsufficientData(MnemosimError, ValueError):
    pass


# engine
class ClockRegression(MnemosimError, ValueError):
    pass


class EventHorizonExceeded(MnemosimError, RuntimeError):
    """Internal scheduling produced an event earlier than the clock."""
