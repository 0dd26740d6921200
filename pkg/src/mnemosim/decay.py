"""Decay curves, reactivation and resilience.

Strength after realization ends follows ``amplitude * exp(-rate * (t - start))``
(Ebbinghaus) or the same curve scaled by a posterior recall probability
(Bayesian-modified). A non-empty trigger context restores a decayed memory to
full strength; resilience accumulated from recall gaps slows later decay.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Collection, NamedTuple

from mnemosim.core import MemoryState, Phase
from mnemosim.errors import NonMonotoneTime, NotDecayed, TimeBeforeCurveStart

# Strengths below this are flushed to zero.
STRENGTH_FLOOR = 1e-300
DEFAULT_RESILIENCE_THRESHOLD = 100.0


class CurveKind(str, enum.Enum):
    EBBINGHAUS = "ebbinghaus"
    BAYESIAN = "bayesian"


@dataclass(frozen=True)
class DecayCurve:
    kind: CurveKind
    rate: float
    start: float
    posterior: float | None = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("decay rate must be >= 0")
        if self.kind is CurveKind.BAYESIAN:
            if self.posterior is None or not 0.0 <= self.posterior <= 1.0:
                raise ValueError("a Bayesian-modified curve needs a posterior in [0,1]")

    @classmethod
    def ebbinghaus(cls, rate: float, start: float, amplitude: float = 1.0) -> DecayCurve:
        return cls(CurveKind.EBBINGHAUS, rate, start, None, amplitude)

    @classmethod
    def bayesian(cls, posterior: float, rate: float, start: float, amplitude: float = 1.0) -> DecayCurve:
        return cls(CurveKind.BAYESIAN, rate, start, posterior, amplitude)


def strength(curve: DecayCurve, t: float) -> float:
    if t < curve.start:
        raise TimeBeforeCurveStart(f"t={t} precedes curve start {curve.start}")
    value = curve.amplitude * math.exp(-curve.rate * (t - curve.start))
    if curve.kind is CurveKind.BAYESIAN:
        value *= curve.posterior
    return 0.0 if value < STRENGTH_FLOOR else value


def reactivate(
    state: MemoryState, trigger: Collection[str], t: float, window: float | None = None
) -> MemoryState:
    """Apply the reactivation rule to a decayed state.

    An empty trigger leaves the state untouched. Otherwise the proposition is
    realized again at ``t`` (strength 1) and its decay curve restarts when the
    new realization window closes. ``window=None`` leaves the window open.
    """
    if state.phase is not Phase.DECAYED:
        raise NotDecayed(f"cannot reactivate a state in phase {state.phase}")
    if state.t_f is not None and not t > state.t_f:
        raise NotDecayed(f"reactivation at t={t} does not follow the decay onset {state.t_f}")
    if not trigger:
        return state
    t_f = None if window is None else t + window
    return MemoryState(Phase.REALIZED, t_r=t, t_f=t_f, last_reset=t_f)


@dataclass(frozen=True)
class ResilienceAccumulator:
    alpha: float
    recall_times: tuple[float, ...] = ()
    value: float = 0.0


def accumulate_resilience(acc: ResilienceAccumulator, t: float) -> ResilienceAccumulator:
    if acc.recall_times and not t > acc.recall_times[-1]:
        raise NonMonotoneTime(f"recall at t={t} does not follow {acc.recall_times[-1]}")
    gain = math.exp(-acc.alpha * (t - acc.recall_times[-1])) if acc.recall_times else 0.0
    return replace(acc, recall_times=acc.recall_times + (t,), value=acc.value + gain)


def resilience_from_times(times, alpha: float) -> float:
    return math.fsum(math.exp(-alpha * (b - a)) for a, b in zip(times, times[1:]))


class AdjustedRate(NamedTuple):
    rate: float
    negligible: bool


def adjusted_decay_rate(
    rate: float, resilience: float, threshold: float = DEFAULT_RESILIENCE_THRESHOLD
) -> AdjustedRate:
    return AdjustedRate(rate / (1.0 + resilience), resilience >= threshold)
