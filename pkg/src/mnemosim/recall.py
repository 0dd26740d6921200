"""Recall latency, memory-to-recall transitions and temporal hierarchies.

Latency is resolved by a modifier pipeline. It starts from the base law
``T_B / E`` and applies the selected modifiers in canonical order:

relation
    replace with the latency law ``g(R_C(anchor, target), E)``
feedback
    divide by ``1 + F`` where ``F = alpha_fb * R_C * repeats``
bayesian
    divide by the posterior P'(target | anchor)
simultaneous
    replace with ``1 / sum_j I(p_j, target)``

Each modifier is reachable on its own, so every closed-form latency can be
reproduced in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from mnemosim.bayes import bayesian_latency
from mnemosim.core import MODIFIERS, Phase, Proposition
from mnemosim.errors import NegativeTime, NonPositiveInput, UnresolvedLatency
from mnemosim.influence import cumulative_latency, feedback, feedback_latency, mutual_influence

INF = math.inf

LatencyLaw = Callable[[float, float], float]


def base_environment_latency(base_latency: float, environment: float) -> float:
    if not base_latency > 0 or not environment > 0:
        raise NonPositiveInput(f"need T_B > 0 and E > 0, got {base_latency}, {environment}")
    return base_latency / environment


def relation_latency(relation: float, environment: float) -> float:
    """1 / (R_C * E); infinite when the relation vanishes."""
    if not environment > 0:
        raise NonPositiveInput(f"environment must be positive, got {environment}")
    if relation <= 0:
        return INF
    return 1.0 / (relation * environment)


def _inverse_square(relation: float, environment: float) -> float:
    if not environment > 0:
        raise NonPositiveInput(f"environment must be positive, got {environment}")
    if relation <= 0:
        return INF
    return 1.0 / (relation * relation * environment)


LATENCY_LAWS: dict[str, LatencyLaw] = {
    "inverse": relation_latency,
    "inverse_square": _inverse_square,
}


def register_latency_law(name: str, law: LatencyLaw) -> None:
    LATENCY_LAWS[name] = law


def transition_probability(t: float, latency: float) -> float:
    """Probability that the transition has happened by elapsed time t."""
    if t < 0:
        raise NegativeTime(f"elapsed time must be >= 0, got {t}")
    if not latency > 0:
        raise NonPositiveInput(f"latency must be positive, got {latency}")
    if latency == INF:
        return 0.0
    return -math.expm1(-t / latency)


def state_at(latency: float | None, t: float) -> Phase:
    if latency is None or math.isnan(latency):
        raise UnresolvedLatency("latency has not been resolved")
    return Phase.REALIZED if t >= latency else Phase.DECAYED


def temporal_hierarchy(latencies: Mapping[str, float], bound: float) -> list[str]:
    """Members with latency <= bound, in recall order (ties by id)."""
    members = [p for p, t in latencies.items() if t <= bound]
    return sorted(members, key=lambda p: (latencies[p], p))


def hierarchy_preemption(
    p_out: Proposition,
    p_in: Proposition,
    env_out: float,
    env_in: float,
    relation_out: float | None = None,
    relation_in: float | None = None,
    law: LatencyLaw = relation_latency,
) -> bool:
    """Does p_out (outside the hierarchy) transition before p_in (inside)?

    With relations given the latency law is used, otherwise ``T_B / E``.
    """

    def latency(p: Proposition, env: float, rel: float | None) -> float:
        if rel is None:
            return base_environment_latency(p.base_latency, env)
        return law(rel, env)

    return latency(p_out, env_out, relation_out) < latency(p_in, env_in, relation_in)


# ---------------------------------------------------------------------------
# Modifier pipeline


@dataclass(frozen=True)
class LatencyQuery:
    target: str
    anchor: str | None = None
    environment: float = 1.0
    modifiers: tuple[str, ...] = ()
    feedback_repeats: int = 1

    def __post_init__(self):
        if not self.environment > 0:
            raise NonPositiveInput("environment must be positive")
        unknown = set(self.modifiers) - set(MODIFIERS)
        if unknown:
            raise ValueError(f"unknown modifiers {sorted(unknown)}")
        if self.anchor is None and set(self.modifiers) & {"relation", "feedback", "bayesian"}:
            raise ValueError("relation, feedback and bayesian modifiers need an anchor")


@dataclass(frozen=True)
class PipelineStep:
    modifier: str
    value: float
    detail: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class LatencyResult:
    target: str
    value: float
    steps: tuple[PipelineStep, ...]

    def to_dict(self, anchor: str | None = None) -> dict:
        return {
            "target": self.target,
            "anchor": anchor,
            "T_R": self.value,
            "pipeline": [{"modifier": s.modifier, "value": s.value, **dict(s.detail)} for s in self.steps],
        }


def resolve_latency(query: LatencyQuery, ctx) -> LatencyResult:
    """Run the pipeline against ``ctx``, normally a ``mnemosim.world.World``."""
    env = query.environment
    value = base_environment_latency(ctx.base_latency(query.target), env)
    steps = [PipelineStep("base", value, {"T_B": ctx.base_latency(query.target), "E": env})]
    active = [m for m in MODIFIERS if m in query.modifiers]
    for mod in active:
        if mod == "relation":
            r = ctx.relation(query.anchor, query.target)
            value = ctx.latency_law()(r, env)
            steps.append(PipelineStep(mod, value, {"R_C": r}))
        elif mod == "feedback":
            r = ctx.relation(query.anchor, query.target)
            f = feedback(ctx.alpha_fb(), r) * query.feedback_repeats
            value = feedback_latency(value, f)
            steps.append(PipelineStep(mod, value, {"F": f}))
        elif mod == "bayesian":
            post = ctx.posterior(query.anchor, query.target)
            value = bayesian_latency(value, post) if post > 0 else INF
            steps.append(PipelineStep(mod, value, {"posterior": post}))
        elif mod == "simultaneous":
            if ctx.fixed_point():
                value = ctx.fixed_point_latencies(env)[query.target]
            else:
                own = base_environment_latency(ctx.base_latency(query.target), env)
                influences = [
                    mutual_influence(
                        ctx.relation(j, query.target),
                        base_environment_latency(ctx.base_latency(j), env),
                        own,
                        ctx.entangled(j, query.target),
                    )[0]
                    for j in ctx.influencers(query.target)
                ]
                value = cumulative_latency(influences)
            steps.append(PipelineStep(mod, value))
    return LatencyResult(query.target, value, tuple(steps))
