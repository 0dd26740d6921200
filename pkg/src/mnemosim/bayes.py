"""Bayesian recall updating over small discrete proposition sets.

``BeliefTable`` holds priors P(p) and likelihoods P(p_i | p_j). Evidence is
never stored; it is recomputed from the context on every query.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from mnemosim.decay import DecayCurve, strength
from mnemosim.errors import EmptyContext, ZeroEvidence, ZeroMarginal, ZeroPosterior


class CoherenceWarning(UserWarning):
    """Inputs to Bayes' rule were mutually inconsistent and the result was clamped."""


@dataclass(frozen=True)
class BeliefTable:
    priors: Mapping[str, float] = field(default_factory=dict)
    likelihoods: Mapping[tuple[str, str], float] = field(default_factory=dict)
    iteration: int = 0
    default_prior: float = 1.0
    fallback: Callable[[str, str], float] | None = None

    def prior(self, p: str) -> float:
        return self.priors.get(p, self.default_prior)

    def likelihood(self, of: str, given: str) -> float:
        """P(of | given); falls back to ``fallback(of, given)`` then 0."""
        key = (of, given)
        if key in self.likelihoods:
            return self.likelihoods[key]
        if self.fallback is not None:
            return self.fallback(of, given)
        return 0.0


def bayes_conditional(likelihood: float, prior: float, evidence: float) -> float:
    if evidence <= 0:
        raise ZeroEvidence("evidence must be positive")
    value = likelihood * prior / evidence
    if value > 1.0 or value < 0.0:
        warnings.warn(
            f"incoherent inputs: {likelihood}*{prior}/{evidence} = {value}, clamped to [0,1]",
            CoherenceWarning,
            stacklevel=2,
        )
        value = min(max(value, 0.0), 1.0)
    return value


def _weights(table: BeliefTable, p_i: str, members: Sequence[str]) -> dict[str, float]:
    if not members:
        raise EmptyContext("context has no members")
    return {k: table.likelihood(p_i, k) * table.prior(k) for k in members}


def evidence(table: BeliefTable, p_i: str, members: Sequence[str]) -> float:
    return math.fsum(_weights(table, p_i, members).values())


def posterior_distribution(table: BeliefTable, p_i: str, members: Sequence[str]) -> dict[str, float]:
    """P'(p_k | p_i) for every member p_k of the context."""
    weights = _weights(table, p_i, members)
    total = math.fsum(weights.values())
    if total <= 0:
        raise ZeroMarginal(f"no member of the context explains {p_i!r}")
    return {k: w / total for k, w in weights.items()}


def posterior_over_context(table: BeliefTable, p_i: str, p_j: str, members: Sequence[str]) -> float:
    return posterior_distribution(table, p_i, members)[p_j]


def reinforce(table: BeliefTable, p_i: str, p_j: str, members: Sequence[str]) -> tuple[BeliefTable, float]:
    """One repeated-recall step: prior(p_j) becomes its posterior, others shrink proportionally."""
    post = posterior_over_context(table, p_i, p_j, members)
    others = [k for k in members if k != p_j]
    mass = math.fsum(table.prior(k) for k in others)
    priors = dict(table.priors)
    priors[p_j] = post
    if mass > 0:
        for k in others:
            priors[k] = table.prior(k) * (1.0 - post) / mass
    return replace(table, priors=priors, iteration=table.iteration + 1), post


def iterate_recall_update(
    table: BeliefTable, p_i: str, p_j: str, members: Sequence[str], n: int
) -> list[float]:
    if n < 1:
        raise ValueError("n must be >= 1")
    seq = []
    for _ in range(n):
        table, post = reinforce(table, p_i, p_j, members)
        seq.append(post)
    return seq


def strictly_dominant(table: BeliefTable, p_i: str, p_j: str, members: Iterable[str]) -> bool:
    """True when p_j explains p_i strictly better than every other member."""
    lj = table.likelihood(p_i, p_j)
    return all(lj > table.likelihood(p_i, k) for k in members if k != p_j)


def bayesian_latency(base_latency: float, posterior: float) -> float:
    if posterior <= 0:
        raise ZeroPosterior("posterior must be positive")
    return base_latency / posterior


def bayesian_decay(posterior: float, rate: float, t: float, t_r: float) -> float:
    return strength(DecayCurve.bayesian(posterior, rate, t_r), t)
