"""Entropy and efficiency of memory chains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy import stats

from mnemosim.errors import EmptyChain, InsufficientData, InvalidDistribution, NegativeEntropy

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ChainDistribution:
    chain: tuple[str, ...]
    probabilities: tuple[float, ...]
    chain_id: str = ""

    def __post_init__(self):
        if len(self.chain) != len(self.probabilities):
            raise InvalidDistribution("chain and probabilities differ in length")

    @classmethod
    def from_mapping(cls, probs: Mapping[str, float], chain_id: str = "") -> ChainDistribution:
        return cls(tuple(probs), tuple(probs.values()), chain_id)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.chain, self.probabilities))


def _check(probabilities: Sequence[float]) -> None:
    if not probabilities:
        raise InvalidDistribution("empty distribution")
    if any(p < 0 or p > 1 for p in probabilities):
        raise InvalidDistribution("probabilities must lie in [0,1]")
    if abs(math.fsum(probabilities) - 1.0) > SUM_TOLERANCE:
        raise InvalidDistribution(f"probabilities sum to {math.fsum(probabilities)!r}, not 1")


def chain_entropy(dist: ChainDistribution | Sequence[float]) -> float:
    """Shannon entropy in bits; zero-probability members contribute nothing."""
    probs = dist.probabilities if isinstance(dist, ChainDistribution) else tuple(dist)
    _check(probs)
    h = -math.fsum(p * math.log2(p) for p in probs if p > 0)
    return h + 0.0  # normalizes -0.0


def recall_efficiency(entropy: float) -> float:
    if entropy < 0:
        raise NegativeEntropy(f"entropy must be >= 0, got {entropy}")
    return 1.0 / (1.0 + entropy)


def optimal_distribution(scores: Mapping[str, float], beta: float, sign: int = -1) -> ChainDistribution:
    """p_i proportional to exp(sign * beta * score_i); the default sign is negative."""
    if not scores:
        raise EmptyChain("chain has no members")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    logits = {k: sign * beta * s for k, s in scores.items()}
    top = max(logits.values())
    weights = {k: math.exp(v - top) for k, v in logits.items()}
    z = math.fsum(weights.values())
    return ChainDistribution.from_mapping({k: w / z for k, w in weights.items()})


@dataclass(frozen=True)
class ChainRow:
    chain_id: str
    entropy: float
    efficiency: float
    mean_latency: float


@dataclass(frozen=True)
class EntropyLatencyReport:
    rows: tuple[ChainRow, ...]
    rank_correlation: float | None

    def to_dict(self) -> dict:
        return {
            "chains": [
                {"chain_id": r.chain_id, "H_bits": r.entropy, "efficiency": r.efficiency, "mean_T_R": r.mean_latency}
                for r in self.rows
            ],
            "rank_correlation": self.rank_correlation,
        }


def entropy_latency_report(
    chains: Sequence[ChainDistribution], latencies: Mapping[str, float]
) -> EntropyLatencyReport:
    """Per-chain entropy against mean latency, with their Spearman correlation.

    Latencies are averaged over the chain members present in ``latencies``.
    """
    if len(chains) < 2:
        raise InsufficientData("need at least two chains")
    rows = []
    for i, dist in enumerate(chains):
        values = [latencies[p] for p in dist.chain if p in latencies]
        if not values or not all(math.isfinite(v) for v in values):
            raise InsufficientData(f"chain {dist.chain_id or i!r} has no finite latencies")
        h = chain_entropy(dist)
        rows.append(ChainRow(dist.chain_id or str(i), h, recall_efficiency(h), math.fsum(values) / len(values)))
    hs = [r.entropy for r in rows]
    ts = [r.mean_latency for r in rows]
    if len(set(hs)) < 2 or len(set(ts)) < 2:
        rho = None
    else:
        rho = float(stats.spearmanr(hs, ts).statistic)
    return EntropyLatencyReport(tuple(rows), rho)
