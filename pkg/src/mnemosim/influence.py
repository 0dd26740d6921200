"""Influence networks between propositions.

The relation graph is undirected (relations are symmetric); a path's direction
comes from traversal. Only simple paths are summed, since summing over every
walk diverges on any cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple

from mnemosim.errors import (
    Divergence,
    NoIncomingInfluence,
    NonPositiveLatency,
    OutOfRange,
    PathExplosion,
    UnassignedChain,
    ZeroTotalInfluence,
)
from mnemosim.hierarchy import DEFAULT_PATH_CAP, RelationMatrix

FIXED_POINT_TOL = 1e-9
FIXED_POINT_MAX_ITER = 100


def simultaneous_influence(relation: float, latency: float) -> float:
    """Influence of p_i on p_j: R_C(p_i, p_j) / T_R(p_i)."""
    if not latency > 0:
        raise NonPositiveLatency(f"latency must be positive, got {latency}")
    return relation / latency


def mutual_influence(
    relation: float, latency_i: float, latency_j: float, is_entangled: bool
) -> tuple[float, float]:
    """(influence of i on j, influence of j on i); entangled pairs get the mean in both slots."""
    i_on_j = simultaneous_influence(relation, latency_i)
    j_on_i = simultaneous_influence(relation, latency_j)
    if is_entangled:
        mean = (i_on_j + j_on_i) / 2.0
        return mean, mean
    return i_on_j, j_on_i


def cumulative_latency(influences: Iterable[float]) -> float:
    total = math.fsum(influences)
    if not total > 0:
        raise NoIncomingInfluence("no positive incoming influence")
    return 1.0 / total


def cumulative_latency_fixed_point(
    m: RelationMatrix,
    base_latencies: Mapping[str, float],
    tol: float = FIXED_POINT_TOL,
    max_iter: int = FIXED_POINT_MAX_ITER,
) -> dict[str, float]:
    """Iterate latencies -> influences -> latencies until they stop moving."""
    latencies = dict(base_latencies)
    for _ in range(max_iter):
        new = {
            i: cumulative_latency(
                simultaneous_influence(m.get(j, i), latencies[j]) for j in latencies if j != i
            )
            for i in latencies
        }
        change = max(abs(new[i] - latencies[i]) for i in latencies)
        latencies = new
        if change < tol:
            return latencies
    raise Divergence(f"latency fixed point not reached in {max_iter} iterations")


def feedback(alpha: float, relation: float) -> float:
    return alpha * relation


def feedback_latency(base_latency: float, feedback_value: float) -> float:
    return base_latency / (1.0 + feedback_value)


@dataclass(frozen=True)
class FeedbackState:
    alpha: float
    relations: RelationMatrix

    def pair(self, p_i: str, p_j: str) -> float:
        return feedback(self.alpha, self.relations.get(p_i, p_j))


class InfluenceGraph:
    def __init__(self, adjacency: Mapping[str, Mapping[str, float]], lambda_path: float = 0.0):
        self.adjacency = {v: dict(nbrs) for v, nbrs in adjacency.items()}
        self.lambda_path = lambda_path

    @classmethod
    def from_relations(
        cls, m: RelationMatrix, vertices: Iterable[str] | None = None, lambda_path: float = 0.0
    ) -> InfluenceGraph:
        """Vertices are propositions with a positive relation (plus any listed); edges are positive pairs."""
        allowed = None if vertices is None else set(vertices)
        adj: dict[str, dict[str, float]] = {v: {} for v in (vertices or ())}
        for a, b, r in sorted(m.positive_pairs()):
            if allowed is not None and not (a in allowed and b in allowed):
                continue
            adj.setdefault(a, {})[b] = r
            adj.setdefault(b, {})[a] = r
        return cls(adj, lambda_path)

    @property
    def vertices(self) -> list[str]:
        return list(self.adjacency)

    def relation(self, a: str, b: str) -> float:
        return self.adjacency.get(a, {}).get(b, 0.0)


class PathSum(NamedTuple):
    value: float
    paths: int
    capped: bool


def simple_paths(g: InfluenceGraph, src: str, dst: str, min_edges: int = 1) -> Iterator[list[str]]:
    if src not in g.adjacency or dst not in g.adjacency or src == dst:
        return
    path = [src]
    on_path = {src}
    stack = [iter(sorted(g.adjacency[src]))]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path.discard(path.pop())
            continue
        if nxt in on_path:
            continue
        if nxt == dst:
            if len(path) >= min_edges:
                yield path + [dst]
            continue
        path.append(nxt)
        on_path.add(nxt)
        stack.append(iter(sorted(g.adjacency[nxt])))


def indirect_influence(g: InfluenceGraph, src: str, dst: str, cap: int = DEFAULT_PATH_CAP) -> PathSum:
    """Path sum over indirect (two or more edge) simple paths; truncates at ``cap`` paths."""
    terms = []
    count = 0
    for path in simple_paths(g, src, dst, min_edges=2):
        if count == cap:
            return PathSum(math.fsum(terms), count, True)
        count += 1
        product = 1.0
        for a, b in zip(path, path[1:]):
            product *= g.adjacency[a][b]
        terms.append(product * math.exp(-g.lambda_path * (len(path) - 1)))
    return PathSum(math.fsum(terms), count, False)


def recursive_influence(g: InfluenceGraph, src: str, dst: str, cap: int = DEFAULT_PATH_CAP) -> float:
    result = indirect_influence(g, src, dst, cap)
    if result.capped:
        raise PathExplosion(cap)
    return result.value


def total_influence(g: InfluenceGraph, src: str, dst: str, cap: int = DEFAULT_PATH_CAP) -> float:
    return g.relation(src, dst) + recursive_influence(g, src, dst, cap)


def updated_recall_distribution(g: InfluenceGraph, src: str, cap: int = DEFAULT_PATH_CAP) -> dict[str, float]:
    """P'(p_k | src) over every other vertex, proportional to total influence."""
    totals = {k: total_influence(g, src, k, cap) for k in g.vertices if k != src}
    norm = math.fsum(totals.values())
    if not norm > 0:
        raise ZeroTotalInfluence(f"{src!r} influences nothing")
    return {k: v / norm for k, v in totals.items()}


def updated_recall_probability(g: InfluenceGraph, src: str, dst: str, cap: int = DEFAULT_PATH_CAP) -> float:
    return updated_recall_distribution(g, src, cap)[dst]


def recursive_feedback(g: InfluenceGraph, target: str, cap: int = DEFAULT_PATH_CAP) -> float:
    """F_R(target): indirect influence flowing back to ``target`` from every other vertex."""
    return math.fsum(recursive_influence(g, j, target, cap) for j in g.vertices if j != target)


class FeedbackAdjusted(NamedTuple):
    raw: float
    value: float


def feedback_adjust(
    p_prime: Mapping[str, float], f_r: Mapping[str, float], total_feedback: float | None = None
) -> dict[str, FeedbackAdjusted]:
    """(P' + F_R) / (1 + sum F_R), then renormalized so the values sum to 1."""
    if total_feedback is None:
        total_feedback = math.fsum(f_r.values())
    raw = {k: (p + f_r.get(k, 0.0)) / (1.0 + total_feedback) for k, p in p_prime.items()}
    norm = math.fsum(raw.values())
    return {k: FeedbackAdjusted(r, r / norm if norm > 0 else 0.0) for k, r in raw.items()}


def feedback_adjusted_distribution(
    g: InfluenceGraph, src: str, cap: int = DEFAULT_PATH_CAP
) -> dict[str, FeedbackAdjusted]:
    p_prime = updated_recall_distribution(g, src, cap)
    f_r = {v: recursive_feedback(g, v, cap) for v in g.vertices}
    return feedback_adjust(p_prime, f_r, math.fsum(f_r.values()))


def feedback_adjusted_probability(g: InfluenceGraph, src: str, target: str, cap: int = DEFAULT_PATH_CAP) -> float:
    return feedback_adjusted_distribution(g, src, cap)[target].value


class ChainInfluence(NamedTuple):
    value: float
    causal: bool


def chain_of(chains: Mapping[str, Iterable[str]], prop: str) -> str:
    for chain_id, members in chains.items():
        if prop in members:
            return chain_id
    raise UnassignedChain(prop)


def chain_influence(
    p_i: str,
    p_j: str,
    chains: Mapping[str, Iterable[str]],
    relation: float,
    universal: float,
    eps_cross: float,
    tau_c: float,
) -> ChainInfluence:
    if chain_of(chains, p_i) == chain_of(chains, p_j):
        return ChainInfluence(relation, relation >= tau_c)
    return ChainInfluence(eps_cross * universal, False)


class Imprecision(NamedTuple):
    delta: float
    numb: bool


def imprecision(self_relation: float) -> Imprecision:
    """delta = 1 - R_C(p, p'); zero similarity leaves p in the {P_m, bottom} superposition."""
    if not 0.0 <= self_relation <= 1.0:
        raise OutOfRange(f"self-relation {self_relation} outside [0,1]")
    return Imprecision(1.0 - self_relation, self_relation == 0.0)


def imprecision_after(rate: float, t: float) -> Imprecision:
    return imprecision(math.exp(-rate * t))
