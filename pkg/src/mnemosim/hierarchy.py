"""Context containment DAG, contextual relations and recall propagation.

Containment edges run from a subcontext to the context that contains it
(``child -> parent``). A relation between two propositions only counts inside
a context holding both of them.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from mnemosim.core import ContextSpec, RelationEntry
from mnemosim.errors import NotContained, PathExplosion, UnknownContext

DEFAULT_PATH_CAP = 1_000_000


def _pair(a: str, b: str) -> frozenset[str]:
    return frozenset((a, b))


@dataclass(frozen=True)
class RelationMatrix:
    """Symmetric relation strengths; absent pairs are 0 and R(p, p) is 1."""

    entries: Mapping[frozenset, float] = field(default_factory=dict)
    universal: Mapping[frozenset, float] = field(default_factory=dict)

    @classmethod
    def from_entries(cls, rows: Iterable[RelationEntry]) -> RelationMatrix:
        entries, universal = {}, {}
        for r in rows:
            entries[_pair(r.a, r.b)] = r.value
            if r.universal is not None:
                universal[_pair(r.a, r.b)] = r.universal
        return cls(entries, universal)

    @classmethod
    def of(cls, values: Mapping[tuple[str, str], float]) -> RelationMatrix:
        return cls({_pair(a, b): v for (a, b), v in values.items()})

    def get(self, a: str, b: str):
        if a == b:
            return 1.0
        return self.entries.get(_pair(a, b), 0.0)

    def universal_relation(self, a: str, b: str):
        if a == b:
            return 1.0
        return self.universal.get(_pair(a, b), 0.0)

    def positive_pairs(self) -> Iterator[tuple[str, str, float]]:
        for pair, v in self.entries.items():
            if v > 0:
                a, b = sorted(pair)
                yield a, b, v


class ContextHierarchy:
    def __init__(self, contexts: Mapping[str, Iterable[str]], edges: Iterable[tuple[str, str]] = ()):
        self.contexts: dict[str, frozenset[str]] = {c: frozenset(m) for c, m in contexts.items()}
        self.parents: dict[str, list[str]] = {c: [] for c in self.contexts}
        for child, parent in edges:
            for c in (child, parent):
                if c not in self.contexts:
                    raise UnknownContext(c)
            if parent not in self.parents[child]:
                self.parents[child].append(parent)

    @classmethod
    def from_specs(cls, specs: Iterable[ContextSpec]) -> ContextHierarchy:
        specs = list(specs)
        return cls({c.id: c.members for c in specs}, [(c.id, p) for c in specs for p in c.within])

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(c, p) for c, ps in self.parents.items() for p in ps]

    def members(self, context: str) -> frozenset[str]:
        try:
            return self.contexts[context]
        except KeyError:
            raise UnknownContext(context) from None

    def contexts_of(self, prop: str) -> list[str]:
        return [c for c, m in self.contexts.items() if prop in m]

    def ancestors(self, context: str) -> list[str]:
        """Contexts reachable upward from ``context`` (excluding itself), in BFS order."""
        self.members(context)
        seen: dict[str, None] = {}
        queue = deque(self.parents[context])
        while queue:
            c = queue.popleft()
            if c in seen or c == context:
                continue
            seen[c] = None
            queue.extend(self.parents[c])
        return list(seen)

    def contains(self, inner: str, outer: str) -> bool:
        """True when ``inner`` equals or is transitively contained in ``outer``."""
        self.members(outer)
        return inner == outer or outer in self.ancestors(inner)

    def subset_violations(self) -> list[tuple[str, str]]:
        return [(c, p) for c, p in self.edges if not self.contexts[c] <= self.contexts[p]]

    def topological_order(self) -> list[str]:
        indegree = {c: 0 for c in self.contexts}
        for _, p in self.edges:
            indegree[p] += 1
        ready = deque(c for c in self.contexts if indegree[c] == 0)
        order = []
        while ready:
            c = ready.popleft()
            order.append(c)
            for p in self.parents[c]:
                indegree[p] -= 1
                if indegree[p] == 0:
                    ready.append(p)
        if len(order) != len(self.contexts):
            raise ValueError("context containment is cyclic")
        return order


def contextual_relation(m: RelationMatrix, h: ContextHierarchy, p_i: str, p_j: str, context: str):
    members = h.members(context)
    if p_i in members and p_j in members:
        return m.get(p_i, p_j)
    return 0.0


def shared_relation(m: RelationMatrix, h: ContextHierarchy, p_i: str, p_j: str):
    """R_C without a named context: R when some context holds both, else 0.

    A hierarchy with no contexts at all is treated as one implicit context.
    """
    if not h.contexts:
        return m.get(p_i, p_j)
    for members in h.contexts.values():
        if p_i in members and p_j in members:
            return m.get(p_i, p_j)
    return 0.0


def is_memory_chain(m: RelationMatrix, props: Iterable[str]) -> bool:
    return all(m.get(a, b) > 0 for a, b in itertools.combinations(sorted(set(props)), 2))


def entangled(m: RelationMatrix, h: ContextHierarchy, p_i: str, p_j: str, context: str, tau_e: float) -> bool:
    return contextual_relation(m, h, p_i, p_j, context) > tau_e


def entanglement_closure(h: ContextHierarchy, m: RelationMatrix, tau_e: float) -> set[tuple[frozenset, str]]:
    """Pairs entangled somewhere, marked in that context and every containing context."""
    marked: set[tuple[frozenset, str]] = set()
    for context, members in h.contexts.items():
        for a, b in itertools.combinations(sorted(members), 2):
            if entangled(m, h, a, b, context, tau_e):
                pair = _pair(a, b)
                marked.add((pair, context))
                for outer in h.ancestors(context):
                    marked.add((pair, outer))
    return marked


def count_paths(h: ContextHierarchy, source: str, target: str) -> int:
    """Number of upward containment paths from source to target."""
    return _path_sum(h, source, target, lambda child, parent: 1, one=1)


def _path_sum(h: ContextHierarchy, source: str, target: str, weight, one):
    # Sum over all source->target paths of the product of edge weights, by
    # dynamic programming over a topological order (no path enumeration).
    h.members(source)
    h.members(target)
    acc = {source: one}
    for c in h.topological_order():
        if c not in acc:
            continue
        for p in h.parents[c]:
            w = acc[c] * weight(c, p)
            acc[p] = acc[p] + w if p in acc else w
    return acc.get(target, one * 0)


def raw_propagation_sum(
    h: ContextHierarchy,
    m: RelationMatrix,
    p_i: str,
    p_j: str,
    source: str,
    target: str,
    mode: str = "literal",
    path_cap: int = DEFAULT_PATH_CAP,
):
    """Unclamped path sum. Exact for Fraction-valued relations.

    ``literal`` repeats R_C(p_i, p_j) of the target context on every edge, so a
    path of length L contributes R_C**L. ``per_edge`` instead weighs each edge
    by R_C(p_i, p_j) inside the edge's outer context.
    """
    n_paths = count_paths(h, source, target) if source != target else 0
    if n_paths > path_cap:
        raise PathExplosion(path_cap)
    if source == target:
        # a proposition pair in one context: the direct relation
        return contextual_relation(m, h, p_i, p_j, target)
    if mode == "literal":
        r = contextual_relation(m, h, p_i, p_j, target)
        weight = lambda child, parent: r  # noqa: E731
    elif mode == "per_edge":
        weight = lambda child, parent: contextual_relation(m, h, p_i, p_j, parent)  # noqa: E731
    else:
        raise ValueError(f"unknown propagation mode {mode!r}")
    zero = m.get(p_i, p_j) * 0
    if n_paths == 0:
        return zero
    return _path_sum(h, source, target, weight, one=zero + 1)


def recall_propagation_probability(
    h: ContextHierarchy,
    m: RelationMatrix,
    p_i: str,
    p_j: str,
    source: str,
    target: str,
    mode: str = "literal",
    path_cap: int = DEFAULT_PATH_CAP,
) -> float:
    raw = raw_propagation_sum(h, m, p_i, p_j, source, target, mode, path_cap)
    return float(min(max(raw, 0), 1))


def propagates(
    h: ContextHierarchy, m: RelationMatrix, p_i: str, p_j: str, inner: str, outer: str, tau: float
) -> bool:
    if not h.contains(inner, outer):
        raise NotContained(f"{inner!r} is not contained in {outer!r}")
    return contextual_relation(m, h, p_i, p_j, outer) > tau
