"""A validated scenario compiled into query-ready structures."""

from __future__ import annotations

import copy
import math
from functools import cached_property

from mnemosim import bayes, influence, metrics
from mnemosim.core import Registry, ScenarioConfig, require_valid
from mnemosim.errors import ZeroMarginal
from mnemosim.hierarchy import ContextHierarchy, RelationMatrix, entanglement_closure, shared_relation
from mnemosim.recall import LATENCY_LAWS, LatencyQuery, resolve_latency


class World:
    def __init__(self, config: ScenarioConfig, validate: bool = True):
        if validate:
            require_valid(config)
        self.config = config
        self.params = config.params
        self.registry = Registry(config.propositions)
        self.relations = RelationMatrix.from_entries(config.relations)
        self.hierarchy = ContextHierarchy.from_specs(config.contexts)
        # R restricted to pairs that share at least one context
        self.effective = RelationMatrix(
            {
                pair: v
                for pair, v in self.relations.entries.items()
                if shared_relation(self.relations, self.hierarchy, *sorted(pair)) > 0
            },
            dict(self.relations.universal),
        )
        self.beliefs = self._initial_beliefs()

    def _initial_beliefs(self) -> bayes.BeliefTable:
        spec = self.params.bayes
        n = len(self.registry)
        return bayes.BeliefTable(
            priors=dict(spec.priors),
            likelihoods={(e.of, e.given): e.value for e in spec.likelihoods},
            default_prior=1.0 / n,
            fallback=self.relations.get,
        )

    def with_beliefs(self, table: bayes.BeliefTable) -> World:
        other = copy.copy(self)
        other.beliefs = table
        return other

    @property
    def ids(self) -> list[str]:
        return self.registry.ids()

    # -- pipeline context ---------------------------------------------------

    def base_latency(self, prop: str) -> float:
        return self.registry.lookup(prop).base_latency

    def relation(self, a: str, b: str) -> float:
        self.registry.lookup(a)
        self.registry.lookup(b)
        return self.effective.get(a, b)

    def alpha_fb(self) -> float:
        return self.params.alpha_fb

    def bayes_candidates(self, anchor: str) -> list[str]:
        return [p for p in self.ids if p != anchor]

    def posterior(self, anchor: str, target: str) -> float:
        """P'(target | anchor) under the current beliefs; 0 when nothing explains the anchor."""
        try:
            return bayes.posterior_over_context(self.beliefs, anchor, target, self.bayes_candidates(anchor))
        except ZeroMarginal:
            return 0.0

    def influencers(self, target: str) -> list[str]:
        return [j for j in self.ids if j != target and self.relation(j, target) > 0]

    def latency_law(self):
        return LATENCY_LAWS[self.params.latency_law]

    def fixed_point(self) -> bool:
        return self.params.fixed_point

    def fixed_point_latencies(self, environment: float) -> dict[str, float]:
        base = {p.id: p.base_latency / environment for p in self.registry}
        return influence.cumulative_latency_fixed_point(self.effective, base)

    @cached_property
    def _entangled_pairs(self) -> set[frozenset]:
        if not self.hierarchy.contexts:
            return {pair for pair, v in self.relations.entries.items() if v > self.params.tau_e}
        return {pair for pair, _ in entanglement_closure(self.hierarchy, self.relations, self.params.tau_e)}

    def entangled(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self._entangled_pairs

    # -- derived structures -------------------------------------------------

    @cached_property
    def graph(self) -> influence.InfluenceGraph:
        return influence.InfluenceGraph.from_relations(self.effective, lambda_path=self.params.lambda_path)

    def latency(self, target: str, anchor: str | None = None, modifiers=None, environment=None,
                repeats: int = 1):
        query = LatencyQuery(
            target=target,
            anchor=anchor,
            environment=self.params.initial_environment if environment is None else environment,
            modifiers=tuple(self.params.modifiers if modifiers is None else modifiers),
            feedback_repeats=repeats,
        )
        return resolve_latency(query, self)

    def chain_distribution(self, chain_id: str) -> metrics.ChainDistribution:
        """Recall distribution over a chain: P'(. | first member) inside the chain's own graph."""
        members = self.params.chains[chain_id]
        if len(members) == 1:
            return metrics.ChainDistribution(tuple(members), (1.0,), chain_id)
        g = influence.InfluenceGraph.from_relations(
            self.effective, vertices=members, lambda_path=self.params.lambda_path
        )
        dist = influence.updated_recall_distribution(g, members[0], self.params.engine.path_cap)
        return metrics.ChainDistribution(tuple(dist), tuple(dist.values()), chain_id)

    def chain_latencies(self, chain_id: str) -> dict[str, float]:
        members = self.params.chains[chain_id]
        anchor = members[0]
        return {m: self.latency(m, anchor).value for m in members[1:]}

    def chain_rows(self) -> list[metrics.ChainRow]:
        rows = []
        for chain_id in self.params.chains:
            h = metrics.chain_entropy(self.chain_distribution(chain_id))
            lat = list(self.chain_latencies(chain_id).values())
            mean = math.fsum(lat) / len(lat) if lat else math.nan
            rows.append(metrics.ChainRow(chain_id, h, metrics.recall_efficiency(h), mean))
        return rows

    def entropy_latency_report(self) -> metrics.EntropyLatencyReport:
        dists = [self.chain_distribution(c) for c in self.params.chains]
        latencies: dict[str, float] = {}
        for c in self.params.chains:
            latencies.update(self.chain_latencies(c))
        return metrics.entropy_latency_report(dists, latencies)


def compile_scenario(config: ScenarioConfig) -> World:
    return World(config)
