"""Deterministic discrete-event simulation of memory dynamics.

Events are processed in ``(time, sequence)`` order. External events come from
the scenario (environment schedule first, then ``events`` in file order);
internal events (scheduled realizations and decay onsets) get sequence numbers
in the order they are scheduled.

What happens on each event kind:

recall
    The target is realized for ``realization_window`` time units and a recall
    time is added to its resilience. Every proposition related to it has its
    decay curve restarted and (when scheduling is on) a realization scheduled
    after its resolved latency. Propositions in containing contexts whose
    relation clears ``tau`` are recalled immediately, up to ``cascade_depth``.
trigger
    Reactivates a decayed target when the trigger context is non-empty.
environment
    Replaces the environment factor used by later latency computations.
measure
    Reads a branch's measurement table and records whether it has resolved.

Stochastic mode draws the realization delay from an exponential with mean
``T_R``. The generator is numpy's PCG64 seeded with the scenario seed; uniform
doubles are turned into delays by inverse CDF, ``-T_R * log1p(-u)``, so the
stream depends only on PCG64's documented output.
"""

from __future__ import annotations

import copy
import csv
import heapq
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from mnemosim import bayes, decay, hierarchy
from mnemosim.core import MemoryState, Phase, ScenarioConfig
from mnemosim.errors import ClockRegression, EventHorizonExceeded, UnassignedChain, ZeroMarginal
from mnemosim.influence import chain_of
from mnemosim.temporal import trace_from_spec
from mnemosim.world import World

logger = logging.getLogger(__name__)

LOG_FIELDS = ("time", "prop", "phase_before", "phase_after", "strength", "latency", "cause")
INTERNAL_KINDS = ("realize", "decay")


def fmt(x: float | None) -> str:
    """12 significant digits; empty for missing values."""
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def jnum(x: float | None):
    if x is None:
        return None
    if not math.isfinite(x):
        return fmt(x)
    return float(fmt(x))


@dataclass(frozen=True)
class SimulationEvent:
    time: float
    seq: int
    kind: str
    target: str | None = None
    context: str | None = None
    value: float | None = None
    branch: str | None = None
    step: int | None = None
    cause: str = ""
    latency: float | None = None

    def key(self) -> tuple[float, int]:
        return (self.time, self.seq)

    def __lt__(self, other: SimulationEvent) -> bool:
        return self.key() < other.key()


@dataclass(frozen=True)
class EventLogRecord:
    time: float
    prop: str
    phase_before: str
    phase_after: str
    strength: float | None
    latency: float | None
    cause: str

    def row(self) -> list[str]:
        return [fmt(self.time), self.prop, self.phase_before, self.phase_after,
                fmt(self.strength), fmt(self.latency), self.cause]

    def to_json(self) -> dict:
        return {
            "time": jnum(self.time),
            "prop": self.prop,
            "phase_before": self.phase_before,
            "phase_after": self.phase_after,
            "strength": jnum(self.strength),
            "latency": jnum(self.latency),
            "cause": self.cause,
        }


@dataclass
class PropState:
    phase: Phase
    amplitude: float
    base_rate: float
    rate: float
    resilience: decay.ResilienceAccumulator
    t_r: float | None = None
    t_f: float | None = None
    curve_start: float | None = None
    posterior: float | None = None
    recalls: int = 0
    realizations: int = 0
    pending_until: float | None = None

    def curve(self) -> decay.DecayCurve:
        if self.posterior is None:
            return decay.DecayCurve.ebbinghaus(self.rate, self.curve_start, self.amplitude)
        return decay.DecayCurve.bayesian(self.posterior, self.rate, self.curve_start, self.amplitude)

    def strength(self, t: float) -> float:
        if self.phase is Phase.REALIZED:
            return 1.0
        if self.phase is Phase.DECAYED:
            return decay.strength(self.curve(), t)
        return 0.0

    def memory_state(self) -> MemoryState:
        return MemoryState(self.phase, self.t_r, self.t_f, self.curve_start)


class TransitionSampler:
    """Exponential transition delays from a PCG64 stream, by inverse CDF."""

    def __init__(self, seed: int):
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def delay(self, latency: float) -> float:
        return -latency * math.log1p(-self.generator.random())

    def delays(self, latency: float, n: int) -> list[float]:
        return [self.delay(latency) for _ in range(n)]


@dataclass
class SimulationState:
    world: World
    clock: float
    environment: float
    props: dict[str, PropState]
    beliefs: bayes.BeliefTable
    sampler: TransitionSampler
    queue: list[SimulationEvent] = field(default_factory=list)
    next_seq: int = 0
    branches: dict[str, bool] = field(default_factory=dict)
    log: list[EventLogRecord] = field(default_factory=list)

    def copy(self) -> SimulationState:
        return copy.deepcopy(self, memo={id(self.world): self.world})

    def push(self, time: float, kind: str, **kw) -> SimulationEvent:
        if time < self.clock:
            raise EventHorizonExceeded(f"{kind} scheduled at {time} before clock {self.clock}")
        ev = SimulationEvent(time, self.next_seq, kind, **kw)
        self.next_seq += 1
        heapq.heappush(self.queue, ev)
        return ev

    def record(self, t, prop, before, after, strength, latency=None, cause=""):
        self.log.append(
            EventLogRecord(t, prop, "" if before is None else str(before), str(after), strength, latency, cause)
        )

    def is_stale(self, ev: SimulationEvent) -> bool:
        """Internal events superseded by later state changes."""
        if ev.kind == "realize":
            return self.props[ev.target].pending_until != ev.time
        if ev.kind == "decay":
            ps = self.props[ev.target]
            return not (ps.phase is Phase.REALIZED and ps.t_f == ev.time)
        return False

    def pending(self) -> list[SimulationEvent]:
        return sorted(ev for ev in self.queue if not self.is_stale(ev))


def initial_state(world: World) -> SimulationState:
    cfg = world.config
    opts = cfg.params.engine
    props = {}
    for p in world.registry:
        acc = decay.ResilienceAccumulator(cfg.params.alpha_res)
        if opts.initial_phase == "unresolved":
            props[p.id] = PropState(Phase.UNRESOLVED, p.initial_amplitude, p.decay_constant, p.decay_constant, acc)
        else:
            props[p.id] = PropState(
                Phase.DECAYED, p.initial_amplitude, p.decay_constant, p.decay_constant, acc, t_f=0.0, curve_start=0.0
            )
    state = SimulationState(
        world=world,
        clock=0.0,
        environment=cfg.params.initial_environment,
        props=props,
        beliefs=world.beliefs,
        sampler=TransitionSampler(cfg.seed),
        branches={b: False for b in cfg.params.branches},
    )
    for pid, ps in props.items():
        state.record(0.0, pid, None, ps.phase, ps.strength(0.0), cause="init")
    if isinstance(cfg.params.environment, tuple):
        for s in cfg.params.environment:
            state.push(s.time, "environment", value=s.value, cause="schedule")
    for e in cfg.events:
        state.push(e.time, e.kind, target=e.target, context=e.context, value=e.value, branch=e.branch,
                   step=e.step, cause=e.kind)
    return state


# ---------------------------------------------------------------------------
# Event application


def _realize(state: SimulationState, pid: str, t: float, cause: str, latency: float | None = None) -> None:
    ps = state.props[pid]
    before = ps.phase
    if not ps.resilience.recall_times or t > ps.resilience.recall_times[-1]:
        ps.resilience = decay.accumulate_resilience(ps.resilience, t)
    ps.phase = Phase.REALIZED
    ps.t_r = t
    ps.t_f = t + state.world.params.engine.realization_window
    ps.curve_start = None
    ps.posterior = None
    ps.pending_until = None
    ps.realizations += 1
    state.push(ps.t_f, "decay", target=pid, cause="window-end")
    state.record(t, pid, before, Phase.REALIZED, 1.0, latency, cause)


def _crosses_chains(world: World, p: str, q: str) -> bool:
    """True when ``p`` and ``q`` sit in different chains (cross-chain links never drive recall)."""
    chains = world.params.chains
    if not chains:
        return False
    try:
        return chain_of(chains, p) != chain_of(chains, q)
    except UnassignedChain:
        return False


def _delay(state: SimulationState, latency: float) -> float:
    if not state.world.params.engine.stochastic:
        return latency
    return state.sampler.delay(latency)


def _recall(state: SimulationState, pid: str, t: float, depth: int, cause: str) -> None:
    world = state.world
    params = world.params
    _realize(state, pid, t, cause)
    ps = state.props[pid]
    ps.recalls += 1

    use_bayes = "bayesian" in params.modifiers
    view = world.with_beliefs(state.beliefs)
    posteriors: dict[str, float] = {}
    if use_bayes:
        try:
            posteriors = bayes.posterior_distribution(state.beliefs, pid, view.bayes_candidates(pid))
        except ZeroMarginal:
            posteriors = {}

    for q in world.influencers(pid):
        if _crosses_chains(world, pid, q):
            continue
        qs = state.props[q]
        if qs.phase is Phase.DECAYED:
            qs.curve_start = t
            qs.posterior = posteriors.get(q, 0.0) if use_bayes else None
            state.record(t, q, Phase.DECAYED, Phase.DECAYED, qs.strength(t), cause=f"reset:{pid}")
        if params.engine.scheduling and qs.phase is not Phase.REALIZED:
            latency = view.latency(q, anchor=pid, environment=state.environment, repeats=ps.recalls).value
            if math.isfinite(latency):
                when = t + _delay(state, latency)
                if qs.pending_until is None or when < qs.pending_until:
                    qs.pending_until = when
                    state.push(when, "realize", target=q, cause=f"latency:{pid}", latency=latency)

    if use_bayes and posteriors:
        state.beliefs = bayes.BeliefTable(
            priors={**state.beliefs.priors, **posteriors},
            likelihoods=state.beliefs.likelihoods,
            iteration=state.beliefs.iteration + 1,
            default_prior=state.beliefs.default_prior,
            fallback=state.beliefs.fallback,
        )

    if not params.engine.propagation or not world.hierarchy.contexts:
        return
    if depth >= params.engine.cascade_depth:
        logger.warning("cascade depth %d reached at %s (t=%s); propagation stopped", depth, pid, t)
        return
    h = world.hierarchy
    targets: dict[str, str] = {}
    for inner in h.contexts_of(pid):
        for outer in h.ancestors(inner):
            for q in world.ids:
                if q == pid or q in targets or q not in h.members(outer):
                    continue
                if hierarchy.propagates(h, world.relations, pid, q, inner, outer, params.tau):
                    targets[q] = f"propagate:{pid}:{inner}>{outer}"
    for q, why in targets.items():
        qs = state.props[q]
        if qs.phase is Phase.REALIZED and qs.t_r == t:
            continue
        _recall(state, q, t, depth + 1, why)


def _trigger(state: SimulationState, ev: SimulationEvent) -> None:
    ps = state.props[ev.target]
    if ps.phase is not Phase.DECAYED or not ev.time > ps.t_f:
        logger.debug("trigger on %s ignored in phase %s", ev.target, ps.phase)
        return
    members = state.world.hierarchy.members(ev.context)
    after = decay.reactivate(ps.memory_state(), members, ev.time)
    if after.phase is Phase.DECAYED:
        return
    _realize(state, ev.target, ev.time, f"trigger:{ev.context}")


def _decay_onset(state: SimulationState, ev: SimulationEvent) -> None:
    ps = state.props[ev.target]
    params = state.world.params
    ps.phase = Phase.DECAYED
    ps.curve_start = ev.time
    ps.rate = decay.adjusted_decay_rate(ps.base_rate, ps.resilience.value, params.tau_res).rate
    ps.posterior = None
    state.record(ev.time, ev.target, Phase.REALIZED, Phase.DECAYED, ps.strength(ev.time), cause="decay-onset")


def _measure(state: SimulationState, ev: SimulationEvent) -> None:
    spec = state.world.params.branches[ev.branch]
    outcome = trace_from_spec(spec).value_at(ev.step)
    before = Phase.REALIZED if state.branches[ev.branch] else Phase.UNRESOLVED
    realized = state.branches[ev.branch] or outcome is not None
    state.branches[ev.branch] = realized
    after = Phase.REALIZED if realized else Phase.UNRESOLVED
    strength = None if outcome is None else float(outcome)
    state.record(ev.time, f"branch:{ev.branch}", before, after, strength, cause=f"measure:{ev.branch}@{ev.step}")


def apply_event(state: SimulationState, ev: SimulationEvent) -> None:
    """Apply ``ev`` to ``state`` in place."""
    if ev.time < state.clock:
        raise ClockRegression(f"event at {ev.time} precedes clock {state.clock}")
    state.clock = ev.time
    if state.is_stale(ev):
        return
    if ev.kind == "recall":
        _recall(state, ev.target, ev.time, 0, ev.cause or "recall")
    elif ev.kind == "realize":
        _realize(state, ev.target, ev.time, ev.cause, ev.latency)
    elif ev.kind == "decay":
        _decay_onset(state, ev)
    elif ev.kind == "trigger":
        _trigger(state, ev)
    elif ev.kind == "environment":
        state.environment = ev.value
    elif ev.kind == "measure":
        _measure(state, ev)
    else:
        raise ValueError(f"unknown event kind {ev.kind!r}")


def step(state: SimulationState, event: SimulationEvent) -> SimulationState:
    """Pure single-event transition: returns a new state, ``state`` is untouched."""
    new = state.copy()
    apply_event(new, event)
    return new


def next_event(state: SimulationState, horizon: float) -> SimulationEvent | None:
    """Pop the next event due at or before ``horizon``."""
    if state.queue and state.queue[0].time <= horizon:
        return heapq.heappop(state.queue)
    return None


# ---------------------------------------------------------------------------
# Running


@dataclass
class SimulationResult:
    state: SimulationState
    log: list[EventLogRecord]
    metrics: dict
    series: list[tuple[float, str, str, float]]

    def log_csv(self) -> str:
        return log_to_csv(self.log)

    def log_jsonl(self) -> str:
        return log_to_jsonl(self.log)


def _grid(horizon: float, dt: float) -> Iterator[float]:
    n = int(math.floor(horizon / dt + 1e-9))
    for k in range(n + 1):
        yield k * dt


def _sample(state: SimulationState, t: float, out: list) -> None:
    for pid, ps in state.props.items():
        out.append((t, pid, str(ps.phase), ps.strength(t)))


def run(config: ScenarioConfig | World) -> SimulationResult:
    world = config if isinstance(config, World) else World(config)
    cfg = world.config
    state = initial_state(world)
    grid = list(_grid(cfg.horizon, cfg.dt))
    gi = 0
    series: list[tuple[float, str, str, float]] = []
    while (ev := next_event(state, cfg.horizon)) is not None:
        while gi < len(grid) and grid[gi] < ev.time:
            _sample(state, grid[gi], series)
            gi += 1
        apply_event(state, ev)
    for t in grid[gi:]:
        _sample(state, t, series)
    return SimulationResult(state, state.log, metrics_bundle(state), series)


def metrics_bundle(state: SimulationState) -> dict:
    world = state.world
    cfg = world.config
    t_end = cfg.horizon
    final = {}
    for pid, ps in state.props.items():
        adj = decay.adjusted_decay_rate(ps.base_rate, ps.resilience.value, cfg.params.tau_res)
        final[pid] = {
            "phase": str(ps.phase),
            "strength": jnum(ps.strength(t_end)),
            "recalls": ps.recalls,
            "realizations": ps.realizations,
            "resilience": jnum(ps.resilience.value),
            "adjusted_decay_rate": jnum(adj.rate),
            "decay_negligible": adj.negligible,
        }
    bundle = {
        "horizon": jnum(cfg.horizon),
        "seed": cfg.seed,
        "events_logged": len(state.log),
        "final": final,
        "pending": [
            {"time": jnum(ev.time), "kind": ev.kind, "target": ev.target, "latency": jnum(ev.latency)}
            for ev in state.pending()
        ],
        "branches": dict(state.branches),
        "environment": jnum(state.environment),
    }
    if "bayesian" in cfg.params.modifiers:
        bundle["priors"] = {p: jnum(state.beliefs.prior(p)) for p in world.ids}
    if cfg.params.chains:
        bundle["chains"] = [
            {"chain_id": r.chain_id, "H_bits": jnum(r.entropy), "efficiency": jnum(r.efficiency),
             "mean_T_R": jnum(r.mean_latency)}
            for r in world.chain_rows()
        ]
    return bundle


def log_to_csv(records: Iterable[EventLogRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_FIELDS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def log_to_jsonl(records: Iterable[EventLogRecord]) -> str:
    return "".join(json.dumps(r.to_json(), sort_keys=False) + "\n" for r in records)


def series_to_csv(series: Iterable[tuple[float, str, str, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("time", "prop", "phase", "strength"))
    for t, pid, phase, s in series:
        writer.writerow((fmt(t), pid, phase, fmt(s)))
    return buf.getvalue()


def replay_phases(records: Iterable[EventLogRecord]) -> dict[str, str]:
    """Final phase of every logged subject, reconstructed from the log alone."""
    phases: dict[str, str] = {}
    for r in records:
        phases[r.prop] = r.phase_after
    return phases
