from __future__ import annotations

import dataclasses
import math

import pytest

from conftest import make_config, scenario_path
from mnemosim.core import Phase, load_scenario
from mnemosim.engine import (
    SimulationEvent,
    TransitionSampler,
    apply_event,
    initial_state,
    next_event,
    replay_phases,
    run,
    step,
)
from mnemosim.errors import ClockRegression, EventHorizonExceeded, ValidationFailed
from mnemosim.world import World


def two_props(relation=1.0, events=(), params=None, **doc):
    params = {"modifiers": ["relation"], **(params or {})}
    return make_config(
        relations=[{"a": "P1", "b": "P2", "value": relation}],
        params=params,
        events=list(events),
        **doc,
    )


def realizations(log, prop):
    return [r for r in log if r.prop == prop and r.phase_after == "Realized" and r.phase_before != "Realized"]


def test_empty_event_list_logs_only_initial_states():
    result = run(two_props())
    assert [(r.prop, r.cause) for r in result.log] == [("P1", "init"), ("P2", "init")]
    assert all(r.time == 0 and r.phase_after == "Decayed" for r in result.log)


def test_recall_schedules_related_realization():
    result = run(two_props(events=[{"time": 3.0, "kind": "recall", "target": "P1"}]))
    (p2,) = realizations(result.log, "P2")
    assert p2.time == 4.0 and p2.latency == 1.0 and p2.cause == "latency:P1"
    (p1,) = realizations(result.log, "P1")
    assert p1.time == 3.0 and p1.strength == 1.0


def test_environment_change_halves_base_latency():
    events = [{"time": 1.0, "kind": "recall", "target": "P1"}]
    slow = run(two_props(events=events, params={"modifiers": []}))
    fast = run(two_props(events=[{"time": 0.5, "kind": "environment", "value": 2.0}] + events,
                         params={"modifiers": []}))
    assert realizations(slow.log, "P2")[0].latency == 2.0
    assert realizations(fast.log, "P2")[0].latency == 1.0


def test_environment_schedule_applies_in_time_order():
    config = two_props(
        events=[{"time": 2.0, "kind": "recall", "target": "P1"}],
        params={"modifiers": [], "environment": [{"time": 0, "value": 1.0}, {"time": 1.0, "value": 4.0}]},
    )
    assert realizations(run(config).log, "P2")[0].latency == 0.5


def test_trigger_with_empty_context_changes_nothing():
    config = two_props(contexts=[{"id": "void", "members": []}, {"id": "both", "members": ["P1", "P2"]}])
    state = initial_state(World(config))
    after = step(state, SimulationEvent(2.0, 99, "trigger", target="P1", context="void"))
    assert after.props == state.props and after.log == state.log
    fired = step(state, SimulationEvent(2.0, 99, "trigger", target="P1", context="both"))
    assert fired.props["P1"].phase is Phase.REALIZED
    assert fired.log[-1].strength == 1.0 and fired.log[-1].cause == "trigger:both"


def test_step_is_pure_and_rejects_past_events():
    state = initial_state(World(two_props()))
    snapshot = state.copy()
    later = step(state, SimulationEvent(5.0, 50, "recall", target="P1"))
    assert state.props == snapshot.props and state.log == snapshot.log and state.clock == 0.0
    assert later.clock == 5.0
    with pytest.raises(ClockRegression):
        step(later, SimulationEvent(1.0, 51, "recall", target="P1"))
    with pytest.raises(EventHorizonExceeded):
        later.push(4.0, "realize", target="P2")


def test_run_is_left_fold_of_step():
    config = load_scenario(scenario_path("demo.json"))
    world = World(config)
    state = initial_state(world)
    while (ev := next_event(state, config.horizon)) is not None:
        state = step(state, ev)
    assert state.log == run(config).log


def test_determinism_demo():
    config = load_scenario(scenario_path("demo.json"))
    assert run(config).log_csv() == run(config).log_csv()


def test_replay_reconstructs_final_phases():
    result = run(load_scenario(scenario_path("demo.json")))
    replayed = replay_phases(result.log)
    for pid, ps in result.state.props.items():
        assert replayed[pid] == str(ps.phase)
    assert replayed["branch:coin"] == "Realized"


def test_causes_never_postdate_records():
    result = run(load_scenario(scenario_path("demo.json")))
    first_realized: dict[str, float] = {}
    for r in result.log:
        if r.phase_after == "Realized":
            first_realized.setdefault(r.prop, r.time)
        for prefix in ("latency:", "reset:"):
            if r.cause.startswith(prefix):
                anchor = r.cause[len(prefix):]
                assert first_realized[anchor] <= r.time
        if r.cause.startswith("propagate:"):
            anchor = r.cause.split(":")[1]
            assert first_realized[anchor] <= r.time
    assert [r.time for r in result.log] == sorted(r.time for r in result.log)


@pytest.mark.parametrize("name", ["demo.json", "narrative.json"])
def test_phase_conservation(name):
    result = run(load_scenario(scenario_path(name)))
    for t, pid, phase, strength in result.series:
        last = [r for r in result.log if r.prop == pid and r.time <= t][-1]
        assert phase == last.phase_after
        if phase == "Realized":
            assert strength == 1.0


def test_measure_events_log_branch_outcomes():
    result = run(load_scenario(scenario_path("demo.json")))
    measures = [r for r in result.log if r.prop.startswith("branch:")]
    assert [(r.time, r.phase_after, r.strength) for r in measures] == [(5.0, "Unresolved", None), (9.0, "Realized", 1.0)]


def test_pending_transitions_beyond_horizon():
    result = run(two_props(events=[{"time": 9.5, "kind": "recall", "target": "P1"}], params={"modifiers": []}))
    kinds = {(p["kind"], p["target"]) for p in result.metrics["pending"]}
    assert ("realize", "P2") in kinds and ("decay", "P1") in kinds


def test_invalid_config_raises():
    with pytest.raises(ValidationFailed):
        run(two_props(params={"tau_e": 1.2}))


def test_propagation_and_scheduling_can_be_disabled():
    contexts = [{"id": "in", "members": ["P1", "P2"], "within": ["out"]}, {"id": "out", "members": ["P1", "P2"]}]
    events = [{"time": 1.0, "kind": "recall", "target": "P1"}]
    both = run(two_props(relation=0.9, contexts=contexts, events=events))
    assert realizations(both.log, "P2")[0].cause == "propagate:P1:in>out"
    no_prop = run(two_props(relation=0.9, contexts=contexts, events=events,
                            params={"engine": {"propagation": False}}))
    assert realizations(no_prop.log, "P2")[0].cause == "latency:P1"
    neither = run(two_props(relation=0.9, contexts=contexts, events=events,
                            params={"engine": {"propagation": False, "scheduling": False}}))
    assert realizations(neither.log, "P2") == []


def test_cascade_depth_bounds_propagation():
    props = [{"id": f"P{i}", "decay_constant": 0.1, "base_latency": 1.0} for i in range(1, 5)]
    contexts = [
        {"id": "c1", "members": ["P1", "P2"], "within": ["c2"]},
        {"id": "c2", "members": ["P1", "P2", "P3"], "within": ["c3"]},
        {"id": "c3", "members": ["P1", "P2", "P3", "P4"]},
    ]
    rel = [{"a": "P1", "b": "P2", "value": 0.9}, {"a": "P2", "b": "P3", "value": 0.9},
           {"a": "P3", "b": "P4", "value": 0.9}]
    base = dict(propositions=props, contexts=contexts, relations=rel,
                events=[{"time": 1.0, "kind": "recall", "target": "P1"}])
    deep = run(make_config(**base, params={"engine": {"scheduling": False}}))
    assert {r.prop for r in deep.log if r.cause.startswith("propagate")} == {"P2", "P3", "P4"}
    shallow = run(make_config(**base, params={"engine": {"scheduling": False, "cascade_depth": 1}}))
    assert {r.prop for r in shallow.log if r.cause.startswith("propagate")} == {"P2"}


def test_resilience_slows_later_decay():
    events = [{"time": t, "kind": "recall", "target": "P1"} for t in (1.0, 2.5, 3.25)]
    result = run(two_props(events=events, params={"engine": {"realization_window": 0.1}}))
    p1 = result.state.props["P1"]
    expected = math.exp(-1.5) + math.exp(-0.75)
    assert p1.resilience.value == pytest.approx(expected, abs=1e-15)
    assert p1.rate == pytest.approx(0.5 / (1 + expected), abs=1e-15)


def test_reset_restarts_related_curve():
    events = [{"time": 4.0, "kind": "recall", "target": "P1"}]
    result = run(two_props(events=events, params={"engine": {"scheduling": False}}))
    reset = [r for r in result.log if r.cause == "reset:P1"]
    assert [(r.prop, r.time, r.strength) for r in reset] == [("P2", 4.0, 1.0)]
    assert result.state.props["P2"].curve_start == 4.0


def test_bayesian_mode_updates_priors_and_scales_curves():
    props = [{"id": p, "decay_constant": 0.5, "base_latency": 2.0} for p in ("P1", "P2", "P3")]
    config = make_config(
        propositions=props,
        relations=[{"a": "P1", "b": "P2", "value": 0.8}, {"a": "P1", "b": "P3", "value": 0.2}],
        params={"modifiers": ["relation", "bayesian"], "engine": {"scheduling": False}},
        events=[{"time": 1.0, "kind": "recall", "target": "P1"}, {"time": 3.0, "kind": "recall", "target": "P1"}],
    )
    result = run(config)
    priors = result.metrics["priors"]
    assert priors["P2"] > priors["P3"]
    # first recall: posterior of P2 given P1 is 0.8 / (0.8 + 0.2) under uniform priors
    first = [r for r in result.log if r.cause == "reset:P1" and r.prop == "P2"][0]
    assert first.strength == pytest.approx(0.8, abs=1e-15)


def test_cross_chain_pairs_are_skipped():
    result = run(load_scenario(scenario_path("narrative.json")))
    assert all(r.prop not in ("Q1", "Q2", "Q3") for r in result.log if r.cause != "init")


def test_stochastic_delays_follow_sampler_stream():
    # recalls far apart: every recall draws once and every draw is realized
    events = [{"time": float(t), "kind": "recall", "target": "P1"} for t in range(0, 3000, 50)]
    config = two_props(
        relation=0.5, events=events, horizon=4000.0, seed=1234,
        params={"engine": {"stochastic": True}},
    )
    result = run(config)
    sampler = TransitionSampler(1234)
    expected = [e["time"] + sampler.delay(2.0) for e in events]
    got = [r.time for r in realizations(result.log, "P2")]
    assert got == expected
    assert all(r.latency == 2.0 for r in realizations(result.log, "P2"))


def test_stochastic_runs_are_reproducible_and_seed_dependent():
    events = [{"time": 1.0, "kind": "recall", "target": "P1"}]
    a = run(two_props(events=events, seed=1, params={"engine": {"stochastic": True}}))
    b = run(two_props(events=events, seed=1, params={"engine": {"stochastic": True}}))
    c = run(two_props(events=events, seed=2, params={"engine": {"stochastic": True}}))
    assert a.log_csv() == b.log_csv() != c.log_csv()


def test_jsonl_and_series_formats():
    result = run(load_scenario(scenario_path("demo.json")))
    lines = result.log_jsonl().splitlines()
    assert len(lines) == len(result.log)
    assert '"cause": "init"' in lines[0]
    times = sorted({t for t, *_ in result.series})
    assert times == [float(k) for k in range(15)]


def test_overrides_keep_validation():
    config = dataclasses.replace(load_scenario(scenario_path("demo.json")), horizon=3.0)
    result = run(config)
    assert max(r.time for r in result.log) <= 3.0
