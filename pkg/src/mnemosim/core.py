"""Domain vocabulary: propositions, memory states and scenario configuration.

A scenario is a JSON document with exactly these top-level keys::

    propositions  list of {"id", "decay_constant", "base_latency", "initial_amplitude"?}
    contexts      list of {"id", "members": [...], "within": [...]}
    relations     list of {"a", "b", "value", "universal"?}
    params        thresholds, coefficients and sub-blocks (see ``Params``)
    events        list of {"time", "kind", ...}
    horizon       end time (>= 0)
    dt            trace / series step (> 0)
    seed          unsigned 64-bit integer

Parsing (``parse_scenario``) only checks shape and types and raises
``ScenarioFormatError`` naming the offending field. Semantic checks live in
``validate_scenario``, which never raises and returns a list of violations.
"""

from __future__ import annotations

import enum
import graphlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from mnemosim.errors import ScenarioFormatError, UnknownProposition, ValidationFailed

MODIFIERS = ("relation", "feedback", "bayesian", "simultaneous")
EVENT_KINDS = ("recall", "trigger", "environment", "measure")
LATENCY_LAWS = ("inverse", "inverse_square")
PROPAGATION_MODES = ("literal", "per_edge")
INITIAL_PHASES = ("decayed", "unresolved")
SEED_LIMIT = 2**64
EPS_CROSS_MAX = 0.1


class Phase(str, enum.Enum):
    REALIZED = "Realized"
    DECAYED = "Decayed"
    UNRESOLVED = "Unresolved"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Proposition:
    id: str
    decay_constant: float
    base_latency: float
    initial_amplitude: float = 1.0


@dataclass(frozen=True)
class MemoryState:
    """Phase of one proposition plus the times that delimit it.

    ``t_f`` may be ``None`` for an open realization window.
    """

    phase: Phase
    t_r: float | None = None
    t_f: float | None = None
    last_reset: float | None = None

    def realized_at(self, t: float) -> bool:
        if self.phase is not Phase.REALIZED or self.t_r is None:
            return False
        return self.t_r <= t and (self.t_f is None or t < self.t_f)


@dataclass(frozen=True)
class ContextSpec:
    id: str
    members: tuple[str, ...]
    within: tuple[str, ...] = ()


@dataclass(frozen=True)
class RelationEntry:
    a: str
    b: str
    value: float
    universal: float | None = None


@dataclass(frozen=True)
class EnvironmentStep:
    time: float
    value: float


@dataclass(frozen=True)
class EventSpec:
    time: float
    kind: str
    target: str | None = None
    context: str | None = None
    value: float | None = None
    branch: str | None = None
    step: int | None = None


@dataclass(frozen=True)
class LikelihoodEntry:
    """P(of | given)."""

    of: str
    given: str
    value: float


@dataclass(frozen=True)
class BayesSpec:
    priors: Mapping[str, float] = field(default_factory=dict)
    likelihoods: tuple[LikelihoodEntry, ...] = ()


@dataclass(frozen=True)
class BranchSpec:
    prefix: tuple[bool | None, ...]
    period: tuple[bool | None, ...] | None = None
    dt: float = 1.0


@dataclass(frozen=True)
class EngineOptions:
    stochastic: bool = False
    realization_window: float = 1.0
    cascade_depth: int = 32
    propagation: bool = True
    scheduling: bool = True
    path_cap: int = 1_000_000
    initial_phase: str = "decayed"


@dataclass(frozen=True)
class Params:
    tau: float = 0.5
    tau_e: float = 0.8
    tau_c: float = 0.5
    eps_h: float = 10.0
    alpha_fb: float = 0.5
    alpha_res: float = 1.0
    beta: float = 1.0
    lambda_path: float = 0.0
    eps_cross: float = 0.01
    tau_res: float = 100.0
    environment: float | tuple[EnvironmentStep, ...] = 1.0
    modifiers: tuple[str, ...] = ("relation",)
    latency_law: str = "inverse"
    propagation_mode: str = "literal"
    entropy_sign: int = -1
    fixed_point: bool = False
    chains: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    bayes: BayesSpec = field(default_factory=BayesSpec)
    branches: Mapping[str, BranchSpec] = field(default_factory=dict)
    engine: EngineOptions = field(default_factory=EngineOptions)

    @property
    def initial_environment(self) -> float:
        if isinstance(self.environment, tuple):
            return self.environment[0].value if self.environment else 1.0
        return self.environment


@dataclass(frozen=True)
class ScenarioConfig:
    propositions: tuple[Proposition, ...]
    contexts: tuple[ContextSpec, ...] = ()
    relations: tuple[RelationEntry, ...] = ()
    params: Params = field(default_factory=Params)
    events: tuple[EventSpec, ...] = ()
    horizon: float = 10.0
    dt: float = 1.0
    seed: int = 0

    def with_overrides(
        self, seed: int | None = None, horizon: float | None = None, dt: float | None = None
    ) -> ScenarioConfig:
        from dataclasses import replace

        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if horizon is not None:
            changes["horizon"] = horizon
        if dt is not None:
            changes["dt"] = dt
        return replace(self, **changes)


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


class Registry:
    """Id-indexed proposition lookup."""

    def __init__(self, propositions: Iterable[Proposition]):
        self._props: dict[str, Proposition] = {}
        for i, p in enumerate(propositions):
            if p.id in self._props:
                raise ValidationFailed([Violation(f"propositions[{i}].id", f"duplicate id {p.id!r}")])
            self._props[p.id] = p

    def lookup(self, prop_id: str) -> Proposition:
        try:
            return self._props[prop_id]
        except KeyError:
            raise UnknownProposition(prop_id) from None

    __getitem__ = lookup

    def __contains__(self, prop_id: object) -> bool:
        return prop_id in self._props

    def __iter__(self):
        return iter(self._props.values())

    def __len__(self) -> int:
        return len(self._props)

    def ids(self) -> list[str]:
        return list(self._props)


def registry_lookup(registry: Registry, prop_id: str) -> Proposition:
    return registry.lookup(prop_id)


# ---------------------------------------------------------------------------
# Parsing


def _expect_obj(data: Any, path: str, allowed: Iterable[str], required: Iterable[str] = ()) -> dict:
    if not isinstance(data, dict):
        raise ScenarioFormatError(path, "expected an object")
    allowed = set(allowed)
    for key in data:
        if key not in allowed:
            raise ScenarioFormatError(f"{path}.{key}" if path else key, "unknown key")
    for key in required:
        if key not in data:
            raise ScenarioFormatError(f"{path}.{key}" if path else key, "missing required key")
    return data


def _num(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(path, "expected a number")
    return float(value)


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioFormatError(path, "expected an integer")
    return value


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ScenarioFormatError(path, "expected true or false")
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ScenarioFormatError(path, "expected a string")
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ScenarioFormatError(path, "expected an array")
    return value


def _str_list(value: Any, path: str) -> tuple[str, ...]:
    return tuple(_str(v, f"{path}[{i}]") for i, v in enumerate(_list(value, path)))


def parse_truth(value: Any, path: str) -> bool | None:
    """Trace cells are true, false, or the string "bot" (also null) for bottom."""
    if value is None or value == "bot":
        return None
    if isinstance(value, bool):
        return value
    raise ScenarioFormatError(path, 'expected true, false or "bot"')


def _truth_list(value: Any, path: str) -> tuple[bool | None, ...]:
    return tuple(parse_truth(v, f"{path}[{i}]") for i, v in enumerate(_list(value, path)))


def parse_branch(data: Any, path: str) -> BranchSpec:
    d = _expect_obj(data, path, ("prefix", "period", "dt"), ("prefix",))
    period = d.get("period")
    return BranchSpec(
        prefix=_truth_list(d["prefix"], f"{path}.prefix"),
        period=None if period is None else _truth_list(period, f"{path}.period"),
        dt=_num(d.get("dt", 1.0), f"{path}.dt"),
    )


def _parse_proposition(data: Any, path: str) -> Proposition:
    d = _expect_obj(
        data,
        path,
        ("id", "decay_constant", "base_latency", "initial_amplitude"),
        ("id", "decay_constant", "base_latency"),
    )
    return Proposition(
        id=_str(d["id"], f"{path}.id"),
        decay_constant=_num(d["decay_constant"], f"{path}.decay_constant"),
        base_latency=_num(d["base_latency"], f"{path}.base_latency"),
        initial_amplitude=_num(d.get("initial_amplitude", 1.0), f"{path}.initial_amplitude"),
    )


def _parse_context(data: Any, path: str) -> ContextSpec:
    d = _expect_obj(data, path, ("id", "members", "within"), ("id", "members"))
    return ContextSpec(
        id=_str(d["id"], f"{path}.id"),
        members=_str_list(d["members"], f"{path}.members"),
        within=_str_list(d.get("within", []), f"{path}.within"),
    )


def _parse_relation(data: Any, path: str) -> RelationEntry:
    d = _expect_obj(data, path, ("a", "b", "value", "universal"), ("a", "b", "value"))
    universal = d.get("universal")
    return RelationEntry(
        a=_str(d["a"], f"{path}.a"),
        b=_str(d["b"], f"{path}.b"),
        value=_num(d["value"], f"{path}.value"),
        universal=None if universal is None else _num(universal, f"{path}.universal"),
    )


def _parse_event(data: Any, path: str) -> EventSpec:
    d = _expect_obj(
        data, path, ("time", "kind", "target", "context", "value", "branch", "step"), ("time", "kind")
    )
    kind = _str(d["kind"], f"{path}.kind")
    if kind not in EVENT_KINDS:
        raise ScenarioFormatError(f"{path}.kind", f"unknown event kind {kind!r}")
    opt_str = {k: _str(d[k], f"{path}.{k}") if k in d else None for k in ("target", "context", "branch")}
    return EventSpec(
        time=_num(d["time"], f"{path}.time"),
        kind=kind,
        value=_num(d["value"], f"{path}.value") if "value" in d else None,
        step=_int(d["step"], f"{path}.step") if "step" in d else None,
        **opt_str,
    )


def _parse_environment(value: Any, path: str) -> float | tuple[EnvironmentStep, ...]:
    if isinstance(value, list):
        steps = []
        for i, item in enumerate(value):
            d = _expect_obj(item, f"{path}[{i}]", ("time", "value"), ("time", "value"))
            steps.append(
                EnvironmentStep(_num(d["time"], f"{path}[{i}].time"), _num(d["value"], f"{path}[{i}].value"))
            )
        return tuple(steps)
    return _num(value, path)


def _parse_bayes(data: Any, path: str) -> BayesSpec:
    d = _expect_obj(data, path, ("priors", "likelihoods"))
    priors_raw = d.get("priors", {})
    if not isinstance(priors_raw, dict):
        raise ScenarioFormatError(f"{path}.priors", "expected an object of proposition id -> prior")
    priors = {k: _num(v, f"{path}.priors.{k}") for k, v in priors_raw.items()}
    likelihoods = []
    for i, item in enumerate(_list(d.get("likelihoods", []), f"{path}.likelihoods")):
        p = f"{path}.likelihoods[{i}]"
        e = _expect_obj(item, p, ("of", "given", "value"), ("of", "given", "value"))
        likelihoods.append(LikelihoodEntry(_str(e["of"], f"{p}.of"), _str(e["given"], f"{p}.given"),
                                           _num(e["value"], f"{p}.value")))
    return BayesSpec(priors=priors, likelihoods=tuple(likelihoods))


_ENGINE_TYPES = {
    "stochastic": _bool,
    "realization_window": _num,
    "cascade_depth": _int,
    "propagation": _bool,
    "scheduling": _bool,
    "path_cap": _int,
    "initial_phase": _str,
}

_PARAM_NUMBERS = (
    "tau", "tau_e", "tau_c", "eps_h", "alpha_fb", "alpha_res", "beta",
    "lambda_path", "eps_cross", "tau_res",
)


def _parse_params(data: Any, path: str = "params") -> Params:
    allowed = _PARAM_NUMBERS + (
        "environment", "modifiers", "latency_law", "propagation_mode", "entropy_sign",
        "fixed_point", "chains", "bayes", "branches", "engine",
    )
    d = _expect_obj(data, path, allowed)
    kw: dict[str, Any] = {k: _num(d[k], f"{path}.{k}") for k in _PARAM_NUMBERS if k in d}
    if "environment" in d:
        kw["environment"] = _parse_environment(d["environment"], f"{path}.environment")
    if "modifiers" in d:
        kw["modifiers"] = _str_list(d["modifiers"], f"{path}.modifiers")
    for key in ("latency_law", "propagation_mode"):
        if key in d:
            kw[key] = _str(d[key], f"{path}.{key}")
    if "entropy_sign" in d:
        kw["entropy_sign"] = _int(d["entropy_sign"], f"{path}.entropy_sign")
    if "fixed_point" in d:
        kw["fixed_point"] = _bool(d["fixed_point"], f"{path}.fixed_point")
    if "chains" in d:
        chains = d["chains"]
        if not isinstance(chains, dict):
            raise ScenarioFormatError(f"{path}.chains", "expected an object of chain id -> members")
        kw["chains"] = {k: _str_list(v, f"{path}.chains.{k}") for k, v in chains.items()}
    if "bayes" in d:
        kw["bayes"] = _parse_bayes(d["bayes"], f"{path}.bayes")
    if "branches" in d:
        branches = d["branches"]
        if not isinstance(branches, dict):
            raise ScenarioFormatError(f"{path}.branches", "expected an object of branch id -> trace")
        kw["branches"] = {k: parse_branch(v, f"{path}.branches.{k}") for k, v in branches.items()}
    if "engine" in d:
        e = _expect_obj(d["engine"], f"{path}.engine", _ENGINE_TYPES)
        kw["engine"] = EngineOptions(**{k: _ENGINE_TYPES[k](v, f"{path}.engine.{k}") for k, v in e.items()})
    return Params(**kw)


TOP_LEVEL_KEYS = ("propositions", "contexts", "relations", "params", "events", "horizon", "dt", "seed")


def parse_scenario(data: Any) -> ScenarioConfig:
    """Build a ``ScenarioConfig`` from decoded JSON, checking shape only."""
    d = _expect_obj(data, "", TOP_LEVEL_KEYS, ("propositions",))
    return ScenarioConfig(
        propositions=tuple(
            _parse_proposition(p, f"propositions[{i}]") for i, p in enumerate(_list(d["propositions"], "propositions"))
        ),
        contexts=tuple(
            _parse_context(c, f"contexts[{i}]") for i, c in enumerate(_list(d.get("contexts", []), "contexts"))
        ),
        relations=tuple(
            _parse_relation(r, f"relations[{i}]") for i, r in enumerate(_list(d.get("relations", []), "relations"))
        ),
        params=_parse_params(d.get("params", {})),
        events=tuple(_parse_event(e, f"events[{i}]") for i, e in enumerate(_list(d.get("events", []), "events"))),
        horizon=_num(d.get("horizon", 10.0), "horizon"),
        dt=_num(d.get("dt", 1.0), "dt"),
        seed=_int(d.get("seed", 0), "seed"),
    )


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError("<document>", f"invalid JSON: {exc}") from None
    return parse_scenario(data)


def load_scenario(path: str | Path) -> ScenarioConfig:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Serialization


def _truth_out(values):
    return None if values is None else ["bot" if v is None else v for v in values]


def branch_to_dict(b: BranchSpec) -> dict:
    out: dict[str, Any] = {"prefix": _truth_out(b.prefix), "dt": b.dt}
    if b.period is not None:
        out["period"] = _truth_out(b.period)
    return out


def scenario_to_dict(config: ScenarioConfig) -> dict:
    p = config.params
    env: Any = p.environment
    if isinstance(env, tuple):
        env = [{"time": s.time, "value": s.value} for s in env]
    params: dict[str, Any] = {k: getattr(p, k) for k in _PARAM_NUMBERS}
    params.update(
        environment=env,
        modifiers=list(p.modifiers),
        latency_law=p.latency_law,
        propagation_mode=p.propagation_mode,
        entropy_sign=p.entropy_sign,
        fixed_point=p.fixed_point,
        chains={k: list(v) for k, v in p.chains.items()},
        bayes={
            "priors": dict(p.bayes.priors),
            "likelihoods": [{"of": e.of, "given": e.given, "value": e.value} for e in p.bayes.likelihoods],
        },
        branches={k: branch_to_dict(v) for k, v in p.branches.items()},
        engine={k: getattr(p.engine, k) for k in _ENGINE_TYPES},
    )
    events = []
    for e in config.events:
        ev: dict[str, Any] = {"time": e.time, "kind": e.kind}
        for key in ("target", "context", "value", "branch", "step"):
            if getattr(e, key) is not None:
                ev[key] = getattr(e, key)
        events.append(ev)
    relations = []
    for r in config.relations:
        rel: dict[str, Any] = {"a": r.a, "b": r.b, "value": r.value}
        if r.universal is not None:
            rel["universal"] = r.universal
        relations.append(rel)
    return {
        "propositions": [
            {
                "id": q.id,
                "decay_constant": q.decay_constant,
                "base_latency": q.base_latency,
                "initial_amplitude": q.initial_amplitude,
            }
            for q in config.propositions
        ],
        "contexts": [{"id": c.id, "members": list(c.members), "within": list(c.within)} for c in config.contexts],
        "relations": relations,
        "params": params,
        "events": events,
        "horizon": config.horizon,
        "dt": config.dt,
        "seed": config.seed,
    }


def dumps_scenario(config: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(config), indent=2, sort_keys=False)


# ---------------------------------------------------------------------------
# Validation


def _in_unit(x: float) -> bool:
    return 0.0 <= x <= 1.0


def validate_scenario(config: ScenarioConfig) -> list[Violation]:
    """Return every invariant violation in ``config``; an empty list means valid."""
    out: list[Violation] = []

    def bad(path: str, msg: str) -> None:
        out.append(Violation(path, msg))

    prop_ids: set[str] = set()
    if not config.propositions:
        bad("propositions", "at least one proposition is required")
    for i, p in enumerate(config.propositions):
        path = f"propositions[{i}]"
        if p.id in prop_ids:
            bad(f"{path}.id", f"duplicate id {p.id!r}")
        prop_ids.add(p.id)
        if not p.id:
            bad(f"{path}.id", "id must be non-empty")
        if not (p.decay_constant >= 0 and math.isfinite(p.decay_constant)):
            bad(f"{path}.decay_constant", "decay constant must be >= 0")
        if not (p.base_latency > 0 and math.isfinite(p.base_latency)):
            bad(f"{path}.base_latency", "base latency must be positive")
        if not (0 < p.initial_amplitude <= 1):
            bad(f"{path}.initial_amplitude", "amplitude must lie in (0,1]")

    contexts: dict[str, ContextSpec] = {}
    for i, c in enumerate(config.contexts):
        path = f"contexts[{i}]"
        if c.id in contexts:
            bad(f"{path}.id", f"duplicate context id {c.id!r}")
        contexts[c.id] = c
        for j, m in enumerate(c.members):
            if m not in prop_ids:
                bad(f"{path}.members[{j}]", f"unknown proposition {m!r}")
    graph: dict[str, set[str]] = {cid: set() for cid in contexts}
    for i, c in enumerate(config.contexts):
        for j, parent in enumerate(c.within):
            path = f"contexts[{i}].within[{j}]"
            if parent not in contexts:
                bad(path, f"unknown context {parent!r}")
                continue
            if parent == c.id:
                bad(path, "context cannot contain itself")
                continue
            graph[parent].add(c.id)
            missing = set(c.members) - set(contexts[parent].members)
            if missing:
                bad(path, f"members {sorted(missing)} of {c.id!r} are not in containing context {parent!r}")
    try:
        tuple(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:
        bad("contexts", f"containment is cyclic: {exc.args[1]}")

    seen_pairs: set[frozenset] = set()
    for i, r in enumerate(config.relations):
        path = f"relations[{i}]"
        for key in ("a", "b"):
            if getattr(r, key) not in prop_ids:
                bad(f"{path}.{key}", f"unknown proposition {getattr(r, key)!r}")
        if r.a == r.b:
            bad(path, "self-relation is fixed at 1 and cannot be declared")
        pair = frozenset((r.a, r.b))
        if pair in seen_pairs:
            bad(path, f"duplicate relation for pair {sorted(pair)}")
        seen_pairs.add(pair)
        if not _in_unit(r.value):
            bad(f"{path}.value", "relation out of [0,1]")
        if r.universal is not None and not _in_unit(r.universal):
            bad(f"{path}.universal", "universal relation out of [0,1]")

    _validate_params(config.params, prop_ids, contexts, bad)

    for i, e in enumerate(config.events):
        path = f"events[{i}]"
        if not (e.time >= 0 and math.isfinite(e.time)):
            bad(f"{path}.time", "event time must be finite and >= 0")
        if e.kind in ("recall", "trigger"):
            if e.target is None:
                bad(f"{path}.target", f"{e.kind} event requires a target")
            elif e.target not in prop_ids:
                bad(f"{path}.target", f"unknown proposition {e.target!r}")
        if e.kind == "trigger":
            if e.context is None:
                bad(f"{path}.context", "trigger event requires a context")
            elif e.context not in contexts:
                bad(f"{path}.context", f"unknown context {e.context!r}")
        if e.kind == "environment" and not (e.value is not None and e.value > 0):
            bad(f"{path}.value", "environment must be positive")
        if e.kind == "measure":
            if e.branch is None or e.branch not in config.params.branches:
                bad(f"{path}.branch", f"unknown branch {e.branch!r}")
            if e.step is None or e.step < 0:
                bad(f"{path}.step", "measure event requires a step >= 0")

    if not (config.horizon >= 0 and math.isfinite(config.horizon)):
        bad("horizon", "horizon must be finite and >= 0")
    if not (config.dt > 0 and math.isfinite(config.dt)):
        bad("dt", "dt must be positive")
    if not (0 <= config.seed < SEED_LIMIT):
        bad("seed", "seed must be an unsigned 64-bit integer")
    return out


def _validate_params(p: Params, prop_ids: set[str], contexts: Mapping[str, ContextSpec], bad) -> None:
    for key in ("tau", "tau_e", "tau_c"):
        if not _in_unit(getattr(p, key)):
            bad(f"params.{key}", "threshold out of [0,1]")
    if not p.eps_h >= 0:
        bad("params.eps_h", "latency bound must be >= 0")
    for key in ("alpha_fb", "alpha_res", "beta", "lambda_path", "eps_cross", "tau_res"):
        if not getattr(p, key) >= 0:
            bad(f"params.{key}", "coefficient must be >= 0")
    if p.eps_cross > EPS_CROSS_MAX:
        bad("params.eps_cross", f"cross-chain factor must be <= {EPS_CROSS_MAX}")
    if isinstance(p.environment, tuple):
        if not p.environment:
            bad("params.environment", "schedule must not be empty")
        for i, s in enumerate(p.environment):
            if not s.value > 0:
                bad(f"params.environment[{i}].value", "environment must be positive")
            if not s.time >= 0:
                bad(f"params.environment[{i}].time", "schedule time must be >= 0")
    elif not p.environment > 0:
        bad("params.environment", "environment must be positive")
    for i, m in enumerate(p.modifiers):
        if m not in MODIFIERS:
            bad(f"params.modifiers[{i}]", f"unknown modifier {m!r}")
    if len(set(p.modifiers)) != len(p.modifiers):
        bad("params.modifiers", "modifiers must not repeat")
    if p.latency_law not in LATENCY_LAWS:
        bad("params.latency_law", f"unknown latency law {p.latency_law!r}")
    if p.propagation_mode not in PROPAGATION_MODES:
        bad("params.propagation_mode", f"unknown propagation mode {p.propagation_mode!r}")
    if p.entropy_sign not in (-1, 1):
        bad("params.entropy_sign", "entropy sign must be -1 or 1")

    owner: dict[str, str] = {}
    for cid, members in p.chains.items():
        if not members:
            bad(f"params.chains.{cid}", "chain must not be empty")
        for m in members:
            if m not in prop_ids:
                bad(f"params.chains.{cid}", f"unknown proposition {m!r}")
            elif m in owner:
                bad(f"params.chains.{cid}", f"{m!r} already belongs to chain {owner[m]!r}")
            else:
                owner[m] = cid

    for k, v in p.bayes.priors.items():
        if k not in prop_ids:
            bad(f"params.bayes.priors.{k}", "unknown proposition")
        if not _in_unit(v):
            bad(f"params.bayes.priors.{k}", "prior out of [0,1]")
    for i, e in enumerate(p.bayes.likelihoods):
        path = f"params.bayes.likelihoods[{i}]"
        for key in ("of", "given"):
            if getattr(e, key) not in prop_ids:
                bad(f"{path}.{key}", f"unknown proposition {getattr(e, key)!r}")
        if not _in_unit(e.value):
            bad(f"{path}.value", "likelihood out of [0,1]")

    for bid, b in p.branches.items():
        if not b.prefix and not b.period:
            bad(f"params.branches.{bid}", "branch trace must not be empty")
        if b.period is not None and not b.period:
            bad(f"params.branches.{bid}.period", "period must be non-empty when present")
        if not b.dt > 0:
            bad(f"params.branches.{bid}.dt", "dt must be positive")
    dts = {b.dt for b in p.branches.values()}
    if len(dts) > 1:
        bad("params.branches", "all branches must share dt")

    e = p.engine
    if not e.realization_window > 0:
        bad("params.engine.realization_window", "realization window must be positive")
    if e.cascade_depth < 0:
        bad("params.engine.cascade_depth", "cascade depth must be >= 0")
    if e.path_cap < 1:
        bad("params.engine.path_cap", "path cap must be >= 1")
    if e.initial_phase not in INITIAL_PHASES:
        bad("params.engine.initial_phase", f"unknown initial phase {e.initial_phase!r}")


def require_valid(config: ScenarioConfig) -> ScenarioConfig:
    violations = validate_scenario(config)
    if violations:
        raise ValidationFailed(violations)
    return config
