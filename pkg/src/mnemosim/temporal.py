"""Always / eventually / next over discretized traces.

Unbounded time is represented by lasso traces: a finite prefix followed by a
period that repeats forever. Finite traces (no period) use strong-next
semantics: reading past the end yields false. Branching traces carry a
three-valued measurement table per branch where ``None`` stands for bottom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

from mnemosim.core import BranchSpec, parse_branch
from mnemosim.errors import EmptyTrace, NotLasso, ScenarioFormatError, StepOutOfRange, UnknownBranch


@dataclass(frozen=True)
class Trace:
    prefix: tuple[bool | None, ...]
    period: tuple[bool | None, ...] | None = None
    dt: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        if self.period is not None:
            if len(self.period) == 0:
                raise ValueError("lasso period must be non-empty")
            object.__setattr__(self, "period", tuple(self.period))

    @property
    def is_lasso(self) -> bool:
        return self.period is not None

    def __len__(self) -> int:
        """Number of distinct positions: the prefix plus one copy of the period."""
        return len(self.prefix) + (len(self.period) if self.period else 0)

    def value_at(self, k: int) -> bool | None:
        if k < 0:
            raise StepOutOfRange(f"negative step {k}")
        n = len(self.prefix)
        if k < n:
            return self.prefix[k]
        if self.period is None:
            raise StepOutOfRange(f"step {k} beyond finite trace of length {n}")
        return self.period[(k - n) % len(self.period)]

    def reachable(self) -> tuple[bool | None, ...]:
        """Every value the trace ever takes, in order of first occurrence."""
        return self.prefix + (self.period or ())

    def suffix(self, k: int) -> Trace:
        """The trace as seen from step ``k`` onward."""
        n = len(self.prefix)
        if k <= n:
            return Trace(self.prefix[k:], self.period, self.dt)
        if self.period is None:
            return Trace((), None, self.dt)
        shift = (k - n) % len(self.period)
        return Trace((), self.period[shift:] + self.period[:shift], self.dt)


class TraceState(NamedTuple):
    index: int
    value: bool | None


def states(trace: Trace, upto: int | None = None) -> tuple[TraceState, ...]:
    """Step-indexed state records; each step gets its own identity even when values repeat."""
    if upto is None:
        upto = len(trace)
    return tuple(TraceState(k, trace.value_at(k)) for k in range(upto))


def _nonempty(trace: Trace) -> None:
    if len(trace) == 0:
        raise EmptyTrace("trace has no steps")


def always(trace: Trace) -> bool:
    _nonempty(trace)
    return all(v is True for v in trace.reachable())


def eventually(trace: Trace) -> bool:
    _nonempty(trace)
    return any(v is True for v in trace.reachable())


def next_(trace: Trace, k: int = 0) -> bool:
    """Value at step k+1; false beyond the end of a finite trace."""
    if k < 0:
        raise StepOutOfRange(f"negative step {k}")
    if not trace.is_lasso and k + 1 >= len(trace.prefix):
        return False
    return trace.value_at(k + 1) is True


def check_box_implies_diamond(trace: Trace) -> bool:
    return (not always(trace)) or eventually(trace)


def check_next_box_commute(trace: Trace) -> bool:
    """Evaluate next(always x) => always(next x) on a lasso."""
    if not trace.is_lasso:
        raise NotLasso("the next/always theorem is only checked on lasso traces")
    _nonempty(trace)
    next_always = always(trace.suffix(1))
    # every suffix of a lasso is one of the first len(trace) suffixes
    always_next = all(next_(trace.suffix(j), 0) for j in range(len(trace)))
    return (not next_always) or always_next


@dataclass(frozen=True)
class BranchingTrace:
    branches: Mapping[str, Trace]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("branching trace needs at least one branch")
        if len({t.dt for t in self.branches.values()}) > 1:
            raise ValueError("all branches must share dt")

    def branch(self, branch_id: str) -> Trace:
        try:
            return self.branches[branch_id]
        except KeyError:
            raise UnknownBranch(branch_id) from None

    def measure(self, branch_id: str, k: int) -> bool | None:
        return self.branch(branch_id).value_at(k)


def branch_realized(bt: BranchingTrace, branch_id: str) -> bool:
    return any(v is not None for v in bt.branch(branch_id).reachable())


def superposition(bt: BranchingTrace, k: int) -> frozenset[tuple[str, bool | None]]:
    """One tagged element per branch, so coinciding values stay distinct."""
    return frozenset((b, trace.value_at(k)) for b, trace in bt.branches.items())


def iter_traces(length: int) -> Iterator[Trace]:
    """All finite boolean traces of exactly ``length`` steps."""
    for bits in range(2**length):
        yield Trace(tuple(bool(bits >> i & 1) for i in range(length)))


def iter_lassos(max_total: int) -> Iterator[Trace]:
    """All boolean lassos with len(prefix) + len(period) <= max_total."""
    for total in range(1, max_total + 1):
        for plen in range(1, total + 1):
            for t in iter_traces(total):
                yield Trace(t.prefix[: total - plen], t.prefix[total - plen :])


def trace_from_spec(spec: BranchSpec) -> Trace:
    return Trace(spec.prefix, spec.period, spec.dt)


def parse_trace_document(data) -> Trace | BranchingTrace:
    """Decode a trace file: either one trace or ``{"branches": {id: trace}}``."""
    if isinstance(data, dict) and "branches" in data:
        if set(data) != {"branches"} or not isinstance(data["branches"], dict):
            raise ScenarioFormatError("branches", "expected only an object of branch id -> trace")
        return BranchingTrace(
            {b: trace_from_spec(parse_branch(v, f"branches.{b}")) for b, v in data["branches"].items()}
        )
    return trace_from_spec(parse_branch(data, "trace"))
