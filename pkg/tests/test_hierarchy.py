from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import random_dag
from mnemosim.errors import NotContained, PathExplosion, UnknownContext
from mnemosim.hierarchy import (
    ContextHierarchy,
    RelationMatrix,
    contextual_relation,
    count_paths,
    entangled,
    entanglement_closure,
    is_memory_chain,
    propagates,
    raw_propagation_sum,
    recall_propagation_probability,
)
from oracles import dag_paths, literal_propagation


@pytest.fixture
def chain3():
    h = ContextHierarchy({"C1": {"P1", "P2"}, "C2": {"P1", "P2", "P3"}, "C3": {"P1", "P2", "P3"}},
                         [("C1", "C2"), ("C2", "C3")])
    return h


def test_contextual_relation(chain3):
    m = RelationMatrix.of({("P1", "P2"): 0.7, ("P1", "P3"): 0.4})
    assert contextual_relation(m, chain3, "P1", "P2", "C1") == 0.7
    assert contextual_relation(m, chain3, "P1", "P3", "C1") == 0
    with pytest.raises(UnknownContext):
        contextual_relation(m, chain3, "P1", "P2", "CX")


def test_relation_matrix_is_symmetric():
    m = RelationMatrix.of({("A", "B"): 0.3})
    assert m.get("B", "A") == 0.3 and m.get("A", "C") == 0.0 and m.get("A", "A") == 1.0


def test_is_memory_chain():
    m = RelationMatrix.of({("P1", "P2"): 0.3, ("P2", "P3"): 0.2})
    assert is_memory_chain(m, {"P1", "P2"})
    assert not is_memory_chain(m, {"P1", "P2", "P3"})
    assert is_memory_chain(m, {"P1"})


def test_entangled_strict(chain3):
    assert entangled(RelationMatrix.of({("P1", "P2"): 0.9}), chain3, "P1", "P2", "C1", 0.8)
    assert not entangled(RelationMatrix.of({("P1", "P2"): 0.8}), chain3, "P1", "P2", "C1", 0.8)
    assert not entangled(RelationMatrix.of({("P1", "P3"): 0.9}), chain3, "P1", "P3", "C1", 0.8)


def test_closure_chain(chain3):
    marks = entanglement_closure(chain3, RelationMatrix.of({("P1", "P2"): 0.9}), 0.8)
    assert marks == {(frozenset({"P1", "P2"}), c) for c in ("C1", "C2", "C3")}
    assert entanglement_closure(chain3, RelationMatrix.of({("P1", "P2"): 0.5}), 0.8) == set()


def test_closure_diamond():
    h = ContextHierarchy(
        {"B": {"P1", "P2"}, "L": {"P1", "P2"}, "R": {"P1", "P2"}, "T": {"P1", "P2"}},
        [("B", "L"), ("B", "R"), ("L", "T"), ("R", "T")],
    )
    marks = entanglement_closure(h, RelationMatrix.of({("P1", "P2"): 0.95}), 0.8)
    assert {c for _, c in marks} == {"B", "L", "R", "T"}


def test_propagation_examples():
    single = ContextHierarchy({"A": {"P1", "P2"}, "B": {"P1", "P2"}}, [("A", "B")])
    m = RelationMatrix.of({("P1", "P2"): 0.6})
    assert recall_propagation_probability(single, m, "P1", "P2", "A", "B") == pytest.approx(0.6, abs=1e-15)

    diamond = ContextHierarchy(
        {c: {"P1", "P2"} for c in "BLRT"}, [("B", "L"), ("B", "R"), ("L", "T"), ("R", "T")]
    )
    m = RelationMatrix.of({("P1", "P2"): Fraction(1, 2)})
    assert raw_propagation_sum(diamond, m, "P1", "P2", "B", "T") == Fraction(1, 2)
    assert recall_propagation_probability(diamond, RelationMatrix.of({("P1", "P2"): 0}), "P1", "P2", "B", "T") == 0


def test_propagation_clamps_above_one():
    # five parallel length-2 routes push the raw sum above 1
    mids = [f"M{i}" for i in range(5)]
    contexts = {c: {"P1", "P2"} for c in ["S", "T", *mids]}
    h = ContextHierarchy(contexts, [("S", m) for m in mids] + [(m, "T") for m in mids])
    m = RelationMatrix.of({("P1", "P2"): Fraction(9, 10)})
    assert raw_propagation_sum(h, m, "P1", "P2", "S", "T") == 5 * Fraction(81, 100)
    assert recall_propagation_probability(h, m, "P1", "P2", "S", "T") == 1.0


def test_same_context_propagation_is_direct_relation():
    h = ContextHierarchy({"A": {"P1", "P2"}})
    assert recall_propagation_probability(h, RelationMatrix.of({("P1", "P2"): 0.4}), "P1", "P2", "A", "A") == 0.4


def test_per_edge_mode():
    h = ContextHierarchy({"A": {"P1", "P2"}, "B": {"P1", "P2", "P3"}, "C": {"P1", "P2", "P3"}},
                         [("A", "B"), ("B", "C")])
    m = RelationMatrix.of({("P1", "P2"): Fraction(1, 2)})
    assert raw_propagation_sum(h, m, "P1", "P2", "A", "C", mode="per_edge") == Fraction(1, 4)
    with pytest.raises(ValueError):
        raw_propagation_sum(h, m, "P1", "P2", "A", "C", mode="nope")


def test_path_explosion():
    # a ladder of k diamonds has 2**k paths
    k = 12
    contexts, edges = {}, []
    for i in range(k + 1):
        contexts[f"J{i}"] = {"P1", "P2"}
    for i in range(k):
        for side in "ab":
            mid = f"{side}{i}"
            contexts[mid] = {"P1", "P2"}
            edges += [(f"J{i}", mid), (mid, f"J{i + 1}")]
    h = ContextHierarchy(contexts, edges)
    assert count_paths(h, "J0", f"J{k}") == 2**k
    m = RelationMatrix.of({("P1", "P2"): 0.5})
    with pytest.raises(PathExplosion):
        recall_propagation_probability(h, m, "P1", "P2", "J0", f"J{k}", path_cap=1000)


def test_propagates_examples(chain3):
    assert propagates(chain3, RelationMatrix.of({("P1", "P2"): 0.5}), "P1", "P2", "C1", "C3", 0.3)
    assert not propagates(chain3, RelationMatrix.of({("P1", "P2"): 0.3}), "P1", "P2", "C1", "C3", 0.3)
    with pytest.raises(NotContained):
        propagates(chain3, RelationMatrix.of({("P1", "P2"): 0.5}), "P1", "P2", "C3", "C1", 0.3)


def test_subset_violations_and_topology():
    h = ContextHierarchy({"A": {"P1", "P2"}, "B": {"P1"}}, [("A", "B")])
    assert h.subset_violations() == [("A", "B")]
    assert h.topological_order() == ["A", "B"]
    with pytest.raises(UnknownContext):
        ContextHierarchy({"A": set()}, [("A", "Z")])
    with pytest.raises(ValueError):
        ContextHierarchy({"A": set(), "B": set()}, [("A", "B"), ("B", "A")]).topological_order()


@given(st.integers(0, 10_000))
def test_positivity_and_clamp(seed):
    rng = random.Random(seed)
    names, within, members = random_dag(rng, rng.randint(2, 7))
    h = ContextHierarchy(members, [(c, p) for c in names for p in within[c]])
    r = rng.choice([0.0, 0.05, 0.3, 0.9, 1.0])
    m = RelationMatrix.of({("P1", "P2"): r})
    src, dst = sorted(rng.sample(names, 2))
    prob = recall_propagation_probability(h, m, "P1", "P2", src, dst)
    assert 0.0 <= prob <= 1.0
    has_path = bool(dag_paths(within, src, dst))
    if has_path and contextual_relation(m, h, "P1", "P2", dst) > 0:
        assert prob > 0


def test_count_paths_matches_enumeration():
    rng = random.Random(5)
    for _ in range(50):
        names, within, members = random_dag(rng, 7)
        h = ContextHierarchy(members, [(c, p) for c in names for p in within[c]])
        for s in names:
            for t in names:
                if s != t:
                    assert count_paths(h, s, t) == len(dag_paths(within, s, t))


def test_literal_propagation_oracle_small():
    rng = random.Random(11)
    names, within, members = random_dag(rng, 6)
    h = ContextHierarchy(members, [(c, p) for c in names for p in within[c]])
    r = Fraction(3, 5)
    m = RelationMatrix.of({("P1", "P2"): r})
    for s in names:
        for t in names:
            if s != t:
                got = raw_propagation_sum(h, m, "P1", "P2", s, t)
                assert got == literal_propagation(within, members, r, "P1", "P2", s, t)
