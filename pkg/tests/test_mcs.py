import random
from dataclasses import replace

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import naive_equilibria, oracle_is_equilibrium
from randsys import random_pmcs
from prefmcs.errors import AlignmentError, CapacityError, UnknownRuleError
from prefmcs.logic import AspRule, Atom, Literal
from prefmcs.mcs import (
    Context,
    Limits,
    McsSystem,
    applicable_rules,
    enumerate_equilibria,
    is_consistent,
    is_equilibrium,
    make_state,
    modify,
    state_key,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
slow = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def test_applicable_rules_m0(systems):
    M = systems["m0"].base
    S = make_state([{"a", "b", "c"}, {"d", "e", "p"}, {"f", "g", "q"}])
    assert set().union(*applicable_rules(M, S)) == {"r1", "r2", "r3"}


def test_empty_state_only_body_free_positive_rules_apply(systems):
    M = systems["m0"].base
    app = applicable_rules(M, make_state([(), (), ()]))
    assert set().union(*app) == {"r4"}


def test_m0_equilibria_from_transcribed_kbs(systems):
    # kb2 = {d <- e, e <- d} gives no support to d or e, so C2 stays empty
    M = systems["m0"].base
    expected = [make_state([{"a", "b"}, (), {"f", "g", "h"}])]
    assert enumerate_equilibria(M) == expected
    assert [state_key(s) for s in naive_equilibria(M)] == [state_key(s) for s in expected]


def test_m0_with_fact_e_has_reference_equilibrium(systems):
    # with "e." in place of "e <- d" the reference state becomes an equilibrium
    M = systems["m0"].base
    c2 = M.context(2)
    kb = (AspRule(Literal("d"), (Literal("e"),)), AspRule(Literal("e")))
    fixed = McsSystem(tuple(replace(c, kb=kb) if c.index == 2 else c for c in M.contexts))
    S = make_state([{"a", "b", "c"}, {"d", "e", "p"}, {"f", "g", "q"}])
    assert c2.kb != kb
    assert is_equilibrium(fixed, S)
    assert enumerate_equilibria(fixed) == [S]


def test_m0_empty_state_is_not_equilibrium(systems):
    assert not is_equilibrium(systems["m0"].base, make_state([(), (), ()]))


def test_m1_has_no_equilibrium(systems):
    M = systems["m1"].base
    assert enumerate_equilibria(M) == []
    assert not is_consistent(M)
    assert naive_equilibria(M) == []


def test_consistency_of_fixtures(systems):
    assert is_consistent(systems["m0"].base)
    assert is_consistent(systems["m2"].base)
    assert not is_consistent(systems["m3"].base)
    assert not is_consistent(systems["gadget"].base)


def test_single_context_without_rules():
    M = McsSystem((Context(1, "C1", "prop", (Atom("a"),), (), ("a",)),))
    assert enumerate_equilibria(M) == [make_state([{"a"}])]


def test_limit_truncates_canonical_list():
    a, b = Literal("a"), Literal("b")
    kb = (AspRule(a, (), (b,)), AspRule(b, (), (a,)))
    M = McsSystem((Context(1, "C1", "asp", kb, (), ("a", "b")),))
    full = enumerate_equilibria(M)
    assert len(full) == 2
    assert enumerate_equilibria(M, limit=1) == full[:1]


def test_modify_examples(systems):
    M1 = systems["m1"].base
    assert is_consistent(modify(M1, {"r1"}, ()))
    assert is_consistent(modify(M1, (), {"r4"}))
    assert modify(M1) == M1
    with pytest.raises(UnknownRuleError):
        modify(M1, {"nope"})


def test_alignment_and_capacity_errors(systems):
    M = systems["m0"].base
    with pytest.raises(AlignmentError):
        is_equilibrium(M, make_state([()]))
    with pytest.raises(CapacityError):
        enumerate_equilibria(M, limits=Limits(max_rules=2))
    with pytest.raises(CapacityError):
        enumerate_equilibria(M, limits=Limits(max_atoms=2))


# -- properties ----------------------------------------------------------------


@slow
@given(seeds)
def test_enumeration_sound_and_complete_over_full_universe(seed):
    rng = random.Random(seed)
    P = random_pmcs(rng, max_contexts=3, max_rules=4, max_atoms=2, require_local_consistency=False)
    got = enumerate_equilibria(P.base)
    for S in got:
        assert is_equilibrium(P.base, S)
        assert oracle_is_equilibrium(P.base, S)
    want = naive_equilibria(P.base, full_universe=True)
    assert [state_key(s) for s in got] == [state_key(s) for s in want]


@slow
@given(seeds)
def test_unconditional_heads_hold_in_every_equilibrium(seed):
    rng = random.Random(seed)
    P = random_pmcs(rng, max_rules=5, max_atoms=4, min_rules=1)
    M = P.base
    r = rng.choice(M.rules)
    Mod = modify(M, (), {r.id})
    pos = Mod.position(r.owner)
    for S in enumerate_equilibria(Mod):
        assert r.head in S[pos]


@slow
@given(seeds)
def test_renaming_rule_ids_preserves_equilibria(seed):
    rng = random.Random(seed)
    M = random_pmcs(rng, max_rules=5, max_atoms=4).base
    ids = list(M.rule_ids)
    fresh = [f"q{k}" for k in range(len(ids))]
    rng.shuffle(fresh)
    renamed = M.with_rules(replace(r, id=new) for r, new in zip(M.rules, fresh))
    assert enumerate_equilibria(renamed) == enumerate_equilibria(M)


@slow
@given(seeds, st.data())
def test_modify_removal_is_idempotent(seed, data):
    M = random_pmcs(random.Random(seed), max_rules=5).base
    D1 = data.draw(st.sets(st.sampled_from(M.rule_ids))) if M.rule_ids else set()
    once = modify(M, D1)
    assert modify(once, D1, strict=False) == once
