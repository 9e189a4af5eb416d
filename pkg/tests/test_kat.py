import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denokat import kat


@pytest.mark.parametrize("lhs,rhs", kat.AXIOMS, ids=[f"{l} = {r}" for l, r in kat.AXIOMS])
def test_axioms_decide_true(lhs, rhs):
    assert kat.decide_eq(lhs, rhs)


@pytest.mark.parametrize("lhs,rhs", kat.PROOF_GOALS)
def test_proof_goals_decide_true(lhs, rhs):
    assert kat.decide_leq(lhs, rhs)


@pytest.mark.parametrize("lhs,rhs", [("p ; q", "q ; p"), ("p*", "p"), ("p + q", "p"), ("[t] ; p", "p ; [t]"),
                                     ("1", "p*; p")])
def test_non_identities_decide_false_with_witness(lhs, rhs):
    assert not kat.decide_eq(lhs, rhs)
    assert kat.counterexample(lhs, rhs) is not None or kat.counterexample(rhs, lhs) is not None


def test_omega_unrolling_is_undecided():
    with pytest.raises(kat.KatUndecided):
        kat.decide_eq("p^w", "p ; p^w")


def test_syntax_errors():
    with pytest.raises(kat.KatSyntaxError):
        kat.parse("p ; $")


def test_show_roundtrip():
    e = kat.parse("([t] ; p)* ; [!t] + q")
    assert kat.decide_eq(kat.parse(kat.show(e)), e)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_decisions_are_sound_for_interpretations(seed):
    rng = random.Random(seed)
    lhs, rhs = kat._true_pair(rng, ("p", "q"), ("t",))
    if not kat.decide_leq(lhs, rhs):
        return
    env = kat.random_env(rng, ("p", "q"), ("t",), (0, 1, 2), 4)
    a = kat.interpret(lhs, env, (0, 1, 2), 4)
    b = kat.interpret(rhs, env, (0, 1, 2), 4)
    assert a.triples <= b.triples


def test_soundness_fuzz_small():
    rep = kat.soundness_fuzz(100, seed=5)
    assert rep.true_cases == 100 and not rep.unsound
