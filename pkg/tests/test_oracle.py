import dataclasses
import random

import pytest

from denokat import corpus as C
from denokat import gen
from denokat import kernel as K
from denokat import oracle as O
from denokat.kernel import ValueDomain
from denokat.syntax import parse_stmt, show
from denokat.while_lang import denote_twhile

DOM = ValueDomain(3, ("x", "y"))


def test_small_step_samples():
    e = O.enumerate_behaviors(parse_stmt("choice { print 1 } or { x := 1 / 0 }"), ValueDomain(2, ("x",)))
    outcomes = {(s.init, s.outcome, s.trace) for s in e.samples}
    assert ((0,), "term", (1,)) in outcomes and ((0,), "abort", ()) in outcomes
    assert not e.truncated


def test_oracle_lassos():
    e = O.enumerate_behaviors(parse_stmt("print 1; while true do print 0"), ValueDomain(2, ("x",)))
    assert {s.final for s in e.samples if s.outcome == "lasso"} == {((1,), (0,))}


@pytest.mark.parametrize("text", C.WHILE_CORPUS + C.ORACLE_EXTRA)
def test_corpus_matches_oracle(text):
    v = O.cross_check(parse_stmt(text), DOM)
    assert v.ok or v.truncated, v.mismatch


@pytest.mark.parametrize("seed", range(25))
def test_random_while_matches_oracle(seed):
    s = gen.rand_while(random.Random(seed), ("x", "y"), 4)
    v = O.cross_check(s, DOM)
    assert v.ok or v.truncated, (show(s), v.mismatch)


@pytest.mark.parametrize("seed", range(15))
def test_random_cfg_matches_oracle(seed):
    p = gen.rand_cfg_proc(random.Random(seed), 5, ("x", "y"))
    v = O.cross_check(p, DOM)
    assert v.ok or v.truncated, v.mismatch


def _drop_one(r: K.TracedRel) -> K.TracedRel:
    return dataclasses.replace(r, triples=frozenset(K.ordered(r.triples)[1:]))


def test_mutated_denotation_is_caught():
    # negative control: remove one normal-termination triple
    s = parse_stmt("x := ?; print x")
    d = denote_twhile(s, DOM)
    bad = dataclasses.replace(d, nrm=_drop_one(d.nrm))
    v = O.cross_check(s, DOM, denotation=bad)
    assert not v.ok and v.mismatch.startswith("nrm")


def test_mutated_lasso_is_caught():
    s = parse_stmt("while true do print x")
    d = denote_twhile(s, DOM)
    bad = dataclasses.replace(d, inf_dvg=K.LassoSet(frozenset(K.ordered(d.inf_dvg.pairs)[1:]), d.inf_dvg.bound,
                                                    d.inf_dvg.live))
    assert not O.cross_check(s, DOM, denotation=bad).ok
