import random

import pytest

from denokat import gen
from denokat.kernel import ValueDomain
from denokat.syntax import parse_stmt
from denokat.while_lang import LanguageError, denote_twhile, denote_while, denote_whilee, dvg_states


def test_powerdomain_three_programs(dom):
    a, b, c = (denote_while(parse_stmt(p), dom) for p in
               ("skip", "while true do skip", "choice { skip } or { while true do skip }"))
    states = frozenset(dom.states)
    assert a.nrm.triples == {(s, (), s) for s in states} and a.dvg == frozenset()
    assert not b.nrm.triples and b.dvg == states
    assert c.nrm.triples == a.nrm.triples and c.dvg == states


def test_assignment_and_havoc(dom1):
    d = denote_twhile(parse_stmt("x := x + 1"), dom1)
    assert d.nrm.triples == {((v,), (), ((v + 1) % 3,)) for v in range(3)}
    h = denote_twhile(parse_stmt("x := ?"), dom1)
    assert len(h.nrm.triples) == 9


def test_division_by_zero_aborts(dom1):
    d = denote_whilee(parse_stmt("x := 1 / x"), dom1)
    assert d.err == {(0,)}
    assert {a for a, _, _ in d.nrm.triples} == {(1,), (2,)}
    with pytest.raises(LanguageError):
        denote_while(parse_stmt("x := 1 / x"), dom1)


def test_traces_in_order(dom1):
    d = denote_twhile(parse_stmt("x := 1; print x; x := 2; print x"), dom1)
    assert {t for _, t, _ in d.nrm.triples} == {(1, 2)}


def test_silent_and_reactive_divergence(dom1):
    a = denote_twhile(parse_stmt("while true do skip"), dom1)
    assert a.fin_dvg.pairs == {((v,), ()) for v in range(3)} and not a.inf_dvg.pairs
    b = denote_twhile(parse_stmt("while true do print(0)"), dom1)
    assert not b.fin_dvg.pairs and b.inf_dvg.pairs == {((v,), ((), (0,))) for v in range(3)}


def test_divergence_after_prefix(dom1):
    d = denote_twhile(parse_stmt("print 1; while true do { print 0; print 2 }"), dom1)
    assert d.inf_dvg.pairs == {((v,), ((1,), (0, 2))) for v in range(3)}


def test_truncation_flags_long_traces():
    dom = ValueDomain(3, ("x",))
    d = denote_twhile(parse_stmt("print x; print x; print x"), dom, 2)
    assert d.truncated and not d.nrm.triples


@pytest.mark.parametrize("seed", range(40))
def test_traced_agrees_with_trace_free(seed, dom):
    s = gen.rand_while(random.Random(seed), ("x", "y"), 4, events=False)
    t = denote_twhile(s, dom)
    e = denote_whilee(s, dom)
    assert {(a, b) for a, _, b in t.nrm.triples} == {(a, b) for a, _, b in e.nrm.triples}
    assert {a for a, _ in t.err.pairs} == e.err
    assert dvg_states(t) == e.dvg
