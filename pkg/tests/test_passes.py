import random

import pytest

from denokat import gen
from denokat import passes as P
from denokat import refine as R
from denokat import suites as S
from denokat.kernel import ValueDomain
from denokat.pcall_lang import ModuleDomain
from denokat.syntax import (Assign, Num, Print, Seq, Skip, Var, parse_module, parse_stmt, seq, show,
                            show_cfg_module, walk)
from denokat.while_lang import denote_twhile

DOM = ValueDomain(3, ("x", "y"))
MD = ModuleDomain(3, ("x",))


def test_const_prop_worked_example():
    a = P.analyze_constants(parse_stmt("x := 1; y := x + 1"), R.AnalysisResult(), 3)
    assert show(a.stmt) == "x := 1; y := 2"
    assert [p.show() for p in P.seq_annotations(a)] == ["{x↦1}", "{x↦1, y↦2}"]


def test_const_prop_joins_branches():
    a = P.analyze_constants(parse_stmt("if y == 0 then x := 1 else x := 1; y := x"), None, 3)
    assert show(a.stmt).endswith("y := 1")
    a = P.analyze_constants(parse_stmt("if y == 0 then x := 1 else x := 2; y := x"), None, 3)
    assert show(a.stmt).endswith("y := x")


def test_const_prop_loop_fixpoint():
    a = P.analyze_constants(parse_stmt("x := 0; while y < 2 do { y := y + 1; x := 0 }; print x"), None, 3)
    assert show(a.stmt).endswith("print 0")
    a = P.analyze_constants(parse_stmt("x := 0; while y < 2 do { y := y + 1; x := x + 1 }; print x"), None, 3)
    assert show(a.stmt).endswith("print x")


def test_const_prop_keeps_aborting_expressions():
    a = P.analyze_constants(parse_stmt("x := 0; y := 1 / x"), None, 3)
    assert "1 / 0" in show(a.stmt) or "1 / x" in show(a.stmt)
    d = denote_twhile(a.stmt, DOM)
    assert d.err.pairs


def _prefixes(parts):
    return [seq(*parts[: k + 1]) for k in range(len(parts))]


@pytest.mark.parametrize("seed", range(60))
def test_analysis_is_sound_on_reachable_states(seed):
    rng = random.Random(seed)
    parts = [gen.rand_while(rng, ("x", "y"), 3, events=False, choice=True) for _ in range(4)]
    s = seq(*parts)
    a = P.analyze_constants(s, R.AnalysisResult(), 3)
    anns = P.seq_annotations(a)
    # one annotation per top-level element, in order
    flat = []
    cur = s
    while isinstance(cur, Seq):
        flat.append(cur.first)
        cur = cur.second
    flat.append(cur)
    for k, pi in enumerate(anns):
        reach = {b for _, _, b in denote_twhile(seq(*flat[: k + 1]), DOM, 2).nrm.triples}
        if pi is None:
            assert not reach
        else:
            assert all(pi.holds(b, DOM.index) for b in reach), (k, pi, reach)


@pytest.mark.parametrize("seed", range(40))
def test_statement_passes_refine(seed):
    rng = random.Random(seed)
    s = S._saturating_stmt(rng, DOM, 8)
    for name in ("skip-removal", "const-prop", "dce"):
        v = S.check_stmt_pass(name, s, DOM, 8)
        assert v.ok, (name, show(s), v)


def test_dce_example():
    t = P.dead_code_elim(parse_stmt("x := 1; y := 2; print y"), frozenset(), ())
    assert show(t) == "skip; y := 2; print y"


def test_dce_keeps_effects():
    s = parse_stmt("x := ?; print y; y := 1 / x")
    t = P.dead_code_elim(s, frozenset(), ())
    assert t == s


def test_remove_skips():
    assert show(P.remove_skips(parse_stmt("skip; x := 1; skip"))) == "x := 1"
    assert show(P.remove_skips(parse_stmt("while x < 1 do skip"))) == "while x < 1 do { skip }"


def test_gen_cfg_shape_and_determinism():
    m = parse_module("global x; proc main { while x < 2 do { choice { x := x + 1 } or { print x } } }")
    c1, c2 = P.gen_cfg(m), P.gen_cfg(m)
    assert c1 == c2 and show_cfg_module(c1) == show_cfg_module(c2)
    (p,) = c1.procs
    assert p.entry == "L0" and p.exit == "Lexit"
    assert [lab for lab, _ in p.nodes] == sorted((lab for lab, _ in p.nodes), key=lambda s: int(s[1:]))
    assert P.SCRATCH in p.locals


@pytest.mark.parametrize("name", S.PASSES)
def test_module_passes_on_corpus_sample(name):
    rng = random.Random(7)
    from denokat import corpus as C
    for m in C.module_corpus()[:8]:
        oracles = S._saturating_oracles(rng, MD, m)
        v = S.check_module_pass(name, m, MD, oracles)
        assert v.ok, (name, v)


def test_wrong_transformation_fails():
    # negative control: a "constant propagation" that folds to the wrong value
    m = parse_module("global x; proc main { x := 1; x := x + 1 }")
    bad = parse_module("global x; proc main { x := 1; x := 0 }")
    oracles = S._oracles(random.Random(0), MD)
    v = R.check_refine_module(S.sem_of(bad, MD), S.sem_of(m, MD), R.Kir(), R.Kir(), oracles)
    assert v.status == "fail"


def test_wrong_dce_fails():
    s = parse_stmt("x := 1; print x")
    bad = Seq(Skip(), Print(Var("x")))
    v = R.check_refine_stmt(denote_twhile(bad, DOM), denote_twhile(s, DOM), R.Profile("traced"))
    assert v.status == "fail"
    assert not any(isinstance(n, Assign) and n.expr == Num(1) for n in walk(bad))
