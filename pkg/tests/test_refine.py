import random

import pytest

from denokat import corpus as C
from denokat import gen
from denokat import kernel as K
from denokat import refine as R
from denokat.kernel import ValueDomain
from denokat.syntax import parse_stmt
from denokat.while_lang import denote_twhile

DOM = ValueDomain(3, ("x",))


def test_gamma_instance1_membership():
    g = R.Gamma(R.instance("N1"), {(0, (), 1)}, R.EIndex([2], states=True))
    assert (0, (), 1) in g
    assert (0, (), 2) not in g
    # an aborting source state licenses every target behavior
    assert all((2, (), b) in g for b in range(3))


def test_gamma_instance2_trace_prefix():
    # E holds abort after trace (5,): target may do anything after emitting 5
    g = R.Gamma(R.instance("N2"), {(0, (5,), 1)}, R.EIndex([(0, (5,))]))
    assert (0, (5,), 1) in g
    assert (0, (5, 7), 2) in g
    assert (0, (6,), 1) not in g


def test_gamma_relational():
    r = R.MatchRel.of({(0, 10), (1, 11)})
    g = R.Gamma(R.instance("N3", r), {(0, (), 1)}, R.EIndex([]))
    assert (10, (), 11) in g
    assert (10, (), 10) not in g


def test_kripke_accessibility_must_be_preorder():
    with pytest.raises(ValueError):
        R.MatchRel.kripke({0: set(), 1: set()}, {(0, 0)})
    with pytest.raises(ValueError):
        R.MatchRel.kripke({0: set(), 1: set(), 2: set()}, {(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)})
    R.MatchRel.kripke({0: set(), 1: set()}, {(0, 0), (1, 1), (0, 1)})


def test_carrier_shape_is_checked():
    with pytest.raises(R.CarrierError):
        R.check_carrier(R.instance("N2"), (0, 1))


@pytest.mark.parametrize("fam", [1, 2, 3, "kripke", "pi"])
def test_ra_laws_small(fam):
    states = DOM.states
    rng = random.Random(1)
    if fam == "kripke":
        r = R.MatchRel.kripke({0: {(s, s) for s in states}, 1: {(s, t) for s in states for t in states
                                                                if rng.random() < 0.4}},
                              {(0, 0), (1, 1), (0, 1)})
    else:
        r = R.MatchRel.of((s, t) for s in states for t in states if rng.random() < 0.4)
    pi0 = R.AnalysisResult.of(x=1)
    g = R.family(fam, r, pi0=pi0, pi1=pi0, dom=DOM)
    rep = R.check_ra_laws(*g, trials=40, seed=3, carriers=R.Carriers(states=states))
    assert rep.ok, rep.results


def test_non_monotone_gamma_is_caught():
    fake = R.GammaInstance("complement", "N2", custom=lambda nn, e, c: c not in nn)
    rep = R.check_ra_laws(fake, *R.family(2)[1:], trials=50, seed=0, monotone_only=True)
    assert rep.results["monotone"] is not None


def test_pi_concat():
    pi0, pi1, pi2 = R.AnalysisResult(), R.AnalysisResult.of(x=1), R.AnalysisResult.of(x=1)
    assert R.check_pi_concat(pi0, pi1, pi2, DOM, trials=40).ok


@pytest.mark.parametrize("pair", C.CHOICE_PAIRS, ids=lambda p: p.name)
def test_design_choice_counterexamples(pair):
    dt, ds = pair.domains()
    t = denote_twhile(parse_stmt(pair.target), dt, 4)
    s = denote_twhile(parse_stmt(pair.source), ds, 4)
    v = R.design_choice_verdicts(t, s, pair.match(), dt.states, ds.states, 4)
    assert v["two_arg"] is None
    assert v[pair.rejects] is not None


def test_analysis_result_lattice():
    a, b = R.AnalysisResult.of(x=1, y=2), R.AnalysisResult.of(x=1, y=0)
    assert a.join(b) == R.AnalysisResult.of(x=1)
    assert R.AnalysisResult.of(x=1) <= a and not a <= b
    assert a.show() == "{x↦1, y↦2}"
    dom = ValueDomain(3, ("x", "y"))
    assert a.holds((1, 2), dom.index) and not a.holds((1, 1), dom.index)


@pytest.mark.parametrize("seed", range(60))
def test_checker_agrees_with_direct_definition(seed):
    rng = random.Random(seed)
    dom = ValueDomain(2, ("x", "y"))
    s = gen.rand_while(rng, ("x", "y"), 3)
    t = gen.rand_while(rng, ("x", "y"), 3) if rng.random() < 0.5 else s
    dt, ds = denote_twhile(t, dom, 4), denote_twhile(s, dom, 4)
    v = R.check_refine_stmt(dt, ds, R.Profile("traced"))
    direct = R.direct_refines(dt, ds)
    if v.status == "truncated":
        return
    assert (v.status == "pass") == (direct is None), (v, direct)


def test_hand_broken_target_fails_with_witness():
    s = denote_twhile(parse_stmt("x := 1"), DOM)
    t = denote_twhile(parse_stmt("x := 2"), DOM)
    v = R.check_refine_stmt(t, s, R.Profile("traced"))
    assert v.status == "fail" and v.field == "nrm" and v.witness[2] == (2,)


def test_aborting_source_allows_anything():
    s = denote_twhile(parse_stmt("x := 1 / 0"), DOM)
    t = denote_twhile(parse_stmt("print x; x := 2"), DOM)
    assert R.check_refine_stmt(t, s, R.Profile("traced")).ok


def test_truncated_when_only_bounded_info():
    s = denote_twhile(parse_stmt("while true do print x"), DOM, 2)
    t = denote_twhile(parse_stmt("while true do { print x; x := x + 1 }"), DOM, 2)
    v = R.check_refine_stmt(t, s, R.Profile("traced"))
    assert v.status in ("fail", "truncated")
    assert R.check_refine_stmt(s, s, R.Profile("traced")).status in ("pass", "truncated")


@pytest.mark.parametrize("seed", range(30))
def test_fixpoint_lemma(seed):
    tr = R.random_lemma_triple(seed)
    premise, concl, _ = R.fixpoint_refine_lemma_check(tr.f, tr.g, tr.h, R.instance("N1"))
    assert premise and concl


def test_module_refinement_identity():
    from denokat.pcall_lang import ModuleDomain, module_sem
    from denokat.syntax import parse_module
    md = ModuleDomain(3, ("x",))
    src = module_sem(parse_module("global x; proc main { x := 1; x := x + 1 }"), md)
    ok = module_sem(parse_module("global x; proc main { x := 2 }"), md)
    bad = module_sem(parse_module("global x; proc main { x := 0 }"), md)
    oracles = [(K.empty_rel(), K.empty_rel(), K.empty_sts())]
    assert R.check_refine_module(ok, src, R.Kir(), R.Kir(), oracles).ok
    assert R.check_refine_module(bad, src, R.Kir(), R.Kir(), oracles).status == "fail"
