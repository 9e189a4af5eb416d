import random

import pytest

from denokat import gen
from denokat import kernel as K
from denokat.cfg_lang import (cfg_module_sem, denote_cfg_module, merge_cfg_modules, semantic_link_cfg)
from denokat.pcall_lang import (ModuleDomain, denote_module, merge_modules, module_sem, oracle,
                                semantic_link)
from denokat.syntax import parse_cfg_module, parse_module
from denokat.while_lang import LanguageError

MD = ModuleDomain(3, ("x",))
G = [(v,) for v in range(3)]


def den(text, chi=None):
    return denote_module(parse_module(text), chi, MD)


def test_procedure_body_runs_on_globals():
    d = den("global x; proc main { x := x + 1 }")
    assert d.dom == {"main"}
    assert d.nrm.triples == {(("main", (v,)), (), ((v + 1) % 3,)) for v in range(3)}


def test_locals_start_at_zero_and_are_dropped():
    d = den("global x; proc main (locals a) { x := a; a := 2 }")
    assert d.nrm.triples == {(("main", g), (), (0,)) for g in G}


def test_internal_call():
    d = den("global x; proc main { call f; print x } proc f { x := 2 }")
    assert {(q, t, r) for q, t, r in d.nrm.triples if q[0] == "main"} == {(("main", g), (2,), (2,)) for g in G}


def test_external_call_uses_oracle():
    chi = oracle([(("ext", (0,)), (), (2,)), (("ext", (1,)), (5,), (1,))])
    d = den("global x; proc main { call ext; print x }", chi)
    assert d.nrm.triples == {(("main", (0,)), (2,), (2,)), (("main", (1,)), (5, 1), (1,))}
    assert d.cll.triples == {(("main", g), (), ("ext", g)) for g in G}


def test_recursion_diverges_silently():
    d = den("global x; proc main { call main }")
    assert not d.nrm.triples
    assert d.fin_dvg.pairs == {(("main", g), ()) for g in G}


def test_reactive_recursion():
    d = den("global x; proc main { print 0; call main }")
    assert d.inf_dvg.pairs == {(("main", g), ((), (0,))) for g in G}


def test_link_small():
    m1 = parse_module("global x; proc f { call g; x := x + 1 }")
    m2 = parse_module("global x; proc g { x := 1 }")
    lhs = semantic_link(module_sem(m1, MD), module_sem(m2, MD))
    rhs = denote_module(merge_modules(m1, m2), None, MD)
    assert lhs.fields() == rhs.fields()
    assert (("f", (0,)), (), (2,)) in rhs.nrm.triples


def test_link_rejects_overlap():
    m = parse_module("global x; proc f { skip }")
    with pytest.raises(LanguageError):
        semantic_link(module_sem(m, MD), module_sem(m, MD))


@pytest.mark.parametrize("seed", range(10))
def test_link_random_pcall(seed):
    rng = random.Random(seed)
    chi = gen.rand_oracle(rng, ("ext",), MD.gstates, MD.bound)
    m1 = gen.rand_module(rng, ("f", "g"), ("x",), ("a",), ("h", "k", "ext"), 3)
    m2 = gen.rand_module(rng, ("h", "k"), ("x",), ("a",), ("f", "g", "ext"), 3)
    lhs = semantic_link(module_sem(m1, MD), module_sem(m2, MD), chi)
    rhs = denote_module(merge_modules(m1, m2), chi, MD)
    assert lhs.fields() == rhs.fields()


@pytest.mark.parametrize("seed", range(10))
def test_link_random_cfg(seed):
    rng = random.Random(seed)
    chi = gen.rand_oracle(rng, ("ext",), MD.gstates, MD.bound)
    m1 = gen.rand_cfg_module(rng, ("f", "g"), ("x",), ("h", "k", "ext"))
    m2 = gen.rand_cfg_module(rng, ("h", "k"), ("x",), ("f", "g", "ext"))
    lhs = semantic_link_cfg(cfg_module_sem(m1, MD), cfg_module_sem(m2, MD), chi)
    rhs = denote_cfg_module(merge_cfg_modules(m1, m2), chi, MD)
    assert lhs.fields() == rhs.fields()


def test_cfg_branch_and_call():
    m = parse_cfg_module("global x; cfgproc main entry L0 exit Lexit {"
                         " L0: cond x == 0 -> L1, Lexit; L1: call ext -> L2; L2: do print x -> Lexit; }")
    chi = oracle([(("ext", (0,)), (), (1,))])
    d = denote_cfg_module(m, chi, MD)
    assert d.nrm.triples == {(("main", (0,)), (1,), (1,)), (("main", (1,)), (), (1,)), (("main", (2,)), (), (2,))}
    assert d.cll.triples == {(("main", (0,)), (), ("ext", (0,)))}


def test_cfg_cycle_diverges():
    m = parse_cfg_module("global x; cfgproc main entry L0 exit Lexit { L0: do skip -> L0; }")
    d = denote_cfg_module(m, None, MD)
    assert d.fin_dvg.pairs == {(("main", g), ()) for g in G} and not d.nrm.triples


def test_linking_fixed_point_counts_iterations():
    d = den("global x; proc main { if x == 0 then skip else { x := x - 1; call main } }")
    assert d.nrm.triples == {(("main", g), (), (0,)) for g in G}
    assert d.iterations >= 1
    assert isinstance(d.nrm, K.TracedRel)
