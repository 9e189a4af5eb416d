"""CFG: per-instruction relations over ``(label, state)`` nodes, procedures as
closures from the entry node, and modules/linking sharing the PCALL module
machinery."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from . import kernel as K
from .kernel import StateTraceSet, TracedRel, ValueDomain
from .pcall_lang import (MDenote, ModuleDomain, ModuleSem, ProcDenote, semantic_link,
                         wrap_procedure)
from .syntax import CallI, CfgModule, CfgProc, Cond, Do, check_cfg
from .while_lang import (Behaviors, LanguageError, atom_sets, empty_behaviors, eval_bexp, iterate_b,
                         prefix)


def denote_instr(label: str, ins, chi: TracedRel, dom: ValueDomain, nlocals: int,
                 bound: Optional[int] = None) -> Behaviors:
    """Edges out of ``label``: ``nrm`` to successor nodes, plus ``err`` and ``cll``."""
    bound = chi.bound if bound is None else bound
    out = empty_behaviors(bound)
    states = dom.states
    if isinstance(ins, Do):
        nrm, err = atom_sets(ins.atom, dom, bound)
        edges = TracedRel(frozenset(((label, a), t, (ins.succ, c)) for a, t, c in nrm.triples), bound,
                          frozenset(((label, a), (ins.succ, c)) for a, c in nrm.over))
        errs = StateTraceSet(frozenset(((label, a), t) for a, t in err.pairs), bound,
                             frozenset((label, a) for a in err.over))
        return replace(out, nrm=edges, err=errs)
    if isinstance(ins, CallI):
        lstates = sorted({x[:nlocals] for x in states})
        nrm, over = set(), set()
        for (name, g0), t, g1 in chi.triples:
            if name == ins.name:
                nrm |= {((label, l + g0), t, (ins.succ, l + g1)) for l in lstates}
        for (name, g0), g1 in chi.over:
            if name == ins.name:
                over |= {((label, l + g0), (ins.succ, l + g1)) for l in lstates}
        cll = TracedRel(frozenset(((label, x), (), (ins.name, x[nlocals:])) for x in states), bound)
        return replace(out, nrm=TracedRel(frozenset(nrm), bound, frozenset(over)), chan=(("cll", cll),))
    if isinstance(ins, Cond):
        b = eval_bexp(ins.cond, dom)
        edges = {((label, x), (), (ins.succ_true, x)) for x in b.tts}
        edges |= {((label, x), (), (ins.succ_false, x)) for x in b.ffs}
        errs = StateTraceSet(frozenset(((label, x), ()) for x in b.err), bound)
        return replace(out, nrm=TracedRel(frozenset(edges), bound), err=errs)
    raise LanguageError(f"unknown instruction {ins!r}")


def cfg_body(p: CfgProc, chi: TracedRel, md: ModuleDomain) -> Behaviors:
    """Behaviors from frame states at the entry node to frame states at exit."""
    check_cfg(p)
    bound = md.bound
    dom = md.frame(p.locals)
    nl = len(p.locals)
    parts = [denote_instr(l, i, chi, dom, nl, bound) for l, i in p.nodes]
    edges = K.union_rel(K.empty_rel(bound), *(d.nrm for d in parts))
    labels = sorted(set(p.labels()) | {p.exit, p.entry})
    universe = [(l, x) for l in labels for x in dom.states]
    exits = Behaviors(
        TracedRel(frozenset(((p.exit, x), (), x) for x in dom.states), bound),
        K.union_sts(K.empty_sts(bound), *(d.err for d in parts)),
        K.empty_sts(bound), K.empty_lasso(bound),
        (("cll", K.union_rel(K.empty_rel(bound), *(d.get("cll") for d in parts))),),
    )
    exits = replace(exits, chan=tuple((k, v) for k, v in exits.chan if v))
    closed = iterate_b(edges, exits, universe)
    enter = TracedRel(frozenset((x, (), (p.entry, x)) for x in dom.states), bound)
    return prefix(enter, closed)


def denote_cfg_proc(p: CfgProc, chi: TracedRel, md: ModuleDomain) -> ProcDenote:
    return wrap_procedure(p.name, cfg_body(p, chi, md), len(p.locals), md)


def cfg_module_sem(m: CfgModule, md: ModuleDomain) -> ModuleSem:
    names = m.names()
    if len(set(names)) != len(names):
        raise LanguageError("duplicate procedure names")
    if tuple(m.globals) and tuple(m.globals) != md.globals:
        raise LanguageError(f"module globals {m.globals} differ from domain {md.globals}")

    def unit(p):
        memo: dict = {}

        def run(chi):
            if chi not in memo:
                memo[chi] = denote_cfg_proc(p, chi, md)
            return memo[chi]
        return run
    return ModuleSem(names, [unit(p) for p in m.procs], md)


def denote_cfg_module(m: CfgModule, chi: Optional[TracedRel], md: ModuleDomain) -> MDenote:
    return cfg_module_sem(m, md)(chi)


def semantic_link_cfg(s1: ModuleSem, s2: ModuleSem, chi: Optional[TracedRel] = None) -> MDenote:
    return semantic_link(s1, s2, chi)


def merge_cfg_modules(m1: CfgModule, m2: CfgModule) -> CfgModule:
    return CfgModule(m1.globals or m2.globals, tuple(m1.procs) + tuple(m2.procs))
