"""PCALL: statements, procedures and modules over a semantic oracle, semantic
linking, and the goto extension with labeled evaluation.

States of a procedure body are tuples ``locals + globals``.  Queries are
``(ident, gstate)`` pairs.  An oracle ``chi`` and every module-level ``nrm``
are :class:`~denokat.kernel.TracedRel` values from queries to final global
states; ``cll`` relates queries to the queries of the calls they make.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Optional

from . import kernel as K
from .kernel import (LassoSet, StateTraceSet, TracedRel, ValueDomain, compose_rel,
                     compose_rel_lasso, compose_rel_set, union_lasso, union_rel, union_sts)
from .syntax import Call, Choice, Goto, If, Label, Module, Procedure, Seq, While, labels_of, walk
from .while_lang import (Behaviors, Ctx, LanguageError, empty_behaviors, iterate_b, prefix,
                         seq_b, tdenote, union_b)


@dataclass(frozen=True)
class ModuleDomain:
    """Global variables, value modulus and trace bound shared by linked modules."""

    modulus: int
    globals: tuple
    bound: int = K.DEFAULT_BOUND

    def __post_init__(self):
        object.__setattr__(self, "globals", tuple(self.globals))

    @cached_property
    def gstates(self) -> tuple:
        return tuple(itertools.product(range(self.modulus), repeat=len(self.globals)))

    def frame(self, locals_: tuple) -> ValueDomain:
        overlap = set(locals_) & set(self.globals)
        if overlap:
            raise LanguageError(f"locals shadow globals: {sorted(overlap)}")
        return ValueDomain(self.modulus, tuple(locals_) + self.globals)

    def queries(self, names: Iterable) -> list:
        return [(n, g) for n in sorted(names) for g in self.gstates]


def ecall(names: Iterable, universe: Iterable) -> frozenset:
    """External queries: those of ``universe`` whose ident is not in ``names``."""
    xs = set(names)
    return frozenset(q for q in universe if q[0] not in xs)


def restrict_targets(r: TracedRel, keep: Callable) -> TracedRel:
    return TracedRel(frozenset(x for x in r.triples if keep(x[2])), r.bound,
                     frozenset(x for x in r.over if keep(x[1])))


def oracle(triples: Iterable, bound: int = K.DEFAULT_BOUND) -> TracedRel:
    """Oracle from ``((ident, g0), trace, g1)`` triples."""
    return K.rel(triples, bound)


# ------------------------------------------------------------------ statements


@dataclass(frozen=True)
class PDenote:
    nrm: TracedRel
    err: StateTraceSet
    fin_dvg: StateTraceSet
    inf_dvg: LassoSet
    cll: TracedRel
    gto: TracedRel

    @classmethod
    def of(cls, b: Behaviors) -> "PDenote":
        return cls(b.nrm, b.err, b.fin_dvg, b.inf_dvg, b.get("cll"), b.get("gto"))

    @property
    def dvg(self) -> frozenset:
        return frozenset(a for a, _ in self.fin_dvg.pairs) | self.inf_dvg.live


def _pcall_hook(chi: TracedRel, nlocals: int):
    def hook(s, ctx: Ctx) -> Behaviors:
        bound = ctx.bound
        states = ctx.universe
        if isinstance(s, Call):
            lstates = sorted({x[:nlocals] for x in states})
            nrm, over = set(), set()
            for (name, g0), t, g1 in chi.triples:
                if name == s.name:
                    nrm |= {(l + g0, t, l + g1) for l in lstates}
            for (name, g0), g1 in chi.over:
                if name == s.name:
                    over |= {(l + g0, l + g1) for l in lstates}
            cll = TracedRel(frozenset((x, (), (s.name, x[nlocals:])) for x in states), bound)
            return replace(empty_behaviors(bound), nrm=TracedRel(frozenset(nrm), bound, frozenset(over)),
                           chan=(("cll", cll),))
        if isinstance(s, Goto):
            gto = TracedRel(frozenset((x, (), (s.name, x)) for x in states), bound)
            return replace(empty_behaviors(bound), chan=(("gto", gto),))
        if isinstance(s, Label):
            return tdenote(s.body, ctx)
        raise LanguageError(f"{type(s).__name__} is not a PCALL statement")
    return hook


def pcall_ctx(dom: ValueDomain, chi: TracedRel, nlocals: int, bound: int) -> Ctx:
    return Ctx(dom, bound, _pcall_hook(chi, nlocals))


def denote_pstmt(s, chi: TracedRel, dom: ValueDomain, nlocals: int = 0,
                 bound: Optional[int] = None) -> PDenote:
    """Statement denotation with calls resolved through ``chi`` only."""
    bound = chi.bound if bound is None else bound
    return PDenote.of(tdenote(s, pcall_ctx(dom, chi, nlocals, bound)))


def labeled(s, j: str, ctx: Ctx) -> Optional[Behaviors]:
    """Behaviors of ``s`` entered at label ``j`` (``None`` if ``j`` is not in ``s``)."""
    if isinstance(s, Label):
        if s.name == j:
            return tdenote(s.body, ctx)
        return labeled(s.body, j, ctx)
    if isinstance(s, Seq):
        first = labeled(s.first, j, ctx)
        if first is not None:
            return seq_b(first, tdenote(s.second, ctx))
        return labeled(s.second, j, ctx)
    if isinstance(s, If):
        return labeled(s.then, j, ctx) or labeled(s.orelse, j, ctx)
    if isinstance(s, Choice):
        return labeled(s.left, j, ctx) or labeled(s.right, j, ctx)
    if isinstance(s, While):
        inner = labeled(s.body, j, ctx)
        if inner is not None:
            return seq_b(inner, tdenote(s, ctx))
    return None


def _tag(b: Behaviors, j: str) -> Behaviors:
    """Re-key every source state ``σ`` of ``b`` as ``(j, σ)``."""
    def r(x: TracedRel):
        return TracedRel(frozenset(((j, a), t, c) for a, t, c in x.triples), x.bound,
                         frozenset(((j, a), c) for a, c in x.over))

    def y(x: StateTraceSet):
        return StateTraceSet(frozenset(((j, a), t) for a, t in x.pairs), x.bound,
                             frozenset((j, a) for a in x.over))

    inf = b.inf_dvg
    return Behaviors(r(b.nrm), y(b.err), y(b.fin_dvg),
                     LassoSet(frozenset(((j, a), l) for a, l in inf.pairs), inf.bound,
                              frozenset((j, a) for a in inf.live),
                              frozenset((j, a) for a in inf.partial),
                              frozenset((j, a) for a in inf.over)),
                     tuple((k, r(v)) for k, v in b.chan))


def close_gotos(body: Behaviors, s, ctx: Ctx) -> Behaviors:
    """Resolve the ``gto`` channel of ``body`` (the denotation of ``s``) by
    iterating labeled evaluations; gotos to unknown labels abort."""
    labels = labels_of(s)
    if len(set(labels)) != len(labels):
        raise LanguageError("duplicate label")
    bound = ctx.bound
    targets = sorted({x.name for x in walk(s) if isinstance(x, Goto)})
    if not targets:
        return body
    parts = [_tag(labeled(s, j, ctx), j) for j in sorted(set(labels))]
    undefined = [j for j in targets if j not in labels]
    lab = union_b(*parts) if parts else empty_behaviors(bound)
    if undefined:
        bad = StateTraceSet(frozenset(((j, x), ()) for j in undefined for x in ctx.universe), bound)
        lab = replace(lab, err=union_sts(lab.err, bad))
    g = lab.get("gto")
    rest = replace(lab, chan=tuple((k, v) for k, v in lab.chan if k != "gto"))
    universe = [(j, x) for j in sorted(set(labels) | set(targets)) for x in ctx.universe]
    closed = iterate_b(g, rest, universe)
    tail = prefix(body.get("gto"), closed)
    head = replace(body, chan=tuple((k, v) for k, v in body.chan if k != "gto"))
    return union_b(head, tail)


# ------------------------------------------------------------------ procedures


@dataclass(frozen=True)
class ProcDenote:
    """Procedure or module behavior over queries."""

    nrm: TracedRel
    err: StateTraceSet
    cll: TracedRel
    fin_dvg: StateTraceSet
    inf_dvg: LassoSet

    @property
    def dvg(self) -> frozenset:
        return frozenset(a for a, _ in self.fin_dvg.pairs) | self.inf_dvg.live

    @property
    def truncated(self) -> bool:
        return any(x.truncated for x in (self.nrm, self.err, self.cll, self.fin_dvg, self.inf_dvg))


def wrap_procedure(name: str, body: Behaviors, nlocals: int, md: ModuleDomain) -> ProcDenote:
    """Apply Init (zeroed locals) and Free (drop locals) around a body record."""
    bound = md.bound
    init = TracedRel(frozenset(((name, g), (), (0,) * nlocals + g) for g in md.gstates), bound)
    free_rel = TracedRel(frozenset((x, (), x[nlocals:]) for x in body.nrm.targets), bound)
    full = prefix(init, body, nrm=compose_rel(compose_rel(init, body.nrm), free_rel))
    return ProcDenote(full.nrm, full.err, full.get("cll"), full.fin_dvg, full.inf_dvg)


def denote_procedure(p: Procedure, chi: TracedRel, md: ModuleDomain) -> ProcDenote:
    dom = md.frame(p.locals)
    ctx = pcall_ctx(dom, chi, len(p.locals), md.bound)
    body = close_gotos(tdenote(p.body, ctx), p.body, ctx)
    return wrap_procedure(p.name, body, len(p.locals), md)


# --------------------------------------------------------------------- modules


@dataclass(frozen=True)
class MDenote:
    dom: frozenset
    nrm: TracedRel
    err: StateTraceSet
    cll: TracedRel
    fin_dvg: StateTraceSet
    inf_dvg: LassoSet
    iterations: int = 0

    @property
    def dvg(self) -> frozenset:
        return frozenset(a for a, _ in self.fin_dvg.pairs) | self.inf_dvg.live | self.fin_dvg.over

    @property
    def truncated(self) -> bool:
        return any(x.truncated for x in (self.nrm, self.err, self.cll, self.fin_dvg, self.inf_dvg))

    def fields(self) -> dict:
        return {"dom": self.dom, "nrm": self.nrm, "err": self.err, "cll": self.cll,
                "fin_dvg": self.fin_dvg, "inf_dvg": self.inf_dvg}


def _budget(md: ModuleDomain, n: int) -> int:
    traces = sum(md.modulus ** k for k in range(md.bound + 1))
    return n * len(md.gstates) ** 2 * traces + 2


def close_calls(names: frozenset, parts: list, md: ModuleDomain, iterations: int,
                nrm: TracedRel) -> MDenote:
    """Module-level err/cll/fin/inf from the per-unit records under ``χ̂``."""
    bound = md.bound
    c = union_rel(*(p.cll for p in parts)) if parts else K.empty_rel(bound)
    universe = md.queries(names)
    cs = K.star(c, universe)
    err = compose_rel_set(cs, union_sts(*(p.err for p in parts))) if parts else K.empty_sts(bound)
    ext = ecall(names, c.targets)
    cll = restrict_targets(compose_rel(cs, c), lambda q: q in ext)
    fin = union_sts(*(p.fin_dvg for p in parts), K.omega_silent(K.silent(c))) if parts else K.empty_sts(bound)
    fin = compose_rel_set(cs, fin)
    inf = compose_rel_lasso(cs, union_lasso(*(p.inf_dvg for p in parts))) if parts else K.empty_lasso(bound)
    reactive = compose_rel(K.star(K.silent(c), universe), K.nonsilent(c))
    inf = union_lasso(inf, K.omega_lasso(reactive))
    return MDenote(frozenset(names), nrm, err, cll, fin, inf, iterations)


class ModuleSem:
    """A module denotation constructor: ``chi ↦ MDenote`` plus its domain."""

    def __init__(self, names: Iterable, units: list, md: ModuleDomain):
        self.names = frozenset(names)
        self.units = units  # each: chi -> ProcDenote-like record (or MDenote)
        self.md = md
        self._memo: dict = {}

    @property
    def dom(self) -> frozenset:
        return self.names

    def nrm_step(self, chi: TracedRel, x: TracedRel) -> TracedRel:
        joint = union_rel(x, chi)
        return union_rel(K.empty_rel(self.md.bound), *(u(joint).nrm for u in self.units))

    def __call__(self, chi: Optional[TracedRel] = None) -> MDenote:
        chi = K.empty_rel(self.md.bound) if chi is None else chi
        if chi in self._memo:
            return self._memo[chi]
        nrm, it = K.lfp(lambda x: self.nrm_step(chi, x), K.empty_rel(self.md.bound),
                        _budget(self.md, len(self.names)))
        hat = union_rel(nrm, chi)
        parts = [u(hat) for u in self.units]
        out = close_calls(self.names, parts, self.md, it, nrm)
        self._memo[chi] = out
        return out


def module_sem(m: Module, md: ModuleDomain) -> ModuleSem:
    names = [p.name for p in m.procs]
    if len(set(names)) != len(names):
        raise LanguageError("duplicate procedure names")
    if tuple(m.globals) and tuple(m.globals) != md.globals:
        raise LanguageError(f"module globals {m.globals} differ from domain {md.globals}")

    def unit(p):
        memo: dict = {}

        def run(chi):
            if chi not in memo:
                memo[chi] = denote_procedure(p, chi, md)
            return memo[chi]
        return run
    return ModuleSem(names, [unit(p) for p in m.procs], md)


def denote_module(m: Module, chi: Optional[TracedRel], md: ModuleDomain) -> MDenote:
    return module_sem(m, md)(chi)


def semantic_link(s1: ModuleSem, s2: ModuleSem, chi: Optional[TracedRel] = None) -> MDenote:
    """Link two module denotation constructors by a joint least fixed point."""
    if s1.dom & s2.dom:
        raise LanguageError(f"overlapping domains: {sorted(s1.dom & s2.dom)}")
    md = s1.md
    chi = K.empty_rel(md.bound) if chi is None else chi

    def step(x):
        joint = union_rel(x, chi)
        return union_rel(s1(joint).nrm, s2(joint).nrm)

    names = s1.dom | s2.dom
    nrm, it = K.lfp(step, K.empty_rel(md.bound), _budget(md, len(names)))
    dot = union_rel(nrm, chi)
    return close_calls(names, [s1(dot), s2(dot)], md, it, nrm)


def link_sem(s1: ModuleSem, s2: ModuleSem) -> ModuleSem:
    """``semantic_link`` as a constructor, so links can be linked again."""
    class _Linked(ModuleSem):
        def __call__(self, chi=None):
            chi = K.empty_rel(self.md.bound) if chi is None else chi
            if chi not in self._memo:
                self._memo[chi] = semantic_link(s1, s2, chi)
            return self._memo[chi]
    return _Linked(s1.dom | s2.dom, [], s1.md)


def merge_modules(m1: Module, m2: Module) -> Module:
    """Syntactic linking: put the procedures side by side."""
    g = m1.globals or m2.globals
    return Module(g, tuple(m1.procs) + tuple(m2.procs))
