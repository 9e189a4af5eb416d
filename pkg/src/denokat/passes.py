"""Program transformations: skip removal, constant propagation, dead code
elimination (statement and CFG forms) and CFG generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .refine import AnalysisResult
from .syntax import (And, Assign, Bin, BoolLit, Call, CallI, CfgModule, CfgProc, Choice, Cmp,
                     Cond, Do, Goto, Havoc, If, Label, Module, Not, Num, Or, Print, Procedure, Seq,
                     Skip, Var, While, expr_vars, may_abort, successors, walk)
from .while_lang import ERR, LanguageError, eval_bool, eval_expr

SCRATCH = "__pick"  # CFG-generation choice variable, a fresh local


# --------------------------------------------------------------- skip removal


def remove_skips(s):
    """Drop ``skip`` from sequences; applies to statements, procedures, modules."""
    if isinstance(s, Module):
        return Module(s.globals, tuple(remove_skips(p) for p in s.procs))
    if isinstance(s, Procedure):
        return Procedure(s.name, s.locals, remove_skips(s.body))
    if isinstance(s, Seq):
        a, b = remove_skips(s.first), remove_skips(s.second)
        if isinstance(a, Skip):
            return b
        if isinstance(b, Skip):
            return a
        return Seq(a, b)
    if isinstance(s, If):
        return If(s.cond, remove_skips(s.then), remove_skips(s.orelse))
    if isinstance(s, Choice):
        return Choice(remove_skips(s.left), remove_skips(s.right))
    if isinstance(s, While):
        return While(s.cond, remove_skips(s.body))
    if isinstance(s, Label):
        return Label(s.name, remove_skips(s.body))
    if hasattr(s, "body") and hasattr(s, "step"):
        return type(s)(remove_skips(s.body), remove_skips(s.step))
    if hasattr(s, "body"):
        return type(s)(remove_skips(s.body))
    return s


# ------------------------------------------------------- constant propagation


def subst_fold(e, pi: Optional[AnalysisResult], m: int):
    """Replace known variables by their values and fold closed subterms.

    Subterms whose evaluation aborts are left alone, so abort behavior is kept.
    """
    facts = pi.as_dict() if pi is not None else {}

    def go(x):
        if isinstance(x, Var):
            return Num(facts[x.name]) if x.name in facts else x
        if isinstance(x, (Bin, Cmp, And, Or)):
            x = type(x)(x.op, go(x.left), go(x.right)) if isinstance(x, (Bin, Cmp)) else \
                type(x)(go(x.left), go(x.right))
        elif isinstance(x, Not):
            x = Not(go(x.arg))
        if expr_vars(x) or isinstance(x, (Num, BoolLit)):
            return x
        if isinstance(x, Bin):
            v = eval_expr(x, (), {}, m)
            return x if v is ERR else Num(v)
        v = eval_bool(x, (), {}, m)
        return x if v is ERR else BoolLit(v)
    return go(e)


def _join(a: Optional[AnalysisResult], b: Optional[AnalysisResult]) -> Optional[AnalysisResult]:
    if a is None:
        return b
    if b is None:
        return a
    return a.join(b)


def _kill(pi: Optional[AnalysisResult], names) -> Optional[AnalysisResult]:
    if pi is None:
        return None
    names = set(names)
    return AnalysisResult(tuple((x, v) for x, v in pi.facts if x not in names))


def _assign(pi: Optional[AnalysisResult], x: str, e, m: int) -> Optional[AnalysisResult]:
    if pi is None:
        return None
    rest = _kill(pi, [x])
    v = subst_fold(e, pi, m)
    if isinstance(v, Num):
        return AnalysisResult(rest.facts + ((x, v.value % m),))
    return rest


@dataclass
class ConstAnalysis:
    """Result of constant propagation: rewritten statement and annotations.

    ``points`` lists ``(original statement, π before, π after)`` for every
    statement in preorder; ``None`` marks an unreachable point.
    """

    stmt: object
    source: object
    before: Optional[AnalysisResult]
    after: Optional[AnalysisResult]
    points: list


class _CP:
    def __init__(self, m: int, globals_: tuple):
        self.m = m
        self.globals = tuple(globals_)
        self.points: list = []

    def run(self, s, pi):
        """``(rewritten, π after)``."""
        m = self.m
        slot = len(self.points)
        self.points.append(None)
        if isinstance(s, Skip):
            out, post = s, pi
        elif isinstance(s, Assign):
            out, post = Assign(s.var, subst_fold(s.expr, pi, m)), _assign(pi, s.var, s.expr, m)
        elif isinstance(s, Havoc):
            out, post = s, _kill(pi, [s.var])
        elif isinstance(s, Print):
            out, post = Print(subst_fold(s.expr, pi, m)), pi
        elif isinstance(s, Call):
            out, post = s, _kill(pi, self.globals)
        elif isinstance(s, Goto):
            out, post = s, None
        elif isinstance(s, Seq):
            a, mid = self.run(s.first, pi)
            b, post = self.run(s.second, mid)
            out = Seq(a, b)
        elif isinstance(s, If):
            t, p1 = self.run(s.then, pi)
            e, p2 = self.run(s.orelse, pi)
            out, post = If(subst_fold(s.cond, pi, m), t, e), _join(p1, p2)
        elif isinstance(s, Choice):
            a, p1 = self.run(s.left, pi)
            b, p2 = self.run(s.right, pi)
            out, post = Choice(a, b), _join(p1, p2)
        elif isinstance(s, While):
            head = pi
            while True:
                probe = _CP(m, self.globals)
                _, body_out = probe.run(s.body, head)
                nxt = _join(pi, body_out)
                if nxt == head:
                    break
                head = nxt
            body, _ = self.run(s.body, head)
            out, post = While(subst_fold(s.cond, head, m), body), head
        elif isinstance(s, Label):
            # gotos may enter here with any facts
            body, post = self.run(s.body, AnalysisResult())
            out = Label(s.name, body)
        else:
            raise LanguageError(f"constant propagation does not handle {type(s).__name__}")
        self.points[slot] = (s, pi, post)
        return out, post


def analyze_constants(s, pi0: Optional[AnalysisResult] = None, modulus: int = 3,
                      globals_: tuple = ()) -> ConstAnalysis:
    """Forward constant analysis with rewriting; ``globals_`` are killed by calls."""
    pi0 = AnalysisResult() if pi0 is None else pi0
    cp = _CP(modulus, globals_)
    out, post = cp.run(s, pi0)
    return ConstAnalysis(out, s, pi0, post, cp.points)


def seq_annotations(a: ConstAnalysis) -> list:
    """``π`` after each element of the top-level sequence of the analyzed statement."""
    out = []
    s = a.source
    by_id = {id(st): post for st, _, post in a.points}
    while isinstance(s, Seq):
        out.append(by_id[id(s.first)])
        s = s.second
    out.append(by_id[id(s)])
    return out


def const_prop(s, pi0: Optional[AnalysisResult] = None, modulus: int = 3, globals_: tuple = ()):
    return analyze_constants(s, pi0, modulus, globals_).stmt


def const_prop_module(m: Module, modulus: int) -> Module:
    """Per-procedure constant propagation; locals start at zero, calls kill globals."""
    procs = []
    for p in m.procs:
        pi0 = AnalysisResult(tuple((x, 0) for x in p.locals))
        procs.append(Procedure(p.name, p.locals, const_prop(p.body, pi0, modulus, m.globals)))
    return Module(m.globals, tuple(procs))


def const_prop_cfg_proc(p: CfgProc, globals_: tuple, modulus: int) -> CfgProc:
    g = p.graph
    facts: dict = {p.entry: AnalysisResult(tuple((x, 0) for x in p.locals))}
    order = [l for l, _ in p.nodes]
    changed = True
    while changed:
        changed = False
        for l in order:
            pin = facts.get(l)
            if pin is None:
                continue
            ins = g[l]
            if isinstance(ins, Do):
                a = ins.atom
                if isinstance(a, Assign):
                    post = _assign(pin, a.var, a.expr, modulus)
                elif isinstance(a, Havoc):
                    post = _kill(pin, [a.var])
                else:
                    post = pin
            elif isinstance(ins, CallI):
                post = _kill(pin, globals_)
            else:
                post = pin
            for s in successors(ins):
                new = _join(facts.get(s), post)
                if new != facts.get(s):
                    facts[s] = new
                    changed = True
    nodes = []
    for l, ins in p.nodes:
        pin = facts.get(l)
        if isinstance(ins, Do):
            a = ins.atom
            if isinstance(a, Assign):
                a = Assign(a.var, subst_fold(a.expr, pin, modulus))
            elif isinstance(a, Print):
                a = Print(subst_fold(a.expr, pin, modulus))
            ins = Do(a, ins.succ)
        elif isinstance(ins, Cond):
            ins = Cond(subst_fold(ins.cond, pin, modulus), ins.succ_true, ins.succ_false)
        nodes.append((l, ins))
    return CfgProc(p.name, p.locals, p.entry, p.exit, tuple(nodes))


def const_prop_cfg(m: CfgModule, modulus: int) -> CfgModule:
    return CfgModule(m.globals, tuple(const_prop_cfg_proc(p, m.globals, modulus) for p in m.procs))


# ------------------------------------------------------- dead code elimination


class _DCE:
    def __init__(self, globals_: tuple):
        self.globals = frozenset(globals_)

    def run(self, s, live: frozenset):
        """``(rewritten, live before)``; only abort-free assignments are removed."""
        if isinstance(s, Skip):
            return s, live
        if isinstance(s, Assign):
            if s.var not in live and not may_abort(s.expr):
                return Skip(), live
            return s, (live - {s.var}) | expr_vars(s.expr)
        if isinstance(s, Havoc):
            return s, live - {s.var}
        if isinstance(s, Print):
            return s, live | expr_vars(s.expr)
        if isinstance(s, Call):
            return s, live | self.globals
        if isinstance(s, Seq):
            b, mid = self.run(s.second, live)
            a, pre = self.run(s.first, mid)
            return Seq(a, b), pre
        if isinstance(s, If):
            t, l1 = self.run(s.then, live)
            e, l2 = self.run(s.orelse, live)
            return If(s.cond, t, e), l1 | l2 | expr_vars(s.cond)
        if isinstance(s, Choice):
            a, l1 = self.run(s.left, live)
            b, l2 = self.run(s.right, live)
            return Choice(a, b), l1 | l2
        if isinstance(s, While):
            head = live | expr_vars(s.cond)
            while True:
                _, lb = self.run(s.body, head)
                nxt = head | lb
                if nxt == head:
                    break
                head = nxt
            body, _ = self.run(s.body, head)
            return While(s.cond, body), head
        raise LanguageError(f"dead code elimination does not handle {type(s).__name__}")


def dead_code_elim(s, live_out, globals_: tuple = ()):
    """Remove assignments to variables not live afterwards.

    Bodies containing ``goto`` or labels are returned unchanged.
    """
    if any(isinstance(x, (Goto, Label)) for x in walk(s)):
        return s
    return _DCE(globals_).run(s, frozenset(live_out))[0]


def dce_module(m: Module) -> Module:
    return Module(m.globals, tuple(Procedure(p.name, p.locals, dead_code_elim(p.body, m.globals, m.globals))
                                   for p in m.procs))


def dce_cfg_proc(p: CfgProc, globals_: tuple) -> CfgProc:
    glob = frozenset(globals_)
    live_in: dict = {p.exit: glob}

    def out_of(ins):
        return frozenset().union(*(live_in.get(s, frozenset()) for s in successors(ins)))

    changed = True
    while changed:
        changed = False
        for l, ins in reversed(p.nodes):
            lo = out_of(ins)
            if isinstance(ins, Do):
                a = ins.atom
                if isinstance(a, Assign):
                    li = lo if (a.var not in lo and not may_abort(a.expr)) else \
                        (lo - {a.var}) | expr_vars(a.expr)
                elif isinstance(a, Havoc):
                    li = lo - {a.var}
                elif isinstance(a, Print):
                    li = lo | expr_vars(a.expr)
                else:
                    li = lo
            elif isinstance(ins, CallI):
                li = lo | glob
            else:
                li = lo | expr_vars(ins.cond)
            if li != live_in.get(l):
                live_in[l] = li
                changed = True
    nodes = []
    for l, ins in p.nodes:
        if isinstance(ins, Do) and isinstance(ins.atom, Assign):
            a = ins.atom
            if a.var not in out_of(ins) and not may_abort(a.expr):
                ins = Do(Skip(), ins.succ)
        nodes.append((l, ins))
    return CfgProc(p.name, p.locals, p.entry, p.exit, tuple(nodes))


def dce_cfg(m: CfgModule) -> CfgModule:
    return CfgModule(m.globals, tuple(dce_cfg_proc(p, m.globals) for p in m.procs))


# ------------------------------------------------------------ CFG generation


class _Gen:
    def __init__(self):
        self.nodes: dict = {}
        self.n = 0
        self.uses_scratch = False

    def fresh(self) -> str:
        self.n += 1
        return f"t{self.n}"

    def emit(self, ins) -> str:
        l = self.fresh()
        self.nodes[l] = ins
        return l

    def tr(self, s, succ: str) -> str:
        if isinstance(s, (Skip, Assign, Havoc, Print)):
            return self.emit(Do(s, succ))
        if isinstance(s, Call):
            return self.emit(CallI(s.name, succ))
        if isinstance(s, Seq):
            return self.tr(s.first, self.tr(s.second, succ))
        if isinstance(s, If):
            return self.emit(Cond(s.cond, self.tr(s.then, succ), self.tr(s.orelse, succ)))
        if isinstance(s, Choice):
            self.uses_scratch = True
            test = self.emit(Cond(Cmp("==", Var(SCRATCH), Num(0)), self.tr(s.left, succ),
                                  self.tr(s.right, succ)))
            return self.emit(Do(Havoc(SCRATCH), test))
        if isinstance(s, While):
            head = self.fresh()
            body = self.tr(s.body, head)
            self.nodes[head] = Cond(s.cond, body, succ)
            return head
        raise LanguageError(f"CFG generation does not handle {type(s).__name__}")


def _renumber(entry: str, exit_: str, nodes: dict) -> tuple:
    """Rename labels ``L0, L1, ...`` in depth-first preorder from the entry."""
    names: dict = {}
    stack = [entry]
    while stack:
        l = stack.pop()
        if l in names or l == exit_:
            continue
        names[l] = f"L{len(names)}"
        stack.extend(reversed(successors(nodes[l])))
    names[exit_] = "Lexit"

    def ren(ins):
        if isinstance(ins, Do):
            return Do(ins.atom, names[ins.succ])
        if isinstance(ins, CallI):
            return CallI(ins.name, names[ins.succ])
        return Cond(ins.cond, names[ins.succ_true], names[ins.succ_false])
    out = tuple(sorted(((names[l], ren(i)) for l, i in nodes.items() if l in names),
                       key=lambda x: (len(x[0]), x[0])))
    return names[entry], names[exit_], out


def gen_cfg_proc(p: Procedure) -> CfgProc:
    if SCRATCH in p.locals:
        raise LanguageError(f"{SCRATCH} is reserved")
    gen = _Gen()
    entry = gen.tr(p.body, "exit")
    locals_ = tuple(p.locals) + ((SCRATCH,) if gen.uses_scratch else ())
    e, x, nodes = _renumber(entry, "exit", gen.nodes)
    return CfgProc(p.name, locals_, e, x, nodes)


def gen_cfg(m: Module) -> CfgModule:
    """Translate a goto-free PCALL module; ``choice`` becomes a havoc of a
    fresh local followed by a test on it."""
    return CfgModule(m.globals, tuple(gen_cfg_proc(p) for p in m.procs))
