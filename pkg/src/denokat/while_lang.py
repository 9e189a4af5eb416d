"""WHILE, WHILEE and trace-enriched WHILE denotations.

* :func:`denote_while` - type-safe WHILE, ``{nrm, dvg}`` with no events.
* :func:`denote_whilee` - adds abortion (division or modulo by zero), ``{nrm, err, dvg}``.
* :func:`denote_twhile` - adds ``print`` events, ``{nrm, err, fin_dvg, inf_dvg}``.

The traced evaluator :func:`tdenote` is shared with the STRUCT, BLOCK and
PCALL modules, which extend it through :class:`Ctx` hooks and extra control
channels (``brk``, ``ctn``, ``blk``, ``cll``, ``gto``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from . import kernel as K
from .kernel import (LassoSet, StateTraceSet, TracedRel, ValueDomain, compose_rel,
                     compose_rel_lasso, compose_rel_set, union_lasso, union_rel, union_sts)
from .syntax import (And, Assign, Bin, BoolLit, Choice, Cmp, Havoc, If, Not, Num, Or,
                     Print, Seq, Skip, Var, While, walk)


class LanguageError(ValueError):
    """A construct is not part of the language being denoted."""


ERR = None  # evaluation aborted


# ----------------------------------------------------------------- evaluation


def eval_expr(e, state: tuple, index: dict, m: int):
    """Value of ``e`` in ``state`` modulo ``m``; ``ERR`` on division by zero."""
    if isinstance(e, Num):
        return e.value % m
    if isinstance(e, Var):
        try:
            return state[index[e.name]]
        except KeyError:
            raise LanguageError(f"unknown variable {e.name}") from None
    if isinstance(e, Bin):
        a = eval_expr(e.left, state, index, m)
        if a is ERR:
            return ERR
        b = eval_expr(e.right, state, index, m)
        if b is ERR:
            return ERR
        if e.op == "+":
            return (a + b) % m
        if e.op == "-":
            return (a - b) % m
        if e.op == "*":
            return (a * b) % m
        if b == 0:
            return ERR
        return (a // b) % m if e.op == "/" else a % b
    raise LanguageError(f"not an arithmetic expression: {e!r}")


_CMP = {
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b, "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b, ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def eval_bool(b, state: tuple, index: dict, m: int):
    """Truth value of ``b``; ``ERR`` on abort.  ``and``/``or`` short-circuit."""
    if isinstance(b, BoolLit):
        return b.value
    if isinstance(b, Cmp):
        x = eval_expr(b.left, state, index, m)
        if x is ERR:
            return ERR
        y = eval_expr(b.right, state, index, m)
        if y is ERR:
            return ERR
        return _CMP[b.op](x, y)
    if isinstance(b, Not):
        x = eval_bool(b.arg, state, index, m)
        return ERR if x is ERR else not x
    if isinstance(b, And):
        x = eval_bool(b.left, state, index, m)
        if x is ERR or not x:
            return x
        return eval_bool(b.right, state, index, m)
    if isinstance(b, Or):
        x = eval_bool(b.left, state, index, m)
        if x is ERR or x:
            return x
        return eval_bool(b.right, state, index, m)
    raise LanguageError(f"not a boolean expression: {b!r}")


@dataclass(frozen=True)
class BDenote:
    tts: frozenset
    ffs: frozenset
    err: frozenset = frozenset()


def eval_bexp(b, dom: ValueDomain) -> BDenote:
    tts, ffs, err = set(), set(), set()
    for s in dom.states:
        v = eval_bool(b, s, dom.index, dom.modulus)
        (err if v is ERR else tts if v else ffs).add(s)
    return BDenote(frozenset(tts), frozenset(ffs), frozenset(err))


def atom_sets(s, dom: ValueDomain, bound: int):
    """``(nrm, err)`` of an atomic statement over ``dom``."""
    idx, m = dom.index, dom.modulus
    nrm, err = set(), set()
    if isinstance(s, Skip):
        nrm = {(x, (), x) for x in dom.states}
    elif isinstance(s, Assign):
        if s.var not in idx:
            raise LanguageError(f"unknown variable {s.var}")
        i = idx[s.var]
        for x in dom.states:
            v = eval_expr(s.expr, x, idx, m)
            if v is ERR:
                err.add((x, ()))
            else:
                nrm.add((x, (), x[:i] + (v,) + x[i + 1:]))
    elif isinstance(s, Havoc):
        if s.var not in idx:
            raise LanguageError(f"unknown variable {s.var}")
        i = idx[s.var]
        nrm = {(x, (), x[:i] + (v,) + x[i + 1:]) for x in dom.states for v in range(m)}
    elif isinstance(s, Print):
        if bound < 1:
            raise LanguageError("print needs a trace bound of at least 1")
        for x in dom.states:
            v = eval_expr(s.expr, x, idx, m)
            if v is ERR:
                err.add((x, ()))
            else:
                nrm.add((x, (v,), x))
    else:
        raise LanguageError(f"not an atom: {s!r}")
    return TracedRel(frozenset(nrm), bound), StateTraceSet(frozenset(err), bound)


# ------------------------------------------------------------ trace-free WHILE


@dataclass(frozen=True)
class CDenote:
    nrm: TracedRel
    dvg: frozenset


@dataclass(frozen=True)
class EDenote:
    nrm: TracedRel
    err: frozenset
    dvg: frozenset


def _nil(states, bound) -> StateTraceSet:
    return StateTraceSet(frozenset((s, ()) for s in states), bound)


def _pre(r: TracedRel, xs: frozenset) -> frozenset:
    return frozenset(a for a, _ in compose_rel_set(r, _nil(xs, r.bound)).pairs)


def _denote_plain(s, dom: ValueDomain, abort: bool) -> EDenote:
    # bound 0 keeps every relation event-free
    if isinstance(s, (Skip, Assign, Havoc)):
        if not abort and isinstance(s, Assign) and _aborts(s.expr):
            raise LanguageError("division or modulo needs WHILEE (denote_whilee)")
        nrm, err = atom_sets(s, dom, 0)
        return EDenote(nrm, frozenset(a for a, _ in err.pairs), frozenset())
    if isinstance(s, Print):
        raise LanguageError("print is not allowed in trace-free WHILE")
    if isinstance(s, Seq):
        d1 = _denote_plain(s.first, dom, abort)
        d2 = _denote_plain(s.second, dom, abort)
        return EDenote(compose_rel(d1.nrm, d2.nrm), d1.err | _pre(d1.nrm, d2.err),
                       d1.dvg | _pre(d1.nrm, d2.dvg))
    if isinstance(s, Choice):
        d1 = _denote_plain(s.left, dom, abort)
        d2 = _denote_plain(s.right, dom, abort)
        return EDenote(union_rel(d1.nrm, d2.nrm), d1.err | d2.err, d1.dvg | d2.dvg)
    if isinstance(s, If):
        b = _bexp_checked(s.cond, dom, abort)
        d1 = _denote_plain(s.then, dom, abort)
        d2 = _denote_plain(s.orelse, dom, abort)
        nrm = union_rel(compose_rel(K.test(b.tts, 0), d1.nrm), compose_rel(K.test(b.ffs, 0), d2.nrm))
        return EDenote(nrm, b.err | (b.tts & d1.err) | (b.ffs & d2.err),
                       (b.tts & d1.dvg) | (b.ffs & d2.dvg))
    if isinstance(s, While):
        b = _bexp_checked(s.cond, dom, abort)
        c = _denote_plain(s.body, dom, abort)
        step = compose_rel(K.test(b.tts, 0), c.nrm)
        loop = K.star(step, dom.states)
        nrm = compose_rel(loop, K.test(b.ffs, 0))
        err = _pre(loop, b.err | (b.tts & c.err))
        dvg = _pre(loop, b.tts & c.dvg) | frozenset(a for a, _ in K.omega_silent(step).pairs)
        return EDenote(nrm, err, dvg)
    raise LanguageError(f"{type(s).__name__} is not a WHILE statement")


def _aborts(e) -> bool:
    from .syntax import may_abort
    return may_abort(e)


def _bexp_checked(b, dom, abort) -> BDenote:
    if not abort and _aborts(b):
        raise LanguageError("division or modulo needs WHILEE (denote_whilee)")
    return eval_bexp(b, dom)


def denote_while(s, dom: ValueDomain) -> CDenote:
    """``{nrm, dvg}`` of a type-safe WHILE statement."""
    d = _denote_plain(s, dom, abort=False)
    return CDenote(d.nrm, d.dvg)


def denote_whilee(s, dom: ValueDomain) -> EDenote:
    """``{nrm, err, dvg}`` of a WHILEE statement (division by zero aborts)."""
    return _denote_plain(s, dom, abort=True)


# ------------------------------------------------------------- traced records


@dataclass(frozen=True)
class Behaviors:
    """Traced denotation record; ``chan`` holds extra exits such as ``brk``."""

    nrm: TracedRel
    err: StateTraceSet
    fin_dvg: StateTraceSet
    inf_dvg: LassoSet
    chan: tuple = ()

    def get(self, name) -> TracedRel:
        for k, v in self.chan:
            if k == name:
                return v
        return K.empty_rel(self.nrm.bound)

    @property
    def channels(self) -> dict:
        return dict(self.chan)

    def with_chan(self, **updates) -> "Behaviors":
        d = dict(self.chan)
        d.update(updates)
        return replace(self, chan=_chan(d))

    @property
    def truncated(self) -> bool:
        return any(x.truncated for x in (self.nrm, self.err, self.fin_dvg, self.inf_dvg)) or \
            any(v.truncated for _, v in self.chan)


TDenote = Behaviors


def _chan(d: dict) -> tuple:
    return tuple(sorted(((k, v) for k, v in d.items() if v), key=lambda kv: K.sort_key(kv[0])))


def empty_behaviors(bound: int) -> Behaviors:
    return Behaviors(K.empty_rel(bound), K.empty_sts(bound), K.empty_sts(bound), K.empty_lasso(bound))


def prefix(r: TracedRel, d: Behaviors, nrm: Optional[TracedRel] = None) -> Behaviors:
    """``r ∘ d`` applied to every field (``nrm`` replaced when given)."""
    return Behaviors(
        compose_rel(r, d.nrm) if nrm is None else nrm,
        compose_rel_set(r, d.err),
        compose_rel_set(r, d.fin_dvg),
        compose_rel_lasso(r, d.inf_dvg),
        _chan({k: compose_rel(r, v) for k, v in d.chan}),
    )


def union_b(*ds: Behaviors) -> Behaviors:
    keys = sorted({k for d in ds for k, _ in d.chan}, key=K.sort_key)
    return Behaviors(
        union_rel(*(d.nrm for d in ds)),
        union_sts(*(d.err for d in ds)),
        union_sts(*(d.fin_dvg for d in ds)),
        union_lasso(*(d.inf_dvg for d in ds)),
        _chan({k: union_rel(*(d.get(k) for d in ds)) for k in keys}),
    )


def seq_b(d1: Behaviors, d2: Behaviors) -> Behaviors:
    """Sequencing: ``nrm = N1∘N2`` and ``X = X1 ∪ N1∘X2`` for every other field."""
    tail = prefix(d1.nrm, d2)
    out = union_b(replace(d1, nrm=K.empty_rel(d1.nrm.bound)), tail)
    return replace(out, nrm=tail.nrm)


def if_b(b: BDenote, d1: Behaviors, d2: Behaviors, bound: int) -> Behaviors:
    out = union_b(prefix(K.test(b.tts, bound), d1), prefix(K.test(b.ffs, bound), d2))
    if b.err:
        out = replace(out, err=union_sts(out.err, _nil(b.err, bound)))
    return out


def iterate_b(step: TracedRel, exits: Behaviors, universe) -> Behaviors:
    """Loop closure: ``step* ∘ exits`` plus silent and reactive divergence of ``step``."""
    loop = K.star(step, universe)
    out = prefix(loop, exits)
    fin = union_sts(out.fin_dvg, compose_rel_set(loop, K.omega_silent(K.silent(step))))
    reactive = compose_rel(K.star(K.silent(step), universe), K.nonsilent(step))
    inf = union_lasso(out.inf_dvg, K.omega_lasso(reactive))
    return replace(out, fin_dvg=fin, inf_dvg=inf)


@dataclass(frozen=True)
class Ctx:
    """Evaluation context for :func:`tdenote`."""

    dom: ValueDomain
    bound: int = K.DEFAULT_BOUND
    hook: Optional[Callable] = None  # (stmt, ctx) -> Behaviors for extra constructs
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def universe(self):
        return self.dom.states


def tdenote(s, ctx: Ctx) -> Behaviors:
    """Trace-enriched denotation of ``s``; unknown constructs go to ``ctx.hook``."""
    bound = ctx.bound
    if isinstance(s, (Skip, Assign, Havoc, Print)):
        nrm, err = atom_sets(s, ctx.dom, bound)
        return replace(empty_behaviors(bound), nrm=nrm, err=err)
    if isinstance(s, Seq):
        return seq_b(tdenote(s.first, ctx), tdenote(s.second, ctx))
    if isinstance(s, Choice):
        return union_b(tdenote(s.left, ctx), tdenote(s.right, ctx))
    if isinstance(s, If):
        return if_b(eval_bexp(s.cond, ctx.dom), tdenote(s.then, ctx), tdenote(s.orelse, ctx), bound)
    if isinstance(s, While):
        b = eval_bexp(s.cond, ctx.dom)
        body = prefix(K.test(b.tts, bound), tdenote(s.body, ctx))
        exits = replace(body, nrm=K.test(b.ffs, bound))
        if b.err:
            exits = replace(exits, err=union_sts(exits.err, _nil(b.err, bound)))
        return iterate_b(body.nrm, exits, ctx.universe)
    if ctx.hook is not None:
        return ctx.hook(s, ctx)
    raise LanguageError(f"{type(s).__name__} is not part of trace-enriched WHILE")


def denote_twhile(s, dom: ValueDomain, bound: int = K.DEFAULT_BOUND) -> TDenote:
    """``{nrm, err, fin_dvg, inf_dvg}`` of a trace-enriched WHILE statement."""
    return tdenote(s, Ctx(dom, bound))


def dvg_states(d: Behaviors) -> frozenset:
    """Trace-free divergence: initial states of any fin or inf behavior."""
    return frozenset(a for a, _ in d.fin_dvg.pairs) | d.inf_dvg.live | d.fin_dvg.over


def uses_only(s, kinds) -> bool:
    return all(isinstance(x, kinds) for x in walk(s))
