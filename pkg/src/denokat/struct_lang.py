"""STRUCT (loop/break/continue) and BLOCK (block/exit/Sloop) denotations, and
the syntax-directed lowering from the former to the latter."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import kernel as K
from .kernel import LassoSet, StateTraceSet, TracedRel, ValueDomain, compose_rel_set, union_rel, union_sts
from .syntax import (Assign, Block, Break, Choice, Continue, Exit, Havoc, If, Loop, Print, Seq,
                     Skip, Sloop)
from .while_lang import Behaviors, Ctx, LanguageError, empty_behaviors, iterate_b, prefix, tdenote

_STRUCT_ATOMS = (Skip, Assign, Havoc, Print, Seq, If, Choice)


@dataclass(frozen=True)
class SDenote:
    nrm: TracedRel
    brk: TracedRel
    ctn: TracedRel
    err: StateTraceSet
    fin_dvg: StateTraceSet
    inf_dvg: LassoSet

    @classmethod
    def of(cls, b: Behaviors) -> "SDenote":
        return cls(b.nrm, b.get("brk"), b.get("ctn"), b.err, b.fin_dvg, b.inf_dvg)


@dataclass(frozen=True)
class UDenote:
    nrm: TracedRel
    blk: tuple  # ((n, TracedRel), ...) with nonempty relations only
    err: StateTraceSet
    fin_dvg: StateTraceSet
    inf_dvg: LassoSet

    def blk_n(self, n: int) -> TracedRel:
        for k, r in self.blk:
            if k == n:
                return r
        return K.empty_rel(self.nrm.bound)

    @property
    def max_exit(self) -> int:
        return max((k for k, _ in self.blk), default=-1)

    @classmethod
    def of(cls, b: Behaviors) -> "UDenote":
        blk = tuple(sorted((k[1], r) for k, r in b.chan if isinstance(k, tuple) and k[0] == "blk"))
        return cls(b.nrm, blk, b.err, b.fin_dvg, b.inf_dvg)


def _forget_final(r: TracedRel) -> StateTraceSet:
    """∇: project the final state out of a relation."""
    return StateTraceSet(frozenset((a, t) for a, t, _ in r.triples), r.bound,
                         frozenset(a for a, _ in r.over))


def _struct_hook(s, ctx: Ctx) -> Behaviors:
    bound = ctx.bound
    ident = K.id_rel(ctx.universe, bound)
    if isinstance(s, Break):
        return empty_behaviors(bound).with_chan(brk=ident)
    if isinstance(s, Continue):
        return empty_behaviors(bound).with_chan(ctn=ident)
    if isinstance(s, Loop):
        d1 = tdenote(s.body, ctx)
        d2 = tdenote(s.step, ctx)
        n1 = union_rel(d1.nrm, d1.get("ctn"))
        tail = prefix(n1, d2)
        n12 = tail.nrm
        exits = Behaviors(
            union_rel(d1.get("brk"), tail.get("brk")),
            # a continue inside the step part has nowhere to go
            union_sts(d1.err, tail.err, compose_rel_set(n1, _forget_final(d2.get("ctn")))),
            union_sts(d1.fin_dvg, tail.fin_dvg),
            K.union_lasso(d1.inf_dvg, tail.inf_dvg),
        )
        return iterate_b(n12, exits, ctx.universe)
    raise LanguageError(f"{type(s).__name__} is not a STRUCT statement")


def _block_hook(s, ctx: Ctx) -> Behaviors:
    bound = ctx.bound
    if isinstance(s, Exit):
        if s.depth < 0:
            raise LanguageError("exit depth must be a natural number")
        return replace(empty_behaviors(bound), chan=((("blk", s.depth), K.id_rel(ctx.universe, bound)),))
    if isinstance(s, Block):
        u = tdenote(s.body, ctx)
        chans = {}
        for k, r in u.chan:
            if isinstance(k, tuple) and k[0] == "blk" and k[1] > 0:
                chans[("blk", k[1] - 1)] = r
        nrm = union_rel(u.nrm, u.get(("blk", 0)))
        return replace(u, nrm=nrm, chan=tuple(sorted(chans.items(), key=lambda kv: kv[0][1])))
    if isinstance(s, Sloop):
        u = tdenote(s.body, ctx)
        return iterate_b(u.nrm, replace(u, nrm=K.empty_rel(bound)), ctx.universe)
    raise LanguageError(f"{type(s).__name__} is not a BLOCK statement")


def denote_struct(s, dom: ValueDomain, bound: int = K.DEFAULT_BOUND) -> SDenote:
    return SDenote.of(tdenote(s, Ctx(dom, bound, _struct_hook)))


def denote_block(u, dom: ValueDomain, bound: int = K.DEFAULT_BOUND) -> UDenote:
    return UDenote.of(tdenote(u, Ctx(dom, bound, _block_hook)))


def lower_struct(s, n_b: int, n_c: int) -> Optional[object]:
    """Lower STRUCT control flow onto nested blocks; ``None`` if ``n_b == n_c``
    or the input is not a STRUCT statement."""
    if n_b == n_c or n_b < 0 or n_c < 0:
        return None
    if isinstance(s, (Skip, Assign, Havoc, Print)):
        return s
    if isinstance(s, Break):
        return Exit(n_b)
    if isinstance(s, Continue):
        return Exit(n_c)
    if isinstance(s, Seq):
        a, b = lower_struct(s.first, n_b, n_c), lower_struct(s.second, n_b, n_c)
        return None if a is None or b is None else Seq(a, b)
    if isinstance(s, If):
        a, b = lower_struct(s.then, n_b, n_c), lower_struct(s.orelse, n_b, n_c)
        return None if a is None or b is None else If(s.cond, a, b)
    if isinstance(s, Choice):
        a, b = lower_struct(s.left, n_b, n_c), lower_struct(s.right, n_b, n_c)
        return None if a is None or b is None else Choice(a, b)
    if isinstance(s, Loop):
        u1 = lower_struct(s.body, 1, 0)
        u2 = lower_struct(s.step, 0, n_c + 1)
        if u1 is None or u2 is None:
            return None
        return Block(Sloop(Seq(Block(u1), u2)))
    return None
