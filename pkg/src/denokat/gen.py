"""Random and exhaustive program generators for property tests and the
acceptance runs.  All generators are driven by an explicit ``random.Random``."""

from __future__ import annotations

import itertools
import random
from typing import Iterator

from . import kernel as K
from .syntax import (Assign, Bin, BoolLit, Break, Call, CallI, CfgModule, CfgProc, Choice, Cmp, Cond,
                     Continue, Do, Havoc, If, Loop, Module, Num, Print, Procedure, Seq, Skip, Var,
                     While)


def rand_expr(rng: random.Random, vars_: tuple, depth: int = 2, aborts: bool = False):
    if depth <= 0 or rng.random() < 0.4:
        if vars_ and rng.random() < 0.6:
            return Var(rng.choice(vars_))
        return Num(rng.randrange(3))
    ops = "+-*/%" if aborts else "+-*"
    return Bin(rng.choice(ops), rand_expr(rng, vars_, depth - 1, aborts),
               rand_expr(rng, vars_, depth - 1, aborts))


def rand_bexp(rng: random.Random, vars_: tuple):
    if rng.random() < 0.1:
        return BoolLit(rng.random() < 0.5)
    return Cmp(rng.choice(("==", "!=", "<")), Var(rng.choice(vars_)), Num(rng.randrange(3)))


def rand_atom(rng: random.Random, vars_: tuple, events: bool = True, aborts: bool = False):
    k = rng.random()
    if k < 0.15:
        return Skip()
    if k < 0.6:
        return Assign(rng.choice(vars_), rand_expr(rng, vars_, 2, aborts))
    if k < 0.75:
        return Havoc(rng.choice(vars_))
    if events:
        return Print(Var(rng.choice(vars_)))
    return Skip()


def rand_while(rng: random.Random, vars_: tuple = ("x", "y"), depth: int = 4, *, events: bool = True,
               aborts: bool = True, choice: bool = True, loops: bool = True, calls: tuple = ()):
    """Random WHILE/PCALL statement of AST depth at most ``depth``."""
    if depth <= 1:
        if calls and rng.random() < 0.15:
            return Call(rng.choice(calls))
        return rand_atom(rng, vars_, events, aborts)
    k = rng.random()
    sub = dict(events=events, aborts=aborts, choice=choice, loops=loops, calls=calls)
    if k < 0.2:
        return rand_while(rng, vars_, 1, **sub)
    if k < 0.5:
        return Seq(rand_while(rng, vars_, depth - 1, **sub), rand_while(rng, vars_, depth - 1, **sub))
    if k < 0.65:
        return If(rand_bexp(rng, vars_), rand_while(rng, vars_, depth - 1, **sub),
                  rand_while(rng, vars_, depth - 1, **sub))
    if k < 0.8 and choice:
        return Choice(rand_while(rng, vars_, depth - 1, **sub), rand_while(rng, vars_, depth - 1, **sub))
    if loops:
        return While(rand_bexp(rng, vars_), rand_while(rng, vars_, depth - 1, **sub))
    return Seq(rand_while(rng, vars_, depth - 1, **sub), rand_while(rng, vars_, depth - 1, **sub))


# ---------------------------------------------------------------- STRUCT


STRUCT_ATOMS = (Assign("x", Bin("+", Var("x"), Num(1))), Print(Var("x")), Break(), Continue())
STRUCT_COND = Cmp("==", Var("x"), Num(0))


def enumerate_struct(depth: int, atoms: tuple = STRUCT_ATOMS) -> list:
    """All programs of the STRUCT corpus grammar up to AST depth ``depth``.

    ``s ::= a | a; s | if x == 0 then s else a | loop { s } { a }`` with ``a``
    an atom; one child of every compound node is an atom, so the count grows
    as ``|A| + 3|A|·n``.
    """
    level = list(atoms)
    for _ in range(depth - 1):
        nxt = list(atoms)
        for s, a in itertools.product(level, atoms):
            nxt.append(Seq(a, s))
            nxt.append(If(STRUCT_COND, s, a))
            nxt.append(Loop(s, a))
        level = nxt
    return level


def rand_struct(rng: random.Random, depth: int = 4):
    if depth <= 1 or rng.random() < 0.25:
        return rng.choice(STRUCT_ATOMS + (Skip(),))
    k = rng.randrange(4)
    a, b = rand_struct(rng, depth - 1), rand_struct(rng, depth - 1)
    if k == 0:
        return Seq(a, b)
    if k == 1:
        return If(STRUCT_COND, a, b)
    if k == 2:
        return Choice(a, b)
    return Loop(a, b)


# --------------------------------------------------------- PCALL modules


def rand_module(rng: random.Random, names: tuple = ("f", "g"), globals_: tuple = ("x",),
                locals_: tuple = ("a",), externals: tuple = (), depth: int = 3,
                loops: bool = True) -> Module:
    """A module whose procedures may call each other and ``externals``."""
    procs = []
    callees = tuple(names) + tuple(externals)
    for n in names:
        loc = tuple(l for l in locals_ if rng.random() < 0.7)
        body = rand_while(rng, tuple(globals_) + loc, depth, aborts=True, loops=loops, calls=callees)
        procs.append(Procedure(n, loc, body))
    return Module(tuple(globals_), tuple(procs))


def rand_oracle(rng: random.Random, names: tuple, gstates: tuple, bound: int = K.DEFAULT_BOUND,
                density: float = 0.5, events: tuple = (0, 1)) -> K.TracedRel:
    """Random ``χ`` over ``(name, g)`` queries: short traces, arbitrary replies."""
    out = set()
    for n in names:
        for g in gstates:
            for g2 in gstates:
                if rng.random() < density:
                    t = () if rng.random() < 0.6 else (rng.choice(events),)
                    out.add(((n, g), t, g2))
    return K.TracedRel(frozenset(out), bound)


def rand_abort_oracle(rng: random.Random, names: tuple, gstates: tuple, bound: int = K.DEFAULT_BOUND,
                      density: float = 0.3) -> K.StateTraceSet:
    out = {((n, g), ()) for n in names for g in gstates if rng.random() < density}
    return K.StateTraceSet(frozenset(out), bound)


# ------------------------------------------------------------------ CFG


def rand_cfg_proc(rng: random.Random, n_nodes: int = 5, vars_: tuple = ("x",), name: str = "main",
                  events: bool = True) -> CfgProc:
    """Random call-free CFG procedure over ``vars_`` treated as globals."""
    labels = [f"L{i}" for i in range(n_nodes)]
    targets = labels + ["Lexit"]
    nodes = []
    for l in labels:
        k = rng.random()
        if k < 0.3:
            nodes.append((l, Cond(rand_bexp(rng, vars_), rng.choice(targets), rng.choice(targets))))
        else:
            nodes.append((l, Do(rand_atom(rng, vars_, events, aborts=True), rng.choice(targets))))
    return CfgProc(name, (), "L0", "Lexit", tuple(nodes))


def rand_cfg_module(rng: random.Random, names: tuple = ("f", "g"), globals_: tuple = ("x",),
                    externals: tuple = (), n_nodes: int = 4) -> CfgModule:
    procs = []
    callees = tuple(names) + tuple(externals)
    for n in names:
        p = rand_cfg_proc(rng, n_nodes, globals_, n)
        nodes = [(l, CallI(rng.choice(callees), i.succ)) if isinstance(i, Do) and rng.random() < 0.2 else (l, i)
                 for l, i in p.nodes]
        procs.append(CfgProc(n, (), p.entry, p.exit, tuple(nodes)))
    return CfgModule(tuple(globals_), tuple(procs))


def seeds(base: int, n: int) -> Iterator[random.Random]:
    for i in range(n):
        yield random.Random(base * 1_000_003 + i)
