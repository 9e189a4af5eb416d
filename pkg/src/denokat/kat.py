"""Kleene algebra with tests over abstract symbols: a decision procedure for
(in)equations via Antimirov partial derivatives on guarded strings, plus a
relational interpretation into the kernel for soundness fuzzing.

Text syntax: ``0 1 p q [t] [!t] e+f e;f e* e^w`` with parentheses; ``+`` binds
loosest, postfix ``*`` and ``^w`` tightest.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import Optional

from . import kernel as K
from .kernel import TracedRel


class KatUndecided(ValueError):
    """Omega terms on the two sides are not syntactically equal."""


class KatSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Prim:
    name: str


@dataclass(frozen=True)
class Test:
    name: str


@dataclass(frozen=True)
class NegTest:
    name: str


@dataclass(frozen=True)
class Union:
    left: object
    right: object


@dataclass(frozen=True)
class Comp:
    left: object
    right: object


@dataclass(frozen=True)
class Star:
    arg: object


@dataclass(frozen=True)
class Omega:
    arg: object


ZERO, ONE = Zero(), One()


# ---------------------------------------------------------- smart constructors


def _key(e) -> str:
    return show(e)


def union(a, b):
    if isinstance(a, Zero):
        return b
    if isinstance(b, Zero):
        return a
    parts = sorted(set(_flat_union(a) + _flat_union(b)), key=_key)
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Union(p, out)
    return out


def _flat_union(e) -> list:
    if isinstance(e, Union):
        return _flat_union(e.left) + _flat_union(e.right)
    return [e]


def comp(a, b):
    if isinstance(a, Zero) or isinstance(b, Zero):
        return ZERO
    if isinstance(a, One):
        return b
    if isinstance(b, One):
        return a
    if isinstance(a, Comp):
        return comp(a.left, comp(a.right, b))
    return Comp(a, b)


def star(a):
    if isinstance(a, (Zero, One, Test, NegTest)):
        return ONE
    if isinstance(a, Star):
        return a
    if isinstance(a, Union):
        # (1 + e)* = e*, tests under a star are irrelevant
        rest = [p for p in _flat_union(a) if not isinstance(p, (One, Test, NegTest))]
        if len(rest) != len(_flat_union(a)):
            inner = ZERO
            for p in rest:
                inner = union(inner, p)
            return star(inner)
    return Star(a)


def normalize(e):
    """Rebuild ``e`` with the smart constructors (star normalization)."""
    if isinstance(e, Union):
        return union(normalize(e.left), normalize(e.right))
    if isinstance(e, Comp):
        return comp(normalize(e.left), normalize(e.right))
    if isinstance(e, Star):
        return star(normalize(e.arg))
    if isinstance(e, Omega):
        return Omega(normalize(e.arg))
    return e


# ----------------------------------------------------------------------- text


_TOK = re.compile(r"\s*(?:(\^w)|(\[!?[A-Za-z_][A-Za-z_0-9]*\])|([A-Za-z_][A-Za-z_0-9]*)|([01])|([+;*()]))")


def parse(text: str):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            raise KatSyntaxError(f"bad KAT syntax at {text[pos:]!r}")
        toks.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    toks.append("<eof>")
    i = 0

    def peek():
        return toks[i]

    def eat(t=None):
        nonlocal i
        tok = toks[i]
        if t is not None and tok != t:
            raise KatSyntaxError(f"expected {t!r}, found {tok!r}")
        i += 1
        return tok

    def expr():
        e = term()
        while peek() == "+":
            eat()
            e = Union(e, term())
        return e

    def term():
        e = factor()
        while peek() == ";":
            eat()
            e = Comp(e, factor())
        return e

    def factor():
        e = atom()
        while peek() in ("*", "^w"):
            e = Star(e) if eat() == "*" else Omega(e)
        return e

    def atom():
        t = eat()
        if t == "(":
            e = expr()
            eat(")")
            return e
        if t == "0":
            return ZERO
        if t == "1":
            return ONE
        if t.startswith("[!"):
            return NegTest(t[2:-1])
        if t.startswith("["):
            return Test(t[1:-1])
        if re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", t):
            return Prim(t)
        raise KatSyntaxError(f"unexpected {t!r}")

    e = expr()
    if peek() != "<eof>":
        raise KatSyntaxError(f"trailing input at {peek()!r}")
    return e


def show(e) -> str:
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, One):
        return "1"
    if isinstance(e, Prim):
        return e.name
    if isinstance(e, Test):
        return f"[{e.name}]"
    if isinstance(e, NegTest):
        return f"[!{e.name}]"
    if isinstance(e, Union):
        return f"({show(e.left)} + {show(e.right)})"
    if isinstance(e, Comp):
        return f"({show(e.left)} ; {show(e.right)})"
    if isinstance(e, Star):
        return f"{show(e.arg)}*"
    if isinstance(e, Omega):
        return f"{show(e.arg)}^w"
    raise TypeError(e)


def symbols(e) -> tuple:
    """``(primitive names, test names)`` occurring in ``e``."""
    ps, ts = set(), set()

    def go(x):
        if isinstance(x, Prim):
            ps.add(x.name)
        elif isinstance(x, (Test, NegTest)):
            ts.add(x.name)
        elif isinstance(x, (Union, Comp)):
            go(x.left)
            go(x.right)
        elif isinstance(x, (Star, Omega)):
            go(x.arg)
    go(e)
    return ps, ts


def has_omega(e) -> bool:
    if isinstance(e, Omega):
        return True
    if isinstance(e, (Union, Comp)):
        return has_omega(e.left) or has_omega(e.right)
    if isinstance(e, Star):
        return has_omega(e.arg)
    return False


# -------------------------------------------------------- guarded derivatives


def _accepts(e, atom: dict) -> bool:
    """``E_α(e)``: does ``e`` accept the guarded string consisting of ``α`` only?"""
    if isinstance(e, One) or isinstance(e, Star):
        return True
    if isinstance(e, (Zero, Prim)):
        return False
    if isinstance(e, Test):
        return atom[e.name]
    if isinstance(e, NegTest):
        return not atom[e.name]
    if isinstance(e, Union):
        return _accepts(e.left, atom) or _accepts(e.right, atom)
    if isinstance(e, Comp):
        return _accepts(e.left, atom) and _accepts(e.right, atom)
    raise TypeError(e)


def _deriv(e, atom: dict, p: str) -> frozenset:
    """Antimirov partial derivative of ``e`` by the guarded letter ``α p``."""
    if isinstance(e, (Zero, One, Test, NegTest)):
        return frozenset()
    if isinstance(e, Prim):
        return frozenset([ONE]) if e.name == p else frozenset()
    if isinstance(e, Union):
        return _deriv(e.left, atom, p) | _deriv(e.right, atom, p)
    if isinstance(e, Comp):
        out = frozenset(comp(d, e.right) for d in _deriv(e.left, atom, p))
        if _accepts(e.left, atom):
            out |= _deriv(e.right, atom, p)
        return out
    if isinstance(e, Star):
        return frozenset(comp(d, e) for d in _deriv(e.arg, atom, p))
    raise TypeError(e)


def _atoms(tests) -> list:
    tests = sorted(tests)
    return [dict(zip(tests, bits)) for bits in itertools.product((False, True), repeat=len(tests))]


def _leq_finite(lhs, rhs) -> Optional[tuple]:
    """``None`` if ``L(lhs) ⊆ L(rhs)`` over guarded strings, else a witness."""
    ps1, ts1 = symbols(lhs)
    ps2, ts2 = symbols(rhs)
    prims = sorted(ps1 | ps2)
    atoms = _atoms(ts1 | ts2)
    start = (frozenset([lhs]), frozenset([rhs]))
    seen = {start}
    todo = [(start, ())]
    while todo:
        (ls, rs), word = todo.pop()
        for a in atoms:
            if any(_accepts(e, a) for e in ls) and not any(_accepts(e, a) for e in rs):
                return word + (tuple(sorted(a.items())),)
            for p in prims:
                l2 = frozenset().union(*(_deriv(e, a, p) for e in ls))
                if not l2:
                    continue
                r2 = frozenset().union(*(_deriv(e, a, p) for e in rs))
                nxt = (l2, r2)
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append((nxt, word + (tuple(sorted(a.items())), p)))
    return None


def _split(e) -> tuple:
    """Split a side into its omega-free part and ``(prefix, Omega arg)`` terms."""
    fin = ZERO
    inf = []
    for t in _flat_union(normalize(e)):
        if not has_omega(t):
            fin = union(fin, t)
            continue
        if isinstance(t, Omega) and not has_omega(t.arg):
            inf.append((ONE, t.arg))
            continue
        parts = []
        x = t
        while isinstance(x, Comp):
            parts.append(x.left)
            x = x.right
        if isinstance(x, Omega) and not has_omega(x.arg) and not any(has_omega(y) for y in parts):
            pre = ONE
            for y in reversed(parts):
                pre = comp(y, pre)
            inf.append((pre, x.arg))
            continue
        raise KatUndecided(f"omega is only supported at the end of a top-level term: {show(t)}")
    return fin, inf


def decide_leq(lhs, rhs) -> bool:
    """Guarded-string inclusion; omega terms must match syntactically."""
    if isinstance(lhs, str):
        lhs = parse(lhs)
    if isinstance(rhs, str):
        rhs = parse(rhs)
    fl, il = _split(lhs)
    fr, ir = _split(rhs)
    if _leq_finite(fl, fr) is not None:
        return False
    for pre, g in il:
        cands = [p for p, h in ir if h == g]
        if not cands:
            raise KatUndecided(f"no omega term {show(g)}^w on the right-hand side")
        total = ZERO
        for p in cands:
            total = union(total, p)
        if _leq_finite(pre, total) is not None:
            raise KatUndecided(f"omega prefixes differ for {show(g)}^w")
    return True


def decide_eq(lhs, rhs) -> bool:
    return decide_leq(lhs, rhs) and decide_leq(rhs, lhs)


def counterexample(lhs, rhs) -> Optional[tuple]:
    """A guarded string in ``lhs`` but not in ``rhs`` (omega-free sides)."""
    if isinstance(lhs, str):
        lhs = parse(lhs)
    if isinstance(rhs, str):
        rhs = parse(rhs)
    return _leq_finite(normalize(lhs), normalize(rhs))


# ------------------------------------------------------------- interpretation


def interpret(e, env: dict, universe, bound: int = K.DEFAULT_BOUND) -> TracedRel:
    """Homomorphic image: primitives map to relations, tests to state sets."""
    universe = list(universe)
    if isinstance(e, Zero):
        return K.empty_rel(bound)
    if isinstance(e, One):
        return K.id_rel(universe, bound)
    if isinstance(e, Prim):
        return env[e.name]
    if isinstance(e, Test):
        return K.test(env[e.name], bound)
    if isinstance(e, NegTest):
        keep = set(env[e.name])
        return K.test([s for s in universe if s not in keep], bound)
    if isinstance(e, Union):
        return K.union_rel(interpret(e.left, env, universe, bound), interpret(e.right, env, universe, bound))
    if isinstance(e, Comp):
        return K.compose_rel(interpret(e.left, env, universe, bound), interpret(e.right, env, universe, bound))
    if isinstance(e, Star):
        return K.star(interpret(e.arg, env, universe, bound), universe)
    raise KatUndecided(f"{show(e)} has no relational interpretation")


# ----------------------------------------------------------- identity suites

# Kleene algebra and test-algebra identities, as (lhs, rhs) text equations
AXIOMS = (
    ("p + (q + r)", "(p + q) + r"),
    ("p + q", "q + p"),
    ("p + 0", "p"),
    ("p + p", "p"),
    ("p ; (q ; r)", "(p ; q) ; r"),
    ("1 ; p", "p"),
    ("p ; 1", "p"),
    ("0 ; p", "0"),
    ("p ; 0", "0"),
    ("p ; (q + r)", "p ; q + p ; r"),
    ("(p + q) ; r", "p ; r + q ; r"),
    ("1 + p ; p*", "p*"),
    ("1 + p* ; p", "p*"),
    ("p* ; p*", "p*"),
    ("(p*)*", "p*"),
    ("(p + q)*", "p* ; (q ; p*)*"),
    ("(p ; q)* ; p", "p ; (q ; p)*"),
    ("[t] ; [!t]", "0"),
    ("[!t] ; [t]", "0"),
    ("[t] + [!t]", "1"),
    ("[t] ; [t]", "[t]"),
    ("[t] ; [u]", "[u] ; [t]"),
    ("[t] ; p + [!t] ; p", "p"),
    ("([t] ; p)* ; [!t]", "[!t] + [t] ; p ; ([t] ; p)* ; [!t]"),
    ("p^w + p^w", "p^w"),
    ("q ; p^w + r ; p^w", "(q + r) ; p^w"),
)

# loop proof goals for STRUCT loops: n/c/b are nrm/ctn/brk of the body,
# q/d the nrm/brk of the step, e1/e2 the lifted aborts
PROOF_GOALS = (
    ("((n + c) ; q)* ; (b + (n + c) ; d)", "((n + c) ; q)* ; (b + (n + c) ; d)"),
    ("((n + c) ; q)* ; (e1 + (e1 + e1) + (n + c) ; e2 + (e1 + e1) + (n + c) ; e2)",
     "((n + c) ; q)* ; (e1 + (n + c) ; e2)"),
    ("(n ; q + c ; q)* ; (b + n ; d + c ; d)", "((n + c) ; q)* ; (b + (n + c) ; d)"),
    ("e1 + n ; e2", "e1 + (n + c) ; e2"),
    ("(n ; q)* ; e1 + (n ; q)* ; n ; e2", "(n ; q)* ; (e1 + n ; e2)"),
    ("((n + c) ; q)* ; (n + c) ; q", "((n + c) ; q)* ; ((n + c) ; q)*"),
)


def suite_results() -> list:
    """``(lhs, rhs, kind, verdict)`` for every axiom (equality) and goal (inclusion)."""
    out = []
    for lhs, rhs in AXIOMS:
        out.append((lhs, rhs, "eq", decide_eq(lhs, rhs)))
    for lhs, rhs in PROOF_GOALS:
        out.append((lhs, rhs, "leq", decide_leq(lhs, rhs)))
    return out


def random_expr(rng, prims=("p", "q"), tests=("t",), depth: int = 3):
    if depth <= 0 or rng.random() < 0.3:
        k = rng.random()
        if k < 0.6:
            return Prim(rng.choice(prims))
        if k < 0.8:
            t = rng.choice(tests)
            return Test(t) if rng.random() < 0.5 else NegTest(t)
        return ONE if rng.random() < 0.7 else ZERO
    k = rng.randrange(3)
    if k == 0:
        return Union(random_expr(rng, prims, tests, depth - 1), random_expr(rng, prims, tests, depth - 1))
    if k == 1:
        return Comp(random_expr(rng, prims, tests, depth - 1), random_expr(rng, prims, tests, depth - 1))
    return Star(random_expr(rng, prims, tests, depth - 1))


def _true_pair(rng, prims, tests):
    """A random pair likely to satisfy ``lhs ≤ rhs``, by construction or chance."""
    a = random_expr(rng, prims, tests)
    b = random_expr(rng, prims, tests)
    k = rng.randrange(5)
    if k == 0:
        return a, Union(a, b)
    if k == 1:
        return Comp(a, b), Comp(Union(a, random_expr(rng, prims, tests, 1)), Star(b))
    if k == 2:
        return Star(Comp(a, b)), Star(Union(a, b))
    if k == 3:
        return Comp(Star(a), Star(a)), Star(a)
    return a, b


def random_env(rng, prims, tests, states, bound: int, events=(0, 1)) -> dict:
    env = {}
    for p in prims:
        env[p] = K.TracedRel(frozenset(
            (a, () if rng.random() < 0.6 else (rng.choice(events),), b)
            for a in states for b in states if rng.random() < 0.3), bound)
    for t in tests:
        env[t] = frozenset(s for s in states if rng.random() < 0.5)
    return env


@dataclass
class FuzzReport:
    true_cases: int
    false_cases: int
    unsound: list  # (lhs, rhs, witness triple)


def soundness_fuzz(cases: int = 1000, seed: int = 0, bound: int = 4, states=(0, 1, 2)) -> FuzzReport:
    """Check ``interpret(lhs) ⊆ interpret(rhs)`` for ``cases`` pairs decided true."""
    rng = random.Random(seed)
    prims, tests = ("p", "q"), ("t",)
    trues = falses = 0
    unsound = []
    while trues < cases:
        lhs, rhs = _true_pair(rng, prims, tests)
        if not decide_leq(lhs, rhs):
            falses += 1
            continue
        trues += 1
        env = random_env(rng, prims, tests, states, bound)
        left = interpret(lhs, env, states, bound)
        right = interpret(rhs, env, states, bound)
        extra = left.triples - right.triples
        if extra:
            unsound.append((show(lhs), show(rhs), K.ordered(extra)[0]))
    return FuzzReport(trues, falses, unsound)
