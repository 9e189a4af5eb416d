"""Finite semantic domains, typed-KAT operators and fixed points.

Every behavior set is stored *bounded-exact*: it holds exactly the members of
the true (possibly infinite) set whose trace fits the trace bound ``L``.  Next
to the members each set records where the true set has more than it lists:

* ``TracedRel.over`` - endpoint pairs ``(a, b)`` joined by some true triple
  whose trace is longer than ``L``;
* ``StateTraceSet.over`` - sources with a true member longer than ``L``;
* ``LassoSet`` - ``live`` is the exact set of sources with any infinite
  behavior, ``partial`` the sources whose listed lassos may miss a lasso of
  canonical size ``<= L``, and ``over`` the sources whose true set is larger
  than the listing (``partial`` plus words too big or not eventually periodic).

``truncated`` is ``bool(over)``; a set with ``truncated == False`` is the exact
denotation.  Nodes are arbitrary hashable values so that the same machinery
serves program states, (label, state) pairs and procedure queries.

Events are plain ints (``Out v`` is ``v``); traces are tuples of ints; a lasso
is a ``(prefix, cycle)`` pair of traces in canonical form.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable

if os.environ.get("DENOKAT_PURE"):
    from . import _kernels_py as _k
else:
    try:
        from . import _kernels as _k  # type: ignore[attr-defined]
    except ImportError:  # no compiler at install time
        from . import _kernels_py as _k

BACKEND = "cython" if _k.__name__.endswith("_kernels") else "python"

Node = Hashable
Trace = tuple
Lasso = tuple

DEFAULT_BOUND = 8
# Cap on (prefix, cycle) candidates examined per source when a lasso language
# is infinite; beyond it the source is flagged partial instead.
LASSO_CANDIDATE_CAP = 20000


class DomainError(ValueError):
    """Operands live in different domains or violate an operator's precondition."""


class BudgetExceeded(RuntimeError):
    """A fixed-point iteration ran past the lattice height (non-monotone map)."""


def sort_key(x):
    """Total order over the nested int/str/tuple/frozenset values used as nodes."""
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, tuple):
        return (2, tuple(sort_key(y) for y in x))
    if isinstance(x, frozenset):
        return (3, tuple(sorted(sort_key(y) for y in x)))
    if x is None:
        return (-1,)
    return (4, repr(x))


def ordered(items: Iterable) -> list:
    return sorted(items, key=sort_key)


# ---------------------------------------------------------------- value domain


@dataclass(frozen=True)
class ValueDomain:
    modulus: int
    variables: tuple

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.modulus < 2:
            raise DomainError("modulus must be at least 2")
        if len(set(self.variables)) != len(self.variables):
            raise DomainError("variable names must be unique")

    @cached_property
    def states(self) -> tuple:
        return tuple(itertools.product(range(self.modulus), repeat=len(self.variables)))

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.variables)}

    def state(self, **values) -> tuple:
        if set(values) != set(self.variables):
            raise DomainError(f"state must assign exactly {self.variables}")
        return tuple(values[v] % self.modulus for v in self.variables)

    def show(self, state) -> dict:
        return dict(zip(self.variables, state))


# ---------------------------------------------------------------------- lassos


def primitive_root(v: tuple) -> tuple:
    n = len(v)
    for p in range(1, n + 1):
        if n % p == 0 and v[:p] * (n // p) == v:
            return v[:p]
    return v


def canon_lasso(prefix: tuple, cycle: tuple) -> Lasso:
    """Canonical form of ``prefix . cycle^omega``: primitive cycle, shortest prefix."""
    if not cycle:
        raise DomainError("lasso cycle must be nonempty")
    u, v = tuple(prefix), primitive_root(tuple(cycle))
    while u and u[-1] == v[-1]:
        u = u[:-1]
        v = v[-1:] + v[:-1]
    return (u, v)


def lasso_size(lasso: Lasso) -> int:
    return len(lasso[0]) + len(lasso[1])


def lasso_prefix(lasso: Lasso, n: int) -> tuple:
    """First ``n`` events of the infinite word denoted by ``lasso``."""
    u, v = lasso
    if n <= len(u):
        return u[:n]
    k = n - len(u)
    return u + (v * (k // len(v) + 1))[:k]


def is_prefix(t0: tuple, t: tuple) -> bool:
    return len(t0) <= len(t) and t[: len(t0)] == t0


# ------------------------------------------------------------------ set types


def _check_bound(*xs):
    b = xs[0].bound
    for x in xs[1:]:
        if x.bound != b:
            raise DomainError(f"trace bound mismatch: {b} vs {x.bound}")
    return b


@dataclass(frozen=True)
class TracedRel:
    """Finite ``(node, trace, node)`` relation; see module docstring for ``over``."""

    triples: frozenset
    bound: int = DEFAULT_BOUND
    over: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "triples", frozenset(self.triples))
        object.__setattr__(self, "over", frozenset(self.over))

    @property
    def truncated(self) -> bool:
        return bool(self.over)

    @cached_property
    def succ(self) -> dict:
        d: dict = {}
        for a, t, b in self.triples:
            d.setdefault(a, []).append((t, b))
        return d

    @cached_property
    def shadow(self) -> frozenset:
        """Endpoint pairs of the true relation (traces forgotten)."""
        return frozenset((a, b) for a, _, b in self.triples) | self.over

    @cached_property
    def shadow_succ(self) -> dict:
        d: dict = {}
        for a, b in self.shadow:
            d.setdefault(a, set()).add(b)
        return d

    @cached_property
    def over_succ(self) -> dict:
        d: dict = {}
        for a, b in self.over:
            d.setdefault(a, set()).add(b)
        return d

    @property
    def sources(self) -> frozenset:
        return frozenset(a for a, _ in self.shadow)

    @property
    def targets(self) -> frozenset:
        return frozenset(b for _, b in self.shadow)

    def pairs(self) -> frozenset:
        return frozenset((a, b) for a, _, b in self.triples)

    def __len__(self):
        return len(self.triples)

    def __bool__(self):
        return bool(self.triples) or bool(self.over)

    def __contains__(self, item):
        return item in self.triples

    def __le__(self, other: "TracedRel") -> bool:
        return self.triples <= other.triples

    def sorted(self) -> list:
        return ordered(self.triples)


@dataclass(frozen=True)
class StateTraceSet:
    """Finite ``(node, trace)`` set; ``over`` lists sources with longer members."""

    pairs: frozenset
    bound: int = DEFAULT_BOUND
    over: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        object.__setattr__(self, "over", frozenset(self.over))

    @property
    def truncated(self) -> bool:
        return bool(self.over)

    @cached_property
    def by_src(self) -> dict:
        d: dict = {}
        for a, t in self.pairs:
            d.setdefault(a, []).append(t)
        return d

    @cached_property
    def shadow(self) -> frozenset:
        return frozenset(a for a, _ in self.pairs) | self.over

    def __len__(self):
        return len(self.pairs)

    def __bool__(self):
        return bool(self.pairs) or bool(self.over)

    def __contains__(self, item):
        return item in self.pairs

    def __le__(self, other: "StateTraceSet") -> bool:
        return self.pairs <= other.pairs

    def sorted(self) -> list:
        return ordered(self.pairs)


@dataclass(frozen=True)
class LassoSet:
    """Finite ``(node, lasso)`` set of infinite behaviors."""

    pairs: frozenset
    bound: int = DEFAULT_BOUND
    live: frozenset = frozenset()
    partial: frozenset = frozenset()
    over: frozenset = frozenset()

    def __post_init__(self):
        pairs = frozenset(self.pairs)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "partial", frozenset(self.partial))
        object.__setattr__(self, "over", frozenset(self.over) | self.partial)
        object.__setattr__(self, "live", frozenset(self.live) | {a for a, _ in pairs} | self.partial)

    @property
    def truncated(self) -> bool:
        return bool(self.over)

    @cached_property
    def by_src(self) -> dict:
        d: dict = {}
        for a, l in self.pairs:
            d.setdefault(a, []).append(l)
        return d

    @property
    def shadow(self) -> frozenset:
        return self.live

    def __len__(self):
        return len(self.pairs)

    def __bool__(self):
        return bool(self.live)

    def __contains__(self, item):
        return item in self.pairs

    def __le__(self, other: "LassoSet") -> bool:
        return self.pairs <= other.pairs

    def sorted(self) -> list:
        return ordered(self.pairs)


StateSet = frozenset


def empty_rel(bound: int = DEFAULT_BOUND) -> TracedRel:
    return TracedRel(frozenset(), bound)


def empty_sts(bound: int = DEFAULT_BOUND) -> StateTraceSet:
    return StateTraceSet(frozenset(), bound)


def empty_lasso(bound: int = DEFAULT_BOUND) -> LassoSet:
    return LassoSet(frozenset(), bound)


def rel(triples: Iterable, bound: int = DEFAULT_BOUND) -> TracedRel:
    """Build a relation from triples, rejecting traces longer than the bound."""
    ts = frozenset((a, tuple(t), b) for a, t, b in triples)
    if any(len(t) > bound for _, t, _ in ts):
        raise DomainError("trace longer than bound")
    return TracedRel(ts, bound)


def sts(pairs: Iterable, bound: int = DEFAULT_BOUND) -> StateTraceSet:
    ps = frozenset((a, tuple(t)) for a, t in pairs)
    if any(len(t) > bound for _, t in ps):
        raise DomainError("trace longer than bound")
    return StateTraceSet(ps, bound)


def lassos(pairs: Iterable, bound: int = DEFAULT_BOUND) -> LassoSet:
    return LassoSet(frozenset((a, canon_lasso(u, v)) for a, (u, v) in pairs), bound)


# ------------------------------------------------------------------ operators


def _image(pairs_succ: dict, nodes: Iterable) -> set:
    out: set = set()
    for n in nodes:
        out |= pairs_succ.get(n, ())
    return out


def compose_rel(r1: TracedRel, r2: TracedRel) -> TracedRel:
    """``r1 ∘ r2`` with trace concatenation."""
    bound = _check_bound(r1, r2)
    if not r1 or not r2:
        return TracedRel(frozenset(), bound)
    kept, dropped = _k.compose_triples(r1.triples, r2.succ, bound)
    over = set(dropped)
    if r1.over:
        ss2 = r2.shadow_succ
        over |= {(a, c) for a, b in r1.over for c in ss2.get(b, ())}
    if r2.over:
        os2 = r2.over_succ
        over |= {(a, c) for a, b in r1.shadow for c in os2.get(b, ())}
    return TracedRel(frozenset(kept), bound, frozenset(over))


def compose_rel_set(r: TracedRel, y: StateTraceSet) -> StateTraceSet:
    """``R ∘ Y`` onto a ``(node, trace)`` set."""
    bound = _check_bound(r, y)
    if not r or not y:
        return StateTraceSet(frozenset(), bound)
    kept, dropped = _k.compose_pairs(r.triples, y.by_src, bound)
    over = set(dropped)
    ysh = y.shadow
    over |= {a for a, b in r.over if b in ysh}
    over |= {a for a, b in r.shadow if b in y.over}
    return StateTraceSet(frozenset(kept), bound, frozenset(over))


def compose_rel_lasso(r: TracedRel, y: LassoSet) -> LassoSet:
    """``R ∘ Y`` onto a lasso set; the finite trace is prepended to each lasso."""
    bound = _check_bound(r, y)
    if not r or not y:
        return LassoSet(frozenset(), bound)
    out = set()
    over = set()
    by = y.by_src
    for a, t, b in r.triples:
        for u, v in by.get(b, ()):
            c = canon_lasso(t + u, v)
            if lasso_size(c) <= bound:
                out.add((a, c))
            else:
                over.add(a)
    partial = {a for a, b in r.over if b in y.live} | {a for a, b in r.shadow if b in y.partial}
    over |= {a for a, b in r.shadow if b in y.over}
    live = {a for a, b in r.shadow if b in y.live}
    return LassoSet(frozenset(out), bound, frozenset(live), frozenset(partial), frozenset(over))


def union_rel(*rs: TracedRel) -> TracedRel:
    bound = _check_bound(*rs)
    return TracedRel(frozenset().union(*(r.triples for r in rs)), bound,
                     frozenset().union(*(r.over for r in rs)))


def union_sts(*ys: StateTraceSet) -> StateTraceSet:
    bound = _check_bound(*ys)
    return StateTraceSet(frozenset().union(*(y.pairs for y in ys)), bound,
                         frozenset().union(*(y.over for y in ys)))


def union_lasso(*ys: LassoSet) -> LassoSet:
    bound = _check_bound(*ys)
    return LassoSet(frozenset().union(*(y.pairs for y in ys)), bound,
                    frozenset().union(*(y.live for y in ys)),
                    frozenset().union(*(y.partial for y in ys)),
                    frozenset().union(*(y.over for y in ys)))


def test(x: Iterable, bound: int = DEFAULT_BOUND) -> TracedRel:
    """``test(X) = {(σ, nil, σ) | σ ∈ X}``."""
    return TracedRel(frozenset((s, (), s) for s in x), bound)


def id_rel(universe: Iterable, bound: int = DEFAULT_BOUND) -> TracedRel:
    return test(universe, bound)


def _reach_closure(succ: dict, starts: Iterable) -> set:
    seen = set(starts)
    stack = list(seen)
    while stack:
        n = stack.pop()
        for m in succ.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def star(r: TracedRel, universe: Iterable) -> TracedRel:
    """``r*``: least fixed point of ``x ↦ id ∪ r ∘ x`` under the trace bound."""
    bound = r.bound
    sources = set(universe) | set(r.sources)
    triples, spill = _k.star_from(r.succ, ordered(sources), bound)
    # every spill point, and every over-edge met within the bound, opens a
    # true path of unbounded length; all shadow-successors inherit it
    marks = set(spill)
    if r.over:
        osucc = r.over_succ
        for a, _, n in triples:
            for m in osucc.get(n, ()):
                marks.add((a, m))
    over = set()
    if marks:
        ss = r.shadow_succ
        cache: dict = {}
        for a, m in marks:
            if m not in cache:
                cache[m] = _reach_closure(ss, [m])
            over |= {(a, c) for c in cache[m]}
    return TracedRel(frozenset(triples), bound, frozenset(over))


def plus(r: TracedRel) -> TracedRel:
    """``r+ = r ∘ r*``."""
    return compose_rel(r, star(r, r.targets))


def silent(r: TracedRel) -> TracedRel:
    """△: keep the empty-trace triples."""
    return TracedRel(frozenset(x for x in r.triples if not x[1]), r.bound)


def nonsilent(r: TracedRel) -> TracedRel:
    """▲: keep the nonempty-trace triples."""
    return TracedRel(frozenset(x for x in r.triples if x[1]), r.bound, r.over)


def silent_sts(y: StateTraceSet) -> StateTraceSet:
    return StateTraceSet(frozenset(x for x in y.pairs if not x[1]), y.bound)


def restrict(r: TracedRel, sources: Iterable) -> TracedRel:
    keep = set(sources)
    return TracedRel(frozenset(x for x in r.triples if x[0] in keep), r.bound,
                     frozenset(x for x in r.over if x[0] in keep))


def _infinite_nodes(succ: dict) -> set:
    """Nodes with an infinite path: greatest fixed point of ``X ↦ pre(X)``."""
    return _k.infinite_nodes(succ)


def omega_silent(r: TracedRel) -> StateTraceSet:
    """``r^∞`` for a silent relation: ``{(σ, nil)}`` for σ starting an infinite path."""
    if any(t for _, t, _ in r.triples) or r.over:
        raise DomainError("omega_silent needs a silent relation")
    succ: dict = {}
    for a, _, b in r.triples:
        succ.setdefault(a, set()).add(b)
    return StateTraceSet(frozenset((s, ()) for s in _infinite_nodes(succ)), r.bound)


def omega_silent_gfp(r: TracedRel) -> StateTraceSet:
    """Same set as :func:`omega_silent`, via :func:`gfp` on the node lattice."""
    if any(t for _, t, _ in r.triples) or r.over:
        raise DomainError("omega_silent needs a silent relation")
    nodes = frozenset(r.sources | r.targets)
    succ = r.shadow_succ
    res, _ = gfp(lambda x: frozenset(n for n in nodes if succ.get(n, set()) & x), nodes,
                 budget=len(nodes) + 1)
    return StateTraceSet(frozenset((s, ()) for s in res), r.bound)


class _LetterGraph:
    """Single-letter automaton obtained by splitting multi-event triples."""

    def __init__(self, triples):
        edges: dict = {}
        for i, (a, t, b) in enumerate(triples):
            prev = a
            for j, ev in enumerate(t):
                nxt = b if j == len(t) - 1 else ("\x00mid", i, j)
                edges.setdefault(prev, []).append((ev, nxt))
                prev = nxt
        succ = {n: {m for _, m in es} for n, es in edges.items()}
        self.alive = _infinite_nodes(succ)
        self.edges = {n: [(ev, m) for ev, m in es if m in self.alive]
                      for n, es in edges.items() if n in self.alive}
        self._delta: dict = {}
        self._accepts: dict = {}
        self._trees: dict = {}

    def step(self, subset: frozenset, ev) -> frozenset:
        key = (subset, ev)
        res = self._delta.get(key)
        if res is None:
            res = frozenset(m for n in subset for e, m in self.edges.get(n, ()) if e == ev)
            self._delta[key] = res
        return res

    def letters(self, subset: frozenset) -> list:
        return sorted({e for n in subset for e, _ in self.edges.get(n, ())})

    def run(self, subset: frozenset, word: tuple) -> frozenset:
        for ev in word:
            if not subset:
                break
            subset = self.step(subset, ev)
        return subset


def _dfa_words(g: _LetterGraph, start: frozenset):
    """All infinite words from ``start`` as lassos, or ``None`` if infinitely many."""
    succ: dict = {}
    todo = [start]
    seen = {start}
    while todo:
        s = todo.pop()
        succ[s] = {ev: g.step(s, ev) for ev in g.letters(s)}
        for t in succ[s].values():
            if t not in seen:
                seen.add(t)
                todo.append(t)
    plain = {s: set(d.values()) for s, d in succ.items()}
    on_cycle = {s for s in succ if s in _reach_closure(plain, plain[s])}
    after_cycle = _reach_closure(plain, on_cycle)
    if any(len(succ[s]) > 1 for s in after_cycle):
        return None
    words = []
    stack = [(start, ())]
    while stack:
        s, w = stack.pop()
        if s in on_cycle:
            # deterministic from here on: follow the unique edges until repeat
            pos = {}
            cur, path = s, []
            while cur not in pos:
                pos[cur] = len(path)
                (ev, nxt), = succ[cur].items()
                path.append(ev)
                cur = nxt
            k = pos[cur]
            words.append(canon_lasso(w + tuple(path[:k]), tuple(path[k:])))
            continue
        for ev, t in succ[s].items():
            stack.append((t, w + (ev,)))
    return words


def omega_lasso(r: TracedRel) -> LassoSet:
    """``r^∞`` for a relation whose every step emits events, as canonical lassos.

    Per source the result lists every canonical lasso of size ``<= L`` whose
    word labels an infinite path of ``r``; see the module docstring for the
    ``live``/``partial``/``over`` flags.
    """
    if any(not t for _, t, _ in r.triples):
        raise DomainError("omega_lasso needs every step to emit events")
    bound = r.bound
    live = _infinite_nodes(r.shadow_succ)
    # every node of an infinite path is live, so other edges cannot matter
    g = _LetterGraph(x for x in r.triples if x[0] in live and x[2] in live)
    out = set()
    partial = set()
    over = set()
    risky = {a for a, b in r.over if b in live}
    for a in ordered(r.sources):
        if a not in live:
            continue
        if risky and _reach_closure(r.shadow_succ, [a]) & risky:
            partial.add(a)
        if a not in g.alive:
            continue
        start = frozenset([a])
        words = _dfa_words(g, start)
        if words is not None:
            for w in words:
                if lasso_size(w) <= bound:
                    out.add((a, w))
                else:
                    over.add(a)
            continue
        over.add(a)
        found, complete = _enumerate_lassos(g, start, bound)
        out |= {(a, w) for w in found}
        if not complete:
            partial.add(a)
    return LassoSet(frozenset(out), bound, frozenset(live & set(r.sources)),
                    frozenset(partial), frozenset(over))


def _is_primitive(v: tuple) -> bool:
    n = len(v)
    # v has period p iff it equals itself shifted by p
    return all(v[p:] != v[:-p] for p in range(1, n // 2 + 1) if n % p == 0)


def _accepts(g: _LetterGraph, su: frozenset, sv: frozenset, v: tuple) -> bool:
    """Whether ``v^omega`` labels an infinite path from ``su``; ``sv = su . v``."""
    # a subset that does not shrink under v can never empty out
    if su <= sv:
        return True
    key = (sv, v)
    ok = g._accepts.get(key)
    if ok is None:
        seen = {sv}
        cur = sv
        while True:
            cur = g.run(cur, v)
            if not cur:
                ok = False
                break
            if cur in seen:
                ok = True
                break
            seen.add(cur)
        g._accepts[key] = ok
    return ok


def _cycle_tree(g: _LetterGraph, su: frozenset, maxlen: int) -> tuple:
    """``(candidates, accepted)`` over nonempty cycles ``v`` with ``|v| <= maxlen``.

    ``accepted`` lists the primitive cycles whose ``omega`` power runs from
    ``su``; ``candidates`` counts every cycle visited, primitive or not.
    """
    key = (su, maxlen)
    res = g._trees.get(key)
    if res is None:
        count = 0
        acc = []
        stack = [(su, ())]
        while stack:
            sv, v = stack.pop()
            if v:
                count += 1
                if _is_primitive(v) and _accepts(g, su, sv, v):
                    acc.append(v)
            if len(v) < maxlen:
                for ev in g.letters(sv):
                    stack.append((g.step(sv, ev), v + (ev,)))
        res = g._trees[key] = (count, acc)
    return res


def _enumerate_lassos(g: _LetterGraph, start: frozenset, bound: int):
    """Canonical lassos of size ``<= bound`` from ``start``, with a completeness flag.

    Candidates ``(u, v)`` are visited in a fixed depth-first order and at most
    ``LASSO_CANDIDATE_CAP`` of them are examined.  A non-canonical pair names
    the same word as its canonical form, which is no longer and so is visited
    as well; only canonical pairs are kept.
    """
    found = set()
    budget = LASSO_CANDIDATE_CAP
    ustack = [(start, ())]
    while ustack:
        su, u = ustack.pop()
        count, acc = _cycle_tree(g, su, bound - len(u))
        if count > budget:
            # the cap falls inside this tree: replay it candidate by candidate
            stack = [(su, ())]
            while stack:
                sv, v = stack.pop()
                if v:
                    budget -= 1
                    if budget < 0:
                        return found, False
                    if (not u or u[-1] != v[-1]) and _is_primitive(v) and _accepts(g, su, sv, v):
                        found.add((u, v))
                if len(u) + len(v) < bound:
                    for ev in g.letters(sv):
                        stack.append((g.step(sv, ev), v + (ev,)))
        else:
            budget -= count
            found.update((u, v) for v in acc if not u or u[-1] != v[-1])
        if len(u) + 1 < bound:
            for ev in g.letters(su):
                ustack.append((g.step(su, ev), u + (ev,)))
    return found, True


# -------------------------------------------------------------- fixed points


def lfp(f: Callable, bottom, budget: int):
    """Kleene iteration from ``bottom``; returns ``(fixed point, iterations)``."""
    x = bottom
    for i in range(1, budget + 1):
        y = f(x)
        if y == x:
            return x, i
        x = y
    raise BudgetExceeded(f"no fixed point within {budget} iterations")


def gfp(f: Callable, top, budget: int):
    """Dual iteration from ``top``; returns ``(fixed point, iterations)``."""
    return lfp(f, top, budget)


def bekic_check(f: Callable, g: Callable, budget1: int, budget2: int,
                bottom1=frozenset(), bottom2=frozenset()) -> bool:
    """Compare the nested and the simultaneous least fixed point of ``(f, g)``.

    ``f, g`` take ``(x, y)``.  The nested side solves the inner fixed points
    ``μx0.f(x0, y)`` and ``μy0.g(x, y0)`` inside the outer iteration.
    """
    budget = budget1 + budget2 + 1

    def nested(p):
        x, y = p
        return (lfp(lambda x0: f(x0, y), bottom1, budget1)[0],
                lfp(lambda y0: g(x, y0), bottom2, budget2)[0])

    lhs, _ = lfp(nested, (bottom1, bottom2), budget)
    rhs, _ = lfp(lambda p: (f(*p), g(*p)), (bottom1, bottom2), budget)
    return lhs == rhs
