"""Small-step reference semantics for trace-enriched WHILE and single-procedure
CFG, with exhaustive behavior enumeration and a cross-check against the
denotational sets.

The configuration graph is finite (finitely many continuations and states),
so enumeration is a bounded walk over ``(config, trace)`` pairs.  Silent
divergence uses strongly connected components of the silent subgraph, and
infinite behaviors are decided per candidate lasso on the product of the
configuration graph with the lasso's position automaton.  Neither algorithm
is shared with the kernel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from . import kernel as K
from .kernel import ValueDomain, canon_lasso, ordered, primitive_root
from .syntax import Assign, CallI, CfgProc, Choice, Cond, Do, Havoc, If, Print, Seq, Skip, While
from .while_lang import ERR, LanguageError, denote_twhile, eval_bool, eval_expr

ABORT = ("abort",)


@dataclass(frozen=True)
class Config:
    """Control (continuation stack or CFG label) and state."""

    control: object
    state: tuple


@dataclass(frozen=True)
class BehaviorSample:
    """One observable outcome from ``init``.

    ``outcome`` is ``term`` (``final`` is the state), ``abort``, ``silent``
    (silent divergence after ``trace``) or ``lasso`` (``final`` is the lasso,
    ``trace`` is empty).
    """

    init: tuple
    outcome: str
    trace: tuple = ()
    final: object = None


# ------------------------------------------------------------------ stepping


def _atom_step(a, state: tuple, dom: ValueDomain):
    idx, m = dom.index, dom.modulus
    if isinstance(a, Skip):
        return [((), state)]
    if isinstance(a, Assign):
        v = eval_expr(a.expr, state, idx, m)
        if v is ERR:
            return [((), ABORT)]
        i = idx[a.var]
        return [((), state[:i] + (v,) + state[i + 1:])]
    if isinstance(a, Havoc):
        i = idx[a.var]
        return [((), state[:i] + (v,) + state[i + 1:]) for v in range(m)]
    if isinstance(a, Print):
        v = eval_expr(a.expr, state, idx, m)
        if v is ERR:
            return [((), ABORT)]
        return [((v,), state)]
    raise LanguageError(f"not an atom: {a!r}")


def step(c: Config, dom: ValueDomain) -> list:
    """Successors ``(events, config)`` of a WHILE configuration; ``[]`` when final.

    Abort is the configuration whose control is :data:`ABORT`.
    """
    if c.control == ABORT or not c.control:
        return []
    head, rest = c.control[0], c.control[1:]
    st = c.state
    if isinstance(head, (Skip, Assign, Havoc, Print)):
        out = []
        for ev, nxt in _atom_step(head, st, dom):
            out.append((ev, Config(ABORT, st) if nxt == ABORT else Config(rest, nxt)))
        return out
    if isinstance(head, Seq):
        return [((), Config((head.first, head.second) + rest, st))]
    if isinstance(head, Choice):
        return [((), Config((head.left,) + rest, st)), ((), Config((head.right,) + rest, st))]
    if isinstance(head, (If, While)):
        v = eval_bool(head.cond, st, dom.index, dom.modulus)
        if v is ERR:
            return [((), Config(ABORT, st))]
        if isinstance(head, If):
            return [((), Config(((head.then if v else head.orelse),) + rest, st))]
        if v:
            return [((), Config((head.body, head) + rest, st))]
        return [((), Config(rest, st))]
    raise LanguageError(f"{type(head).__name__} is outside the oracle's language")


def cfg_step(p: CfgProc, c: Config, dom: ValueDomain) -> list:
    """Successors of a CFG configuration ``(label, state)``; calls are rejected."""
    if c.control == ABORT or c.control == p.exit:
        return []
    ins = p.graph.get(c.control)
    if ins is None:
        return []
    st = c.state
    if isinstance(ins, Do):
        return [(ev, Config(ABORT, st) if nxt == ABORT else Config(ins.succ, nxt))
                for ev, nxt in _atom_step(ins.atom, st, dom)]
    if isinstance(ins, Cond):
        v = eval_bool(ins.cond, st, dom.index, dom.modulus)
        if v is ERR:
            return [((), Config(ABORT, st))]
        return [((), Config(ins.succ_true if v else ins.succ_false, st))]
    if isinstance(ins, CallI):
        raise LanguageError("the oracle does not cover calls")
    raise LanguageError(f"unknown instruction {ins!r}")


# ------------------------------------------------------------------ the graph


class ConfigGraph:
    """The reachable configuration graph from a set of initial configurations.

    Configurations are interned to integers; ``succ[i]`` lists ``(events, j)``.
    """

    def __init__(self, inits: Iterable[Config], succ_fn, terminal_fn):
        self.configs: list = []
        self.ids: dict = {}
        self.succ: list = []
        todo = [self._intern(c) for c in inits]
        while todo:
            i = todo.pop()
            if self.succ[i] is not None:
                continue
            nxt = []
            for ev, d in succ_fn(self.configs[i]):
                j = self._intern(d)
                nxt.append((ev, j))
                if self.succ[j] is None:
                    todo.append(j)
            self.succ[i] = nxt
        self.abort = frozenset(i for i, c in enumerate(self.configs) if c.control == ABORT)
        self.final = frozenset(i for i, c in enumerate(self.configs) if terminal_fn(c))
        self._silent_div = self._silent_divergent()
        self._settles = self._backward(self.abort | self.final | self._silent_div,
                                       [[d for _, d in es] for es in self.succ])
        self._memo: dict = {}
        self._after: dict = {}

    def _intern(self, c: Config) -> int:
        i = self.ids.get(c)
        if i is None:
            i = self.ids[c] = len(self.configs)
            self.configs.append(c)
            self.succ.append(None)
        return i

    def id(self, c: Config) -> int:
        return self.ids[c]

    @staticmethod
    def _backward(targets: Iterable[int], succ: list) -> set:
        pred: dict = {}
        for c, ds in enumerate(succ):
            for d in ds:
                pred.setdefault(d, []).append(c)
        out = set(targets)
        todo = list(out)
        while todo:
            d = todo.pop()
            for c in pred.get(d, ()):
                if c not in out:
                    out.add(c)
                    todo.append(c)
        return out

    def _silent_divergent(self) -> set:
        """Configurations with an infinite silent path (SCC based)."""
        silent = [[d for ev, d in es if not ev] for es in self.succ]
        cyclic = set()
        for comp in _tarjan(dict(enumerate(silent))):
            if len(comp) > 1 or any(c in silent[c] for c in comp):
                cyclic |= comp
        return self._backward(cyclic, silent)

    def finite_behaviors(self, init: Config, bound: int):
        """``(samples, truncated)`` for terminating, aborting and silently
        diverging outcomes with traces of length at most ``bound``.

        ``truncated`` is set when a longer trace could still reach one of
        those outcomes."""
        out = set()
        truncated = False
        i0 = self.ids[init]
        seen = set()
        todo = [(i0, ())]
        while todo:
            c, t = todo.pop()
            if (c, t) in seen:
                continue
            seen.add((c, t))
            if c in self.abort:
                out.add(BehaviorSample(init.state, "abort", t))
                continue
            if c in self._silent_div:
                out.add(BehaviorSample(init.state, "silent", t))
            if c in self.final:
                out.add(BehaviorSample(init.state, "term", t, self.configs[c].state))
                continue
            for ev, d in self.succ[c]:
                t2 = t + ev
                if len(t2) > bound:
                    truncated |= d in self._settles
                    continue
                todo.append((d, t2))
        return out, truncated

    def _silent_reach(self, configs) -> set:
        out = set(configs)
        todo = list(configs)
        while todo:
            c = todo.pop()
            for ev, d in self.succ[c]:
                if not ev and d not in out:
                    out.add(d)
                    todo.append(d)
        return out

    def _moves(self, configs: frozenset) -> dict:
        """Event ``e`` to the configurations right after emitting ``e``."""
        hit = self._after.get(configs)
        if hit is None:
            acc: dict = {}
            for c in self._silent_reach(configs):
                for ev, d in self.succ[c]:
                    if ev and d not in self.abort:
                        acc.setdefault(ev[0], set()).add(d)
            hit = self._after[configs] = {e: frozenset(ds) for e, ds in sorted(acc.items())}
        return hit

    def letters(self, configs: frozenset) -> list:
        """Events emitted by some step after silent moves from ``configs``."""
        return list(self._moves(configs))

    def after(self, configs: frozenset, e) -> frozenset:
        return self._moves(configs).get(e, frozenset())

    def realizes(self, init: Config, lasso: tuple) -> bool:
        """Does some infinite path from ``init`` emit exactly ``u . v^ω``?"""
        u, v = lasso
        su = frozenset([self.ids[init]])
        for e in u:
            su = self.after(su, e)
        return bool(su) and self._cycles(su, v)

    def _cycles(self, starts: frozenset, v: tuple) -> bool:
        """Some path from ``starts`` emits ``v^ω``: a reachable SCC of the
        product with the cyclic position counter that contains an event edge."""
        key = (starts, v)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        n = len(v)
        succ: dict = {}
        todo = [(c, 0) for c in starts]
        while todo:
            node = todo.pop()
            if node in succ:
                continue
            c, i = node
            es = []
            for ev, d in self.succ[c]:
                if d in self.abort:
                    continue
                if not ev:
                    es.append((False, (d, i)))
                elif ev[0] == v[i]:
                    es.append((True, (d, (i + 1) % n)))
            succ[node] = es
            todo.extend(m for _, m in es if m not in succ)
        plain = {k: [m for _, m in es] for k, es in succ.items()}
        hit = any(loud and m in comp
                  for comp in _tarjan(plain) for node in comp for loud, m in succ[node])
        self._memo[key] = hit
        return hit

    def lassos(self, init: Config, bound: int) -> set:
        """All canonical lassos of size at most ``bound`` realized from ``init``."""
        found = set()
        start = frozenset([self.ids[init]])
        ustack = [(start, ())]
        while ustack:
            su, u = ustack.pop()
            vstack = [(su, ())]
            while vstack:
                sv, v = vstack.pop()
                if v and primitive_root(v) == v:
                    cand = canon_lasso(u, v)
                    if cand == (u, v) and self._cycles(su, v):
                        found.add(cand)
                if len(u) + len(v) < bound:
                    for e, nxt in self._moves(sv).items():
                        vstack.append((nxt, v + (e,)))
            if len(u) + 1 < bound:
                for e, nxt in self._moves(su).items():
                    ustack.append((nxt, u + (e,)))
        return found


def _tarjan(succ: dict) -> list:
    """Strongly connected components (iterative Tarjan)."""
    index: dict = {}
    low: dict = {}
    on = set()
    stack: list = []
    comps = []
    counter = itertools.count()
    for root in succ:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
    return comps


# --------------------------------------------------------------- enumeration


@dataclass(frozen=True)
class Enumeration:
    samples: frozenset
    truncated: bool


def _graph_for(program, dom: ValueDomain):
    if isinstance(program, CfgProc):
        if program.locals:
            raise LanguageError("oracle CFG programs range over the domain variables only")
        inits = [Config(program.entry, s) for s in dom.states]
        g = ConfigGraph(inits, lambda c: cfg_step(program, c, dom), lambda c: c.control == program.exit)
    else:
        inits = [Config((program,), s) for s in dom.states]
        g = ConfigGraph(inits, lambda c: step(c, dom), lambda c: c.control == ())
    return g, inits


def enumerate_behaviors(program, dom: ValueDomain, bound: int = K.DEFAULT_BOUND) -> Enumeration:
    """All behavior samples from every initial state, with a truncation flag."""
    g, inits = _graph_for(program, dom)
    out = set()
    truncated = False
    for c in inits:
        samples, tr = g.finite_behaviors(c, bound)
        truncated |= tr
        out |= samples
        out |= {BehaviorSample(c.state, "lasso", (), w) for w in g.lassos(c, bound)}
    return Enumeration(frozenset(out), truncated)


# ---------------------------------------------------------------- cross-check


@dataclass(frozen=True)
class Verdict:
    ok: bool
    mismatch: Optional[str] = None
    truncated: bool = False


def partition(e: Enumeration) -> dict:
    """Oracle samples in the shape of the denotational fields."""
    s = e.samples
    return {
        "nrm": frozenset((x.init, x.trace, x.final) for x in s if x.outcome == "term"),
        "err": frozenset((x.init, x.trace) for x in s if x.outcome == "abort"),
        "fin_dvg": frozenset((x.init, x.trace) for x in s if x.outcome == "silent"),
        "inf_dvg": frozenset((x.init, x.final) for x in s if x.outcome == "lasso"),
    }


def denotation_fields(program, dom: ValueDomain, bound: int):
    if isinstance(program, CfgProc):
        from .cfg_lang import cfg_body
        from .pcall_lang import ModuleDomain
        d = cfg_body(program, K.empty_rel(bound), ModuleDomain(dom.modulus, dom.variables, bound))
    else:
        d = denote_twhile(program, dom, bound)
    return d


def cross_check(program, dom: ValueDomain, bound: int = K.DEFAULT_BOUND,
                denotation=None) -> Verdict:
    """Compare denotational ``{nrm, err, fin_dvg, inf_dvg}`` with the oracle.

    Finite fields must match exactly (both sides keep every behavior whose
    trace fits the bound).  Lasso sets must match exactly except for sources
    the kernel flags ``partial``, where inclusion in the oracle's set is
    required.
    """
    d = denotation if denotation is not None else denotation_fields(program, dom, bound)
    e = enumerate_behaviors(program, dom, bound)
    ref = partition(e)
    mine = {"nrm": d.nrm.triples, "err": d.err.pairs, "fin_dvg": d.fin_dvg.pairs}
    truncated = e.truncated or d.truncated
    for name in ("nrm", "err", "fin_dvg"):
        if mine[name] != ref[name]:
            extra = ordered(mine[name] - ref[name])[:1]
            missing = ordered(ref[name] - mine[name])[:1]
            return Verdict(False, f"{name}: denotation-only {extra}, oracle-only {missing}", truncated)
    partial = d.inf_dvg.partial
    got = {x for x in d.inf_dvg.pairs if x[0] not in partial}
    want = {x for x in ref["inf_dvg"] if x[0] not in partial}
    if got != want:
        return Verdict(False, f"inf_dvg: denotation-only {ordered(got - want)[:1]}, "
                              f"oracle-only {ordered(want - got)[:1]}", truncated)
    bad = {x for x in d.inf_dvg.pairs if x[0] in partial} - ref["inf_dvg"]
    if bad:
        return Verdict(False, f"inf_dvg: unrealizable lasso {ordered(bad)[:1]}", truncated)
    return Verdict(True, None, truncated)
