"""Refinement algebras: γ instances, law fuzzing, refinement bundles for
statements and modules, Kripke interface relations, and compositionality
checks.

Carriers are finite: a target candidate is in ``γ(N, E)`` iff for every
related source state (and world) a matching source behavior exists in ``N``,
or the source aborts in ``E`` after a prefix of the candidate's trace.
Prefixes of lassos are taken by unfolding to the needed length.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional

from . import kernel as K
from .kernel import (LassoSet, StateTraceSet, TracedRel, is_prefix, lasso_prefix, ordered,
                     sort_key)

# ---------------------------------------------------------------- relations


class CarrierError(TypeError):
    """A set or candidate does not belong to the instance's carrier."""


@dataclass(frozen=True)
class MatchRel:
    """World-indexed relation between source and target states.

    ``family`` maps each world to a frozenset of ``(source, target)`` pairs;
    ``None`` stands for the identity relation in every world.  ``acc`` is the
    accessibility preorder; ``None`` means every pair of worlds.
    """

    worlds: tuple = (0,)
    family: Optional[tuple] = None  # ((w, frozenset pairs), ...)
    acc: Optional[frozenset] = None

    def __post_init__(self):
        if self.acc is not None:
            ws = set(self.worlds)
            for w in ws:
                if (w, w) not in self.acc:
                    raise ValueError(f"accessibility is not reflexive at {w!r}")
            for a, b in self.acc:
                for c, d in self.acc:
                    if b == c and (a, d) not in self.acc:
                        raise ValueError("accessibility is not transitive")

    @classmethod
    def identity(cls) -> "MatchRel":
        return cls()

    @classmethod
    def of(cls, pairs: Iterable) -> "MatchRel":
        return cls((0,), ((0, frozenset(pairs)),))

    @classmethod
    def kripke(cls, family: dict, acc: Iterable) -> "MatchRel":
        ws = tuple(sorted(family, key=sort_key))
        return cls(ws, tuple((w, frozenset(family[w])) for w in ws), frozenset(acc))

    @property
    def is_identity(self) -> bool:
        return self.family is None

    @cached_property
    def _fam(self) -> dict:
        return dict(self.family or ())

    def pairs(self, w) -> Optional[frozenset]:
        if self.family is None:
            return None
        return self._fam[w]

    def accessible(self, w) -> tuple:
        if self.acc is None:
            return self.worlds
        return tuple(v for v in self.worlds if (w, v) in self.acc)

    @cached_property
    def _inverse(self) -> dict:
        inv: dict = {}
        for w, ps in self.family or ():
            for s, t in ps:
                inv.setdefault(t, []).append((w, s))
        return inv

    def sources(self, t) -> list:
        """``(world, source)`` pairs related to target ``t``."""
        if self.family is None:
            return [(w, t) for w in self.worlds]
        return self._inverse.get(t, [])

    def holds(self, w, s, t) -> bool:
        if self.family is None:
            return s == t
        return (s, t) in self._fam[w]

    def compose(self, other: "MatchRel") -> "MatchRel":
        """Relational composition ``self ; other`` over product worlds."""
        ws = tuple(itertools.product(self.worlds, other.worlds))
        if self.family is None and other.family is None:
            fam = None
        else:
            fam = []
            for wa, wb in ws:
                ra, rb = self.pairs(wa), other.pairs(wb)
                if ra is None:
                    ps = rb
                elif rb is None:
                    ps = ra
                else:
                    succ: dict = {}
                    for m, t in rb:
                        succ.setdefault(m, []).append(t)
                    ps = frozenset((s, t) for s, m in ra for t in succ.get(m, ()))
                fam.append(((wa, wb), ps))
            fam = tuple(fam)
        if self.acc is None and other.acc is None:
            acc = None
        else:
            acc = frozenset(((a, b), (c, d)) for (a, b) in ws for (c, d) in ws
                            if c in self.accessible(a) and d in other.accessible(b))
        return MatchRel(ws, fam, acc)


@dataclass(frozen=True)
class Kir:
    """Kripke interface relation: queries and replies related per world."""

    rq: MatchRel = MatchRel()
    rr: MatchRel = MatchRel()

    def __post_init__(self):
        if self.rq.worlds != self.rr.worlds or self.rq.acc != self.rr.acc:
            raise ValueError("query and reply relations must share worlds and accessibility")

    @classmethod
    def identity(cls) -> "Kir":
        return cls()

    @property
    def is_identity(self) -> bool:
        return self.rq.is_identity and self.rr.is_identity and len(self.rq.worlds) == 1

    def compose(self, other: "Kir") -> "Kir":
        """``self`` relates level 1 to level 2, ``other`` level 2 to level 3."""
        return Kir(self.rq.compose(other.rq), self.rr.compose(other.rr))


@dataclass(frozen=True)
class AnalysisResult:
    """Constant facts ``x ↦ v``; variables not listed are unknown."""

    facts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "facts", tuple(sorted(dict(self.facts).items())))

    @classmethod
    def of(cls, **facts) -> "AnalysisResult":
        return cls(tuple(facts.items()))

    def get(self, x):
        return dict(self.facts).get(x)

    def as_dict(self) -> dict:
        return dict(self.facts)

    def holds(self, state: tuple, index: dict) -> bool:
        return all(state[index[x]] == v for x, v in self.facts if x in index)

    def join(self, other: "AnalysisResult") -> "AnalysisResult":
        a, b = dict(self.facts), dict(other.facts)
        return AnalysisResult(tuple((x, v) for x, v in a.items() if b.get(x) == v))

    def __le__(self, other: "AnalysisResult") -> bool:
        """Information order: ``self`` knows at most what ``other`` knows."""
        return set(self.facts) <= set(other.facts)

    def show(self) -> str:
        return "{" + ", ".join(f"{x}↦{v}" for x, v in self.facts) + "}"


def pi_rel(pi: AnalysisResult, dom) -> MatchRel:
    """``R(π)``: identity on the states satisfying ``π``."""
    return MatchRel.of((s, s) for s in dom.states if pi.holds(s, dom.index))


# -------------------------------------------------------------------- gamma

SHAPES = {
    "N1": "N", "D1": "D", "N2": "N", "F2": "F", "I2": "I", "N3": "N", "F3": "F", "I3": "I",
    "KN": "N", "KF": "F", "KI": "I", "piN": "N", "piD": "D", "piF": "F", "piI": "I",
    "MN": "N", "MC": "N", "MF": "F", "MI": "I",
}
TRACE_FREE = {"N1", "D1"}
# kinds whose abort argument is a plain state set
STATE_E = {"N1", "D1", "piN", "piD"}


@dataclass(frozen=True)
class GammaInstance:
    """A γ map of a given kind.

    ``rin`` relates source and target inputs; ``rout`` relates final states
    (or replies, or next queries) and defaults to ``rin``.  ``custom`` replaces
    the membership test (used for negative controls).
    """

    name: str
    kind: str
    rin: MatchRel = MatchRel()
    rout: Optional[MatchRel] = None
    custom: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in SHAPES and self.custom is None:
            raise ValueError(f"unknown γ kind {self.kind}")

    @property
    def shape(self) -> str:
        return SHAPES.get(self.kind, "N")

    @property
    def out(self) -> MatchRel:
        return self.rout if self.rout is not None else self.rin


def instance(kind: str, r: Optional[MatchRel] = None, *, pi0=None, pi1=None, dom=None,
             kir: Optional[Kir] = None) -> GammaInstance:
    """Build a γ instance by kind name."""
    if kind in ("N1", "D1", "N2", "F2", "I2"):
        return GammaInstance(kind, kind)
    if kind in ("N3", "F3", "I3", "KN", "KF", "KI"):
        return GammaInstance(kind, kind, r or MatchRel())
    if kind in ("piN",):
        return GammaInstance(f"piN[{pi0.show()}->{pi1.show()}]", kind, pi_rel(pi0, dom), pi_rel(pi1, dom))
    if kind in ("piD", "piF", "piI"):
        return GammaInstance(f"{kind}[{pi0.show()}]", kind, pi_rel(pi0, dom))
    if kind in ("MN", "MF", "MI"):
        kir = kir or Kir()
        return GammaInstance(kind, kind, kir.rq, kir.rr)
    if kind == "MC":
        kir = kir or Kir()
        return GammaInstance(kind, kind, kir.rq, kir.rq)
    raise ValueError(f"unknown γ kind {kind}")


def _is_trace(x) -> bool:
    return isinstance(x, tuple) and all(isinstance(e, int) for e in x)


def _is_lasso(x) -> bool:
    return isinstance(x, tuple) and len(x) == 2 and _is_trace(x[0]) and _is_trace(x[1]) and len(x[1]) > 0


class EIndex:
    """Abort behaviors indexed by source, answering prefix queries."""

    def __init__(self, e: Iterable = (), *, states: bool = False):
        self.by: dict = {}
        for x in e:
            s, t = (x, ()) if states else x
            self.by.setdefault(s, set()).add(t)

    def has_prefix_of(self, s, x) -> bool:
        ts = self.by.get(s)
        if not ts:
            return False
        if _is_trace(x):
            return any(is_prefix(t, x) for t in ts)
        return any(t == lasso_prefix(x, len(t)) for t in ts)

    def sources(self) -> frozenset:
        return frozenset(s for s, ts in self.by.items() if ts)


class StarPrefixE:
    """``N* ∘ E`` (traced), answering prefix queries without materializing.

    ``x`` may be a finite trace or a lasso; the search runs over
    ``(state, position)`` with positions of a lasso folded onto its cycle.
    """

    def __init__(self, n: TracedRel, e: EIndex):
        self.succ = n.succ
        self.e = e

    def has_prefix_of(self, s, x) -> bool:
        lasso = not _is_trace(x)
        if lasso:
            u, v = x

            def norm(i):
                return i if i < len(u) else len(u) + (i - len(u)) % len(v)

            def word(i, k):
                return lasso_prefix(x, i + k)[i:]
        else:
            def norm(i):
                return i

            def word(i, k):
                return x[i:i + k]
        seen = set()
        todo = [(s, 0)]
        while todo:
            st, i = todo.pop()
            if (st, i) in seen:
                continue
            seen.add((st, i))
            for t0 in self.e.by.get(st, ()):
                if word(i, len(t0)) == t0:
                    return True
            for t, b in self.succ.get(st, ()):
                if not lasso and i + len(t) > len(x):
                    continue
                if word(i, len(t)) == t:
                    todo.append((b, norm(i + len(t))))
        return False


def drop(x, k: int):
    """Suffix of a trace or lasso after its first ``k`` letters."""
    if _is_trace(x):
        return x[k:]
    u, v = x
    if k <= len(u):
        return K.canon_lasso(u[k:], v)
    j = (k - len(u)) % len(v)
    return K.canon_lasso((), v[j:] + v[:j])


class SeqPrefixE:
    """``E1 ∪ N ∘ E2`` answering prefix queries without materializing."""

    def __init__(self, n: TracedRel, e1: EIndex, e2: EIndex):
        self.succ = n.succ
        self.e1, self.e2 = e1, e2

    def has_prefix_of(self, s, x) -> bool:
        if self.e1.has_prefix_of(s, x):
            return True
        for t, b in self.succ.get(s, ()):
            head = x[:len(t)] if _is_trace(x) else lasso_prefix(x, len(t))
            if head == t and (not _is_trace(x) or len(t) <= len(x)) and self.e2.has_prefix_of(b, drop(x, len(t))):
                return True
        return False


def _n_index(n) -> dict:
    d: dict = {}
    for x in n:
        if len(x) == 2:
            a, b = x
            t = ()
        else:
            a, t, b = x
        d.setdefault(a, {}).setdefault(t, set()).add(b)
    return d


class Gamma:
    """``γ(N, E)`` as a membership oracle with indexed arguments."""

    def __init__(self, g: GammaInstance, n, e):
        self.g = g
        shape = g.shape
        self.shape = shape
        if g.custom is not None:
            self.n, self.e = frozenset(n), e
            return
        if isinstance(e, (EIndex, StarPrefixE, SeqPrefixE)):
            self.e = e
        else:
            self.e = EIndex(e, states=g.kind in STATE_E)
        if shape == "N":
            self.n = n if isinstance(n, dict) else _n_index(n)
        else:
            self.n = n if isinstance(n, (set, frozenset)) else frozenset(n)

    def __contains__(self, cand) -> bool:
        g = self.g
        if g.custom is not None:
            return g.custom(self.n, self.e, cand)
        shape = self.shape
        if shape == "N":
            if len(cand) == 2:
                t, t2 = cand
                tau = ()
            else:
                t, tau, t2 = cand
            for w, s in g.rin.sources(t):
                if self.e.has_prefix_of(s, tau):
                    continue
                finals = self.n.get(s, {}).get(tau, ())
                if not any(g.out.holds(w2, s2, t2) for s2 in finals for w2 in g.rin.accessible(w)):
                    return False
            return True
        if shape == "D":
            for _, s in g.rin.sources(cand):
                if s not in self.n and not self.e.has_prefix_of(s, ()):
                    return False
            return True
        t, x = cand
        for _, s in g.rin.sources(t):
            if (s, x) not in self.n and not self.e.has_prefix_of(s, x):
                return False
        return True


def check_carrier(g: GammaInstance, cand) -> None:
    shape = g.shape
    if g.custom is not None:
        return
    if shape == "N":
        if g.kind in TRACE_FREE or g.kind == "piN":
            ok = isinstance(cand, tuple) and len(cand) == 2
        else:
            ok = isinstance(cand, tuple) and len(cand) == 3 and _is_trace(cand[1])
    elif shape == "F":
        ok = isinstance(cand, tuple) and len(cand) == 2 and _is_trace(cand[1])
    elif shape == "I":
        ok = isinstance(cand, tuple) and len(cand) == 2 and _is_lasso(cand[1])
    else:
        ok = True
    if not ok:
        raise CarrierError(f"{cand!r} is not in the target carrier of {g.kind}")


def gamma_apply(g: GammaInstance, n, e, cand) -> bool:
    """Is ``cand`` in ``γ(N, E)``?"""
    check_carrier(g, cand)
    return cand in Gamma(g, n, e)


def gamma_image(g: GammaInstance, n, e, universe: Iterable) -> frozenset:
    gm = Gamma(g, n, e)
    return frozenset(c for c in universe if c in gm)


# ------------------------------------------------------------- RA law fuzzing


@dataclass
class Carriers:
    """Finite carriers for law fuzzing: states, event letters, trace cap."""

    states: tuple = ((0,), (1,), (2,))
    letters: tuple = (0, 1)
    cap: int = 2

    @property
    def traces(self) -> list:
        return [t for k in range(self.cap + 1) for t in itertools.product(self.letters, repeat=k)]

    @property
    def lassos(self) -> list:
        out = set()
        for k in range(1, self.cap + 1):
            for w in itertools.product(self.letters, repeat=k):
                for i in range(k):
                    out.add(K.canon_lasso(w[:i], w[i:]))
        return sorted(out, key=sort_key)

    def universe(self, shape: str, trace_free: bool) -> list:
        S = self.states
        if shape == "D":
            return list(S)
        if shape == "N":
            if trace_free:
                return [(a, (), b) for a in S for b in S]
            return [(a, t, b) for a in S for t in self.traces for b in S]
        if shape == "F":
            return [(a, t) for a in S for t in (((),) if trace_free else self.traces)]
        return [(a, l) for a in S for l in self.lassos]


@dataclass
class LawReport:
    trials: int
    results: dict  # law -> counterexample or None

    @property
    def ok(self) -> bool:
        return all(v is None for v in self.results.values())


def _rand_subset(rng: random.Random, universe: list, p: float) -> list:
    return [x for x in universe if rng.random() < p]


def _as_rel(xs: Iterable, bound: int) -> TracedRel:
    return TracedRel(frozenset(xs), bound)


def check_ra_laws(g1: GammaInstance, g2: GammaInstance, g3: GammaInstance, trials: int = 200,
                  seed: int = 0, carriers: Optional[Carriers] = None,
                  monotone_only: bool = False) -> LawReport:
    """Fuzz the union/concatenation/star/infinity inclusions and monotonicity.

    ``g1`` is the termination instance, ``g2`` the finite-divergence (or
    state-set) instance, ``g3`` the infinite-divergence instance.  For
    trace-free families ``g2`` and ``g3`` are both state-set instances and
    infinity is silent divergence.
    """
    c = carriers or Carriers()
    rng = random.Random(seed)
    tf = g1.kind in TRACE_FREE or g1.kind == "piN"
    cap = c.cap
    UN = c.universe("N", tf)
    U2 = c.universe(g2.shape, tf)
    U3 = c.universe(g3.shape, tf)
    UE = c.universe("F", tf)
    states = list(c.states)
    results = {"monotone": None}
    if not monotone_only:
        results.update({"union": None, "concat_NN": None, "concat_NF": None, "concat_NI": None,
                        "star_NF": None, "infinity_NI": None})

    def rand_n(p=0.12):
        return _rand_subset(rng, UN, p)

    def rand_e(p=0.08):
        return _rand_subset(rng, UE, p)

    def rand_y(univ, p=0.1):
        return _rand_subset(rng, univ, p)

    def e_index(xs):
        return EIndex(xs)

    def record(law, witness):
        if results[law] is None:
            results[law] = witness

    def src_rel(xs):
        return _as_rel(xs, cap)

    for _ in range(trials):
        N1, N2, E1, E2 = rand_n(), rand_n(), rand_e(), rand_e()
        Y2, Y3 = rand_y(U2), rand_y(U3)
        # monotonicity: shrink to subsets
        for g, n, univ in ((g1, N1, UN), (g2, Y2, U2), (g3, Y3, U3)):
            n_small = [x for x in n if rng.random() < 0.6]
            e_small = [x for x in E1 if rng.random() < 0.6]
            small = Gamma(g, n_small, _e_arg(e_small, g, tf))
            big = Gamma(g, n, _e_arg(E1, g, tf))
            for x in univ:
                if x in small and x not in big:
                    record("monotone", (g.name, x))
                    break
        if monotone_only:
            continue
        # union
        for g, na, nb, univ in ((g1, N1, N2, UN), (g2, Y2, rand_y(U2), U2), (g3, Y3, rand_y(U3), U3)):
            ga = Gamma(g, na, _e_arg(E1, g, tf))
            gb = Gamma(g, nb, _e_arg(E2, g, tf))
            gu = Gamma(g, list(na) + list(nb), _e_arg(E1 + E2, g, tf))
            for x in univ:
                if (x in ga or x in gb) and x not in gu:
                    record("union", (g.name, x))
                    break
        # concatenation: γ1(N1,E1) ∘ γ(N2,E2) ⊆ γ(N1∘N2, E1 ∪ N1∘E2)
        t1 = src_rel(gamma_image(g1, N1, _e_arg(E1, g1, tf), UN))
        s1 = src_rel(N1)
        ext = _seq_e(s1, E1, E2, cap, tf)
        t12 = K.compose_rel(t1, src_rel(gamma_image(g1, N2, _e_arg(E2, g1, tf), UN)))
        g_nn = Gamma(g1, K.compose_rel(s1, src_rel(N2)).triples, ext)
        for x in ordered(t12.triples):
            if x not in g_nn:
                record("concat_NN", x)
                break
        img2 = gamma_image(g2, Y2, _e_arg(E2, g2, tf), U2)
        lhs2 = _compose_shape(t1, img2, g2.shape, cap)
        rhs2 = Gamma(g2, _compose_shape(s1, Y2, g2.shape, cap), ext)
        for x in ordered(lhs2):
            if x not in rhs2:
                record("concat_NF", x)
                break
        img3 = gamma_image(g3, Y3, _e_arg(E2, g3, tf), U3)
        lhs3 = _compose_shape(t1, img3, g3.shape, cap)
        rhs3 = Gamma(g3, _compose_shape(s1, Y3, g3.shape, cap), ext)
        for x in ordered(lhs3):
            if x not in rhs3:
                record("concat_NI", x)
                break
        # star: γ1(N1,E1)* ∘ γ2(N2,E2) ⊆ γ2(N1*∘N2, N1*∘(E1∪E2))
        star_t = K.star(t1, states)
        star_s = K.star(s1, states)
        e_star = _star_e(s1, E1 + E2, cap, tf)
        lhs = _compose_shape(star_t, img2, g2.shape, cap)
        rhs = Gamma(g2, _compose_shape(star_s, Y2, g2.shape, cap), e_star)
        for x in ordered(lhs):
            if x not in rhs:
                record("star_NF", x)
                break
        # infinity: (γ1* ∘ γ3(N2,E2)) ∪ γ1^∞ ⊆ γ3(N1*∘N2 ∪ N1^∞, N1*∘(E1∪E2))
        lhs = set(_compose_shape(star_t, img3, g3.shape, cap)) | _omega_shape(t1, g3.shape)
        rhs = Gamma(g3, set(_compose_shape(star_s, Y3, g3.shape, cap)) | _omega_shape(s1, g3.shape), e_star)
        for x in ordered(lhs):
            if x not in rhs:
                record("infinity_NI", x)
                break
    return LawReport(trials, results)


def _e_arg(e: list, g: GammaInstance, tf: bool):
    if g.shape == "D" or (tf and g.kind in TRACE_FREE | {"piN"}):
        return EIndex([x[0] for x in e], states=True)
    return EIndex(e)


def _seq_e(s1: TracedRel, e1: list, e2: list, cap: int, tf: bool):
    """``E1 ∪ N1 ∘ E2``, unbounded in the length of the composed prefix."""
    return SeqPrefixE(s1, EIndex(e1), EIndex(e2))


def _star_e(s1: TracedRel, e: list, cap: int, tf: bool):
    return StarPrefixE(s1, EIndex(e))


def _compose_shape(r: TracedRel, ys, shape: str, cap: int) -> frozenset:
    """``r ∘ Y`` for a target- or source-side set of the given shape."""
    if shape == "D":
        ys = set(ys)
        return frozenset(a for a, _, b in r.triples if b in ys)
    if shape == "F":
        return K.compose_rel_set(r, StateTraceSet(frozenset(ys), cap)).pairs
    return K.compose_rel_lasso(r, LassoSet(frozenset(ys), cap)).pairs


def _omega_shape(r: TracedRel, shape: str) -> set:
    if shape == "D":
        return {a for a, _ in K.omega_silent(K.silent(r)).pairs}
    reactive = K.compose_rel(K.star(K.silent(r), r.sources | r.targets), K.nonsilent(r))
    return set(K.omega_lasso(reactive).pairs)


def family(i, r: Optional[MatchRel] = None, pi0=None, pi1=None, dom=None) -> tuple:
    """The γ triple of a law family: 1, 2, 3, ``"kripke"`` or ``"pi"``."""
    if i == 1:
        return instance("N1"), instance("D1"), instance("D1")
    if i == 2:
        return instance("N2"), instance("F2"), instance("I2")
    if i == 3:
        return instance("N3", r), instance("F3", r), instance("I3", r)
    if i == "kripke":
        return instance("KN", r), instance("KF", r), instance("KI", r)
    if i == "pi":
        d = instance("piD", pi0=pi0, dom=dom)
        return instance("piN", pi0=pi0, pi1=pi0, dom=dom), d, d
    raise ValueError(i)


def check_pi_concat(pi0, pi1, pi2, dom, trials: int = 100, seed: int = 0,
                    carriers: Optional[Carriers] = None) -> LawReport:
    """``γ^{π1}_{π0} ∘ γ^{π2}_{π1} ⊆ γ^{π2}_{π0}`` and ``γ^{π1}_{π0} ∘ γD_{π1} ⊆ γD_{π0}``."""
    c = carriers or Carriers(states=tuple(dom.states))
    rng = random.Random(seed)
    gA = instance("piN", pi0=pi0, pi1=pi1, dom=dom)
    gB = instance("piN", pi0=pi1, pi1=pi2, dom=dom)
    gC = instance("piN", pi0=pi0, pi1=pi2, dom=dom)
    dB = instance("piD", pi0=pi1, dom=dom)
    dA = instance("piD", pi0=pi0, dom=dom)
    UN = c.universe("N", True)
    S = list(c.states)
    res = {"concat_NN": None, "concat_ND": None}
    for _ in range(trials):
        N1, N2 = _rand_subset(rng, UN, 0.15), _rand_subset(rng, UN, 0.15)
        E1, E2 = _rand_subset(rng, S, 0.15), _rand_subset(rng, S, 0.15)
        Y = _rand_subset(rng, S, 0.3)
        s1 = _as_rel(N1, 0)
        e12 = EIndex(list(E1) + [a for a, _, b in N1 if b in set(E2)], states=True)
        t1 = _as_rel(gamma_image(gA, N1, EIndex(E1, states=True), UN), 0)
        t2 = _as_rel(gamma_image(gB, N2, EIndex(E2, states=True), UN), 0)
        rhs = Gamma(gC, K.compose_rel(s1, _as_rel(N2, 0)).triples, e12)
        for x in ordered(K.compose_rel(t1, t2).triples):
            if x not in rhs and res["concat_NN"] is None:
                res["concat_NN"] = x
        img = gamma_image(dB, Y, EIndex(E2, states=True), S)
        lhs = _compose_shape(t1, img, "D", 0)
        rhs = Gamma(dA, _compose_shape(s1, Y, "D", 0), e12)
        for x in ordered(lhs):
            if x not in rhs and res["concat_ND"] is None:
                res["concat_ND"] = x
    return LawReport(trials, res)


# ----------------------------------------------------- design-choice variants


def gamma_choice1(n, e, r: MatchRel, states_t: Iterable):
    """Single-argument γN_R(N) ∪ (γE_R(E) × state_t), as a membership test."""
    gn = Gamma(GammaInstance("choice1-N", "N3", r), n, [])
    ei = EIndex(e)

    def member(cand):
        t, tau, t2 = cand
        if cand in gn:
            return True
        return all(ei.has_prefix_of(s, tau) for _, s in r.sources(t))
    return member


def gamma_choice2(n, e, r: MatchRel, states_s: Iterable, bound: int):
    """Single-argument γN_R(N ∪ (Ẽ × state_s)), Ẽ the bounded trace extensions of E."""
    states_s = list(states_s)
    ext = set(n)
    for s, t0 in e:
        ext |= {(s, t0 + t1, s2) for t1 in _extensions(bound - len(t0)) for s2 in states_s}
    gn = Gamma(GammaInstance("choice2-N", "N3", r), ext, [])
    return lambda cand: cand in gn


def _extensions(k: int, letters=(0, 1, 2)) -> list:
    return [t for n in range(max(k, 0) + 1) for t in itertools.product(letters, repeat=n)]


# ------------------------------------------------------ refinement bundles


@dataclass(frozen=True)
class Verdict:
    """Outcome of a refinement check.

    ``status`` is ``pass``, ``fail`` or ``truncated`` (no violation was found
    but some compared set is a bounded under-approximation, or the only
    violation involves a source set flagged incomplete).
    """

    status: str
    field: Optional[str] = None
    witness: Optional[object] = None
    checked: int = 0
    notes: tuple = ()

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    @property
    def not_failed(self) -> bool:
        return self.status != "fail"


@dataclass(frozen=True)
class Profile:
    """Refinement profile for statement pairs."""

    kind: str  # plain | abort | traced | relational | kripke | cshmgen | pi
    r: MatchRel = MatchRel()
    n_b: int = 0
    n_c: int = 0
    chi_e: Optional[StateTraceSet] = None
    pi0: Optional[AnalysisResult] = None
    pi1: Optional[AnalysisResult] = None
    dom: object = None


def _elements(x) -> frozenset:
    if isinstance(x, TracedRel):
        return x.triples
    if isinstance(x, (StateTraceSet, LassoSet)):
        return x.pairs
    return frozenset(x)


def _partial_sources(x) -> frozenset:
    if isinstance(x, LassoSet):
        return x.partial
    return frozenset()


def _truncated(*xs) -> bool:
    return any(getattr(x, "truncated", False) for x in xs if x is not None)


def _include(name: str, target, gm: Gamma, rin: MatchRel, flagged: frozenset, counter: list):
    """First element of ``target`` outside ``gm``: ``(status, witness)`` or ``None``."""
    for x in ordered(_elements(target)):
        counter[0] += 1
        if x in gm:
            continue
        t = x if not isinstance(x, tuple) or gm.shape == "D" else x[0]
        related = {s for _, s in rin.sources(t)}
        if related & flagged:
            return ("truncated", x)
        return ("fail", x)
    return None


def _err_ext(src, chi_e: Optional[StateTraceSet]) -> StateTraceSet:
    err = src.err
    cll = getattr(src, "cll", None)
    if cll is None and hasattr(src, "get"):
        cll = src.get("cll")
    if chi_e is not None and cll is not None and cll:
        err = K.union_sts(err, K.compose_rel_set(cll, chi_e))
    return err


def check_refine_stmt(target, source, profile: Profile) -> Verdict:
    """Check ``target ⊑ source`` under ``profile``; reports the first violation."""
    kind = profile.kind
    checks = []  # (field, target set, gamma instance, N, E)
    counter = [0]
    if kind == "plain":
        for f in ("nrm", "dvg", "err", "fin_dvg", "inf_dvg"):
            if hasattr(target, f) and hasattr(source, f):
                tv, sv = _elements(getattr(target, f)), _elements(getattr(source, f))
                for x in ordered(tv - sv):
                    return Verdict("fail", f, x, len(tv))
                counter[0] += len(tv)
        return _finish(counter[0], target, source)
    if kind == "abort":
        err = source.err
        checks = [("nrm", target.nrm, instance("N1"), source.nrm.triples, err),
                  ("dvg", target.dvg, instance("D1"), source.dvg, err),
                  ("err", target.err, instance("D1"), (), err)]
        return _run(checks, counter, target, source, MatchRel())
    if kind == "pi":
        dom = profile.dom
        pi0, pi1 = profile.pi0, profile.pi1
        if hasattr(target, "fin_dvg"):
            e = _err_ext(source, profile.chi_e)
            r0 = pi_rel(pi0, dom)
            checks = [
                ("nrm", target.nrm, GammaInstance("piN*", "N3", r0, pi_rel(pi1, dom)), source.nrm.triples, e.pairs),
                ("err", target.err, GammaInstance("piF", "F3", r0), (), e.pairs),
                ("fin_dvg", target.fin_dvg, GammaInstance("piF", "F3", r0), source.fin_dvg.pairs, e.pairs),
                ("inf_dvg", target.inf_dvg, GammaInstance("piI", "I3", r0), source.inf_dvg.pairs, e.pairs),
            ]
            return _run(checks, counter, target, source, r0)
        err = source.err
        r0 = pi_rel(pi0, dom)
        checks = [("nrm", target.nrm, instance("piN", pi0=pi0, pi1=pi1, dom=dom), source.nrm.triples, err),
                  ("err", target.err, instance("piD", pi0=pi0, dom=dom), (), err),
                  ("dvg", target.dvg, instance("piD", pi0=pi0, dom=dom), source.dvg, err)]
        return _run(checks, counter, target, source, r0)
    if kind in ("traced", "relational", "kripke", "cshmgen"):
        r = MatchRel() if kind in ("traced", "cshmgen") else profile.r
        suffix = {"traced": "3", "relational": "3", "cshmgen": "3", "kripke": "K"}[kind]
        gN = GammaInstance("N", "KN" if suffix == "K" else "N3", r)
        gF = GammaInstance("F", "KF" if suffix == "K" else "F3", r)
        gI = GammaInstance("I", "KI" if suffix == "K" else "I3", r)
        e = _err_ext(source, profile.chi_e).pairs
        checks = [("nrm", target.nrm, gN, source.nrm.triples, e),
                  ("err", target.err, gF, (), e)]
        if kind == "cshmgen":
            blk = dict(target.blk)
            checks.append((f"blk_{profile.n_b}", blk.get(profile.n_b, K.empty_rel(target.nrm.bound)), gN,
                           source.brk.triples, e))
            checks.append((f"blk_{profile.n_c}", blk.get(profile.n_c, K.empty_rel(target.nrm.bound)), gN,
                           source.ctn.triples, e))
            for k, rel_k in sorted(blk.items()):
                if k not in (profile.n_b, profile.n_c):
                    checks.append((f"blk_{k}", rel_k, gN, (), e))
        checks += [("fin_dvg", target.fin_dvg, gF, source.fin_dvg.pairs, e),
                   ("inf_dvg", target.inf_dvg, gI, source.inf_dvg.pairs, e)]
        return _run(checks, counter, target, source, r)
    raise ValueError(f"unknown profile {kind}")


def _run(checks, counter, target, source, rin) -> Verdict:
    pending = None
    for name, tset, g, n, e in checks:
        gm = Gamma(g, n, e)
        flagged = _partial_sources(getattr(source, name, None)) if hasattr(source, name) else frozenset()
        res = _include(name, tset, gm, g.rin, flagged, counter)
        if res is None:
            continue
        status, x = res
        if status == "fail":
            return Verdict("fail", name, x, counter[0])
        pending = pending or (name, x)
    if pending:
        return Verdict("truncated", pending[0], pending[1], counter[0], ("violation on incomplete source set",))
    return _finish(counter[0], target, source)


def _finish(n: int, target, source) -> Verdict:
    def trunc(d):
        return bool(getattr(d, "truncated", False))
    if trunc(target) or trunc(source):
        return Verdict("truncated", None, None, n, ("bounded comparison",))
    return Verdict("pass", None, None, n)


# ----------------------------------------------------- direct ∀∃ checking


def direct_refines(target, source, r: Optional[set] = None, chi_e: Optional[StateTraceSet] = None,
                   extra: Iterable = ()) -> Optional[tuple]:
    """Pointwise ∀∃ refinement of traced behaviors under a plain relation ``r``
    (``None`` is the identity).  Returns the first ``(field, element)``
    violating it, or ``None``.  ``extra`` lists additional
    ``(field, target rel, source rel)`` terminating channels.
    """
    e = _err_ext(source, chi_e).pairs
    if r is None:
        def rel(t):
            return [t]

        def ok(s, t):
            return s == t
    else:
        inv: dict = {}
        for s, t in r:
            inv.setdefault(t, []).append(s)

        def rel(t):
            return inv.get(t, [])

        def ok(s, t):
            return (s, t) in r

    def aborts_before(s, x) -> bool:
        for s2, t0 in e:
            if s2 != s:
                continue
            if _is_trace(x):
                if x[:len(t0)] == t0:
                    return True
            elif lasso_prefix(x, len(t0)) == t0:
                return True
        return False

    def nrm_like(name, tr, sr):
        for (t, tau, t2) in ordered(tr):
            for s in rel(t):
                if aborts_before(s, tau):
                    continue
                if not any(a == s and b == tau and ok(c, t2) for a, b, c in sr):
                    return (name, (t, tau, t2))
        return None

    w = nrm_like("nrm", target.nrm.triples, source.nrm.triples)
    if w:
        return w
    for name, tr, sr in extra:
        w = nrm_like(name, tr, sr)
        if w:
            return w
    for name, tset, sset in (("err", target.err.pairs, frozenset()),
                             ("fin_dvg", target.fin_dvg.pairs, source.fin_dvg.pairs),
                             ("inf_dvg", target.inf_dvg.pairs, source.inf_dvg.pairs)):
        for (t, x) in ordered(tset):
            for s in rel(t):
                if (s, x) not in sset and not aborts_before(s, x):
                    return (name, (t, x))
    return None


# ------------------------------------------------------------------ modules


def check_oracle_refine(chi_t: TracedRel, chi_s: TracedRel, chi_e: StateTraceSet, kir: Kir) -> Verdict:
    """``χ_t ⊆ γN_A(χ_s, χ_e)``."""
    g = GammaInstance("MN", "MN", kir.rq, kir.rr)
    gm = Gamma(g, chi_s.triples, chi_e.pairs)
    for x in ordered(chi_t.triples):
        if x not in gm:
            return Verdict("fail", "oracle", x, 0)
    return Verdict("pass")


def check_module_denotations(dt, ds, chi_e: StateTraceSet, kir: Kir) -> Verdict:
    """Five-inclusion bundle between module denotations ``dt`` (target) and
    ``ds`` (source), with ``err`` lifted to ``err ∪ cll ∘ χ_e``."""
    if dt.dom != ds.dom:
        return Verdict("fail", "dom", (ordered(dt.dom), ordered(ds.dom)))
    e = K.union_sts(ds.err, K.compose_rel_set(ds.cll, chi_e)).pairs
    counter = [0]
    if kir.is_identity:
        gN, gC = GammaInstance("MN", "N3"), GammaInstance("MC", "N3")
        gF, gI = GammaInstance("MF", "F3"), GammaInstance("MI", "I3")
    else:
        gN = GammaInstance("MN", "MN", kir.rq, kir.rr)
        gC = GammaInstance("MC", "MC", kir.rq, kir.rq)
        gF = GammaInstance("MF", "MF", kir.rq)
        gI = GammaInstance("MI", "MI", kir.rq)
    checks = [("nrm", dt.nrm, gN, ds.nrm.triples, e),
              ("err", dt.err, gF, (), e),
              ("cll", dt.cll, gC, ds.cll.triples, e),
              ("fin_dvg", dt.fin_dvg, gF, ds.fin_dvg.pairs, e),
              ("inf_dvg", dt.inf_dvg, gI, ds.inf_dvg.pairs, e)]
    return _run(checks, counter, dt, ds, kir.rq)


def check_refine_module(target, source, kir_a: Kir, kir_b: Kir, oracles: Iterable) -> Verdict:
    """``target ⊑_{A→B} source`` for module constructors over sampled oracles.

    Each oracle triple ``(χ_t, χ_s, χ_e)`` must satisfy ``χ_t ⊆ γN_A(χ_s, χ_e)``;
    triples that do not are skipped (the definition is vacuous for them).
    """
    if target.dom != source.dom:
        return Verdict("fail", "dom", (ordered(target.dom), ordered(source.dom)))
    total = 0
    skipped = 0
    truncated = None
    for chi_t, chi_s, chi_e in oracles:
        if not check_oracle_refine(chi_t, chi_s, chi_e, kir_a).ok:
            skipped += 1
            continue
        v = check_module_denotations(target(chi_t), source(chi_s), chi_e, kir_b)
        total += v.checked
        if v.status == "fail":
            return v
        if v.status == "truncated":
            truncated = truncated or v
    notes = (f"skipped {skipped} oracle triples",) if skipped else ()
    if truncated is not None:
        return Verdict("truncated", truncated.field, truncated.witness, total, truncated.notes + notes)
    return Verdict("pass", None, None, total, notes)


@dataclass(frozen=True)
class CompositionReport:
    premises: tuple
    direct: Verdict
    implied: bool  # premises pass ⇒ direct pass

    @property
    def ok(self) -> bool:
        return self.implied and self.direct.not_failed and all(p.not_failed for p in self.premises)


def check_horizontal(sources: tuple, targets: tuple, kir: Kir, oracles: list) -> CompositionReport:
    """Componentwise refinements and the linked refinement, checked directly."""
    from .pcall_lang import link_sem
    s1, s2 = sources
    t1, t2 = targets
    v1 = check_refine_module(t1, s1, kir, kir, oracles)
    v2 = check_refine_module(t2, s2, kir, kir, oracles)
    vl = check_refine_module(link_sem(t1, t2), link_sem(s1, s2), kir, kir, oracles)
    premises_ok = v1.not_failed and v2.not_failed
    return CompositionReport((v1, v2), vl, (not premises_ok) or vl.not_failed)


def check_vertical(m1, m2, m3, kirs1: tuple, kirs2: tuple, oracles: list) -> CompositionReport:
    """``M3 ⊑ M2`` under ``kirs2`` and ``M2 ⊑ M1`` under ``kirs1`` against the
    direct check of ``M3 ⊑ M1`` under the composed interface relations."""
    a1, b1 = kirs1
    a2, b2 = kirs2
    v21 = check_refine_module(m2, m1, a1, b1, oracles)
    v32 = check_refine_module(m3, m2, a2, b2, oracles)
    v31 = check_refine_module(m3, m1, a1.compose(a2), b1.compose(b2), oracles)
    premises_ok = v21.not_failed and v32.not_failed
    return CompositionReport((v21, v32), v31, (not premises_ok) or v31.not_failed)


# -------------------------------------------------------- fixed-point lemma


@dataclass(frozen=True)
class LemmaTriple:
    f: Callable
    g: Callable
    h: Callable
    seed: int


def _monotone_rules(rng: random.Random, universe: list, n_rules: int, p_base: float = 0.3) -> Callable:
    base = frozenset(x for x in universe if rng.random() < p_base)
    rules = [(frozenset(rng.sample(universe, rng.randint(1, 2))), rng.choice(universe))
             for _ in range(n_rules)]

    def f(x: frozenset) -> frozenset:
        return base | frozenset(c for p, c in rules if p <= x)
    return f


def _powerset(xs: list) -> list:
    return [frozenset(c) for k in range(len(xs) + 1) for c in itertools.combinations(xs, k)]


def lemma_lattices(states=("a", "b")) -> tuple:
    """``(T universe, S universe, E universe)`` for instance-1 γ on ``states``."""
    pairs = [(a, (), b) for a in states for b in states]
    return pairs, pairs, list(states)


def random_lemma_triple(seed: int, states=("a", "b")) -> LemmaTriple:
    """Random monotone ``g``, ``h`` and an ``f`` built to satisfy the step premise."""
    rng = random.Random(seed)
    UT, US, UE = lemma_lattices(states)
    g = _monotone_rules(rng, US, rng.randint(1, 5))
    h = _monotone_rules(rng, UE, rng.randint(0, 3))
    f0 = _monotone_rules(rng, UT, rng.randint(1, 6), 0.6)
    gamma = instance("N1")
    Ss, Es = _powerset(US), _powerset(UE)
    images = {}
    for ns in Ss:
        for es in Es:
            images[(ns, es)] = (gamma_image(gamma, ns, EIndex(es, states=True), UT),
                                gamma_image(gamma, g(ns), EIndex(h(es), states=True), UT))
    full = frozenset(UT)

    def f(x: frozenset) -> frozenset:
        out = f0(x)
        for dom_img, cod_img in images.values():
            if x <= dom_img:
                out &= cod_img
        return out & full
    return LemmaTriple(f, g, h, seed)


def fixpoint_refine_lemma_check(f: Callable, g: Callable, h: Callable, gamma: GammaInstance,
                                states=("a", "b")) -> tuple:
    """Verify the step premise exhaustively, then ``μf ⊆ γ(μg, μh)``.

    Returns ``(premise_holds, conclusion_holds, iterations)``.
    """
    UT, US, UE = lemma_lattices(states)
    Ts, Ss, Es = _powerset(UT), _powerset(US), _powerset(UE)
    premise = True
    for ns in Ss:
        gs = g(ns)
        for es in Es:
            img = gamma_image(gamma, ns, EIndex(es, states=True), UT)
            out = gamma_image(gamma, gs, EIndex(h(es), states=True), UT)
            for nt in Ts:
                if nt <= img and not f(nt) <= out:
                    premise = False
                    break
            if not premise:
                break
        if not premise:
            break
    mf, i1 = K.lfp(f, frozenset(), len(Ts) + 1)
    mg, i2 = K.lfp(g, frozenset(), len(Ss) + 1)
    mh, i3 = K.lfp(h, frozenset(), len(Es) + 1)
    concl = mf <= gamma_image(gamma, mg, EIndex(mh, states=True), UT)
    return premise, concl, (i1, i2, i3)


def design_choice_verdicts(target, source, r: MatchRel, states_t: Iterable, states_s: Iterable,
                           bound: int) -> dict:
    """Whether ``target.nrm`` is included in each γ variant of ``source``.

    Keys: ``two_arg`` (the γ used throughout), ``choice1`` and ``choice2``
    (the single-argument alternatives).  Values are ``None`` for inclusion or
    the first violating target triple.
    """
    e = source.err.pairs
    two = Gamma(GammaInstance("N3", "N3", r), source.nrm.triples, e)
    c1 = gamma_choice1(source.nrm.triples, e, r, states_t)
    c2 = gamma_choice2(source.nrm.triples, e, r, states_s, bound)
    out = {}
    for name, member in (("two_arg", two.__contains__), ("choice1", c1), ("choice2", c2)):
        out[name] = next((x for x in ordered(target.nrm.triples) if not member(x)), None)
    return out
