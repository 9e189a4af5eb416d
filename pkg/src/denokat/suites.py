"""Property suites: each runs one family of checks and returns ``Check``
records.  The CLI ``theorems`` command and the acceptance tests share them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import corpus as C
from . import gen
from . import kat
from . import kernel as K
from . import oracle as O
from . import passes as P
from . import refine as R
from .cfg_lang import cfg_module_sem, denote_cfg_module, merge_cfg_modules, semantic_link_cfg
from .kernel import ValueDomain
from .pcall_lang import (ModuleDomain, denote_module, denote_pstmt, merge_modules, module_sem,
                         semantic_link)
from .struct_lang import denote_block, denote_struct, lower_struct
from .syntax import parse_stmt, show
from .while_lang import denote_twhile, denote_while


@dataclass
class Check:
    name: str
    anchor: str
    verdict: str  # pass | fail | truncated
    witness: Optional[str] = None
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def as_json(self) -> dict:
        d = {"name": self.name, "paper_anchor": self.anchor, "verdict": self.verdict,
             "stats": dict(sorted(self.stats.items()))}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


@dataclass
class SuiteConfig:
    modulus: int = 3
    bound: int = K.DEFAULT_BOUND
    seed: int = 0
    scale: float = 1.0  # multiplies every trial count

    def n(self, count: int) -> int:
        return max(1, int(round(count * self.scale)))


# ---------------------------------------------------------- 1 powerdomain


def suite_powerdomain(cfg: SuiteConfig) -> list:
    dom = ValueDomain(cfg.modulus, ("x", "y"))
    progs = ("skip", "while true do skip", "choice { skip } or { while true do skip }")
    ds = [denote_while(parse_stmt(p), dom) for p in progs]
    distinct = len({(d.nrm.triples, d.dvg) for d in ds}) == 3
    return [Check("powerdomain-distinct", "angelic/demonic/erratic choice distinguished",
                  "pass" if distinct else "fail", None if distinct else "two denotations coincide",
                  {"programs": 3})]


# ---------------------------------------------------------------- 2 Bekić


def _rule_map(rng: random.Random, n_rules: int, universe: tuple) -> Callable:
    base = frozenset(x for x in universe if rng.random() < 0.15)
    rules = [(frozenset(rng.sample(universe, rng.randint(0, 2))),
              frozenset(rng.sample(universe, rng.randint(0, 2))), rng.choice(universe))
             for _ in range(n_rules)]

    def f(x, y):
        return base | frozenset(c for p, q, c in rules if p <= x and q <= y)
    return f


def suite_bekic(cfg: SuiteConfig, trials: int = 300) -> list:
    rng = random.Random(cfg.seed)
    universe = (0, 1, 2)
    bad = None
    n = cfg.n(trials)
    for i in range(n):
        f = _rule_map(rng, rng.randint(1, 6), universe)
        g = _rule_map(rng, rng.randint(1, 6), universe)
        if not K.bekic_check(f, g, 4, 4) and bad is None:
            bad = f"trial {i}"
    return [Check("bekic", "nested and simultaneous least fixed points agree",
                  "fail" if bad else "pass", bad, {"pairs": n})]


# --------------------------------------------------------------- 3 linking


def _cmp_fields(a, b) -> Optional[str]:
    fa, fb = a.fields(), b.fields()
    for k in sorted(fa):
        if fa[k] != fb[k]:
            return k
    return None


def suite_linking(cfg: SuiteConfig, pcall: int = 100, cfgs: int = 100) -> list:
    md = ModuleDomain(cfg.modulus, ("x",), cfg.bound)
    out = []
    for lang, count in (("pcall", pcall), ("cfg", cfgs)):
        rng = random.Random(cfg.seed * 7 + len(lang))
        n = cfg.n(count)
        bad = None
        for i in range(n):
            chi = gen.rand_oracle(rng, ("ext",), md.gstates, cfg.bound, density=0.4)
            if lang == "pcall":
                m1 = gen.rand_module(rng, ("f", "g"), ("x",), ("a",), ("h", "k", "ext"), 3)
                m2 = gen.rand_module(rng, ("h", "k"), ("x",), ("a",), ("f", "g", "ext"), 3)
                lhs = semantic_link(module_sem(m1, md), module_sem(m2, md), chi)
                rhs = denote_module(merge_modules(m1, m2), chi, md)
            else:
                m1 = gen.rand_cfg_module(rng, ("f", "g"), ("x",), ("h", "k", "ext"))
                m2 = gen.rand_cfg_module(rng, ("h", "k"), ("x",), ("f", "g", "ext"))
                lhs = semantic_link_cfg(cfg_module_sem(m1, md), cfg_module_sem(m2, md), chi)
                rhs = denote_cfg_module(merge_cfg_modules(m1, m2), chi, md)
            diff = _cmp_fields(lhs, rhs)
            if diff and bad is None:
                bad = f"pair {i}: field {diff} differs"
        out.append(Check(f"linking-{lang}", "semantic linking equals syntactic linking",
                         "fail" if bad else "pass", bad, {"pairs": n}))
    return out


# -------------------------------------------------------------- 4 RA laws


def suite_ra_laws(cfg: SuiteConfig, trials: int = 500) -> list:
    out = []
    n = cfg.n(trials)
    dom = ValueDomain(3, ("x",))
    states = dom.states
    rng = random.Random(cfg.seed)

    def rand_rel():
        return R.MatchRel.of((s, t) for s in states for t in states if rng.random() < 0.35)

    def rand_pi():
        return rng.choice([R.AnalysisResult(), R.AnalysisResult.of(x=0), R.AnalysisResult.of(x=1),
                           R.AnalysisResult.of(x=2)])

    def rand_kripke():
        fam = {w: [(s, t) for s in states for t in states if rng.random() < 0.35] for w in (0, 1)}
        return R.MatchRel.kripke(fam, {(0, 0), (1, 1), (0, 1)})

    chunks = 5
    plans = [("family-1", lambda: R.family(1)), ("family-2", lambda: R.family(2)),
             ("family-3", lambda: R.family(3, rand_rel())),
             ("family-kripke", lambda: R.family("kripke", rand_kripke())),
             ("family-pi", lambda: R.family("pi", pi0=rand_pi(), dom=dom))]
    for name, make in plans:
        per = max(1, n // chunks)
        total = 0
        first = None
        for c in range(chunks):
            rep = R.check_ra_laws(*make(), trials=per, seed=cfg.seed * 101 + c)
            total += rep.trials
            for law, w in sorted(rep.results.items()):
                if w is not None and first is None:
                    first = f"{law}: {w!r}"
        out.append(Check(f"ra-laws-{name}", "union/concatenation/star/infinity inclusions and monotonicity",
                         "fail" if first else "pass", first, {"tuples": total}))
    first = None
    for c in range(chunks):
        rep = R.check_pi_concat(rand_pi(), rand_pi(), rand_pi(), dom, max(1, n // chunks), cfg.seed + c)
        for law, w in sorted(rep.results.items()):
            if w is not None and first is None:
                first = f"{law}: {w!r}"
    out.append(Check("ra-laws-pi-concat", "analysis-indexed concatenation",
                     "fail" if first else "pass", first, {"tuples": chunks * max(1, n // chunks)}))
    # negative control: a non-monotone γ must be caught
    fake = R.GammaInstance("complement", "N2", custom=lambda nn, e, c: c not in nn)
    rep = R.check_ra_laws(fake, *R.family(2)[1:], trials=50, seed=cfg.seed, monotone_only=True)
    caught = rep.results["monotone"] is not None
    out.append(Check("ra-laws-negative-control", "non-monotone γ is rejected",
                     "pass" if caught else "fail", repr(rep.results["monotone"]), {"tuples": 50}))
    out.extend(suite_design_choices(cfg))
    return out


def suite_design_choices(cfg: SuiteConfig) -> list:
    out = []
    bound = 4
    for pair in C.CHOICE_PAIRS:
        dt, ds = pair.domains(cfg.modulus)
        t = denote_twhile(parse_stmt(pair.target), dt, bound)
        s = denote_twhile(parse_stmt(pair.source), ds, bound)
        v = R.design_choice_verdicts(t, s, pair.match(cfg.modulus), dt.states, ds.states, bound)
        ok = v["two_arg"] is None and v[pair.rejects] is not None
        out.append(Check(f"design-{pair.rejects}-{pair.name}", "single-argument γ variants are too strong",
                         "pass" if ok else "fail", repr(v[pair.rejects]),
                         {"two_arg_accepts": v["two_arg"] is None}))
    return out


# ------------------------------------------------------------- 5 lowering


def check_lowering(s, dom: ValueDomain, bound: int, n_b: int, n_c: int) -> R.Verdict:
    u = lower_struct(s, n_b, n_c)
    if u is None:
        return R.Verdict("fail", "lower", show(s))
    return R.check_refine_stmt(denote_block(u, dom, bound), denote_struct(s, dom, bound),
                               R.Profile("cshmgen", n_b=n_b, n_c=n_c))


def suite_lowering(cfg: SuiteConfig, depth: int = 4) -> list:
    dom = ValueDomain(cfg.modulus, ("x",))
    progs = gen.enumerate_struct(depth)
    status: dict = {}
    first = None
    for s in progs:
        for nb, nc in ((1, 0), (2, 5)):
            v = check_lowering(s, dom, cfg.bound, nb, nc)
            status[v.status] = status.get(v.status, 0) + 1
            if not v.ok and first is None:
                first = f"{show(s)} ({nb},{nc}): {v.field} {v.witness!r}"
    out = [Check("lowering-exhaustive", "STRUCT-to-BLOCK lowering refines",
                 "fail" if status.get("fail") else ("truncated" if first else "pass"), first,
                 {"programs": len(progs), **{f"status_{k}": v for k, v in sorted(status.items())}})]
    loop = parse_stmt(C.LOOP_SHAPE)
    low = lower_struct(loop, 1, 0)
    shape_ok = low == parse_stmt(C.LOOP_SHAPE_LOWERED)
    v = check_lowering(loop, dom, cfg.bound, 1, 0)
    out.append(Check("lowering-loop-shape", "loop lowering shape", "pass" if shape_ok and v.ok else "fail",
                     show(low), {}))
    dom2 = ValueDomain(cfg.modulus, ("x", "y"))
    lhs = denote_block(parse_stmt(C.BLOCK_EXIT1), dom2, cfg.bound).nrm
    rhs = denote_block(parse_stmt(C.BLOCK_EXIT1_EQUIV), dom2, cfg.bound).nrm
    out.append(Check("block-exit1", "nested block exit skips the rest of the outer block",
                     "pass" if lhs == rhs else "fail", None, {"triples": len(lhs)}))
    return out


# --------------------------------------------------------------- 6 passes

WDOM_VARS = ("x", "y")
PASSES = ("skip-removal", "const-prop", "dce", "cfg-gen", "cp-cfg", "dce-cfg")


def _oracles(rng: random.Random, md: ModuleDomain, n: int = 2) -> list:
    out = [(K.empty_rel(md.bound), K.empty_rel(md.bound), K.empty_sts(md.bound))]
    for _ in range(n - 1):
        chi = gen.rand_oracle(rng, C.MODULE_EXTERNALS, md.gstates, md.bound, density=0.4)
        che = gen.rand_abort_oracle(rng, C.MODULE_EXTERNALS, md.gstates, md.bound)
        out.append((chi, chi, che))
    return out


def check_stmt_pass(name: str, s, dom: ValueDomain, bound: int) -> R.Verdict:
    src = denote_twhile(s, dom, bound)
    if name == "skip-removal":
        return R.check_refine_stmt(denote_twhile(P.remove_skips(s), dom, bound), src, R.Profile("plain"))
    if name == "const-prop":
        a = P.analyze_constants(s, R.AnalysisResult(), dom.modulus)
        pi1 = a.after if a.after is not None else R.AnalysisResult()
        return R.check_refine_stmt(denote_twhile(a.stmt, dom, bound), src,
                                   R.Profile("pi", pi0=a.before, pi1=pi1, dom=dom))
    if name == "dce":
        t = P.dead_code_elim(s, dom.variables, ())
        return R.check_refine_stmt(denote_twhile(t, dom, bound), src, R.Profile("traced"))
    raise ValueError(name)


def transform_module(name: str, m, modulus: int):
    """``(target, source)`` program pair for a module-level pass."""
    if name == "skip-removal":
        return P.remove_skips(m), m
    if name == "const-prop":
        return P.const_prop_module(m, modulus), m
    if name == "dce":
        return P.dce_module(m), m
    if name == "cfg-gen":
        return P.gen_cfg(m), m
    if name == "cp-cfg":
        c = P.gen_cfg(m)
        return P.const_prop_cfg(c, modulus), c
    if name == "dce-cfg":
        c = P.gen_cfg(m)
        return P.dce_cfg(c), c
    raise ValueError(name)


def sem_of(prog, md: ModuleDomain):
    return module_sem(prog, md) if hasattr(prog.procs[0], "body") else cfg_module_sem(prog, md)


def check_module_pass(name: str, m, md: ModuleDomain, oracles: list) -> R.Verdict:
    target, source = transform_module(name, m, md.modulus)
    kid = R.Kir()
    v = R.check_refine_module(sem_of(target, md), sem_of(source, md), kid, kid, oracles)
    if v.status == "fail" or name != "const-prop":
        return v
    # statement-level analysis-indexed check of every procedure body
    for p_t, p_s in zip(target.procs, source.procs):
        dom = md.frame(p_s.locals)
        pi0 = R.AnalysisResult(tuple((x, 0) for x in p_s.locals))
        a = P.analyze_constants(p_s.body, pi0, md.modulus, md.globals)
        pi1 = a.after if a.after is not None else R.AnalysisResult()
        for chi_t, chi_s, chi_e in oracles:
            dt = denote_pstmt(p_t.body, chi_t, dom, len(p_s.locals), md.bound)
            ds = denote_pstmt(p_s.body, chi_s, dom, len(p_s.locals), md.bound)
            vb = R.check_refine_stmt(dt, ds, R.Profile("pi", pi0=pi0, pi1=pi1, dom=dom, chi_e=chi_e))
            if vb.status == "fail":
                return vb
    return v


def _saturating_module(rng: random.Random, md: ModuleDomain, oracles: list):
    while True:
        m = gen.rand_module(rng, ("main", "f"), md.globals, ("a",), C.MODULE_EXTERNALS, 3)
        sem = module_sem(m, md)
        if not any(sem(chi).truncated for chi, _, _ in oracles):
            return m


def _saturating_oracles(rng: random.Random, md: ModuleDomain, m, tries: int = 100) -> list:
    """Random oracles under which the fixed module ``m`` is saturating."""
    sem = module_sem(m, md)
    for _ in range(tries):
        oracles = _oracles(rng, md)
        if not any(sem(chi).truncated for chi, _, _ in oracles):
            return oracles
    raise ValueError(f"no saturating oracles found for {show(m)}")


def _saturating_stmt(rng: random.Random, dom: ValueDomain, bound: int):
    while True:
        s = gen.rand_while(rng, dom.variables, 4)
        if not denote_twhile(s, dom, bound).truncated:
            return s


def suite_passes(cfg: SuiteConfig, random_programs: int = 200) -> list:
    out = []
    md = ModuleDomain(cfg.modulus, ("x",), cfg.bound)
    dom = ValueDomain(cfg.modulus, WDOM_VARS)
    n = cfg.n(random_programs)
    # the worked constant-propagation example
    a = P.analyze_constants(parse_stmt("x := 1; y := x + 1"), R.AnalysisResult(), cfg.modulus)
    anns = [p.show() for p in P.seq_annotations(a)]
    ex_ok = show(a.stmt) == "x := 1; y := 2" and anns == ["{x↦1}", "{x↦1, y↦2}"]
    out.append(Check("const-prop-example", "constant propagation worked example",
                     "pass" if ex_ok else "fail", f"{show(a.stmt)} {anns}", {}))
    for name in PASSES:
        rng = random.Random(cfg.seed * 31 + PASSES.index(name))
        status: dict = {}
        first = None
        programs = 0

        def record(v, what):
            nonlocal first
            status[v.status] = status.get(v.status, 0) + 1
            if not v.ok and first is None:
                first = f"{what}: {v.field} {v.witness!r}"

        for text, m in zip(C.MODULE_CORPUS, C.module_corpus()):
            oracles = _saturating_oracles(rng, md, m)
            record(check_module_pass(name, m, md, oracles), f"corpus {text}")
            programs += 1
        for i in range(n):
            oracles = _oracles(rng, md)
            m = _saturating_module(rng, md, oracles)
            record(check_module_pass(name, m, md, oracles), f"random module {i}")
            programs += 1
        if name in ("skip-removal", "const-prop", "dce"):
            for s in C.while_corpus():
                record(check_stmt_pass(name, s, dom, cfg.bound), f"statement {show(s)}")
            for _ in range(n):
                s = _saturating_stmt(rng, dom, cfg.bound)
                record(check_stmt_pass(name, s, dom, cfg.bound), f"random statement {show(s)}")
        verdict = "fail" if status.get("fail") else ("truncated" if status.get("truncated") else "pass")
        out.append(Check(f"pass-{name}", "transformation output refines its input", verdict, first,
                         {"module_programs": programs, **{f"status_{k}": v for k, v in sorted(status.items())}}))
    return out


# ------------------------------------------------------ 7 compositionality


def optimize(m):
    return P.dce_module(P.const_prop_module(m, 3))


def suite_composition(cfg: SuiteConfig, sets: int = 50, lemma: int = 200) -> list:
    md = ModuleDomain(cfg.modulus, ("x",), cfg.bound)
    rng = random.Random(cfg.seed * 13 + 1)
    kid = R.Kir()
    n = cfg.n(sets)
    hz_bad = vt_bad = None
    direct_fail = 0
    for i in range(n):
        oracles = _oracles(rng, md)
        s1 = gen.rand_module(rng, ("f", "g"), ("x",), ("a",), ("h", "ext"), 3)
        s2 = gen.rand_module(rng, ("h",), ("x",), ("a",), ("f", "ext"), 3)
        t1 = P.dce_module(P.const_prop_module(s1, md.modulus))
        t2 = P.dce_module(P.const_prop_module(s2, md.modulus))
        rep = R.check_horizontal((module_sem(s1, md), module_sem(s2, md)),
                                 (module_sem(t1, md), module_sem(t2, md)), kid, oracles)
        if rep.direct.status == "fail":
            direct_fail += 1
        if not rep.ok and hz_bad is None:
            hz_bad = f"set {i}: {rep.direct.field} {rep.direct.witness!r}"
        m1 = merge_modules(s1, s2)
        m2 = P.const_prop_module(m1, md.modulus)
        m3 = P.dce_module(m2)
        vrep = R.check_vertical(module_sem(m1, md), module_sem(m2, md), module_sem(m3, md),
                                (kid, kid), (kid, kid), oracles)
        if not vrep.ok and vt_bad is None:
            vt_bad = f"set {i}: {vrep.direct.field} {vrep.direct.witness!r}"
    out = [Check("horizontal", "per-module refinement lifts to linked modules",
                 "fail" if hz_bad else "pass", hz_bad, {"sets": n, "direct_failures": direct_fail}),
           Check("vertical", "refinements compose along a pass pipeline",
                 "fail" if vt_bad else "pass", vt_bad, {"sets": n})]
    nl = cfg.n(lemma)
    bad = None
    premise_ok = 0
    nonempty = 0
    gamma = R.instance("N1")
    for i in range(nl):
        tr = R.random_lemma_triple(cfg.seed * 1000 + i)
        prem, concl, _ = R.fixpoint_refine_lemma_check(tr.f, tr.g, tr.h, gamma)
        premise_ok += prem
        nonempty += bool(K.lfp(tr.f, frozenset(), 100)[0])
        if prem and not concl and bad is None:
            bad = f"triple seed {tr.seed}"
        if not prem and bad is None:
            bad = f"generated triple {tr.seed} violates the premise"
    out.append(Check("fixpoint-lemma", "least fixed points preserve refinement",
                     "fail" if bad else "pass", bad,
                     {"triples": nl, "premise_holds": premise_ok, "nonempty_lfp": nonempty}))
    return out


# ---------------------------------------------------------------- 8 oracle


def suite_oracle(cfg: SuiteConfig, whiles: int = 200, cfgs: int = 100) -> list:
    out = []
    dom = ValueDomain(cfg.modulus, ("x", "y"))
    for lang, count in (("while", whiles), ("cfg", cfgs)):
        rng = random.Random(cfg.seed * 17 + len(lang))
        n = cfg.n(count)
        done = skipped = 0
        bad = None
        while done < n:
            if lang == "while":
                prog = gen.rand_while(rng, ("x", "y"), 5)
            else:
                prog = gen.rand_cfg_proc(rng, 5, ("x", "y"))
            d = O.denotation_fields(prog, dom, cfg.bound)
            # unsaturated programs are skipped before the costly enumeration
            v = O.Verdict(True, None, True) if d.truncated else O.cross_check(prog, dom, cfg.bound, d)
            if v.truncated:
                skipped += 1
                continue
            done += 1
            if not v.ok and bad is None:
                bad = f"{show(prog) if lang == 'while' else prog!r}: {v.mismatch!r}"
        out.append(Check(f"oracle-{lang}", "denotational and operational behavior sets coincide",
                         "fail" if bad else "pass", bad, {"programs": done, "skipped_unsaturated": skipped}))
    bad = None
    for s in C.oracle_corpus():
        v = O.cross_check(s, dom, cfg.bound)
        if not v.ok and bad is None and not v.truncated:
            bad = f"{show(s)}: {v.mismatch!r}"
    out.append(Check("oracle-corpus", "denotational and operational behavior sets coincide",
                     "fail" if bad else "pass", bad, {"programs": len(C.oracle_corpus())}))
    return out


# ------------------------------------------------------------------ 9 KAT


def suite_kat(cfg: SuiteConfig, cases: int = 1000) -> list:
    res = kat.suite_results()
    bad = next((f"{l} vs {r}" for l, r, _, ok in res if not ok), None)
    out = [Check("kat-identities", "KAT identities and loop proof goals decide true",
                 "fail" if bad else "pass", bad, {"identities": len(res)})]
    rep = kat.soundness_fuzz(cfg.n(cases), cfg.seed)
    w = repr(rep.unsound[0]) if rep.unsound else None
    out.append(Check("kat-soundness", "no unsound inclusion verdicts", "fail" if w else "pass", w,
                     {"true_cases": rep.true_cases, "false_cases": rep.false_cases}))
    return out


# ------------------------------------------------------------ 10 divergence


def suite_divergence(cfg: SuiteConfig) -> list:
    dom = ValueDomain(cfg.modulus, ("x", "y"))
    a = denote_twhile(parse_stmt("while true do skip"), dom, cfg.bound)
    b = denote_twhile(parse_stmt("while true do print(0)"), dom, cfg.bound)
    all_nil = frozenset((s, ()) for s in dom.states)
    ok_a = a.fin_dvg.pairs == all_nil and not a.inf_dvg.pairs and not a.nrm.triples
    ok_b = not b.fin_dvg.pairs and b.inf_dvg.pairs == frozenset((s, ((), (0,))) for s in dom.states)
    return [Check("divergence-silent", "silent divergence is finite-trace divergence",
                  "pass" if ok_a else "fail", None, {"fin_dvg": len(a.fin_dvg.pairs)}),
            Check("divergence-reactive", "reactive divergence is an infinite trace",
                  "pass" if ok_b else "fail", None, {"inf_dvg": len(b.inf_dvg.pairs)})]


SUITES = {
    "powerdomain": suite_powerdomain,
    "bekic": suite_bekic,
    "linking": suite_linking,
    "ra-laws": suite_ra_laws,
    "lowering": suite_lowering,
    "passes": suite_passes,
    "composition": suite_composition,
    "oracle": suite_oracle,
    "kat": suite_kat,
    "divergence": suite_divergence,
}


def run_suites(names, cfg: SuiteConfig) -> list:
    out = []
    for n in names:
        out.extend(SUITES[n](cfg))
    return out
