"""Command-line front end: ``denokat <command> ...``.

Every command can emit a JSON report (``--json``); reports are deterministic
for identical inputs and configuration, so they contain no timings.  Exit
codes: 0 pass, 1 fail, 2 truncated (inconclusive), 3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

from . import kat
from . import kernel as K
from . import passes as P
from . import refine as R
from . import suites as S
from .cfg_lang import cfg_module_sem, denote_cfg_module, merge_cfg_modules, semantic_link_cfg
from .kernel import LassoSet, StateTraceSet, TracedRel, ValueDomain, ordered
from .pcall_lang import ModuleDomain, denote_module, merge_modules, module_sem, semantic_link
from .struct_lang import denote_block, denote_struct
from .syntax import (Block, Break, Call, CfgModule, Continue, Exit, Goto, Label, Loop, Module, ParseError,
                     Sloop, parse_cfg_module, parse_module, parse_stmt, show, show_cfg_module, show_module,
                     sniff, walk)
from .while_lang import LanguageError, denote_twhile, denote_while

SCHEMA_VERSION = 1
EXIT = {"pass": 0, "fail": 1, "truncated": 2}
LANGS = ("auto", "while", "twhile", "struct", "block", "module", "cfg")


@dataclass(frozen=True)
class RunConfig:
    lang: str = "auto"
    modulus: int = 3
    vars: tuple = ("x", "y")
    bound: int = K.DEFAULT_BOUND
    seed: int = 0
    passes: tuple = ()
    profile: str = "auto"
    out: Optional[str] = None

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")
        if self.bound < 1:
            raise ValueError("trace bound must be at least 1")

    @property
    def dom(self) -> ValueDomain:
        return ValueDomain(self.modulus, self.vars)

    def md(self, globals_: tuple) -> ModuleDomain:
        return ModuleDomain(self.modulus, globals_, self.bound)

    def as_json(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


class UsageError(ValueError):
    pass


# ------------------------------------------------------------- encoding


def _plain(x):
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    if isinstance(x, (set, frozenset)):
        return [_plain(y) for y in ordered(x)]
    return x


def encode(v):
    """JSON-ready, canonically ordered form of a behavior set."""
    if isinstance(v, TracedRel):
        return {"triples": _plain(ordered(v.triples)), "truncated": v.truncated}
    if isinstance(v, LassoSet):
        return {"pairs": _plain(ordered(v.pairs)), "live": _plain(v.live), "truncated": v.truncated}
    if isinstance(v, StateTraceSet):
        return {"pairs": _plain(ordered(v.pairs)), "truncated": v.truncated}
    return _plain(v)


def denotation_fields(d) -> dict:
    """Named behavior sets of any denotation record, in a fixed order."""
    out = {}
    for f in ("dom", "nrm", "brk", "ctn", "err", "cll", "dvg", "fin_dvg", "inf_dvg"):
        if hasattr(d, f):
            out[f] = getattr(d, f)
    for k, r in getattr(d, "blk", ()):
        out[f"blk_{k}"] = r
    for k, r in getattr(d, "chan", ()):
        out[str(k)] = r
    return out


def _size(v) -> int:
    for attr in ("triples", "pairs"):
        if hasattr(v, attr):
            return len(getattr(v, attr))
    return len(v)


def _fmt(x) -> str:
    return json.dumps(_plain(x), ensure_ascii=False)


def _text_fields(fields: dict, limit: int = 12) -> list:
    lines = []
    for k, v in fields.items():
        enc = encode(v)
        items = enc.get("triples", enc.get("pairs")) if isinstance(enc, dict) else enc
        flag = " (truncated)" if isinstance(enc, dict) and enc.get("truncated") else ""
        shown = "; ".join(_fmt(i) for i in items[:limit])
        more = f"; ... {len(items) - limit} more" if len(items) > limit else ""
        lines.append(f"{k} [{_size(v)}]{flag}: {shown}{more}")
    return lines


# ------------------------------------------------------------- programs


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def detect_lang(text: str) -> str:
    kind = sniff(text)
    if kind == "cfg":
        return "cfg"
    if kind == "module":
        return "module"
    nodes = list(walk(parse_stmt(text)))
    if any(isinstance(n, (Block, Exit, Sloop)) for n in nodes):
        return "block"
    if any(isinstance(n, (Break, Continue, Loop)) for n in nodes):
        return "struct"
    if any(isinstance(n, (Call, Label, Goto)) for n in nodes):
        raise UsageError("calls and labels need a module file (proc ... { ... })")
    return "twhile"


def load(path: str, cfg: RunConfig) -> tuple:
    """``(lang, program)`` for a program file."""
    text = _read(path)
    lang = detect_lang(text) if cfg.lang == "auto" else cfg.lang
    if lang == "module":
        return lang, parse_module(text)
    if lang == "cfg":
        return lang, parse_cfg_module(text)
    return lang, parse_stmt(text)


def denote(lang: str, prog, cfg: RunConfig, chi: Optional[TracedRel] = None):
    if lang == "while":
        return denote_while(prog, cfg.dom)
    if lang == "twhile":
        return denote_twhile(prog, cfg.dom, cfg.bound)
    if lang == "struct":
        return denote_struct(prog, cfg.dom, cfg.bound)
    if lang == "block":
        return denote_block(prog, cfg.dom, cfg.bound)
    if lang == "module":
        return denote_module(prog, chi, cfg.md(prog.globals))
    if lang == "cfg":
        return denote_cfg_module(prog, chi, cfg.md(prog.globals))
    raise UsageError(f"unknown language {lang!r}")


def show_program(prog) -> str:
    if isinstance(prog, Module):
        return show_module(prog)
    if isinstance(prog, CfgModule):
        return show_cfg_module(prog)
    return show(prog)


# --------------------------------------------------------------- passes


def apply_pass(name: str, lang: str, prog, cfg: RunConfig) -> tuple:
    """``(target_lang, target, source_lang, source)`` after running ``name``."""
    if lang in ("twhile", "while"):
        if name == "skip-removal":
            return lang, P.remove_skips(prog), lang, prog
        if name == "const-prop":
            return lang, P.const_prop(prog, None, cfg.modulus), lang, prog
        if name == "dce":
            return lang, P.dead_code_elim(prog, cfg.vars, ()), lang, prog
    if lang == "module":
        target, source = S.transform_module(name, prog, cfg.modulus)
        return ("cfg" if isinstance(target, CfgModule) else "module"), target, \
            ("cfg" if isinstance(source, CfgModule) else "module"), source
    if lang == "cfg":
        if name in ("const-prop", "cp-cfg"):
            return lang, P.const_prop_cfg(prog, cfg.modulus), lang, prog
        if name in ("dce", "dce-cfg"):
            return lang, P.dce_cfg(prog), lang, prog
    raise UsageError(f"pass {name!r} does not apply to {lang} programs")


def _verdict_check(name: str, anchor: str, v: R.Verdict, stats: Optional[dict] = None) -> S.Check:
    witness = None if v.ok else f"{v.field}: {_fmt(v.witness)}" if v.field else None
    return S.Check(name, anchor, v.status, witness, {"checked": v.checked, **(stats or {})})


def refine_check(t_lang: str, target, s_lang: str, source, cfg: RunConfig,
                 pass_name: Optional[str] = None) -> S.Check:
    """Refinement check of ``target`` against ``source`` under ``cfg.profile``."""
    label = f"refine-{pass_name}" if pass_name else "refine"
    if s_lang in ("module", "cfg"):
        if t_lang not in ("module", "cfg"):
            raise UsageError("a module source needs a module target")
        md = cfg.md(source.globals)
        oracles = S._oracles(random.Random(cfg.seed), md, 3)
        v = R.check_refine_module(S.sem_of(target, md), S.sem_of(source, md), R.Kir(), R.Kir(), oracles)
        return _verdict_check(label, "module refinement over sampled oracles", v, {"oracles": len(oracles)})
    if pass_name == "const-prop" and s_lang == "twhile":
        v = S.check_stmt_pass("const-prop", source, cfg.dom, cfg.bound)
        return _verdict_check(label, "analysis-indexed statement refinement", v)
    profile = cfg.profile
    if profile == "auto":
        profile = "cshmgen" if (s_lang, t_lang) == ("struct", "block") else \
            "plain" if s_lang == "while" else "traced"
    if profile == "cshmgen":
        v = R.check_refine_stmt(denote(t_lang, target, cfg), denote(s_lang, source, cfg),
                                R.Profile("cshmgen", n_b=1, n_c=0))
    elif profile in ("plain", "abort", "traced"):
        v = R.check_refine_stmt(denote(t_lang, target, cfg), denote(s_lang, source, cfg), R.Profile(profile))
    else:
        raise UsageError(f"profile {profile!r} is not available from the command line")
    return _verdict_check(label, f"statement refinement ({profile} profile)", v)


# --------------------------------------------------------------- report


def overall(checks: list) -> str:
    vs = {c.verdict for c in checks}
    return "fail" if "fail" in vs else "truncated" if "truncated" in vs else "pass"


def report(command: str, cfg: RunConfig, checks: list, **extra) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg.as_json(),
            "verdict": overall(checks), "checks": [c.as_json() for c in checks], **extra}


def emit(rep: dict, text_lines: list, args, cfg: RunConfig) -> int:
    if args.json or cfg.out:
        doc = json.dumps(rep, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(doc)
        if args.json:
            sys.stdout.write(doc)
    if not args.json:
        for line in text_lines:
            print(line)
        for c in rep["checks"]:
            w = f"  {c['witness']}" if "witness" in c else ""
            print(f"{c['verdict']:<9} {c['name']}{w}")
    return EXIT[rep["verdict"]]


# ------------------------------------------------------------- commands


def cmd_denote(args, cfg: RunConfig) -> int:
    lang, prog = load(args.file, cfg)
    d = denote(lang, prog, cfg)
    fields = denotation_fields(d)
    truncated = bool(getattr(d, "truncated", False))
    check = S.Check("denote", "denotation computed", "truncated" if truncated else "pass", None,
                    {k: _size(v) for k, v in fields.items()})
    rep = report("denote", cfg, [check], lang=lang,
                 denotation={k: encode(v) for k, v in fields.items()})
    return emit(rep, [f"lang: {lang}"] + _text_fields(fields), args, cfg)


def cmd_run_pass(args, cfg: RunConfig) -> int:
    lang, prog = load(args.file, cfg)
    names = cfg.passes or ("const-prop",)
    checks = []
    cur_lang, cur = lang, prog
    for name in names:
        t_lang, target, s_lang, source = apply_pass(name, cur_lang, cur, cfg)
        if args.check:
            checks.append(refine_check(t_lang, target, s_lang, source, cfg, name))
        cur_lang, cur = t_lang, target
    text = show_program(cur)
    return emit(report("run-pass", cfg, checks, lang=cur_lang, program=text), [text], args, cfg)


def cmd_check_refine(args, cfg: RunConfig) -> int:
    s_lang, source = load(args.source, cfg)
    if args.target in S.PASSES and not os.path.exists(args.target):
        t_lang, target, s_lang, source = apply_pass(args.target, s_lang, source, cfg)
        check = refine_check(t_lang, target, s_lang, source, cfg, args.target)
    else:
        t_lang, target = load(args.target, cfg)
        check = refine_check(t_lang, target, s_lang, source, cfg)
    return emit(report("check-refine", cfg, [check]), [], args, cfg)


def cmd_link(args, cfg: RunConfig) -> int:
    progs = [load(f, cfg) for f in args.files]
    langs = {lang for lang, _ in progs}
    if len(progs) < 2 or len(langs) != 1 or langs - {"module", "cfg"}:
        raise UsageError("link needs two or more module files of the same language")
    lang = langs.pop()
    mods = [p for _, p in progs]
    md = cfg.md(mods[0].globals)
    sem, merge, link = (module_sem, merge_modules, semantic_link) if lang == "module" else \
        (cfg_module_sem, merge_cfg_modules, semantic_link_cfg)
    merged = mods[0]
    linked_sem = sem(mods[0], md)
    lhs = None
    for m in mods[1:]:
        lhs = link(linked_sem, sem(m, md))
        merged = merge(merged, m)
        linked_sem = sem(merged, md)
    rhs = (denote_module if lang == "module" else denote_cfg_module)(merged, None, md)
    diff = S._cmp_fields(lhs, rhs)
    check = S.Check("link", "semantic linking equals syntactic linking", "fail" if diff else "pass",
                    f"field {diff} differs" if diff else None, {"modules": len(mods)})
    fields = rhs.fields()
    rep = report("link", cfg, [check], program=show_program(merged),
                 denotation={k: encode(v) for k, v in fields.items()})
    return emit(rep, _text_fields(fields), args, cfg)


def cmd_theorems(args, cfg: RunConfig) -> int:
    names = args.suite or list(S.SUITES)
    for n in names:
        if n not in S.SUITES:
            raise UsageError(f"unknown suite {n!r}; choose from {', '.join(S.SUITES)}")
    scfg = S.SuiteConfig(cfg.modulus, cfg.bound, cfg.seed, args.scale)
    checks = []
    for n in names:
        t = time.perf_counter()
        checks.extend(S.SUITES[n](scfg))
        if not args.json:
            print(f"# {n}: {time.perf_counter() - t:.2f}s", file=sys.stderr)
    return emit(report("theorems", cfg, checks, suites=names), [], args, cfg)


def cmd_kat_check(args, cfg: RunConfig) -> int:
    lhs, rhs = kat.parse(args.lhs), kat.parse(args.rhs)
    op = "<=" if args.leq else "="
    try:
        ok = kat.decide_leq(lhs, rhs) if args.leq else kat.decide_eq(lhs, rhs)
        cex = None if ok else kat.counterexample(lhs, rhs) or kat.counterexample(rhs, lhs)
        check = S.Check("kat", f"{kat.show(lhs)} {op} {kat.show(rhs)}", "pass" if ok else "fail",
                        None if ok else _fmt(cex), {})
    except kat.KatUndecided as exc:
        check = S.Check("kat", f"{kat.show(lhs)} {op} {kat.show(rhs)}", "truncated", str(exc), {})
    return emit(report("kat-check", cfg, [check]), [], args, cfg)


# ----------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modulus", type=int, default=3)
    common.add_argument("--vars", default="x,y", help="comma-separated statement variables")
    common.add_argument("--trace-bound", type=int, default=K.DEFAULT_BOUND)
    common.add_argument("--seed", type=int, default=0, help="overridden by DENOKAT_SEED")
    common.add_argument("--profile", default="auto", help="plain, abort, traced or cshmgen")
    common.add_argument("--lang", default="auto", choices=LANGS)
    common.add_argument("--out", help="also write the JSON report here")
    common.add_argument("--json", action="store_true", help="print the JSON report")

    ap = argparse.ArgumentParser(prog="denokat", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("denote", parents=[common], help="print the behavior sets of a program")
    p.add_argument("file")
    p.set_defaults(fn=cmd_denote)
    p = sub.add_parser("run-pass", parents=[common], help="transform a program")
    p.add_argument("file")
    p.add_argument("--pass", dest="passes", action="append", choices=S.PASSES)
    p.add_argument("--check", action="store_true", help="also check each step refines")
    p.set_defaults(fn=cmd_run_pass)
    p = sub.add_parser("check-refine", parents=[common], help="check target refines source")
    p.add_argument("source")
    p.add_argument("target", help="target program file or a pass name")
    p.set_defaults(fn=cmd_check_refine)
    p = sub.add_parser("link", parents=[common], help="link module files")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_link)
    p = sub.add_parser("theorems", parents=[common], help="run the property suites")
    p.add_argument("--suite", action="append", help=f"one of: {', '.join(S.SUITES)}")
    p.add_argument("--scale", type=float, default=1.0, help="multiply every trial count")
    p.set_defaults(fn=cmd_theorems)
    p = sub.add_parser("kat-check", parents=[common], help="decide a KAT (in)equation")
    p.add_argument("lhs")
    p.add_argument("rhs")
    p.add_argument("--leq", action="store_true", help="decide lhs <= rhs instead of equality")
    p.set_defaults(fn=cmd_kat_check)
    return ap


def config_from(args) -> RunConfig:
    seed = int(os.environ["DENOKAT_SEED"]) if os.environ.get("DENOKAT_SEED") else args.seed
    return RunConfig(lang=args.lang, modulus=args.modulus,
                     vars=tuple(v.strip() for v in args.vars.split(",") if v.strip()),
                     bound=args.trace_bound, seed=seed, passes=tuple(getattr(args, "passes", None) or ()),
                     profile=args.profile, out=args.out)


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from(args)
        return args.fn(args, cfg)
    except (UsageError, ParseError, LanguageError, kat.KatSyntaxError, OSError, ValueError) as exc:
        print(f"denokat: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
