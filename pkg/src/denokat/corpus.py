"""Fixed program corpora shared by the tests, the acceptance run and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .kernel import ValueDomain
from .refine import MatchRel
from .syntax import parse_module, parse_stmt

# trace-enriched WHILE statements over x, y
WHILE_CORPUS = (
    "skip",
    "x := 1; y := x + 1",
    "skip; x := 1; skip",
    "x := 1; x := 2; print x",
    "print x; print y",
    "x := ?; print x",
    "y := 1 / x",
    "if x == 0 then x := 1 else y := 2",
    "while x < 2 do x := x + 1",
    "while x != 0 do { print x; x := x - 1 }",
    "choice { x := 1 } or { x := 2 }; y := x",
    "x := 2; while y < x do y := y + 1",
    "while true do skip",
    "x := 0; while x == 0 do print x",
    "y := 0; while y < 2 do { y := y + 1; x := y * 2 }; print x",
    "x := 1; if y == 0 then skip else x := 1; print x",
    "x := 1; y := x / 0",
    "while x < 2 do { choice { x := x + 1 } or { print x; x := x + 1 } }",
    "x := 1; while y < 2 do { x := 1; y := y + 1 }; print x",
    "y := x % 2; skip; print y",
)

# extra oracle-equivalence programs (together with WHILE_CORPUS: 30)
ORACLE_EXTRA = (
    "while x < 2 do { x := ?; print x }",
    "x := ?; while x != 0 do x := x - 1",
    "choice { while true do skip } or { print x }",
    "while y == 0 do { choice { y := 1 } or { print y } }",
    "if x < 1 then { print x; print x } else { x := 1 / y }",
    "while x == 0 do { print x; choice { x := 1 } or { skip } }",
    "x := x * x; y := x - 1; print y",
    "while x < 2 do { if y == 0 then print x else skip; x := x + 1 }",
    "choice { x := 1 } or { x := 1 / x }; print x",
    "while true do { x := x + 1; print x }",
)

# PCALL modules over global x; ``ext`` is external to every module
MODULE_CORPUS = (
    "global x; proc main { x := 1; x := x + 1 }",
    "global x; proc main (locals a) { a := 1; x := a + 1 }",
    "global x; proc main (locals a) { a := 2; a := 1; print a }",
    "global x; proc main { call f; print x } proc f { x := 2 }",
    "global x; proc main (locals a) { a := x; call f; x := a } proc f { x := 0 }",
    "global x; proc main { while x < 2 do x := x + 1 }",
    "global x; proc main (locals a) { a := 1; while x != 0 do { x := x - a } }",
    "global x; proc main { choice { x := 1 } or { x := 2 }; print x }",
    "global x; proc main { call ext; print x }",
    "global x; proc main (locals a) { a := 1; call ext; x := a }",
    "global x; proc main { if x == 0 then call f else skip } proc f { x := 1; call main }",
    "global x; proc main { print x; call main }",
    "global x; proc main { call main }",
    "global x; proc main (locals a) { a := ?; while a == 0 do { a := a + 1; print a }; x := 1 }",
    "global x; proc main { x := 1 / x; print x }",
    "global x; proc main (locals a) { a := 1; a := a + 1; x := a * 2 }",
    "global x; proc main { skip; skip; x := 1; skip }",
    "global x; proc main (locals a) { a := 1; choice { call f } or { a := 2 }; x := a } proc f { print x }",
    "global x; proc main (locals a, b) { a := 1; b := a; a := 2; x := b }",
    "global x; proc main { while x < 2 do { call ext; x := x + 1 } }",
)

MODULE_EXTERNALS = ("ext",)

# STRUCT examples: the basic loop shape and the nested-block exit example
LOOP_SHAPE = "loop { if x == 0 then skip else break } { skip }"
LOOP_SHAPE_LOWERED = "block { sloop { block { if x == 0 then skip else exit 1 }; skip } }"
BLOCK_EXIT1 = "block { block { x := x + 1; exit 1 }; y := 1 }; x := x * 2"
BLOCK_EXIT1_EQUIV = "x := x + 1; x := x * 2"


@lru_cache(maxsize=None)
def while_corpus() -> tuple:
    return tuple(parse_stmt(t) for t in WHILE_CORPUS)


@lru_cache(maxsize=None)
def oracle_corpus() -> tuple:
    return while_corpus() + tuple(parse_stmt(t) for t in ORACLE_EXTRA)


@lru_cache(maxsize=None)
def module_corpus() -> tuple:
    return tuple(parse_module(t) for t in MODULE_CORPUS)


# -------------------------------------------------- design-choice pairs


@dataclass(frozen=True)
class ChoicePair:
    """A target/source statement pair with a state relation.

    The two-argument γ accepts each pair; the named single-argument variant
    rejects it.
    """

    name: str
    target: str
    source: str
    target_vars: tuple
    source_vars: tuple
    relation: str  # "project_y" or "x_not_2"
    rejects: str  # "choice1" or "choice2"

    def domains(self, modulus: int = 3) -> tuple:
        return ValueDomain(modulus, self.target_vars), ValueDomain(modulus, self.source_vars)

    def match(self, modulus: int = 3) -> MatchRel:
        dt, ds = self.domains(modulus)
        if self.relation == "project_y":
            # source (x, y) ~ target (x): y is forgotten
            return MatchRel.of((s, t) for s in ds.states for t in dt.states if s[0] == t[0])
        # identity on x, except that source state x = 2 has no target partner
        return MatchRel.of((s, s) for s in ds.states if s[0] != 2)


CHOICE_PAIRS = (
    ChoicePair("split-by-y", "skip", "if y == 0 then skip else x := 1 / 0", ("x",), ("x", "y"),
               "project_y", "choice1"),
    ChoicePair("abort-to-unmatched", "x := 2", "x := 1 / 0", ("x",), ("x",), "x_not_2", "choice2"),
)
