"""Abstract syntax, text parser and printer shared by every language module.

One statement grammar covers WHILE, STRUCT, BLOCK and PCALL; each language's
denotation function rejects the constructs it does not own.

    skip | x := e | x := ? | print e | s1; s2 | { s }
    choice { s } or { s } | if b then { s } else { s } | while b do { s }
    break | continue | loop { s1 } { s2 }
    block { u } | exit n | sloop { u }
    call f | label L: s | goto L

Module files start with ``global x, y;`` followed by ``proc`` or ``cfgproc``
declarations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


class ParseError(ValueError):
    pass


# ----------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / %
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    arg: "BExpr"


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class Or:
    left: "BExpr"
    right: "BExpr"


Expr = Union[Num, Var, Bin]
BExpr = Union[BoolLit, Cmp, Not, And, Or]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def expr_vars(e) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, (Bin, Cmp, And, Or)):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Not):
        return expr_vars(e.arg)
    return frozenset()


def may_abort(e) -> bool:
    """Whether evaluation can divide by zero."""
    if isinstance(e, Bin):
        return e.op in "/%" or may_abort(e.left) or may_abort(e.right)
    if isinstance(e, (Cmp, And, Or)):
        return may_abort(e.left) or may_abort(e.right)
    if isinstance(e, Not):
        return may_abort(e.arg)
    return False


# ------------------------------------------------------------------ statements


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Havoc:
    var: str


@dataclass(frozen=True)
class Print:
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    second: "Stmt"


@dataclass(frozen=True)
class If:
    cond: BExpr
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True)
class Choice:
    left: "Stmt"
    right: "Stmt"


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: "Stmt"


@dataclass(frozen=True)
class Break:
    pass


@dataclass(frozen=True)
class Continue:
    pass


@dataclass(frozen=True)
class Loop:
    body: "Stmt"
    step: "Stmt"


@dataclass(frozen=True)
class Block:
    body: "Stmt"


@dataclass(frozen=True)
class Exit:
    depth: int


@dataclass(frozen=True)
class Sloop:
    body: "Stmt"


@dataclass(frozen=True)
class Call:
    name: str


@dataclass(frozen=True)
class Label:
    name: str
    body: "Stmt"


@dataclass(frozen=True)
class Goto:
    name: str


Stmt = Union[Skip, Assign, Havoc, Print, Seq, If, Choice, While, Break, Continue,
             Loop, Block, Exit, Sloop, Call, Label, Goto]
ATOMS = (Skip, Assign, Havoc, Print)


def seq(*stmts) -> Stmt:
    """Right-nested sequence; ``seq()`` is ``skip``."""
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def children(s) -> tuple:
    if isinstance(s, (Seq,)):
        return (s.first, s.second)
    if isinstance(s, If):
        return (s.then, s.orelse)
    if isinstance(s, Choice):
        return (s.left, s.right)
    if isinstance(s, Loop):
        return (s.body, s.step)
    if isinstance(s, (While, Block, Sloop, Label)):
        return (s.body,)
    return ()


def walk(s):
    yield s
    for c in children(s):
        yield from walk(c)


def labels_of(s) -> list:
    return [x.name for x in walk(s) if isinstance(x, Label)]


def depth(s) -> int:
    cs = children(s)
    return 1 + max((depth(c) for c in cs), default=0)


# -------------------------------------------------------- procedures, modules


@dataclass(frozen=True)
class Procedure:
    name: str
    locals: tuple
    body: Stmt


@dataclass(frozen=True)
class Module:
    globals: tuple
    procs: tuple

    def names(self) -> list:
        return [p.name for p in self.procs]


@dataclass(frozen=True)
class Do:
    atom: Stmt
    succ: str


@dataclass(frozen=True)
class CallI:
    name: str
    succ: str


@dataclass(frozen=True)
class Cond:
    cond: BExpr
    succ_true: str
    succ_false: str


Instr = Union[Do, CallI, Cond]


def successors(i: Instr) -> tuple:
    if isinstance(i, Cond):
        return (i.succ_true, i.succ_false)
    return (i.succ,)


@dataclass(frozen=True)
class CfgProc:
    name: str
    locals: tuple
    entry: str
    exit: str
    nodes: tuple  # ((label, instr), ...) sorted by label

    @property
    def graph(self) -> dict:
        return dict(self.nodes)

    def labels(self) -> list:
        return [l for l, _ in self.nodes]


@dataclass(frozen=True)
class CfgModule:
    globals: tuple
    procs: tuple

    def names(self) -> list:
        return [p.name for p in self.procs]


def check_cfg(p: CfgProc) -> None:
    g = p.graph
    if p.exit in g:
        raise ParseError(f"{p.name}: exit label {p.exit} carries an instruction")
    ok = set(g) | {p.exit}
    if p.entry not in ok:
        raise ParseError(f"{p.name}: entry {p.entry} undefined")
    for l, i in p.nodes:
        for s in successors(i):
            if s not in ok:
                raise ParseError(f"{p.name}: successor {s} of {l} undefined")


# ---------------------------------------------------------------------- lexer

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|==|!=|<=|>=|->|&&|\|\||[-+*/%<>(){};:,?!])
""", re.VERBOSE)

KEYWORDS = {
    "skip", "print", "choice", "or", "if", "then", "else", "while", "do", "break",
    "continue", "loop", "block", "exit", "sloop", "call", "label", "goto", "true",
    "false", "and", "not", "proc", "locals", "global", "cfgproc", "entry", "cond",
}


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        val = m.group(kind)
        if kind == "name" and val in KEYWORDS:
            kind = "kw"
        out.append((kind, val))
    out.append(("eof", ""))
    return out


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, val) -> bool:
        return self.peek()[1] == val and self.peek()[0] in ("kw", "op")

    def eat(self, val=None, kind=None):
        tk = self.peek()
        if val is not None and not (tk[1] == val and tk[0] in ("kw", "op")):
            raise ParseError(f"expected {val!r}, found {tk[1]!r}")
        if kind is not None and tk[0] != kind:
            raise ParseError(f"expected {kind}, found {tk[1]!r}")
        self.i += 1
        return tk[1]

    def name(self) -> str:
        return self.eat(kind="name")

    def names(self) -> tuple:
        out = [self.name()]
        while self.at(","):
            self.eat(",")
            out.append(self.name())
        return tuple(out)

    def done(self):
        if self.peek()[0] != "eof":
            raise ParseError(f"trailing input at {self.peek()[1]!r}")

    # statements
    def block(self) -> Stmt:
        self.eat("{")
        if self.at("}"):
            self.eat("}")
            return Skip()
        s = self.seq()
        self.eat("}")
        return s

    def body(self) -> Stmt:
        """A braced block or a single statement."""
        if self.at("{"):
            return self.block()
        return self.stmt()

    def seq(self) -> Stmt:
        parts = [self.stmt()]
        while self.at(";"):
            self.eat(";")
            if self.at("}") or self.peek()[0] == "eof":
                break
            parts.append(self.stmt())
        return seq(*parts)

    def stmt(self) -> Stmt:
        kind, val = self.peek()
        if kind == "name":
            var = self.name()
            self.eat(":=")
            if self.at("?"):
                self.eat("?")
                return Havoc(var)
            return Assign(var, self.expr())
        if val == "{" and kind == "op":
            return self.block()
        if kind != "kw":
            raise ParseError(f"unexpected {val!r}")
        self.eat()
        if val == "skip":
            return Skip()
        if val == "print":
            return Print(self.expr())
        if val == "choice":
            left = self.block()
            self.eat("or")
            return Choice(left, self.block())
        if val == "if":
            c = self.bexpr()
            self.eat("then")
            then = self.body()
            orelse = Skip()
            if self.at("else"):
                self.eat("else")
                orelse = self.body()
            return If(c, then, orelse)
        if val == "while":
            c = self.bexpr()
            self.eat("do")
            return While(c, self.body())
        if val == "break":
            return Break()
        if val == "continue":
            return Continue()
        if val == "loop":
            body = self.block()
            return Loop(body, self.block())
        if val == "block":
            return Block(self.block())
        if val == "exit":
            return Exit(int(self.eat(kind="num")))
        if val == "sloop":
            return Sloop(self.block())
        if val == "call":
            return Call(self.name())
        if val == "label":
            name = self.name()
            self.eat(":")
            return Label(name, self.stmt())
        if val == "goto":
            return Goto(self.name())
        raise ParseError(f"unexpected keyword {val!r}")

    # expressions
    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.eat()
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.at("*") or self.at("/") or self.at("%"):
            op = self.eat()
            e = Bin(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.at("-"):
            self.eat("-")
            return Bin("-", Num(0), self.unary())
        kind, val = self.peek()
        if kind == "num":
            self.eat()
            return Num(int(val))
        if kind == "name":
            return Var(self.name())
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        raise ParseError(f"expected expression, found {val!r}")

    def bexpr(self) -> BExpr:
        b = self.bconj()
        while self.at("or") or self.at("||"):
            self.eat()
            b = Or(b, self.bconj())
        return b

    def bconj(self) -> BExpr:
        b = self.bnot()
        while self.at("and") or self.at("&&"):
            self.eat()
            b = And(b, self.bnot())
        return b

    def bnot(self) -> BExpr:
        if self.at("not") or self.at("!"):
            self.eat()
            return Not(self.bnot())
        if self.at("true"):
            self.eat()
            return TRUE
        if self.at("false"):
            self.eat()
            return FALSE
        if self.at("("):
            # parenthesised boolean or arithmetic: try boolean first
            save = self.i
            try:
                self.eat("(")
                b = self.bexpr()
                self.eat(")")
                if not any(self.at(op) for op in ("==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%")):
                    return b
            except ParseError:
                pass
            self.i = save
        left = self.expr()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.at(op):
                self.eat()
                return Cmp(op, left, self.expr())
        raise ParseError(f"expected comparison after expression, found {self.peek()[1]!r}")

    # modules
    def globals_header(self) -> tuple:
        if self.at("global"):
            self.eat("global")
            g = self.names()
            if self.at(";"):
                self.eat(";")
            return g
        return ()

    def procedure(self) -> Procedure:
        self.eat("proc")
        name = self.name()
        locs = self.locals_decl()
        return Procedure(name, locs, self.block())

    def locals_decl(self) -> tuple:
        locs: tuple = ()
        if self.at("("):
            self.eat("(")
            if self.at("locals"):
                self.eat("locals")
                if not self.at(")"):
                    locs = self.names()
            self.eat(")")
        return locs

    def label(self) -> str:
        kind, val = self.peek()
        if kind not in ("name", "num"):
            raise ParseError(f"expected label, found {val!r}")
        self.eat()
        return val

    def cfgproc(self) -> CfgProc:
        self.eat("cfgproc")
        name = self.name()
        locs = self.locals_decl()
        self.eat("entry")
        entry = self.label()
        self.eat("exit")
        ex = self.label()
        self.eat("{")
        nodes = {}
        while not self.at("}"):
            lab = self.label()
            self.eat(":")
            if self.at("do"):
                self.eat("do")
                atom = self.stmt()
                if not isinstance(atom, ATOMS):
                    raise ParseError("do expects skip, assignment, havoc or print")
                self.eat("->")
                ins = Do(atom, self.label())
            elif self.at("call"):
                self.eat("call")
                callee = self.name()
                self.eat("->")
                ins = CallI(callee, self.label())
            elif self.at("cond"):
                self.eat("cond")
                c = self.bexpr()
                self.eat("->")
                t = self.label()
                self.eat(",")
                ins = Cond(c, t, self.label())
            else:
                raise ParseError(f"unknown instruction at {self.peek()[1]!r}")
            if lab in nodes:
                raise ParseError(f"duplicate label {lab}")
            nodes[lab] = ins
            if self.at(";"):
                self.eat(";")
        self.eat("}")
        p = CfgProc(name, locs, entry, ex, tuple(sorted(nodes.items())))
        check_cfg(p)
        return p


def parse_stmt(text: str) -> Stmt:
    p = Parser(text)
    if p.peek()[0] == "eof":
        return Skip()
    s = p.seq()
    p.done()
    return s


def parse_bexpr(text: str) -> BExpr:
    p = Parser(text)
    b = p.bexpr()
    p.done()
    return b


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.expr()
    p.done()
    return e


def parse_module(text: str) -> Module:
    p = Parser(text)
    g = p.globals_header()
    procs = []
    while p.at("proc"):
        procs.append(p.procedure())
    p.done()
    return Module(g, tuple(procs))


def parse_cfg_module(text: str) -> CfgModule:
    p = Parser(text)
    g = p.globals_header()
    procs = []
    while p.at("cfgproc"):
        procs.append(p.cfgproc())
    p.done()
    return CfgModule(g, tuple(procs))


def sniff(text: str) -> str:
    """Guess the file kind: ``cfg``, ``module`` or ``stmt``."""
    toks = [v for k, v in tokenize(text) if k == "kw"]
    if "cfgproc" in toks:
        return "cfg"
    if "proc" in toks:
        return "module"
    return "stmt"


# -------------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def show_expr(e, prec: int = 0) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Bin):
        p = _PREC[e.op]
        s = f"{show_expr(e.left, p)} {e.op} {show_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Cmp):
        return f"{show_expr(e.left)} {e.op} {show_expr(e.right)}"
    if isinstance(e, Not):
        return f"not ({show_expr(e.arg)})"
    if isinstance(e, And):
        return f"({show_expr(e.left)}) and ({show_expr(e.right)})"
    if isinstance(e, Or):
        return f"({show_expr(e.left)}) or ({show_expr(e.right)})"
    raise TypeError(e)


def show(s) -> str:
    if isinstance(s, Skip):
        return "skip"
    if isinstance(s, Assign):
        return f"{s.var} := {show_expr(s.expr)}"
    if isinstance(s, Havoc):
        return f"{s.var} := ?"
    if isinstance(s, Print):
        return f"print {show_expr(s.expr)}"
    if isinstance(s, Seq):
        return f"{show(s.first)}; {show(s.second)}"
    if isinstance(s, If):
        return f"if {show_expr(s.cond)} then {{ {show(s.then)} }} else {{ {show(s.orelse)} }}"
    if isinstance(s, Choice):
        return f"choice {{ {show(s.left)} }} or {{ {show(s.right)} }}"
    if isinstance(s, While):
        return f"while {show_expr(s.cond)} do {{ {show(s.body)} }}"
    if isinstance(s, Break):
        return "break"
    if isinstance(s, Continue):
        return "continue"
    if isinstance(s, Loop):
        return f"loop {{ {show(s.body)} }} {{ {show(s.step)} }}"
    if isinstance(s, Block):
        return f"block {{ {show(s.body)} }}"
    if isinstance(s, Exit):
        return f"exit {s.depth}"
    if isinstance(s, Sloop):
        return f"sloop {{ {show(s.body)} }}"
    if isinstance(s, Call):
        return f"call {s.name}"
    if isinstance(s, Label):
        return f"label {s.name}: {{ {show(s.body)} }}"
    if isinstance(s, Goto):
        return f"goto {s.name}"
    raise TypeError(s)


def show_module(m: Module) -> str:
    lines = []
    if m.globals:
        lines.append(f"global {', '.join(m.globals)};")
    for p in m.procs:
        lines.append(f"proc {p.name}(locals {', '.join(p.locals)}) {{ {show(p.body)} }}")
    return "\n".join(lines) + "\n"


def show_instr(i: Instr) -> str:
    if isinstance(i, Do):
        return f"do {show(i.atom)} -> {i.succ}"
    if isinstance(i, CallI):
        return f"call {i.name} -> {i.succ}"
    return f"cond {show_expr(i.cond)} -> {i.succ_true}, {i.succ_false}"


def show_cfg_module(m: CfgModule) -> str:
    lines = []
    if m.globals:
        lines.append(f"global {', '.join(m.globals)};")
    for p in m.procs:
        lines.append(f"cfgproc {p.name}(locals {', '.join(p.locals)}) entry {p.entry} exit {p.exit} {{")
        for l, i in p.nodes:
            lines.append(f"  {l}: {show_instr(i)};")
        lines.append("}")
    return "\n".join(lines) + "\n"
