import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denokat import gen
from denokat.kernel import ValueDomain
from denokat.while_lang import denote_twhile
from denokat.syntax import (Assign, Bin, Num, ParseError, Seq, Var, depth, parse_cfg_module, parse_module,
                            parse_stmt, show, show_cfg_module, show_module, sniff)


def test_sequence_nests_right():
    assert parse_stmt("skip; x := 1; print x") == Seq(parse_stmt("skip"), parse_stmt("x := 1; print x"))


def test_precedence_and_sequencing():
    s = parse_stmt("x := 1 + 2 * y; print x")
    assert s == Seq(Assign("x", Bin("+", Num(1), Bin("*", Num(2), Var("y")))), parse_stmt("print x"))


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_roundtrip_while(seed):
    # ``;`` reparses right-nested, so compare printed forms and meanings
    s = gen.rand_while(random.Random(seed), ("x", "y"), 5)
    p = parse_stmt(show(s))
    assert show(p) == show(s)
    dom = ValueDomain(2, ("x", "y"))
    assert denote_twhile(p, dom, 3) == denote_twhile(s, dom, 3)


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_roundtrip_struct(seed):
    s = gen.rand_struct(random.Random(seed), 5)
    assert show(parse_stmt(show(s))) == show(s)


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_roundtrip_modules(seed):
    rng = random.Random(seed)
    m = gen.rand_module(rng, ("main", "f"), ("x",), ("a",), ("ext",), 3)
    assert show_module(parse_module(show_module(m))) == show_module(m)
    c = gen.rand_cfg_module(rng, ("f", "g"), ("x",), ("ext",))
    assert parse_cfg_module(show_cfg_module(c)) == c


def test_enumerated_struct_corpus():
    progs = gen.enumerate_struct(4)
    assert len(progs) == 7540
    assert len(set(progs)) == len(progs)
    assert max(depth(p) for p in progs) == 4


@pytest.mark.parametrize("text", ["x :=", "while do skip", "if x then", "proc { }", "x := 1 /"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_module(text) if text.startswith("proc") else parse_stmt(text)


def test_sniff():
    assert sniff("skip") == "stmt"
    assert sniff("global x; proc main { skip }") == "module"
    assert sniff("global x; cfgproc main entry L0 exit Lexit { L0: do skip -> Lexit; }") == "cfg"
