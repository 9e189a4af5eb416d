import pytest

from denokat import corpus as C
from denokat import gen
from denokat import refine as R
from denokat.kernel import ValueDomain
from denokat.struct_lang import denote_block, denote_struct, lower_struct
from denokat.syntax import Exit, parse_stmt

DOM = ValueDomain(3, ("x",))


def test_break_and_continue_channels():
    d = denote_struct(parse_stmt("x := 1; break"), DOM)
    assert not d.nrm.triples and d.brk.triples == {((v,), (), (1,)) for v in range(3)}
    d = denote_struct(parse_stmt("continue"), DOM)
    assert d.ctn.triples == {((v,), (), (v,)) for v in range(3)}


def test_loop_counts_to_zero():
    # loop { if x == 0 then break else skip } { x := x + 1 }: exits once x wraps to 0
    d = denote_struct(parse_stmt("loop { if x == 0 then break else skip } { x := x + 1 }"), DOM)
    assert d.nrm.triples == {((v,), (), (0,)) for v in range(3)}
    assert not d.brk.triples and not d.fin_dvg.pairs


def test_loop_continue_runs_step():
    d = denote_struct(parse_stmt("loop { if x == 2 then break else continue } { x := x + 1 }"), DOM)
    assert d.nrm.triples == {((v,), (), (2,)) for v in range(3)}


def test_block_exit_example():
    dom = ValueDomain(3, ("x", "y"))
    lhs = denote_block(parse_stmt(C.BLOCK_EXIT1), dom)
    rhs = denote_block(parse_stmt(C.BLOCK_EXIT1_EQUIV), dom)
    assert lhs.nrm == rhs.nrm and not lhs.blk


def test_exit_levels():
    d = denote_block(parse_stmt("block { exit 2 }"), DOM)
    assert d.blk_n(1).triples == {((v,), (), (v,)) for v in range(3)}
    assert not d.nrm.triples


def test_loop_shape():
    assert lower_struct(parse_stmt(C.LOOP_SHAPE), 1, 0) == parse_stmt(C.LOOP_SHAPE_LOWERED)


def test_lower_rejects_equal_exit_levels():
    assert lower_struct(parse_stmt("break"), 1, 1) is None
    assert lower_struct(parse_stmt("break"), 2, 5) == Exit(2)


@pytest.mark.parametrize("nb,nc", [(1, 0), (2, 5), (0, 3)])
def test_lowering_refines_depth3(nb, nc):
    for s in gen.enumerate_struct(3):
        u = lower_struct(s, nb, nc)
        v = R.check_refine_stmt(denote_block(u, DOM), denote_struct(s, DOM), R.Profile("cshmgen", n_b=nb, n_c=nc))
        assert v.ok, (s, v.field, v.witness)


def test_wrong_lowering_is_rejected():
    # negative control: break lowered to the continue level
    s = parse_stmt("loop { if x == 0 then break else skip } { x := x + 1 }")
    bad = parse_stmt("block { sloop { block { if x == 0 then exit 0 else skip }; x := x + 1 } }")
    v = R.check_refine_stmt(denote_block(bad, DOM), denote_struct(s, DOM), R.Profile("cshmgen", n_b=1, n_c=0))
    assert v.status == "fail"
