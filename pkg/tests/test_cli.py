import json

import pytest

from denokat.cli import main


@pytest.fixture
def prog(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_denote_while_true(prog, capsys):
    f = prog("wt.w", "while true do skip")
    code, out = run(capsys, "denote", f, "--vars", "x", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["schema_version"] == 1
    assert rep["denotation"]["fin_dvg"]["pairs"] == [[[v], []] for v in range(3)]
    assert rep["denotation"]["nrm"]["triples"] == []


def test_denote_skip_is_identity(prog, capsys):
    code, out = run(capsys, "denote", prog("s.w", "skip"), "--vars", "x", "--json")
    assert json.loads(out)["denotation"]["nrm"]["triples"] == [[[v], [], [v]] for v in range(3)]


def test_denote_cfg_matches_library(prog, capsys):
    from denokat.cfg_lang import denote_cfg_module
    from denokat.cli import encode
    from denokat.pcall_lang import ModuleDomain
    from denokat.syntax import parse_cfg_module
    text = "global x; cfgproc main entry L0 exit Lexit { L0: cond x == 0 -> L1, Lexit; L1: do print x -> Lexit; }"
    code, out = run(capsys, "denote", prog("c.cfg", text), "--json")
    lib = denote_cfg_module(parse_cfg_module(text), None, ModuleDomain(3, ("x",)))
    rep = json.loads(out)
    assert code == 0
    assert rep["denotation"]["nrm"] == json.loads(json.dumps(encode(lib.nrm)))


def test_check_refine_const_prop_example(prog, capsys):
    code, out = run(capsys, "check-refine", prog("o.w", "x := 1; y := x + 1"), "const-prop")
    assert code == 0 and "pass" in out


def test_run_pass_prints_target(prog, capsys):
    code, out = run(capsys, "run-pass", prog("o.w", "x := 1; y := x + 1"), "--pass", "const-prop", "--check")
    assert code == 0 and out.splitlines()[0] == "x := 1; y := 2"


def test_broken_target_exits_1_with_witness(prog, capsys):
    code, out = run(capsys, "check-refine", prog("s.w", "x := 1; y := x + 1"), prog("t.w", "x := 1; y := 0"),
                    "--json")
    rep = json.loads(out)
    assert code == 1 and rep["verdict"] == "fail" and "witness" in rep["checks"][0]


def test_low_bound_is_truncated(prog, capsys):
    s = prog("s.w", "while true do print x")
    t = prog("t.w", "while true do { print x; x := x + 1 }")
    assert run(capsys, "check-refine", s, t, "--vars", "x", "--trace-bound", "2")[0] == 2
    assert run(capsys, "check-refine", s, t, "--vars", "x", "--trace-bound", "4")[0] == 1


def test_module_passes_and_cfg(prog, capsys):
    f = prog("m.p", "global x; proc main (locals a) { a := 1; x := a + 1 }")
    code, out = run(capsys, "run-pass", f, "--pass", "cfg-gen", "--pass", "cp-cfg", "--check")
    assert code == 0 and "cfgproc main" in out


def test_link(prog, capsys):
    a = prog("a.p", "global x; proc f { call g; x := x + 1 }")
    b = prog("b.p", "global x; proc g { x := 1 }")
    code, out = run(capsys, "link", a, b, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["checks"][0]["verdict"] == "pass"
    assert [["f", [0]], [], [2]] in rep["denotation"]["nrm"]["triples"]


def test_theorems_single_suite(capsys):
    code, out = run(capsys, "theorems", "--suite", "bekic", "--json")
    rep = json.loads(out)
    assert code == 0 and [c["name"] for c in rep["checks"]] == ["bekic"]
    assert set(rep["checks"][0]) >= {"name", "paper_anchor", "verdict", "stats"}


def test_reports_are_byte_identical(capsys, monkeypatch, tmp_path):
    outs = []
    for i in range(2):
        f = tmp_path / f"r{i}.json"
        main(["theorems", "--suite", "powerdomain", "--suite", "bekic", "--scale", "0.1", "--out", str(f)])
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    capsys.readouterr()
    monkeypatch.setenv("DENOKAT_SEED", "11")
    code, out = run(capsys, "theorems", "--suite", "divergence", "--seed", "3", "--json")
    assert json.loads(out)["config"]["seed"] == 11


def test_kat_check(capsys):
    assert run(capsys, "kat-check", "p ; p*", "p* ; p")[0] == 0
    assert run(capsys, "kat-check", "p ; q", "q ; p")[0] == 1
    assert run(capsys, "kat-check", "p^w", "p ; p^w")[0] == 2


def test_usage_errors(prog, capsys):
    assert main(["denote", prog("bad.w", "x :=")]) == 3
    assert main(["denote", "/nonexistent/file.w"]) == 3
    assert main(["theorems", "--suite", "nope"]) == 3
    assert main(["denote", prog("m.w", "skip"), "--modulus", "1"]) == 3
