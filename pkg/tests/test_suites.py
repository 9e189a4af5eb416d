"""Every property suite at reduced scale; the full-scale runs live in
test_acceptance.py."""

import pytest

from denokat import suites as S


@pytest.mark.parametrize("name", list(S.SUITES))
def test_suite_small_scale(name):
    checks = S.SUITES[name](S.SuiteConfig(scale=0.05, seed=1))
    assert checks
    bad = [(c.name, c.verdict, c.witness) for c in checks if not c.ok]
    assert not bad


def test_check_json_shape():
    c = S.Check("n", "anchor", "fail", "w", {"b": 1, "a": 2})
    assert list(c.as_json()) == ["name", "paper_anchor", "verdict", "stats", "witness"]
    assert list(c.as_json()["stats"]) == ["a", "b"]
    assert "witness" not in S.Check("n", "anchor", "pass").as_json()
