"""The ten acceptance criteria at full scale and their wall-clock limits.

Each criterion runs the shared property suite(s), requires every check to
report ``pass`` (``truncated`` is not a pass) and the run to finish within
its limit.  A one-line verdict per criterion is printed in the terminal
summary.
"""

import time

import pytest

from denokat import suites as S

from conftest import ACCEPTANCE_LINES

CRITERIA = [
    (1, "powerdomain discrimination", ("powerdomain",), 1.0),
    (2, "Bekic fixed points", ("bekic",), 5.0),
    (3, "linking equivalence", ("linking",), 60.0),
    (4, "RA law fuzzing and design choices", ("ra-laws",), 60.0),
    (5, "lowering correctness", ("lowering",), 300.0),
    (6, "optimization passes", ("passes",), 300.0),
    (7, "horizontal/vertical composition", ("composition",), 120.0),
    (8, "oracle equivalence", ("oracle",), 180.0),
    (9, "KAT engine", ("kat",), 30.0),
    (10, "divergence and trace fidelity", ("divergence",), 1.0),
]

# checks each criterion must contain, so a suite cannot pass by running nothing
REQUIRED = {
    1: {"powerdomain-distinct"},
    2: {"bekic"},
    3: {"linking-pcall", "linking-cfg"},
    4: {"ra-laws-family-1", "ra-laws-family-2", "ra-laws-family-3", "ra-laws-family-pi",
        "design-choice1-split-by-y", "design-choice2-abort-to-unmatched"},
    5: {"lowering-exhaustive", "lowering-loop-shape", "block-exit1"},
    6: {"const-prop-example", "pass-skip-removal", "pass-const-prop", "pass-dce", "pass-cfg-gen",
        "pass-cp-cfg", "pass-dce-cfg"},
    7: {"horizontal", "vertical", "fixpoint-lemma"},
    8: {"oracle-while", "oracle-cfg", "oracle-corpus"},
    9: {"kat-identities", "kat-soundness"},
    10: {"divergence-silent", "divergence-reactive"},
}


@pytest.mark.slow
@pytest.mark.parametrize("num,title,suites,limit", CRITERIA, ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, title, suites, limit):
    cfg = S.SuiteConfig()
    t = time.perf_counter()
    checks = S.run_suites(suites, cfg)
    elapsed = time.perf_counter() - t
    bad = [c for c in checks if not c.ok]
    missing = REQUIRED[num] - {c.name for c in checks}
    ok = not bad and not missing and elapsed < limit
    detail = "; ".join(f"{c.name}={c.verdict}" for c in bad) or (f"missing {sorted(missing)}" if missing else "")
    ACCEPTANCE_LINES[num] = (f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}: "
                             f"{len(checks)} checks, {elapsed:.2f}s (limit {limit:g}s)"
                             + (f"  [{detail}]" if detail else ""))
    print(ACCEPTANCE_LINES[num])
    assert not missing, missing
    assert not bad, [(c.name, c.verdict, c.witness) for c in bad]
    assert elapsed < limit, f"{elapsed:.2f}s exceeds {limit}s"
