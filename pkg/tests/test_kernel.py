import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from denokat import _kernels_py
from denokat import kernel as K

events = st.lists(st.integers(0, 2), max_size=4).map(tuple)
cycles = st.lists(st.integers(0, 2), min_size=1, max_size=4).map(tuple)


@given(events, cycles)
def test_canon_lasso_denotes_same_word(u, v):
    c = K.canon_lasso(u, v)
    for n in range(0, 20):
        assert K.lasso_prefix(c, n) == K.lasso_prefix((u, v), n)
    assert K.canon_lasso(*c) == c
    assert K.lasso_size(c) <= len(u) + len(v)


@given(events, cycles, events, cycles)
def test_canon_lasso_is_a_normal_form(u1, v1, u2, v2):
    same_word = all(K.lasso_prefix((u1, v1), n) == K.lasso_prefix((u2, v2), n) for n in range(40))
    assert same_word == (K.canon_lasso(u1, v1) == K.canon_lasso(u2, v2))


def test_canon_lasso_rejects_empty_cycle():
    with pytest.raises(K.DomainError):
        K.canon_lasso((1,), ())


def test_is_prefix():
    assert K.is_prefix((), (1,))
    assert K.is_prefix((1, 2), (1, 2, 3))
    assert not K.is_prefix((2,), (1, 2))


def rand_rel(rng, nodes=3, n=5, bound=6, max_trace=2):
    return K.rel(((rng.randrange(nodes), tuple(rng.randrange(2) for _ in range(rng.randrange(max_trace + 1))),
                   rng.randrange(nodes)) for _ in range(n)), bound)


@pytest.mark.parametrize("seed", range(30))
def test_compose_associative_and_matches_definition(seed):
    rng = random.Random(seed)
    a, b, c = (rand_rel(rng, bound=20) for _ in range(3))
    assert K.compose_rel(K.compose_rel(a, b), c) == K.compose_rel(a, K.compose_rel(b, c))
    direct = {(x, t + t2, z) for x, t, y in a.triples for y2, t2, z in b.triples if y == y2}
    assert K.compose_rel(a, b).triples == direct


@pytest.mark.parametrize("seed", range(30))
def test_star_is_least_fixed_point(seed):
    rng = random.Random(seed)
    r = rand_rel(rng, bound=5)
    universe = (0, 1, 2)
    ident = K.id_rel(universe, r.bound)
    lfp, _ = K.lfp(lambda x: K.union_rel(ident, K.compose_rel(r, x)), K.empty_rel(r.bound), 200)
    s = K.star(r, universe)
    assert s.triples == lfp.triples
    assert bool(s.over) == bool(lfp.over)


def test_compose_flags_dropped_traces():
    r = K.rel([(0, (1, 1), 1), (1, (1, 1), 0)], 3)
    c = K.compose_rel(r, r)
    assert not c.triples and c.over == {(0, 0), (1, 1)} and c.truncated


@pytest.mark.parametrize("seed", range(30))
def test_omega_silent_matches_gfp(seed):
    rng = random.Random(seed)
    r = K.silent(rand_rel(rng, nodes=5, n=6))
    assert K.omega_silent(r) == K.omega_silent_gfp(r)


def _accepts(r, a, lasso):
    """Reference: ``a`` has an infinite path labelled ``u v^ω`` (subset simulation)."""
    letters = {}
    for x, t, y in r.triples:
        letters.setdefault(x, []).append((t, y))

    def step_word(subset, word):
        # all nodes reached by consuming exactly ``word`` along edge traces
        frontier = {(n, 0) for n in subset}
        done = set()
        seen = set()
        while frontier:
            nxt = set()
            for n, i in frontier:
                if i == len(word):
                    done.add(n)
                    continue
                for t, y in letters.get(n, ()):
                    j = i + len(t)
                    # edges may straddle the word boundary: keep the leftover
                    if word[i:j] == t[: len(word) - i] and j <= len(word):
                        if (y, j) not in seen:
                            seen.add((y, j))
                            nxt.add((y, j))
            frontier = nxt
        return frozenset(done)

    u, v = lasso
    cur = step_word({a}, u)
    seen = set()
    while cur and cur not in seen:
        seen.add(cur)
        cur = step_word(cur, v)
    return bool(cur)


@pytest.mark.parametrize("seed", range(40))
def test_omega_lasso_against_reference(seed):
    rng = random.Random(seed)
    bound = 4
    r = K.rel(((rng.randrange(3), (rng.randrange(2),), rng.randrange(3)) for _ in range(5)), bound)
    got = K.omega_lasso(r)
    for a in (0, 1, 2):
        if a in got.partial:
            continue
        for n in range(1, bound + 1):
            for k in range(0, n):
                for w in itertools.product((0, 1), repeat=n):
                    lasso = K.canon_lasso(w[:k], w[k:])
                    if K.lasso_size(lasso) > bound:
                        continue
                    assert ((a, lasso) in got.pairs) == _accepts(r, a, lasso), (a, lasso)


def test_omega_lasso_single_cycle():
    r = K.rel([(0, (0,), 0)], 8)
    assert K.omega_lasso(r).pairs == {(0, ((), (0,)))}


def test_lfp_budget_exceeded():
    with pytest.raises(K.BudgetExceeded):
        K.lfp(lambda x: x + 1, 0, 10)


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_bekic_random(seed):
    rng = random.Random(seed)
    U = (0, 1, 2)
    rules = [(frozenset(rng.sample(U, 1)), frozenset(rng.sample(U, 1)), rng.choice(U)) for _ in range(4)]

    def f(x, y):
        return frozenset(c for p, q, c in rules[:2] if p <= x or q <= y)

    def g(x, y):
        return frozenset(c for p, q, c in rules[2:] if p <= x and q <= y) | {0}
    assert K.bekic_check(f, g, 4, 4)


def test_value_domain():
    d = K.ValueDomain(3, ("x", "y"))
    assert len(d.states) == 9
    assert d.state(x=4, y=1) == (1, 1)
    with pytest.raises(K.DomainError):
        K.ValueDomain(1, ("x",))
    with pytest.raises(K.DomainError):
        K.ValueDomain(3, ("x", "x"))


# -------------------------------------------------------- backend parity

def _succ_triples(r):
    return {b: list(v) for b, v in r.succ.items()}


@pytest.mark.parametrize("seed", range(25))
def test_backends_agree(seed):
    compiled = pytest.importorskip("denokat._kernels", reason="compiled kernels not built")
    rng = random.Random(seed)
    a, b = rand_rel(rng, n=8, bound=3), rand_rel(rng, n=8, bound=3)
    succ = _succ_triples(b)
    assert compiled.compose_triples(a.triples, succ, 3) == _kernels_py.compose_triples(a.triples, succ, 3)
    psucc = {x: [t for t, _ in v] for x, v in succ.items()}
    assert compiled.compose_pairs(a.triples, psucc, 3) == _kernels_py.compose_pairs(a.triples, psucc, 3)
    assert compiled.star_from(succ, [0, 1, 2], 3) == _kernels_py.star_from(succ, [0, 1, 2], 3)
    gsucc = {x: {y for _, y in v} for x, v in succ.items()}
    assert compiled.infinite_nodes(gsucc) == _kernels_py.infinite_nodes(gsucc)
