"""Compiled vs pure-Python kernels: the four hot loops on random relations,
then an end-to-end linking workload with each backend swapped in.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import timeit

from denokat import _kernels_py
from denokat import kernel as K
from denokat import suites as S

try:
    from denokat import _kernels as _compiled
except ImportError:
    _compiled = None


def workload(seed=0, nodes=60, edges=400, bound=8):
    rng = random.Random(seed)
    triples = {(rng.randrange(nodes), tuple(rng.randrange(2) for _ in range(rng.randrange(3))), rng.randrange(nodes))
               for _ in range(edges)}
    succ: dict = {}
    for a, t, b in triples:
        succ.setdefault(a, []).append((t, b))
    psucc = {a: [t for t, _ in v] for a, v in succ.items()}
    gsucc = {a: {b for _, b in v} for a, v in succ.items()}
    return triples, succ, psucc, gsucc, list(range(nodes)), bound


def bench_kernels(mod, data, repeat):
    triples, succ, psucc, gsucc, sources, bound = data
    cases = {
        "compose_triples": lambda: mod.compose_triples(triples, succ, bound),
        "compose_pairs": lambda: mod.compose_pairs(triples, psucc, bound),
        "star_from": lambda: mod.star_from(succ, sources[:8], 4),
        "infinite_nodes": lambda: mod.infinite_nodes(gsucc),
    }
    return {k: min(timeit.repeat(f, number=1, repeat=repeat)) for k, f in cases.items()}


def bench_linking(mod, repeat):
    saved = K._k
    K._k = mod
    try:
        cfg = S.SuiteConfig(scale=0.05)
        return min(timeit.repeat(lambda: S.suite_linking(cfg), number=1, repeat=repeat))
    finally:
        K._k = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _kernels_py)] + ([("cython", _compiled)] if _compiled else [])
    if not _compiled:
        print("compiled kernels not built; showing the pure-Python backend only")
    data = workload()
    results = {name: bench_kernels(mod, data, args.repeat) for name, mod in backends}
    for name, mod in backends:
        results[name]["linking suite (5%)"] = bench_linking(mod, max(1, args.repeat // 2))
    print(f"{'kernel':<22}" + "".join(f"{n:>12}" for n, _ in backends) + ("     speedup" if _compiled else ""))
    for k in results["python"]:
        row = f"{k:<22}" + "".join(f"{results[n][k] * 1e3:>10.2f}ms" for n, _ in backends)
        if _compiled:
            row += f"{results['python'][k] / results['cython'][k]:>11.2f}x"
        print(row)


if __name__ == "__main__":
    main()
