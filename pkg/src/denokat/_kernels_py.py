"""Pure-Python hot loops for relation composition and bounded closure.

The compiled twin lives in ``_kernels.pyx``; both expose the same three
functions and must return identical results.
"""


def compose_triples(triples, succ, bound):
    """Chain ``(a, t, b)`` with ``succ[b] = [(t2, c), ...]``.

    Returns ``(kept, dropped)`` where ``kept`` holds the chained triples whose
    trace fits in ``bound`` and ``dropped`` holds the ``(a, c)`` endpoints of
    the ones that did not.
    """
    kept = set()
    dropped = set()
    for a, t, b in triples:
        nxt = succ.get(b)
        if not nxt:
            continue
        n = len(t)
        for t2, c in nxt:
            if n + len(t2) <= bound:
                kept.add((a, t + t2, c))
            else:
                dropped.add((a, c))
    return kept, dropped


def compose_pairs(triples, succ, bound):
    """Chain ``(a, t, b)`` with ``succ[b] = [t2, ...]`` into ``(a, t + t2)``."""
    kept = set()
    dropped = set()
    for a, t, b in triples:
        nxt = succ.get(b)
        if not nxt:
            continue
        n = len(t)
        for t2 in nxt:
            if n + len(t2) <= bound:
                kept.add((a, t + t2))
            else:
                dropped.add(a)
    return kept, dropped


def star_from(succ, sources, bound):
    """Bounded reflexive-transitive closure from each source.

    Returns ``(triples, spill)``: every ``(a, t, c)`` reachable with
    ``len(t) <= bound``, and the ``(a, n)`` pairs where some path from ``a``
    stepped into ``n`` with a trace longer than ``bound``.
    """
    triples = set()
    spill = set()
    for a in sources:
        seen = {(a, ())}
        stack = [(a, ())]
        while stack:
            node, t = stack.pop()
            nxt = succ.get(node)
            if not nxt:
                continue
            n = len(t)
            for t2, c in nxt:
                if n + len(t2) > bound:
                    spill.add((a, c))
                    continue
                item = (c, t + t2)
                if item not in seen:
                    seen.add(item)
                    stack.append(item)
        for node, t in seen:
            triples.add((a, t, node))
    return triples, spill


def infinite_nodes(succ):
    """Nodes with an infinite path in the graph ``succ[n] = {m, ...}``.

    Linear-time peeling: repeatedly drop nodes whose live out-degree is zero.
    """
    nodes = set(succ)
    for ms in succ.values():
        nodes.update(ms)
    pred = {}
    deg = {}
    for n in nodes:
        ms = succ.get(n, ())
        deg[n] = len(ms)
        for m in ms:
            pred.setdefault(m, []).append(n)
    dead = [n for n in nodes if deg[n] == 0]
    alive = set(nodes)
    while dead:
        n = dead.pop()
        alive.discard(n)
        for p in pred.get(n, ()):
            deg[p] -= 1
            if deg[p] == 0:
                dead.append(p)
    return alive
