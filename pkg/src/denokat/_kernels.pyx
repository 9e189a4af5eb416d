# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_kernels_py``; same functions, same results."""


def compose_triples(triples, dict succ, Py_ssize_t bound):
    cdef set kept = set()
    cdef set dropped = set()
    cdef Py_ssize_t n
    cdef tuple t, t2
    cdef list nxt
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


def compose_pairs(triples, dict succ, Py_ssize_t bound):
    cdef set kept = set()
    cdef set dropped = set()
    cdef Py_ssize_t n
    cdef tuple t, t2
    cdef list nxt
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


def star_from(dict succ, sources, Py_ssize_t bound):
    cdef set triples = set()
    cdef set spill = set()
    cdef set seen
    cdef list stack
    cdef list nxt
    cdef tuple t, t2, item
    cdef Py_ssize_t n
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


def infinite_nodes(dict succ):
    cdef set nodes = set(succ)
    cdef dict pred = {}
    cdef dict deg = {}
    cdef list dead
    cdef set alive
    cdef Py_ssize_t d
    for ms in succ.values():
        nodes.update(ms)
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
            d = deg[p] - 1
            deg[p] = d
            if d == 0:
                dead.append(p)
    return alive
