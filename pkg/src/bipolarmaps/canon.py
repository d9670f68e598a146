"""Canonical codes for finite rooted multigraphs.

Colour refinement with the root singled out, then individualisation of the
first non-singleton cell with backtracking.  Vertices with identical
neighbourhoods (twins) are interchangeable, so only one twin per class is
branched on.  The code of a graph is the least leaf encoding found, which
makes code equality the same as root-preserving isomorphism.
"""

from __future__ import annotations

from collections import Counter

__all__ = ["canonical_code", "relabel"]


def _refine(colors: list[int], nbrs: list[list[int]]) -> list[int]:
    """Stable colouring refining ``colors``; labels are ordered invariantly."""
    n = len(colors)
    n_cls = len(set(colors))
    while True:
        sig = [(colors[v], tuple(sorted(colors[u] for u in nbrs[v]))) for v in range(n)]
        order = {s: c for c, s in enumerate(sorted(set(sig)))}
        new = [order[s] for s in sig]
        if len(order) == n_cls:
            return new
        colors, n_cls = new, len(order)


def _individualize(colors: list[int], v: int) -> list[int]:
    # v keeps its colour value but sorts ahead of its cell-mates
    key = [(c, 0 if u == v else 1) for u, c in enumerate(colors)]
    order = {k: i for i, k in enumerate(sorted(set(key)))}
    return [order[k] for k in key]


def _twin_classes(nbrs: list[list[int]], root: int) -> list[int]:
    n = len(nbrs)
    cnt = [Counter(x) for x in nbrs]
    cls = list(range(n))
    buckets: dict = {}
    for v in range(n):
        if v == root:
            continue
        # u, v twins iff N(u) - {v} == N(v) - {u} with multiplicities; the loop
        # multiplicity between them is symmetric so key on the rest
        key = (len(nbrs[v]), tuple(sorted(cnt[v].items())))
        buckets.setdefault(key, []).append(v)
    for vs in buckets.values():
        for v in vs:
            if cls[v] != v:
                continue
            for u in vs:
                if u != v and cls[u] == u:
                    cls[u] = v
    # second pass: adjacent twins whose neighbourhoods differ only by each other
    for v in range(n):
        if v == root or cls[v] != v:
            continue
        for u in set(nbrs[v]):
            if u == root or u <= v or cls[u] != u:
                continue
            a = cnt[v].copy()
            b = cnt[u].copy()
            a[u] -= cnt[v][u]
            b[v] -= cnt[u][v]
            if +a == +b and cnt[v][u] == cnt[u][v]:
                cls[u] = v
    return cls


def _encode(perm: list[int], edges: list[tuple[int, int, int]], n: int) -> tuple:
    enc = sorted((min(perm[a], perm[b]), max(perm[a], perm[b]), m) for a, b, m in edges)
    return (n, tuple(enc))


def canonical_code(adjacency, root) -> str:
    """Hex canonical code of the rooted multigraph ``adjacency`` (vertex -> neighbour list).

    Neighbour lists carry multiplicities; each undirected edge appears once in
    each endpoint's list and a loop appears twice in its vertex's list.
    """
    verts = sorted(adjacency, key=repr)
    if root not in adjacency:
        raise KeyError("root is not a vertex")
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    nbrs = [[idx[u] for u in adjacency[v]] for v in verts]
    r = idx[root]
    mult: Counter = Counter()
    for a in range(n):
        for b in nbrs[a]:
            if a <= b:
                mult[(a, b)] += 1
    edges = [(a, b, (m // 2 if a == b else m)) for (a, b), m in mult.items()]
    twins = _twin_classes(nbrs, r)

    start = _refine([0 if v == r else 1 for v in range(n)], nbrs)
    best: list = [None]

    def search(colors):
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        target = next((cells[c] for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            code = _encode(colors, edges, n)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        seen = set()
        for v in target:
            t = twins[v]
            if t in seen:
                continue
            seen.add(t)
            search(_refine(_individualize(colors, v), nbrs))

    search(start)
    n_out, enc = best[0]
    out = bytearray()
    out += n_out.to_bytes(4, "big")
    for a, b, m in enc:
        out += a.to_bytes(4, "big") + b.to_bytes(4, "big") + m.to_bytes(4, "big")
    return out.hex()


def relabel(adjacency, mapping):
    return {mapping[v]: [mapping[u] for u in nb] for v, nb in adjacency.items()}
