import itertools
import random

import pytest

from bipolarmaps.canon import canonical_code, relabel


def to_adj(n, edges):
    adj = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    return adj


def brute_form(n, edges, root):
    """Least sorted edge list over all relabellings sending root to 0."""
    others = [v for v in range(n) if v != root]
    best = None
    for perm in itertools.permutations(range(1, n)):
        lab = {root: 0, **dict(zip(others, perm))}
        form = tuple(sorted(tuple(sorted((lab[a], lab[b]))) for a, b in edges))
        if best is None or form < best:
            best = form
    return (n, best)


def test_path_vs_star():
    path = to_adj(4, [(0, 1), (1, 2), (2, 3)])
    star = to_adj(4, [(0, 1), (0, 2), (0, 3)])
    assert canonical_code(path, 1) != canonical_code(star, 0)
    assert canonical_code(path, 0) != canonical_code(path, 1)
    assert canonical_code(path, 0) == canonical_code(path, 3)


def test_relabel_invariance():
    rng = random.Random(1)
    for _ in range(200):
        n = rng.randint(1, 12)
        edges = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 20))]
        edges = [(a, b) for a, b in edges if a != b]
        adj = to_adj(n, edges)
        names = list(range(100, 100 + n))
        rng.shuffle(names)
        mapping = dict(zip(range(n), names))
        root = rng.randrange(n)
        assert canonical_code(adj, root) == canonical_code(relabel(adj, mapping), mapping[root])


def test_multiplicity_matters():
    single = to_adj(2, [(0, 1)])
    double = to_adj(2, [(0, 1), (0, 1)])
    assert canonical_code(single, 0) != canonical_code(double, 0)


def _check_against_brute(graphs):
    by_code, by_form = {}, {}
    for n, edges, root in graphs:
        c = canonical_code(to_adj(n, edges), root)
        f = brute_form(n, edges, root)
        assert by_code.setdefault(c, f) == f
        assert by_form.setdefault(f, c) == c


def test_all_simple_graphs_up_to_five():
    graphs = []
    for n in range(1, 6):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            edges = [p for k, p in enumerate(pairs) if mask >> k & 1]
            for root in range(n):
                graphs.append((n, edges, root))
    _check_against_brute(graphs)


def test_random_multigraphs_six():
    rng = random.Random(2)
    pairs = list(itertools.combinations(range(6), 2))
    graphs = []
    for _ in range(3000):
        edges = [p for p in pairs for _ in range(rng.choice([0, 0, 1, 1, 2]))]
        graphs.append((6, edges, rng.randrange(6)))
    _check_against_brute(graphs)


@pytest.mark.parametrize("n", [8, 10])
def test_symmetric_graphs(n):
    # cycles and complete bipartite graphs stress the twin pruning
    cyc = [(k, (k + 1) % n) for k in range(n)]
    assert canonical_code(to_adj(n, cyc), 0) == canonical_code(to_adj(n, cyc), n - 1)
    h = n // 2
    kb = [(a, b) for a in range(h) for b in range(h, n)]
    assert canonical_code(to_adj(n, kb), 0) == canonical_code(to_adj(n, kb), h - 1)
    assert canonical_code(to_adj(n, kb), 0) != canonical_code(to_adj(n, cyc), 0) or n == 4
