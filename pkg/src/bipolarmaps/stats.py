"""Estimators and comparisons that tie discrete samples to their limit laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

__all__ = [
    "HillEstimate",
    "RescaledPath",
    "hill_tail_index",
    "ks_two_sample",
    "empirical_tv",
    "frequency_table",
    "TestReport",
    "discrete_endpoints",
    "scaling_experiment",
    "map_adjacency",
    "ball_around",
    "finite_ball_codes",
    "infinite_ball_codes",
    "ball_frequency_experiment",
]


@dataclass(frozen=True)
class HillEstimate:
    alpha: float
    stderr: float
    k: int


def hill_tail_index(samples, k_fraction: float = 0.01) -> HillEstimate:
    """Hill estimator of the index of a power-law tail ``P[X > x] ~ x^-alpha``.

    Uses the top ``ceil(k_fraction * N)`` order statistics, with threshold the
    next one down.  Integer data carries a small discretisation bias.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise ValueError("need at least 100 samples")
    if not 0.0 < k_fraction <= 0.2:
        raise ValueError("k_fraction must lie in (0, 0.2]")
    if np.any(x <= 0):
        raise ValueError("samples must be positive")
    k = math.ceil(k_fraction * x.size)
    top = np.partition(x, x.size - k - 1)[x.size - k - 1:]
    thresh = top.min()
    upper = np.sort(top)[1:]
    if not np.any(upper > thresh):
        raise ValueError("order statistics are all equal")
    gamma = float(np.mean(np.log(upper / thresh)))
    est = 1.0 / gamma
    return HillEstimate(est, est / math.sqrt(k), k)


def ks_two_sample(a, b) -> tuple[float, float]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    res = sps.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


def empirical_tv(table_a: dict, table_b: dict, tol: float = 1e-9) -> float:
    for t in (table_a, table_b):
        s = math.fsum(t.values())
        if abs(s - 1.0) > tol:
            raise ValueError(f"table sums to {s!r}, not 1")
    keys = set(table_a) | set(table_b)
    return 0.5 * math.fsum(abs(table_a.get(k, 0.0) - table_b.get(k, 0.0)) for k in keys)


def frequency_table(items) -> dict:
    counts: dict = {}
    for it in items:
        counts[it] = counts.get(it, 0) + 1
    n = sum(counts.values())
    if n == 0:
        raise ValueError("empty sample")
    return {k: c / n for k, c in counts.items()}


@dataclass
class RescaledPath:
    """``t -> n^(-1/alpha) (X_floor(nt), Y_floor(nt))`` for ``t`` in ``[0, 1]``."""

    positions: np.ndarray
    n: int
    alpha: float

    @classmethod
    def from_path(cls, path, alpha: float) -> "RescaledPath":
        return cls(np.asarray(path.positions), len(path.increments), alpha)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.floor(self.n * t + 1e-12).astype(int), 0, self.n)
        return self.positions[idx] * self.n ** (-1.0 / self.alpha)


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    p_value: float
    sizes: tuple
    seed: int
    level: float = 0.01

    @property
    def passed(self) -> bool:
        return self.p_value > self.level

    def to_dict(self) -> dict:
        return {
            "test": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "sizes": list(self.sizes),
            "seed": self.seed,
            "level": self.level,
            "passed": self.passed,
        }


SCALING_CHUNK = 10**7


def discrete_endpoints(n: int, replicas: int, dist, rng, chunk: int = SCALING_CHUNK):
    """``(X_n, Y_n)`` of free walks, one pair per replica, as integer arrays."""
    from .stepdist import sample_move_arrays

    X = np.empty(replicas, np.int64)
    Y = np.empty(replicas, np.int64)
    rows = max(1, chunk // max(n, 1))
    for lo in range(0, replicas, rows):
        hi = min(replicas, lo + rows)
        i, j = sample_move_arrays(dist, rng, (hi - lo) * n)
        edge = (i < 0).reshape(hi - lo, n)
        i = i.reshape(hi - lo, n)
        j = j.reshape(hi - lo, n)
        X[lo:hi] = np.where(edge, 1, -i).sum(axis=1)
        Y[lo:hi] = np.where(edge, -1, j).sum(axis=1)
    return X, Y


def scaling_experiment(n: int, replicas: int, alpha: float, dist=None,
                       levy_config: dict | None = None, seed: int = 0) -> dict:
    """Compare rescaled walk endpoints with the limit pair at time 1."""
    from . import levy
    from .rng import make_rng
    from .stepdist import power_law_distribution

    if dist is None:
        dist = power_law_distribution(alpha)
    cfg = dict(levy_config or {})
    if "delta" in cfg:
        delta = float(cfg["delta"])
        trunc = {"delta": delta, "truncation_std": levy.truncation_std(1.0, delta, alpha, dist.c1)}
    else:
        delta, trunc = levy.default_delta(1.0, alpha, dist.c1, max_jumps=cfg.get("max_jumps", 2e4))
    X, Y = discrete_endpoints(n, replicas, dist, make_rng(seed, 1))
    scale = n ** (-1.0 / alpha)
    xs, ys = X * scale, Y * scale
    w1, w2 = levy.sample_endpoint_batch(replicas, 1.0, delta, alpha, dist.c1, make_rng(seed, 2))
    h = replicas // 2
    tests = []
    for name, a, b in [
        ("X_vs_W1", xs, w1),
        ("Y_vs_W2", ys, w2),
        ("X_vs_minus_Y", xs[:h], -ys[h:]),
        ("W1_vs_minus_W2", w1[:h], -w2[h:]),
    ]:
        stat, p = ks_two_sample(a, b)
        tests.append(TestReport(name, stat, p, (len(a), len(b)), seed).to_dict())
    qs = [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99]
    return {
        "n": n,
        "replicas": replicas,
        "alpha": alpha,
        "seed": seed,
        "levy": trunc,
        "tests": tests,
        "quantiles": {
            "q": qs,
            "X": np.quantile(xs, qs).tolist(),
            "W1": np.quantile(w1, qs).tolist(),
            "Y": np.quantile(ys, qs).tolist(),
            "W2": np.quantile(w2, qs).tolist(),
        },
    }


def map_adjacency(m) -> dict:
    adj: dict[int, list[int]] = {v: [] for v in range(m.n_vertices)}
    for e in m.edges:
        if e is None:
            continue
        a, b = e
        adj[a].append(b)
        adj[b].append(a)
    return adj


def ball_around(adj: dict, root, r: int) -> dict:
    dist = {root: 0}
    frontier = [root]
    for d in range(r):
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist:
                    dist[u] = d + 1
                    nxt.append(u)
        frontier = nxt
    return {v: [u for u in adj[v] if u in dist] for v in dist}


def finite_ball_codes(n: int, A: float, B: float, dist, samples: int, rng,
                      r: int = 1, max_attempts: int = 10**10) -> dict:
    """Ball codes of rejection-sampled conditioned maps under both rootings.

    ``"move"`` roots at the active vertex before move ``U`` with ``U`` uniform
    on ``0 .. n-1``; ``"vertex"`` roots at a uniform vertex.
    """
    from .canon import canonical_code
    from .sewing import apply_move, initial_map
    from .walks import WalkSpec, sample_conditioned_batch

    spec = WalkSpec.scaled(n, A, B, dist)
    paths, used = sample_conditioned_batch(spec, rng, samples, max_attempts)
    U = rng.integers(0, n, samples)
    out = {"move": [], "vertex": [], "attempts": used, "start": spec.start, "end": spec.end}
    for path, u in zip(paths, U):
        m = initial_map()
        actives = []
        for mv in path.moves():
            actives.append(m.active)
            apply_move(m, mv)
        adj = map_adjacency(m)
        out["move"].append(canonical_code(ball_around(adj, actives[u], r), actives[u]))
        v = int(rng.integers(0, m.n_vertices))
        out["vertex"].append(canonical_code(ball_around(adj, v, r), v))
    return out


def infinite_ball_codes(seeds, r: int, dist, m0: int = 64, m_max: int = 2**14,
                        offset: int = 0) -> dict:
    from .uibpm import CertificationFailed, grow_until_certified

    codes, m_used, failed = [], [], []
    for s in seeds:
        try:
            ball, m = grow_until_certified(int(s), r, dist, m0=m0, m_max=m_max, offset=offset)
        except CertificationFailed:
            failed.append(int(s))
            continue
        codes.append(ball.code())
        m_used.append(m)
    return {"codes": codes, "m_used": m_used, "failed": failed}


def ball_frequency_experiment(ns, A: float, B: float, alpha: float, samples: int,
                              n_seeds: int, r: int = 1, m_max: int = 2**14,
                              seed: int = 0) -> dict:
    """TV between finite-map and infinite-volume ball-code frequency tables."""
    from .rng import make_rng
    from .stepdist import power_law_distribution

    dist = power_law_distribution(alpha)
    inf = infinite_ball_codes(range(seed * 10**6, seed * 10**6 + n_seeds), r, dist, m_max=m_max)
    ref = frequency_table(inf["codes"])
    rows = []
    for n in ns:
        fin = finite_ball_codes(n, A, B, dist, samples, make_rng(seed, 3, n), r=r)
        rows.append({
            "n": n,
            "start": list(fin["start"]),
            "end": list(fin["end"]),
            "attempts": fin["attempts"],
            "samples": samples,
            "tv_move_root": empirical_tv(frequency_table(fin["move"]), ref),
            "tv_vertex_root": empirical_tv(frequency_table(fin["vertex"]), ref),
            "distinct_codes": len(set(fin["move"])),
        })
    return {
        "alpha": alpha,
        "r": r,
        "seed": seed,
        "infinite": {
            "seeds": n_seeds,
            "certified": len(inf["codes"]),
            "failed": len(inf["failed"]),
            "m_max": m_max,
            "distinct_codes": len(ref),
        },
        "finite": rows,
    }
