"""Lattice walks with the step law: free sampling, quadrant bridges, exact laws.

A bridge here is a walk of ``n`` steps from ``(0, l)`` to ``(k, 0)`` (or any
other pair of quadrant points) that never leaves the quadrant.  The exact
computations rely on the support of such bridges being finite: ``X`` only
grows through edge moves and ``Y`` only falls through them, so every position
lies in ``[0, x0 + n] x [0, max(y0, y_end + n)]`` and every usable face move
fits in that box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sewing import LatticePath
from .stepdist import EDGE, FaceMove, Move, StepDistribution, sample_move_arrays

__all__ = [
    "WalkSpec",
    "RejectionExhausted",
    "WalkCapExceeded",
    "increments_from_arrays",
    "sample_unconditioned",
    "sample_conditioned",
    "sample_conditioned_batch",
    "enumerate_conditioned",
    "count_paths",
    "path_weight",
    "exact_window_law",
    "step_law_table",
    "window_tv",
]


class RejectionExhausted(RuntimeError):
    def __init__(self, attempts: int):
        super().__init__(f"no accepted bridge after {attempts} attempts")
        self.attempts = attempts


class WalkCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class WalkSpec:
    n: int
    start: tuple[int, int]
    end: tuple[int, int]
    dist: StepDistribution

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if min(self.start + self.end) < 0:
            raise ValueError("start and end must lie in the non-negative quadrant")

    @classmethod
    def scaled(cls, n: int, A: float, B: float, dist: StepDistribution) -> "WalkSpec":
        """Endpoints ``(0, floor(A n^(1/a)))`` and ``(floor(B n^(1/a)), 0)``."""
        e = 1.0 / dist.alpha
        return cls(n, (0, math.floor(A * n**e)), (math.floor(B * n**e), 0), dist)

    @property
    def box(self) -> tuple[int, int]:
        return self.start[0] + self.n, max(self.start[1], self.end[1] + self.n)


def increments_from_arrays(i: np.ndarray, j: np.ndarray) -> np.ndarray:
    edge = i < 0
    inc = np.empty(i.shape + (2,), dtype=np.int64)
    inc[..., 0] = np.where(edge, 1, -i)
    inc[..., 1] = np.where(edge, -1, j)
    return inc


def sample_unconditioned(n: int, dist: StepDistribution, rng: np.random.Generator) -> LatticePath:
    if n < 0:
        raise ValueError("n must be non-negative")
    i, j = sample_move_arrays(dist, rng, n)
    return LatticePath(start=(0, 0), increments=increments_from_arrays(i, j))


def _run_batch(spec: WalkSpec, rng: np.random.Generator, size: int):
    """Run ``size`` attempts; return the accepted attempt indices and increments.

    Moves are drawn one time step at a time for the attempts still alive, and an
    attempt dies as soon as it leaves the quadrant or can no longer reach the
    end point.  A dead attempt's later moves would not change the verdict, so
    this is the plain rejection sampler with the wasted draws skipped.
    """
    n = spec.n
    kx, ky = spec.end
    alive = np.arange(size)
    x = np.full(size, spec.start[0], np.int64)
    y = np.full(size, spec.start[1], np.int64)
    inc = np.empty((size, n, 2), np.int64)
    for t in range(n):
        i, j = sample_move_arrays(spec.dist, rng, len(alive))
        step = increments_from_arrays(i, j)
        x = x + step[:, 0]
        y = y + step[:, 1]
        rem = n - 1 - t
        ok = (x >= 0) & (y >= 0) & (y - ky <= rem) & (kx - x <= rem)
        inc[alive, t] = step
        alive, x, y = alive[ok], x[ok], y[ok]
        if not len(alive):
            break
    hit = (x == kx) & (y == ky)
    return alive[hit], inc


def sample_conditioned_batch(spec: WalkSpec, rng: np.random.Generator, count: int,
                             max_attempts: int, batch: int = 100_000
                             ) -> tuple[list[LatticePath], int]:
    """``count`` independent bridges by rejection; returns them and the attempts used.

    Attempts are scanned in generation order, so the output is a pure function
    of the generator state.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    n = spec.n
    out: list[LatticePath] = []
    used = 0
    if n == 0:
        if spec.start != spec.end:
            raise RejectionExhausted(max_attempts)
        return [LatticePath(spec.start, np.zeros((0, 2), np.int64)) for _ in range(count)], count
    while len(out) < count:
        size = min(batch, max_attempts - used)
        if size <= 0:
            raise RejectionExhausted(used)
        hits, inc = _run_batch(spec, rng, size)
        need = count - len(out)
        if len(hits) >= need:
            hits = hits[:need]
            used += int(hits[-1]) + 1
        else:
            used += size
        out.extend(LatticePath(spec.start, inc[h].copy()) for h in hits)
    return out, used


def sample_conditioned(spec: WalkSpec, rng: np.random.Generator, max_attempts: int,
                       batch: int = 10_000) -> tuple[LatticePath, int]:
    paths, used = sample_conditioned_batch(spec, rng, 1, max_attempts, batch=min(batch, max_attempts))
    return paths[0], used


def _check_cap(spec: WalkSpec, cap: int) -> None:
    if spec.n > cap:
        raise WalkCapExceeded(f"n = {spec.n} exceeds the cap {cap}")


def _feasible_steps(x: int, y: int, left: int, spec: WalkSpec):
    """Steps from ``(x, y)`` after which the end is still reachable in ``left - 1`` steps."""
    kx, ky = spec.end
    rem = left - 1
    if y - 1 >= 0 and y - 1 - ky <= rem and kx - (x + 1) <= rem:
        yield (1, -1)
    for i in range(0, x + 1):
        if kx - (x - i) > rem:
            continue
        for j in range(0, rem + ky - y + 1):
            yield (-i, j)


def enumerate_conditioned(spec: WalkSpec, cap: int = 8) -> list[LatticePath]:
    _check_cap(spec, cap)
    out: list[LatticePath] = []
    steps: list[tuple[int, int]] = []

    def rec(x, y, left):
        if left == 0:
            if (x, y) == spec.end:
                inc = np.array(steps, dtype=np.int64).reshape(-1, 2)
                out.append(LatticePath(spec.start, inc))
            return
        for dx, dy in _feasible_steps(x, y, left, spec):
            steps.append((dx, dy))
            rec(x + dx, y + dy, left - 1)
            steps.pop()

    rec(spec.start[0], spec.start[1], spec.n)
    return out


def count_paths(spec: WalkSpec, cap: int = 40) -> int:
    """Number of bridges, by dynamic programming over time and position."""
    _check_cap(spec, cap)
    X, Y = spec.box
    cur = {spec.start: 1}
    for t in range(spec.n):
        left = spec.n - t
        nxt: dict[tuple[int, int], int] = {}
        for (x, y), c in cur.items():
            for dx, dy in _feasible_steps(x, y, left, spec):
                key = (x + dx, y + dy)
                nxt[key] = nxt.get(key, 0) + c
        cur = nxt
    return cur.get(spec.end, 0)


def path_weight(path: LatticePath, dist: StepDistribution) -> float:
    w = 1.0
    for mv in path.moves():
        w *= dist.move_probability(mv)
    return w


def _step_prob(dist: StepDistribution, step: tuple[int, int]) -> float:
    dx, dy = step
    if step == (1, -1):
        return dist.p0
    return dist.p(-dx + dy + 2)


def _shift(arr: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """``out[x + dx, y + dy] = arr[x, y]``, dropping what leaves the box."""
    out = np.zeros_like(arr)
    X, Y = arr.shape
    xs = slice(max(0, -dx), min(X, X - dx))
    ys = slice(max(0, -dy), min(Y, Y - dy))
    xd = slice(max(0, dx), min(X, X + dx))
    yd = slice(max(0, dy), min(Y, Y + dy))
    if xs.start < xs.stop and ys.start < ys.stop:
        out[xd, yd] = arr[xs, ys]
    return out


def _support(spec: WalkSpec) -> list[tuple[int, int]]:
    X, Y = spec.box
    return [(1, -1)] + [(-i, j) for i in range(X + 1) for j in range(Y + 1)]


def _dp_tables(spec: WalkSpec):
    X, Y = spec.box
    steps = _support(spec)
    probs = [_step_prob(spec.dist, s) for s in steps]
    n = spec.n
    f = np.zeros((n + 1, X + 1, Y + 1))
    b = np.zeros((n + 1, X + 1, Y + 1))
    f[0][spec.start] = 1.0
    b[n][spec.end] = 1.0
    for t in range(n):
        acc = np.zeros((X + 1, Y + 1))
        for s, p in zip(steps, probs):
            acc += p * _shift(f[t], s[0], s[1])
        f[t + 1] = acc
    for t in range(n - 1, -1, -1):
        acc = np.zeros((X + 1, Y + 1))
        for s, p in zip(steps, probs):
            acc += p * _shift(b[t + 1], -s[0], -s[1])
        b[t] = acc
    return f, b, steps, probs


def _to_move(step: tuple[int, int]) -> Move:
    return EDGE if step == (1, -1) else FaceMove(-step[0], step[1])


def exact_window_law(spec: WalkSpec, r: int = 0, cap: int | None = None
                     ) -> dict[tuple[Move, ...], float]:
    """Exact law of the window ``(w_{U-r}, ..., w_{U+r})`` of a random bridge.

    ``U`` is uniform on the step indices ``r .. n-1-r`` (steps are indexed
    ``0 .. n-1``); the bridge is drawn from the step law conditioned on the
    quadrant and endpoint constraints.
    """
    if cap is None:
        cap = 40 if r == 0 else 10
    _check_cap(spec, cap)
    if 2 * r + 1 > spec.n:
        raise ValueError("window longer than the walk")
    f, b, steps, probs = _dp_tables(spec)
    Z = b[0][spec.start]
    if Z <= 0.0:
        raise ValueError("conditioning event has probability zero")
    times = list(range(r, spec.n - r))
    law: dict[tuple[Move, ...], float] = {}
    w = 2 * r + 1
    nz = [(s, p) for s, p in zip(steps, probs) if p > 0]
    denom = Z * len(times)

    def extend(prefix, p_seq, arrs):
        q = len(prefix)
        if q == w:
            total = sum(float((a * b[t + r + 1]).sum()) for t, a in arrs)
            if total > 0.0:
                law[tuple(_to_move(s) for s in prefix)] = p_seq * total / denom
            return
        for s, p in nz:
            nxt = []
            for t, a in arrs:
                a2 = _shift(a, s[0], s[1])
                # keep only starting times from which the end stays reachable
                if (a2 * b[t - r + q + 1]).any():
                    nxt.append((t, a2))
            if nxt:
                extend(prefix + [s], p_seq * p, nxt)

    extend([], 1.0, [(t, f[t - r]) for t in times])
    return law


def step_law_table(dist: StepDistribution, support) -> dict[tuple[Move, ...], float]:
    """The product step law restricted to ``support`` with the rest lumped
    under the key ``("other",)``."""
    table = {key: math.prod(dist.move_probability(mv) for mv in key) for key in support}
    table[("other",)] = max(0.0, 1.0 - math.fsum(table.values()))
    return table


def window_tv(spec: WalkSpec, r: int = 0) -> float:
    """Total variation between the bridge window law and the free step law."""
    from .stats import empirical_tv

    law = exact_window_law(spec, r)
    ref = step_law_table(spec.dist, law.keys())
    return empirical_tv(law, ref)
