"""The limiting pair of alpha-stable processes built from split Poisson jumps.

A Poisson process of jumps ``(t, j)`` with intensity ``dt * c1 j^(-alpha-1) dj``
on ``j >= delta`` is drawn, and every jump is split as ``(-U j, (1 - U) j)``
with ``U`` uniform.  Each coordinate is compensated by the mean of its
retained jumps, so both are centered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .stepdist import check_alpha

__all__ = [
    "JumpRecords",
    "StablePairPath",
    "TwoSidedPair",
    "sample_jump_ppp",
    "assemble_pair",
    "sample_pair",
    "sample_two_sided",
    "sample_endpoint_batch",
    "jump_rate",
    "compensator_rate",
    "truncation_std",
    "default_delta",
    "drift_m_alpha",
    "nu_rectangle_mass",
]


@dataclass(frozen=True)
class JumpRecords:
    t: np.ndarray
    j: np.ndarray
    U: np.ndarray
    T: float
    delta: float

    def __len__(self):
        return len(self.t)


def _check(T, delta, alpha, c1):
    check_alpha(alpha)
    if not (T > 0 and math.isfinite(T)):
        raise ValueError("horizon T must be positive and finite")
    if not delta > 0:
        raise ValueError("truncation delta must be positive")
    if not c1 > 0:
        raise ValueError("c1 must be positive")


def jump_rate(delta: float, alpha: float, c1: float) -> float:
    """Intensity of jumps of magnitude at least ``delta`` per unit time."""
    return c1 * delta ** (-alpha) / alpha


def sample_jump_ppp(T: float, delta: float, alpha: float, c1: float,
                    rng: np.random.Generator) -> JumpRecords:
    _check(T, delta, alpha, c1)
    n = rng.poisson(T * jump_rate(delta, alpha, c1))
    t = np.sort(rng.uniform(0.0, T, n))
    j = _pareto(rng, n, delta, alpha)
    U = rng.random(n)
    return JumpRecords(t, j, U, float(T), float(delta))


def _pareto(rng, n, delta, alpha):
    return delta * (1.0 - rng.random(n)) ** (-1.0 / alpha)


def compensator_rate(delta: float, alpha: float, c1: float) -> float:
    """Mean drift per unit time of the retained jumps in one coordinate."""
    return 0.5 * c1 * delta ** (1.0 - alpha) / (alpha - 1.0)


def truncation_std(T: float, delta: float, alpha: float, c1: float) -> float:
    """Standard deviation over ``[0, T]`` of the discarded small jumps, per coordinate."""
    return math.sqrt(T * c1 * delta ** (2.0 - alpha) / (2.0 - alpha) / 3.0)


def default_delta(T: float, alpha: float, c1: float, rel_std: float = 1e-3,
                  max_jumps: float = 2e4) -> tuple[float, dict]:
    """Truncation level for a run on ``[0, T]``.

    The target is a small-jump standard deviation of ``rel_std * T^(1/alpha)``.
    That target is capped by an expected jump budget, since it typically calls
    for far more jumps than is practical.  The report says which bound won.
    """
    check_alpha(alpha)
    target = rel_std * T ** (1.0 / alpha)
    d_acc = (target**2 * 3.0 * (2.0 - alpha) / (T * c1)) ** (1.0 / (2.0 - alpha))
    d_budget = (T * c1 / (alpha * max_jumps)) ** (1.0 / alpha)
    delta = min(max(d_acc, d_budget), 0.999)
    report = {
        "delta": delta,
        "expected_jumps": T * jump_rate(delta, alpha, c1),
        "truncation_std": truncation_std(T, delta, alpha, c1),
        "target_std": target,
        "target_met": d_acc >= d_budget,
    }
    return delta, report


@dataclass(frozen=True)
class StablePairPath:
    T: float
    delta: float
    alpha: float
    c1: float
    jumps: JumpRecords
    drift: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "drift", compensator_rate(self.delta, self.alpha, self.c1))
        cum1 = np.concatenate(([0.0], np.cumsum(-self.jumps.U * self.jumps.j)))
        cum2 = np.concatenate(([0.0], np.cumsum((1.0 - self.jumps.U) * self.jumps.j)))
        object.__setattr__(self, "_cum1", cum1)
        object.__setattr__(self, "_cum2", cum2)

    def _count(self, t):
        return np.searchsorted(self.jumps.t, t, side="right")

    def W1(self, t):
        t = np.asarray(t, dtype=float)
        return self._cum1[self._count(t)] + self.drift * t

    def W2(self, t):
        t = np.asarray(t, dtype=float)
        return self._cum2[self._count(t)] - self.drift * t

    def jump_sizes(self) -> tuple[np.ndarray, np.ndarray]:
        """Jumps of ``W1`` and ``W2`` at the common jump times."""
        return -self.jumps.U * self.jumps.j, (1.0 - self.jumps.U) * self.jumps.j

    @property
    def truncation_std(self) -> float:
        return truncation_std(self.T, self.delta, self.alpha, self.c1)


def assemble_pair(jumps: JumpRecords, alpha: float, c1: float) -> StablePairPath:
    return StablePairPath(jumps.T, jumps.delta, alpha, c1, jumps)


def sample_pair(T, delta, alpha, c1, rng) -> StablePairPath:
    return assemble_pair(sample_jump_ppp(T, delta, alpha, c1, rng), alpha, c1)


@dataclass(frozen=True)
class TwoSidedPair:
    """Two independent one-sided pairs glued at time 0."""

    forward: StablePairPath
    backward: StablePairPath

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        pos = t >= 0
        s = np.abs(t)
        w1 = np.where(pos, self.forward.W1(s), -self.backward.W1(s))
        w2 = np.where(pos, self.forward.W2(s), -self.backward.W2(s))
        return w1, w2


def sample_two_sided(T, delta, alpha, c1, rng) -> TwoSidedPair:
    return TwoSidedPair(sample_pair(T, delta, alpha, c1, rng), sample_pair(T, delta, alpha, c1, rng))


def sample_endpoint_batch(replicas: int, T: float, delta: float, alpha: float, c1: float,
                          rng: np.random.Generator, chunk: int = 2 * 10**7
                          ) -> tuple[np.ndarray, np.ndarray]:
    """``(W1(T), W2(T))`` for independent replicas, without storing paths."""
    _check(T, delta, alpha, c1)
    counts = rng.poisson(T * jump_rate(delta, alpha, c1), replicas)
    w1 = np.zeros(replicas)
    w2 = np.zeros(replicas)
    ends = np.cumsum(counts)
    lo = 0
    while lo < replicas:
        base = ends[lo - 1] if lo else 0
        hi = max(lo + 1, int(np.searchsorted(ends, base + chunk, side="right")))
        hi = min(hi, replicas)
        idx = np.repeat(np.arange(hi - lo), counts[lo:hi])
        j = _pareto(rng, len(idx), delta, alpha)
        u = rng.random(len(idx))
        w1[lo:hi] = np.bincount(idx, weights=-u * j, minlength=hi - lo)
        w2[lo:hi] = np.bincount(idx, weights=(1.0 - u) * j, minlength=hi - lo)
        lo = hi
    d = compensator_rate(delta, alpha, c1) * T
    return w1 + d, w2 - d


def _drift_integrand(x, alpha):
    return x / (x + math.sqrt(1.0 - x * x)) ** (alpha + 1.0)


def drift_m_alpha(alpha: float, c1: float, tol: float = 1e-10) -> float:
    """Drift constant ``m(alpha)`` of the uncentered limit, a diagnostic."""
    check_alpha(alpha)
    val, err = integrate.quad(_drift_integrand, 0.0, 1.0, args=(alpha,),
                              epsabs=tol, epsrel=tol, limit=200)
    if not err <= 10 * tol:
        raise ArithmeticError(f"quadrature did not converge (error estimate {err})")
    return c1 / ((alpha - 1.0) * (alpha + 1.0)) + c1 / (alpha + 1.0) * val


def nu_rectangle_mass(x1: float, x2: float, y1: float, y2: float,
                      alpha: float, c1: float) -> float:
    """Mass of ``[x1, x2] x [y1, y2]`` under ``c1 (y - x)^(-alpha-2) dx dy``.

    Infinite ends are allowed.  A rectangle with the corner ``(0, 0)`` has
    infinite mass.
    """
    check_alpha(alpha)
    if not (x1 < x2 <= 0.0 <= y1 < y2):
        raise ValueError("need x1 < x2 <= 0 <= y1 < y2")
    if x2 == 0.0 and y1 == 0.0:
        return math.inf

    def G(x, y):
        d = y - x
        if math.isinf(d):
            return 0.0
        return -c1 * d ** (-alpha) / (alpha * (alpha + 1.0))

    return G(x2, y2) - G(x1, y2) - G(x2, y1) + G(x1, y1)
