"""Face weights and the step law of the encoding lattice walk.

A walk step is either the edge move ``m_e`` (increment ``(1, -1)``) or a face
move ``m_{i,j}`` (increment ``(-i, j)``) which sews a face of degree
``i + j + 2``.  Given face weights ``a_k`` the step law assigns ``p_0`` to the
edge move and ``p_k`` to each of the ``k - 1`` face moves of degree ``k``.

For the heavy-tailed family ``a_k = C0 * L**-k * k**(-alpha - 2)`` the law is
``p_k = C1 * k**(-alpha - 2)`` with closed-form constants; any other weight
rule goes through the generic solver in :func:`derive_step_distribution`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "EdgeMove",
    "FaceMove",
    "Move",
    "EDGE",
    "StepDistributionError",
    "check_alpha",
    "power_sum",
    "power_law_constants",
    "WeightSequence",
    "StepDistribution",
    "derive_step_distribution",
    "power_law_distribution",
    "sample_move",
    "sample_move_arrays",
    "mean_increment",
    "mean_tail_bound",
]

TABLE_DEGREE = 10_000
_HEAD_TERMS = 2_000
_MAX_DEGREE = 2**62


class StepDistributionError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeMove:
    """The move ``m_e``: sew one edge above the active vertex."""

    @property
    def increment(self) -> tuple[int, int]:
        return (1, -1)

    def __repr__(self) -> str:
        return "EdgeMove()"


@dataclass(frozen=True)
class FaceMove:
    """The move ``m_{i,j}``: sew a face with ``i+1`` west and ``j+1`` east edges."""

    i: int
    j: int

    def __post_init__(self):
        if self.i < 0 or self.j < 0:
            raise ValueError(f"face move needs i, j >= 0, got ({self.i}, {self.j})")

    @property
    def degree(self) -> int:
        return self.i + self.j + 2

    @property
    def increment(self) -> tuple[int, int]:
        return (-self.i, self.j)


Move = Union[EdgeMove, FaceMove]
EDGE = EdgeMove()


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (1.0 < alpha < 2.0):
        raise StepDistributionError(f"alpha must lie in (1, 2), got {alpha}")
    return alpha


def _em_tail(s: float, K: int) -> float:
    # Euler-Maclaurin for sum_{k >= K} k**-s; the next omitted term is O(K**(-s-7)).
    Kf = float(K)
    out = Kf ** (1.0 - s) / (s - 1.0) + 0.5 * Kf**-s
    out += s * Kf ** (-s - 1.0) / 12.0
    out -= s * (s + 1) * (s + 2) * Kf ** (-s - 3.0) / 720.0
    out += s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * Kf ** (-s - 5.0) / 30240.0
    return out


def power_sum(s: float, start: int = 2, K: int = _HEAD_TERMS) -> float:
    """``sum_{k >= start} k**-s`` for ``s > 1``: exact head up to ``K`` plus an
    Euler-Maclaurin tail.  Absolute error is far below 1e-13 for ``s > 1``."""
    if s <= 1.0:
        raise ValueError("power sum diverges for s <= 1")
    K = max(K, start)
    ks = np.arange(start, K, dtype=np.float64)
    head = math.fsum((ks**-s).tolist())
    return head + _em_tail(s, K)


def _degree_series(alpha: float) -> tuple[float, float]:
    # S1 = sum (k-1)(k-2)/(2 k^(a+2)),  S2 = sum (k-1) k^(-a-2), both over k >= 2
    z0 = power_sum(alpha)
    z1 = power_sum(alpha + 1.0)
    z2 = power_sum(alpha + 2.0)
    s1 = 0.5 * (z0 - 3.0 * z1 + 2.0 * z2)
    s2 = z1 - z2
    return s1, s2


def power_law_constants(alpha: float) -> tuple[float, float]:
    """Return ``(C0, C1)`` for the power-law face weights at ``alpha``."""
    alpha = check_alpha(alpha)
    s1, s2 = _degree_series(alpha)
    c0 = 1.0 / s1
    c1 = c0 / (1.0 + c0 * s2)
    return c0, c1


@dataclass(frozen=True)
class WeightSequence:
    """Face weights ``a_k`` (k >= 2) given as a rule.

    ``radius`` is the radius of convergence of ``sum a_k z**k`` (``math.inf``
    for finitely supported rules).  ``max_degree`` marks finite support.
    """

    rule: Callable[[int], float]
    radius: float
    family: str = "general"
    alpha: float | None = None
    c0: float | None = None
    L: float = 1.0
    max_degree: int | None = None

    @classmethod
    def power_law(cls, alpha: float, L: float = 1.0) -> "WeightSequence":
        alpha = check_alpha(alpha)
        if L <= 0:
            raise StepDistributionError("L must be positive")
        c0, _ = power_law_constants(alpha)
        return cls(
            rule=lambda k: c0 * L ** (-k) * k ** (-alpha - 2.0),
            radius=L,
            family="power",
            alpha=alpha,
            c0=c0,
            L=L,
        )

    @classmethod
    def finite(cls, weights: dict[int, float]) -> "WeightSequence":
        """Finitely supported weights, e.g. ``{3: w}`` for triangulations."""
        clean = {int(k): float(v) for k, v in weights.items()}
        if any(k < 2 for k in clean) or any(v < 0 for v in clean.values()):
            raise StepDistributionError("weights need degrees >= 2 and values >= 0")
        return cls(
            rule=lambda k: clean.get(k, 0.0),
            radius=math.inf,
            max_degree=max(clean) if clean else 2,
        )

    def __call__(self, k: int) -> float:
        return self.rule(k)


@dataclass(frozen=True)
class StepDistribution:
    """Immutable step law with a precomputed inverse-CDF table.

    ``cdf[0] = p0``; ``cdf[t]`` for ``t >= 1`` adds the mass ``(k-1) p_k`` of
    degrees ``k = 2 .. t + 1``.  Mass beyond the table is sampled from the
    analytic tail (power-law family only).
    """

    p0: float
    lam: float
    bigC: float
    pk: Callable[[int], float] = field(repr=False)
    cdf: np.ndarray = field(repr=False)
    tail_mass: float
    alpha: float | None = None
    c0: float | None = None
    c1: float | None = None

    @property
    def table_degree(self) -> int:
        return len(self.cdf)

    def p(self, k: int) -> float:
        """Probability of one particular face move of degree ``k``."""
        if k < 2:
            return 0.0
        return self.pk(k)

    def degree_mass(self, k: int) -> float:
        """Probability that a step is a face move of degree ``k``."""
        return (k - 1) * self.p(k)

    def move_probability(self, move: Move) -> float:
        if isinstance(move, EdgeMove):
            return self.p0
        return self.p(move.degree)

    def tail_degree_mass(self, K: int) -> float:
        """``sum_{k > K} (k-1) p_k``."""
        if self.c1 is not None:
            a = self.alpha
            return self.c1 * (power_sum(a + 1.0, K + 1) - power_sum(a + 2.0, K + 1))
        ks = np.arange(K + 1, self.table_degree + 2)
        return float(sum((k - 1) * self.pk(int(k)) for k in ks)) + self.tail_mass


def _build_cdf(p0: float, pk: Callable[[int], float], K: int) -> np.ndarray:
    ks = np.arange(2, K + 1, dtype=np.float64)
    masses = np.array([(k - 1) * pk(int(k)) for k in ks])
    cdf = np.empty(len(ks) + 1)
    cdf[0] = p0
    cdf[1:] = p0 + np.cumsum(masses)
    return cdf


def power_law_distribution(alpha: float, table_degree: int = TABLE_DEGREE) -> StepDistribution:
    """Step law of the power-law family; ``lambda = L = 1``."""
    alpha = check_alpha(alpha)
    c0, c1 = power_law_constants(alpha)
    expo = -alpha - 2.0

    def pk(k: int) -> float:
        return c1 * float(k) ** expo

    p0 = c1 / c0
    cdf = _build_cdf(p0, pk, table_degree)
    tail = c1 * (power_sum(alpha + 1.0, table_degree + 1) - power_sum(alpha + 2.0, table_degree + 1))
    return StepDistribution(
        p0=p0, lam=1.0, bigC=c0 / c1, pk=pk, cdf=cdf, tail_mass=tail,
        alpha=alpha, c0=c0, c1=c1,
    )


def _series(terms: Callable[[int], float], kmax: int, tol: float = 1e-16) -> float:
    total = 0.0
    small = 0
    for k in range(2, kmax + 1):
        t = terms(k)
        total += t
        # stop after a run of negligible terms (geometric decay inside the radius)
        if k > 10 and t <= tol * max(total, 1e-300):
            small += 1
            if small >= 20:
                break
        else:
            small = 0
    return total


def derive_step_distribution(
    weights: WeightSequence,
    *,
    max_iter: int = 200,
    tol: float = 1e-12,
    kmax: int = 1_000_000,
) -> StepDistribution:
    """Solve for ``lambda`` and ``C`` and return the induced step law."""
    if weights.family == "power":
        # lambda = L, p_k = C1 k^(-alpha-2), p0 = C1/C0 (no solve needed)
        base = power_law_distribution(weights.alpha)
        return StepDistribution(
            p0=base.p0, lam=weights.L, bigC=base.c0 / (base.c1 * weights.L**2),
            pk=base.pk, cdf=base.cdf, tail_mass=base.tail_mass,
            alpha=base.alpha, c0=base.c0, c1=base.c1,
        )

    a = weights.rule
    top = weights.max_degree if weights.max_degree is not None else kmax
    if not any(a(k) > 0 for k in range(3, min(top, 10_000) + 1)):
        raise StepDistributionError("need a_k > 0 for some k >= 3")

    def g(lam: float) -> float:
        return _series(lambda k: 0.5 * (k - 1) * (k - 2) * a(k) * lam**k, top)

    R = weights.radius
    if math.isinf(R):
        hi = 1.0
        while g(hi) < 1.0:
            hi *= 2.0
            if hi > 1e150:
                raise StepDistributionError("could not bracket lambda")
    else:
        if g(R * (1 - 1e-15)) < 1.0:
            raise StepDistributionError(
                "infeasible weights: sum (k-1)(k-2)/2 a_k R^k < 1 at the radius")
        hi = R
    lo = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if g(mid) < 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    else:
        raise StepDistributionError("bisection for lambda did not converge")
    lam = 0.5 * (lo + hi)
    bigC = lam**-2 + _series(lambda k: (k - 1) * a(k) * lam ** (k - 2), top)

    def pk(k: int) -> float:
        return a(k) * lam ** (k - 2) / bigC

    p0 = 1.0 / (lam**2 * bigC)
    # table up to the support edge or until the remaining mass is negligible
    K = 2
    acc = p0
    limit = top if weights.max_degree is not None else kmax
    while K < limit and 1.0 - acc > 1e-15:
        acc += (K - 1) * pk(K)
        K += 1
    cdf = _build_cdf(p0, pk, max(K, 2))
    return StepDistribution(p0=p0, lam=lam, bigC=bigC, pk=pk, cdf=cdf,
                            tail_mass=max(0.0, 1.0 - float(cdf[-1])))


def _tail_degree(dist: StepDistribution, rng: np.random.Generator) -> int:
    """Exact draw of a degree ``k > K`` with weight ``(k-1) k^(-alpha-2)``.

    Proposal: ``floor`` of a Pareto(alpha) variable on ``[K+1, inf)``; one
    accept/reject against the exact pmf ratio (envelope constant proven below
    the bound ``1 / (alpha (1 - (alpha+1) / (2(K+1))))``).
    """
    a = dist.alpha
    if a is None:
        return dist.table_degree  # general weights: residual mass below 1e-15
    K1 = float(dist.table_degree + 1)
    M = 1.0 / (a * (1.0 - (a + 1.0) / (2.0 * K1)))
    while True:
        v = 1.0 - rng.random()
        y = K1 * v ** (-1.0 / a)
        if y >= _MAX_DEGREE:
            continue
        k = math.floor(y)
        x = 1.0 / k
        denom = -math.expm1(-a * math.log1p(x))  # 1 - (1 + 1/k)^-a
        r = (1.0 - x) * x / denom
        if rng.random() * M <= r:
            return int(k)


def sample_move_arrays(dist: StepDistribution, rng: np.random.Generator, size: int
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` i.i.d. moves as arrays ``(i, j)``; edge moves are ``(-1, -1)``."""
    u = rng.random(size)
    idx = np.searchsorted(dist.cdf, u, side="right")
    deg = idx + 1  # idx t >= 1 -> degree t + 1
    tail = np.flatnonzero(idx == len(dist.cdf))
    for t in tail:
        deg[t] = _tail_degree(dist, rng)
    face = idx > 0
    i = np.full(size, -1, dtype=np.int64)
    j = np.full(size, -1, dtype=np.int64)
    kf = deg[face].astype(np.int64)
    ii = rng.integers(0, kf - 1) if kf.size else kf
    i[face] = ii
    j[face] = kf - 2 - ii
    return i, j


def sample_move(dist: StepDistribution, rng: np.random.Generator) -> Move:
    i, j = sample_move_arrays(dist, rng, 1)
    if i[0] < 0:
        return EDGE
    return FaceMove(int(i[0]), int(j[0]))


def mean_increment(dist: StepDistribution, K: int | None = None) -> tuple[float, float]:
    """Mean step ``(p0 - sum p_k (k-1)(k-2)/2, -p0 + sum ...)``.

    For the power-law family the series is evaluated in full (head plus
    Euler-Maclaurin tail); with ``K`` given it is truncated at degree ``K``.
    """
    if dist.c1 is not None and K is None:
        a = dist.alpha
        s = 0.5 * (power_sum(a) - 3.0 * power_sum(a + 1.0) + 2.0 * power_sum(a + 2.0))
        face = dist.c1 * s
    else:
        top = K if K is not None else dist.table_degree
        face = math.fsum(dist.p(k) * (k - 1) * (k - 2) / 2.0 for k in range(2, top + 1))
    return (dist.p0 - face, face - dist.p0)


def mean_tail_bound(dist: StepDistribution, K: int) -> float:
    """Upper bound on the face-mean mass dropped by truncating at degree ``K``:
    ``sum_{k>K} C1 (k-1)(k-2)/2 k^(-a-2) <= C1 K^(1-a) / (2(a-1))``."""
    if dist.c1 is None:
        raise StepDistributionError("tail bound is defined for the power-law family")
    return dist.c1 * K ** (1.0 - dist.alpha) / (2.0 * (dist.alpha - 1.0))
