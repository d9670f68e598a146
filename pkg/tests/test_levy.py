import math

import numpy as np
import pytest
from scipy import integrate, stats

from bipolarmaps.levy import (
    assemble_pair,
    compensator_rate,
    default_delta,
    drift_m_alpha,
    jump_rate,
    nu_rectangle_mass,
    sample_endpoint_batch,
    sample_jump_ppp,
    sample_pair,
    sample_two_sided,
    truncation_std,
)
from bipolarmaps.levy import JumpRecords
from bipolarmaps.rng import make_rng
from bipolarmaps.stepdist import power_law_constants

ALPHA = 1.5
C1 = power_law_constants(ALPHA)[1]


def test_jump_records_shape():
    jr = sample_jump_ppp(50.0, 0.1, ALPHA, C1, make_rng(1))
    assert (np.diff(jr.t) >= 0).all()
    assert (jr.t >= 0).all() and (jr.t <= 50).all()
    assert (jr.j >= 0.1).all()
    assert ((jr.U >= 0) & (jr.U <= 1)).all()


def test_jump_count_mean():
    rng = make_rng(2)
    T, delta = 3.0, 0.5
    counts = np.array([len(sample_jump_ppp(T, delta, ALPHA, C1, rng)) for _ in range(10**4)])
    lam = T * jump_rate(delta, ALPHA, C1)
    assert abs(counts.mean() - lam) <= 4 * counts.std(ddof=1) / math.sqrt(len(counts))


def test_magnitudes_pareto():
    jr = sample_jump_ppp(2000.0, 0.2, ALPHA, C1, make_rng(3))
    cdf = lambda x: 1.0 - (x / 0.2) ** (-ALPHA)  # noqa: E731
    assert stats.kstest(jr.j, cdf).pvalue >= 0.01


def test_split_and_simultaneity():
    p = sample_pair(20.0, 0.05, ALPHA, C1, make_rng(4))
    d1, d2 = p.jump_sizes()
    assert (d1 <= 0).all() and (d2 >= 0).all()
    assert np.allclose(d2 - d1, p.jumps.j, rtol=1e-15, atol=0)
    # path increments at jump times are the split jumps
    t = p.jumps.t
    eps = 1e-12
    assert np.allclose(p.W1(t) - p.W1(t - eps), d1, atol=1e-9)
    assert np.allclose(p.W2(t) - p.W2(t - eps), d2, atol=1e-9)


def test_zero_jumps_is_pure_drift():
    jr = JumpRecords(np.zeros(0), np.zeros(0), np.zeros(0), 5.0, 0.3)
    p = assemble_pair(jr, ALPHA, C1)
    g = compensator_rate(0.3, ALPHA, C1)
    assert g == pytest.approx(0.5 * C1 * 0.3 ** (1 - ALPHA) / (ALPHA - 1), rel=1e-15)
    ts = np.array([0.0, 1.0, 2.5, 5.0])
    assert np.allclose(p.W1(ts), g * ts)
    assert np.allclose(p.W2(ts), -g * ts)


def test_compensator_matches_quadrature():
    delta = 0.3
    val, _ = integrate.quad(lambda x: x * C1 * x ** (-ALPHA - 1), delta, np.inf)
    assert compensator_rate(delta, ALPHA, C1) == pytest.approx(0.5 * val, rel=1e-8)


def test_centering():
    T, delta = 1.0, 0.05
    w1, w2 = sample_endpoint_batch(10**4, T, delta, ALPHA, C1, make_rng(5))
    for w in (w1, w2, w2 - w1):
        assert abs(w.mean()) <= 4 * w.std(ddof=1) / math.sqrt(len(w))


def test_endpoint_batch_matches_paths():
    T, delta = 2.0, 0.1
    rng = make_rng(6)
    a = np.array([sample_pair(T, delta, ALPHA, C1, rng).W1(T) for _ in range(3000)])
    b, _ = sample_endpoint_batch(3000, T, delta, ALPHA, C1, make_rng(7))
    assert stats.ks_2samp(a, b).pvalue >= 0.01


def test_endpoint_batch_chunking():
    a = sample_endpoint_batch(3000, 1.0, 0.05, ALPHA, C1, make_rng(8), chunk=10**9)
    b = sample_endpoint_batch(3000, 1.0, 0.05, ALPHA, C1, make_rng(8), chunk=1000)
    c = sample_endpoint_batch(3000, 1.0, 0.05, ALPHA, C1, make_rng(8), chunk=1000)
    assert np.array_equal(b[0], c[0])
    assert stats.ks_2samp(a[0], b[0]).pvalue >= 0.01


def test_stability_scaling():
    a = 8.0
    delta = 0.05
    rng = make_rng(9)
    w1, _ = sample_endpoint_batch(4000, 1.0, delta, ALPHA, C1, rng)
    v1, _ = sample_endpoint_batch(4000, a, delta * a ** (1 / ALPHA), ALPHA, C1, rng)
    assert stats.ks_2samp(w1, v1 / a ** (1 / ALPHA)).pvalue >= 0.01


def test_two_sided():
    ts = sample_two_sided(5.0, 0.1, ALPHA, C1, make_rng(10))
    w1, w2 = ts(np.array([-2.0, 0.0, 3.0]))
    assert w1[1] == 0.0 and w2[1] == 0.0
    assert w1[0] == pytest.approx(-ts.backward.W1(2.0))
    assert w2[2] == pytest.approx(ts.forward.W2(3.0))


def test_truncation_std_formula():
    T, delta = 4.0, 0.01
    var, _ = integrate.quad(lambda x: x * x * C1 * x ** (-ALPHA - 1), 0, delta)
    assert truncation_std(T, delta, ALPHA, C1) == pytest.approx(math.sqrt(T * var / 3), rel=1e-8)


def test_default_delta_report():
    delta, rep = default_delta(100.0, ALPHA, C1)
    assert 0 < delta < 1
    assert rep["expected_jumps"] <= 2e4 * (1 + 1e-9)
    assert rep["truncation_std"] == pytest.approx(truncation_std(100.0, delta, ALPHA, C1))
    assert rep["target_met"] is False
    d2, rep2 = default_delta(100.0, ALPHA, C1, rel_std=0.5)
    assert rep2["target_met"] is True and rep2["truncation_std"] <= 0.5 * 100 ** (1 / ALPHA) + 1e-12


@pytest.mark.parametrize("bad", [dict(T=-1.0), dict(delta=0.0), dict(alpha=2.0)])
def test_bad_parameters(bad):
    kw = dict(T=1.0, delta=0.1, alpha=ALPHA, c1=C1)
    kw.update(bad)
    with pytest.raises(Exception):
        sample_jump_ppp(rng=make_rng(0), **kw)


def _gauss_legendre_m(alpha, c1, n=200):
    # x = sin(theta) removes the square-root endpoint behaviour
    th, w = np.polynomial.legendre.leggauss(n)
    th = (th + 1) * math.pi / 4
    w = w * math.pi / 4
    x = np.sin(th)
    f = x / (x + np.cos(th)) ** (alpha + 1) * np.cos(th)
    return c1 / ((alpha - 1) * (alpha + 1)) + c1 / (alpha + 1) * float(np.dot(w, f))


@pytest.mark.parametrize("alpha", [1.1, 1.5, 1.9])
def test_drift_constant(alpha):
    c1 = power_law_constants(alpha)[1]
    m = drift_m_alpha(alpha, c1)
    assert m > 0
    assert m == pytest.approx(_gauss_legendre_m(alpha, c1), abs=1e-8)
    assert m <= c1 / ((alpha - 1) * (alpha + 1)) + c1 / (2 * (alpha + 1))


def _split_mass(x1, x2, y1, y2):
    # integral over j of Pi(dj) times the U-measure of the admissible interval
    def inner(j):
        lo = max(-x2 / j, 1 - y2 / j, 0.0)
        hi = min(-x1 / j, 1 - y1 / j, 1.0)
        return max(0.0, hi - lo) * C1 * j ** (-ALPHA - 1)

    jlo = y1 - x2
    jhi = y2 - x1
    pts = [p for p in (y1 - x1, y2 - x2) if jlo < p < jhi and math.isfinite(p)]
    val, _ = integrate.quad(inner, jlo, jhi, points=pts or None, limit=200,
                            epsabs=1e-13, epsrel=1e-11)
    return val


@pytest.mark.parametrize("rect", [
    (-1.0, 0.0, 1.0, 2.0), (-3.0, -1.0, 0.5, 4.0), (-2.0, -0.5, 0.0, 1.0), (-5.0, -4.0, 2.0, 2.5),
])
def test_rectangle_mass(rect):
    m = nu_rectangle_mass(*rect, ALPHA, C1)
    assert m == pytest.approx(_split_mass(*rect), rel=1e-8)
    x1, x2, y1, y2 = rect
    assert m == pytest.approx(nu_rectangle_mass(-y2, -y1, -x2, -x1, ALPHA, C1), rel=1e-14)


def test_rectangle_mass_edge_cases():
    assert nu_rectangle_mass(-1.0, 0.0, 0.0, 1.0, ALPHA, C1) == math.inf
    inf = nu_rectangle_mass(-math.inf, -4.0, 4.0, math.inf, ALPHA, C1)
    assert inf == pytest.approx(C1 * 8.0 ** (-ALPHA) / (ALPHA * (ALPHA + 1)), rel=1e-14)
    with pytest.raises(ValueError):
        nu_rectangle_mass(0.0, 1.0, 1.0, 2.0, ALPHA, C1)
