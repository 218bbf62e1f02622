import math

import numpy as np
import pytest
from scipy import integrate

from hillgap.errors import ConfigError, TableExtensionError
from hillgap.potential import (
    PiecewiseConstant,
    PotentialSpec,
    Sampled,
    TrigPolynomial,
    cumulative_profile,
    evaluate,
    fourier_coefficient,
    fourier_coefficients,
    fourier_table,
    harmonic_decay,
    mathieu,
    normalize_mean,
    partial_integral,
    rho,
    single_harmonic,
    square,
    table_from_coefficients,
    trig_potential,
    zero,
)


def quad_coefficient(q, k):
    a = q.period
    pts = list(np.linspace(0, a, 9))
    re = integrate.quad(lambda x: q(np.array([x]))[0] * math.cos(2 * k * math.pi * x / a), 0, a, points=pts, limit=400)[0]
    im = integrate.quad(lambda x: -q(np.array([x]))[0] * math.sin(2 * k * math.pi * x / a), 0, a, points=pts, limit=400)[0]
    return complex(re, im) / a


def test_constant_potential_normalizes_to_zero_with_shift():
    q = PotentialSpec(2.0, PiecewiseConstant((0.0, 2.0), (5.0,)))
    qn = normalize_mean(q)
    assert qn.shift == pytest.approx(5.0)
    assert abs(fourier_coefficient(qn, 0)) < 1e-12
    assert np.allclose(qn(np.linspace(0, 2, 7)), 0.0)


def test_mean_free_potentials_are_unchanged():
    for q in (single_harmonic(1.0, 1), square(1.0)):
        qn = normalize_mean(q)
        assert qn.shift == 0.0
        for k in (1, 2, 3):
            assert fourier_coefficient(qn, k) == fourier_coefficient(q, k)


def test_trig_mean_is_removed_and_recorded():
    q = PotentialSpec(1.0, TrigPolynomial(((0, 1.5), (1, 0.5), (-1, 0.5))))
    qn = normalize_mean(q)
    assert qn.shift == pytest.approx(1.5)
    assert fourier_coefficient(qn, 0) == 0
    assert fourier_coefficient(qn, 1) == 0.5


def test_fourier_coefficient_examples():
    assert fourier_coefficient(zero(), 5) == 0
    q = single_harmonic(0.3, 2)
    assert fourier_coefficient(q, 2) == pytest.approx(0.3)
    assert fourier_coefficient(q, -2) == pytest.approx(0.3)
    assert fourier_coefficient(q, 1) == 0
    assert fourier_coefficient(square(1.0), 1) == pytest.approx(-2j / math.pi, abs=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3, 7, -5])
def test_square_wave_coefficients_match_quadrature(k):
    q = square(1.3, period=2.5)
    assert abs(fourier_coefficient(q, k) - quad_coefficient(q, k)) < 1e-10


@pytest.mark.parametrize("k", [1, 4, -3, 11])
def test_sampled_coefficients_match_quadrature_of_interpolant(k):
    rng = np.random.default_rng(4)
    vals = rng.normal(size=13)
    vals[-1] = vals[0]
    q = PotentialSpec(1.7, Sampled(tuple(vals)))
    assert abs(fourier_coefficient(q, k) - quad_coefficient(q, k)) < 1e-10


def test_piecewise_coefficients_match_quadrature():
    q = PotentialSpec(3.0, PiecewiseConstant((0.0, 0.4, 1.9, 3.0), (2.0, -1.0, 0.5)))
    for k in (1, 2, 5):
        assert abs(fourier_coefficient(q, k) - quad_coefficient(q, k)) < 1e-10


def test_conjugate_symmetry_for_real_potentials():
    qs = [square(0.7), harmonic_decay(1.0, 8), PotentialSpec(1.0, Sampled((0.0, 1.0, -2.0, 0.5, 0.0)))]
    for q in qs:
        for k in range(1, 12):
            assert abs(fourier_coefficient(q, -k) - fourier_coefficient(q, k).conjugate()) < 1e-12


def test_parseval_for_trig_polynomial():
    q = PotentialSpec(2.0, TrigPolynomial(((1, 0.5 + 0.2j), (-1, 0.5 - 0.2j), (3, -0.7), (-3, -0.7))))
    ks = np.arange(-5, 6)
    lhs = np.sum(np.abs(fourier_coefficients(q, ks)) ** 2)
    rhs = integrate.quad(lambda x: q(np.array([x]))[0] ** 2, 0, 2.0, limit=200)[0] / 2.0
    assert abs(lhs - rhs) < 1e-10


def test_real_valued_trig_polynomial_requires_conjugate_pairs():
    with pytest.raises(ConfigError):
        TrigPolynomial(((1, 1.0),))
    TrigPolynomial(((1, 1.0),), real_valued=False)


def test_piecewise_validation():
    with pytest.raises(ConfigError):
        PiecewiseConstant((0.0, 0.5, 0.4), (1.0, 2.0))
    with pytest.raises(ConfigError):
        PotentialSpec(2.0, PiecewiseConstant((0.0, 1.0), (1.0,)))
    with pytest.raises(ConfigError):
        PotentialSpec(-1.0, TrigPolynomial(()))


def test_evaluate_square_and_sampled():
    q = square(2.0, period=1.0)
    assert np.allclose(evaluate(q, [0.1, 0.6]), [2.0, -2.0])
    s = PotentialSpec(1.0, Sampled((0.0, 1.0, 0.0)))
    assert np.allclose(s([0.25, 0.5, 0.75]), [0.5, 1.0, 0.5])


@pytest.mark.parametrize("k", [0, 3, -2])
def test_partial_integral_matches_quadrature(k):
    q = PotentialSpec(1.0, PiecewiseConstant((0.0, 0.3, 1.0), (1.0, -0.5)))
    for x in (0.2, 0.3, 0.77, 1.0):
        re = integrate.quad(lambda t: q(np.array([t]))[0] * math.cos(2 * k * math.pi * t), 0, x, points=[0.3], limit=200)[0]
        im = integrate.quad(lambda t: -q(np.array([t]))[0] * math.sin(2 * k * math.pi * t), 0, x, points=[0.3], limit=200)[0]
        assert abs(partial_integral(q, k, x) - complex(re, im)) < 1e-11


def test_fourier_table_basics():
    q = PotentialSpec(1.0, TrigPolynomial(((0, 3.0), (2, 0.5), (-2, 0.5))))
    t = fourier_table(q, 4)
    assert t.c(0) == 0
    assert t.c(2) == 0.5
    assert t.sup_coeff == 0.5
    assert t.exact and t.c(9) == 0
    s = fourier_table(square(1.0), 4)
    assert not s.exact
    with pytest.raises(TableExtensionError):
        s.c(5)
    with pytest.raises(TableExtensionError):
        s.take([3, 6], strict=True)
    assert t.scaled(2.0).c(2) == 1.0


def test_table_roundtrip_through_trig_potential():
    t = table_from_coefficients({1: 0.25, -1: 0.25, 3: -1.0, -3: -1.0}, period=2.0)
    q = trig_potential(t)
    assert q.period == 2.0
    assert fourier_coefficient(q, 3) == -1.0


def test_rho_examples():
    assert rho(zero(), 3).value == 0.0
    m = 2
    N = 2 * m + 2
    r = rho(single_harmonic(1.0, N), m)
    # int_0^x (1 + e^{-i 4N pi t}) dt has modulus 1 at x = a = 1
    assert r.value == pytest.approx(1.0, abs=1e-9)
    for K in (1, 3, 9):
        r = rho(single_harmonic(1.0, K), m).value
        bound = 1 / (math.pi * abs(K - N)) + 1 / (math.pi * abs(K + N))
        assert r <= bound + 1e-9


def test_rho_matches_dense_grid_supremum():
    q = square(1.0)
    for m in (3, 11):
        N = 2 * m + 2
        xs = np.linspace(0, 1, 200001)
        dense = np.abs(partial_integral(q, N, xs)).max()
        assert rho(q, m).value == pytest.approx(dense, rel=1e-8)


def test_rho_validation():
    with pytest.raises(ValueError):
        rho(square(1.0), -1)
    with pytest.raises(ValueError):
        rho(square(1.0), 1, grid_points=16)


def test_riemann_lebesgue_decay_and_lower_bound():
    for q in (square(1.0), harmonic_decay(1.0, 64), mathieu(1.0, period=1.0)):
        vals = np.array([rho(q, m).value for m in range(2, 41)])
        assert vals[-1] < vals[0]
        smooth = np.convolve(vals, np.ones(3) / 3, mode="valid")
        assert np.all(np.diff(smooth) <= 1e-12)
        ms = np.arange(5, 41)
        assert np.min(ms * vals[3:]) > 0.01


def test_cumulative_profile_examples():
    Q = cumulative_profile(zero(1.0), "Q")
    assert np.allclose(Q(np.linspace(0, 1, 5)), 0) and Q.mean == 0
    q = single_harmonic(1.0, 1)
    Q = cumulative_profile(q, "Q")
    xs = np.linspace(0, 1, 9)
    assert np.allclose(Q(xs), np.sin(2 * math.pi * xs) / math.pi, atol=1e-14)
    assert abs(Q.mean) < 1e-14


def test_g_profile_coefficient_and_endpoints():
    q = single_harmonic(1.0, 1)
    G = cumulative_profile(q, "G+", m=1)
    assert abs(G(0.0)) < 1e-14 and abs(G(1.0)) < 1e-14
    # coefficient at index -3 of G+ - G+_0: c_1 / (i 2 pi (-3))
    coef = integrate.quad(lambda x: (G.centered(x) * np.exp(2j * math.pi * 3 * x)).real, 0, 1)[0]
    coef += 1j * integrate.quad(lambda x: (G.centered(x) * np.exp(2j * math.pi * 3 * x)).imag, 0, 1)[0]
    assert abs(coef - 1.0 / (2j * math.pi * -3)) < 1e-12


def test_profile_mean_matches_quadrature_for_step_potential():
    q = square(1.0, period=2.0)
    for kind in ("Q", "G+", "G-"):
        P = cumulative_profile(q, kind, m=2)
        re = integrate.quad(lambda x: P(x).real, 0, 2, points=[1.0])[0] / 2
        im = integrate.quad(lambda x: P(x).imag, 0, 2, points=[1.0])[0] / 2
        assert abs(P.mean - complex(re, im)) < 1e-10
        assert abs(P(0.0)) < 1e-14 and abs(P(2.0)) < 1e-12
    with pytest.raises(ValueError):
        cumulative_profile(q, "G+")
    with pytest.raises(ValueError):
        cumulative_profile(q, "R")
