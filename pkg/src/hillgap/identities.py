"""Sum-versus-integral identities for trigonometric-polynomial potentials.

Notation: theta_k = e^{i 2 k pi x / a}, <f> = a^{-1} int_0^a f, N = 2m+2 and
the mean-free profiles

    P = Q - Q_0     with coefficients c_j / (i 2 pi j)
    G = G+ - G+_0   with coefficients c_{j+N} / (i 2 pi j)
    H = G- - G-_0   with coefficients c_{j-N} / (i 2 pi j)

Every product of finite exponential sums is integrated exactly by discrete
convolution, so both sides are exact up to rounding.

Each double sum is evaluated on its natural index set (only the indices
that make a denominator vanish are removed), which is where the identity
holds. The sum over the narrower set k, p not in {0, N} is reported as
``literal_sum`` and the difference as ``boundary``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedFormError
from .potential import FourierTable

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class IdentityResult:
    name: str
    sum_value: complex
    integral_value: complex
    abs_diff: float
    literal_sum: complex
    boundary: complex
    m: int = 0


def _result(name, s, integral, literal, m):
    s, integral, literal = complex(s), complex(integral), complex(literal)
    return IdentityResult(name, s, integral, abs(s - integral), literal, literal - s, m)


class _Series:
    """Finite exponential sum sum_k coef[k - lo] theta_k."""

    def __init__(self, lo: int, coef: np.ndarray):
        self.lo = lo
        self.coef = np.asarray(coef, dtype=complex)

    def __mul__(self, other: "_Series") -> "_Series":
        return _Series(self.lo + other.lo, np.convolve(self.coef, other.coef))

    def mean(self, shift: int = 0) -> complex:
        """<f theta_shift>, i.e. the coefficient at index -shift."""
        i = -shift - self.lo
        return complex(self.coef[i]) if 0 <= i < self.coef.size else 0j


def _check(coeffs: FourierTable):
    if not coeffs.exact:
        raise UnsupportedFormError("identities need an exact (trig polynomial) table")
    if not np.all(np.isfinite(coeffs.coeffs)):
        raise UnsupportedFormError("table has non-finite coefficients")


def _q(coeffs):
    K = coeffs.half_width
    return _Series(-K, coeffs.coeffs.copy())


def _profile(coeffs, shift):
    """Mean-free antiderivative-type profile with coefficients c_{j+shift}/(i 2 pi j)."""
    K = coeffs.half_width
    js = np.arange(-K - shift, K - shift + 1)
    c = coeffs.take(js + shift)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(js != 0, c / (TWO_PI_I * np.where(js == 0, 1, js)), 0)
    return _Series(int(js[0]), vals)


def profiles(coeffs: FourierTable, m: int):
    """(q, P, G, H) as exact finite series for band m."""
    N = 2 * m + 2
    return _q(coeffs), _profile(coeffs, 0), _profile(coeffs, N), _profile(coeffs, -N)


def _grid(coeffs):
    K = coeffs.half_width
    ks = np.arange(-K, K + 1)
    return ks, coeffs.coeffs


def _masked_sum(terms, mask):
    return complex(np.sum(terms[mask]))


def check_b_identity(coeffs: FourierTable, m: int, a: float | None = None) -> IdentityResult:
    """(a^2/4pi^2) sum_{k != 0,N} c_k c_{N-k} / (k (N-k)) = -a^2 <P^2 theta_{-N}>."""
    _check(coeffs)
    a = coeffs.period if a is None else a
    N = 2 * m + 2
    ks, c = _grid(coeffs)
    keep = (ks != 0) & (ks != N)
    k = ks[keep]
    s = a**2 / (4 * math.pi**2) * np.sum(c[keep] * coeffs.take(N - k) / (k * (N - k)))
    _, P, _, _ = profiles(coeffs, m)
    integral = -(a**2) * (P * P).mean(-N)
    return _result("b_I0", s, integral, s, m)


def check_a_identity(coeffs: FourierTable, m: int, a: float | None = None) -> IdentityResult:
    """(a^2/2pi^2) sum_{k>0, k != N} c_k c_{-k} / ((N+k)(N-k)) = -a^2 <G^2 theta_{2N}>.

    ``literal_sum`` is the one-sided form (a^2/4pi^2) sum_{k != 0,N} c_k c_{-k} / (k (N-k)),
    which carries the unpaired k = -N term.
    """
    _check(coeffs)
    a = coeffs.period if a is None else a
    N = 2 * m + 2
    ks, c = _grid(coeffs)
    cm = coeffs.take(-ks)
    pos = (ks > 0) & (ks != N)
    k = ks[pos]
    s = a**2 / (2 * math.pi**2) * np.sum(c[pos] * cm[pos] / ((N + k) * (N - k)))
    one = (ks != 0) & (ks != N)
    k1 = ks[one]
    literal = a**2 / (4 * math.pi**2) * np.sum(c[one] * cm[one] / (k1 * (N - k1)))
    _, _, G, _ = profiles(coeffs, m)
    integral = -(a**2) * (G * G).mean(2 * N)
    return _result("a_d3", s, integral, literal, m)


def _pairs(coeffs, N, kind):
    """Index grids and numerators of the S-type (c_k c_{p-k} c_{-p}) or
    I-type (c_k1 c_k2 c_{N-k1-k2}) double sums."""
    ks, c = _grid(coeffs)
    k1 = ks[:, None]
    k2 = ks[None, :]
    if kind == "S":
        num = c[:, None] * coeffs.take(k2 - k1) * coeffs.take(-k2)
    else:
        num = c[:, None] * c[None, :] * coeffs.take(N - k1 - k2)
    return k1, k2, num


def _safe(x):
    return np.where(x == 0, 1, x)


def check_SI_suite(coeffs: FourierTable, m: int, a: float | None = None) -> list[IdentityResult]:
    """S_1..S_4, I_1..I_3 against their integral forms, plus the two assemblies.

    S sums run over (k, p) with numerator c_k c_{p-k} c_{-p}; I sums over
    (k1, k2) with numerator c_k1 c_k2 c_{N-k1-k2}. The assembly rows
    ``S_equal1`` and ``I_equal2`` compare the undecomposed sums with
    N^-2 sum S_j and N^-2 (I_1 + 2 I_2 + I_3), all on the literal index set.
    """
    _check(coeffs)
    N = 2 * m + 2
    q, P, G, H = profiles(coeffs, m)
    f = 4 * math.pi**2
    out = []

    k, p, num = _pairs(coeffs, N, "S")
    lit = (k != 0) & (k != N) & (p != 0) & (p != N)
    specs = [
        ("S1", 1 / (_safe(k) * _safe(p)), (k != 0) & (p != 0), f * (P * P * q).mean()),
        ("S2", 1 / (_safe(p) * _safe(N - k)), (p != 0) & (k != N), -f * (P * G * q).mean(N)),
        ("S3", 1 / (_safe(k) * _safe(N - p)), (k != 0) & (p != N), -f * (P * H * q).mean(-N)),
        ("S4", 1 / (_safe(N - k) * _safe(N - p)), (k != N) & (p != N), f * (G * H * q).mean()),
    ]
    lit_total = 0j
    for name, w, nat, integral in specs:
        terms = num * w
        literal = _masked_sum(terms, lit)
        lit_total += literal
        out.append(_result(name, _masked_sum(terms, nat), integral, literal, m))
    direct = _masked_sum(num / (_safe(k) * _safe(N - k) * _safe(p) * _safe(N - p)), lit)
    out.append(_result("S_equal1", direct, lit_total / N**2, direct, m))

    k1, k2, num = _pairs(coeffs, N, "I")
    lit = (k1 != 0) & (k1 != N) & (k2 != 0) & (k2 != N)
    specs = [
        ("I1", 1 / (_safe(k1) * _safe(k2)), (k1 != 0) & (k2 != 0), -f * (P * P * q).mean(-N)),
        ("I2", 1 / (_safe(k2) * _safe(N - k1)), (k2 != 0) & (k1 != N), f * (P * G * q).mean()),
        ("I3", 1 / (_safe(N - k1) * _safe(N - k2)), (k1 != N) & (k2 != N), -f * (G * G * q).mean(N)),
    ]
    lits = []
    for name, w, nat, integral in specs:
        terms = num * w
        literal = _masked_sum(terms, lit)
        lits.append(literal)
        out.append(_result(name, _masked_sum(terms, nat), integral, literal, m))
    direct = _masked_sum(num / (_safe(k1) * _safe(N - k1) * _safe(k2) * _safe(N - k2)), lit)
    out.append(_result("I_equal2", direct, (lits[0] + 2 * lits[1] + lits[2]) / N**2, direct, m))
    return out


def check_all(coeffs: FourierTable, m: int, a: float | None = None) -> list[IdentityResult]:
    """All nine identities followed by the two assembly checks."""
    res = [check_a_identity(coeffs, m, a), check_b_identity(coeffs, m, a)]
    return res + check_SI_suite(coeffs, m, a)


def S_I_values(coeffs: FourierTable, m: int) -> tuple[complex, complex]:
    """The undecomposed S(m) and I(m) double sums (literal index set)."""
    res = {r.name: r for r in check_SI_suite(coeffs, m)}
    return res["S_equal1"].sum_value, res["I_equal2"].sum_value
