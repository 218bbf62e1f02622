"""Potentials q on [0, a] and their Fourier-side quantities.

Conventions used throughout the package:

* theta_k(x) = exp(i 2 k pi x / a) is the orthonormal exponential basis for the
  inner product (f, g) = a^{-1} int_0^a f conj(g) dx.
* c_k = (q, theta_k) = a^{-1} int_0^a q(x) exp(-i 2 k pi x / a) dx.
* A band with frequency N (N = 2m+2 periodic, N = 2m+1 antiperiodic) sits at
  N^2 pi^2 / a^2 and its two principal modes are coupled by c_N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError, TableExtensionError, UnsupportedFormError

_CONJ_TOL = 1e-12


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class TrigPolynomial:
    """Finite exponential sum q = sum_k c_k theta_k."""

    harmonics: tuple[tuple[int, complex], ...]
    real_valued: bool = True

    def __post_init__(self):
        merged: dict[int, complex] = {}
        for k, ck in self.harmonics:
            if int(k) != k:
                raise ConfigError(f"harmonic index {k!r} is not an integer")
            merged[int(k)] = merged.get(int(k), 0j) + complex(ck)
        merged = {k: v for k, v in merged.items() if v != 0}
        if self.real_valued:
            for k, v in merged.items():
                partner = merged.get(-k, 0j)
                if abs(partner - v.conjugate()) > _CONJ_TOL * max(1.0, abs(v)):
                    raise ConfigError(
                        f"real-valued trig polynomial needs c_{-k} = conj(c_{k}); "
                        f"got c_{k}={v}, c_{-k}={partner}"
                    )
        object.__setattr__(self, "harmonics", tuple(sorted(merged.items())))

    @property
    def degree(self) -> int:
        return max((abs(k) for k, _ in self.harmonics), default=0)


@dataclass(frozen=True)
class PiecewiseConstant:
    """Step potential; ``values[j]`` holds on [breakpoints[j], breakpoints[j+1])."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(bp) < 2 or len(vals) != len(bp) - 1:
            raise ConfigError("piecewise potential needs len(values) == len(breakpoints) - 1 >= 1")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ConfigError("piecewise breakpoints must be strictly increasing")
        if bp[0] != 0.0:
            raise ConfigError("piecewise breakpoints must start at 0")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Sampled:
    """Values q(j a / n), j = 0..n, joined by straight lines."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ConfigError("sampled potential needs at least two samples")
        object.__setattr__(self, "values", vals)


Form = Union[TrigPolynomial, PiecewiseConstant, Sampled]


@dataclass(frozen=True)
class PotentialSpec:
    """A real potential of period ``period``.

    ``shift`` accumulates the constants removed by :func:`normalize_mean`;
    eigenvalues of the original operator are those of the stored one plus
    ``shift``.
    """

    period: float
    form: Form
    shift: float = 0.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ConfigError(f"period must be positive, got {self.period}")
        if isinstance(self.form, PiecewiseConstant):
            end = self.form.breakpoints[-1]
            if abs(end - self.period) > 1e-12 * self.period:
                raise ConfigError(
                    f"last breakpoint {end} must equal the period {self.period}"
                )
        elif not isinstance(self.form, (TrigPolynomial, Sampled)):
            raise UnsupportedFormError(f"unknown potential form {type(self.form).__name__}")

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def is_zero(self) -> bool:
        f = self.form
        if isinstance(f, TrigPolynomial):
            return not f.harmonics
        return all(v == 0.0 for v in f.values)


# ---------------------------------------------------------------------------
# named families


def zero(period: float = math.pi) -> PotentialSpec:
    return PotentialSpec(period, TrigPolynomial(()), name="zero")


def single_harmonic(gamma: float, N: int, period: float = 1.0) -> PotentialSpec:
    """q = gamma (theta_N + theta_{-N}) = 2 gamma cos(2 pi N x / a)."""
    return PotentialSpec(
        period, TrigPolynomial(((N, gamma), (-N, gamma))), name=f"single_harmonic({gamma},{N})"
    )


def mathieu(gamma: float = 1.0, period: float = math.pi) -> PotentialSpec:
    """q = 2 gamma cos(2 x) for the default period pi (c_{+-1} = gamma)."""
    q = single_harmonic(gamma, 1, period)
    return replace(q, name=f"mathieu({gamma})")


def square(gamma: float = 1.0, period: float = 1.0) -> PotentialSpec:
    """gamma on [0, a/2), -gamma on [a/2, a)."""
    return PotentialSpec(
        period,
        PiecewiseConstant((0.0, period / 2, period), (gamma, -gamma)),
        name=f"square({gamma})",
    )


def harmonic_decay(alpha: float = 1.0, K: int = 64, period: float = 1.0) -> PotentialSpec:
    """Cosine series with c_k = |k|^{-alpha} for 1 <= |k| <= K."""
    harmonics = []
    for k in range(1, K + 1):
        ck = float(k) ** (-alpha)
        harmonics += [(k, ck), (-k, ck)]
    return PotentialSpec(period, TrigPolynomial(tuple(harmonics)), name=f"harmonic_decay({alpha},{K})")


# ---------------------------------------------------------------------------
# evaluation and segment helpers


def _segments(q: PotentialSpec):
    """(nodes, left values, right values) of the piecewise-linear representation."""
    f = q.form
    if isinstance(f, PiecewiseConstant):
        nodes = np.array(f.breakpoints)
        nodes[-1] = q.period
        v = np.array(f.values)
        return nodes, v, v.copy()
    if isinstance(f, Sampled):
        n = len(f.values) - 1
        nodes = np.linspace(0.0, q.period, n + 1)
        v = np.array(f.values)
        return nodes, v[:-1].copy(), v[1:].copy()
    raise UnsupportedFormError("trig polynomials have no segment representation")


def breakpoints(q: PotentialSpec) -> np.ndarray:
    """Interior points where q (or its derivative) may jump."""
    if isinstance(q.form, TrigPolynomial):
        return np.empty(0)
    nodes, _, _ = _segments(q)
    return nodes[1:-1]


def evaluate(q: PotentialSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    a = q.period
    f = q.form
    if isinstance(f, TrigPolynomial):
        if not f.harmonics:
            return np.zeros_like(x)
        ks = np.array([k for k, _ in f.harmonics], dtype=float)
        cs = np.array([c for _, c in f.harmonics])
        val = np.exp(1j * 2 * np.pi * np.multiply.outer(x, ks) / a) @ cs
        return val.real if f.real_valued else val
    xr = np.mod(x, a)
    xr = np.where((x == a), a, xr)
    if isinstance(f, PiecewiseConstant):
        nodes, v, _ = _segments(q)
        idx = np.clip(np.searchsorted(nodes, xr, side="right") - 1, 0, len(v) - 1)
        return v[idx]
    nodes = np.linspace(0.0, a, len(f.values))
    return np.interp(xr, nodes, np.array(f.values))


def _phi01(theta):
    """(int_0^1 e^{-i theta s} ds, int_0^1 s e^{-i theta s} ds), stable near theta=0."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 0.1
    z = -1j * theta
    e0 = np.zeros(theta.shape, dtype=complex)
    e1 = np.zeros(theta.shape, dtype=complex)
    # Taylor branch: sum z^n/(n+1)!, sum z^n/(n! (n+2))
    term = np.ones(theta.shape, dtype=complex)
    for n in range(14):
        e0 += term / (n + 1)
        e1 += term / (n + 2)
        term = term * z / (n + 1)
    th = np.where(small, 1.0, theta)
    ex = np.exp(-1j * th)
    big0 = (1 - ex) / (1j * th)
    big1 = 1j * ex / th - (1 - ex) / th**2
    return np.where(small, e0, big0), np.where(small, e1, big1)


def _linear_exp_integral(x0, x1, y0, y1, omega):
    """int_{x0}^{x1} L(t) e^{-i omega t} dt for the line L through (x0,y0), (x1,y1)."""
    h = x1 - x0
    e0, e1 = _phi01(omega * h)
    return h * np.exp(-1j * omega * x0) * (y0 * e0 + (y1 - y0) * e1)


# ---------------------------------------------------------------------------
# operations


def normalize_mean(q: PotentialSpec) -> PotentialSpec:
    """Remove the mean of ``q``; the removed constant is added to ``shift``."""
    c0 = fourier_coefficient(q, 0).real
    f = q.form
    if isinstance(f, TrigPolynomial):
        form = TrigPolynomial(tuple((k, c) for k, c in f.harmonics if k != 0), f.real_valued)
    elif c0 == 0.0:
        return q
    elif isinstance(f, PiecewiseConstant):
        form = PiecewiseConstant(f.breakpoints, tuple(v - c0 for v in f.values))
    else:
        form = Sampled(tuple(v - c0 for v in f.values))
    return replace(q, form=form, shift=q.shift + c0)


def fourier_coefficients(q: PotentialSpec, ks) -> np.ndarray:
    """Vectorised c_k for integer array ``ks`` (closed forms for every form)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    a = q.period
    f = q.form
    if isinstance(f, TrigPolynomial):
        table = dict(f.harmonics)
        return np.array([table.get(int(k), 0j) for k in ks], dtype=complex)
    nodes, y0, y1 = _segments(q)
    omega = 2 * np.pi * ks[:, None] / a
    seg = _linear_exp_integral(nodes[None, :-1], nodes[None, 1:], y0[None, :], y1[None, :], omega)
    return seg.sum(axis=1) / a


def fourier_coefficient(q: PotentialSpec, k: int) -> complex:
    """c_k = a^{-1} int_0^a q(x) e^{-i 2 k pi x / a} dx.

    Exact for all supported forms: trig polynomials by lookup, piecewise
    constant and sampled (piecewise-linear) potentials by per-segment
    antiderivatives.
    """
    return complex(fourier_coefficients(q, [k])[0])


def partial_integral(q: PotentialSpec, k: int, x) -> np.ndarray:
    """F(x) = int_0^x q(t) e^{-i 2 k pi t / a} dt for x in [0, a] (closed form)."""
    x = np.asarray(x, dtype=float)
    a = q.period
    f = q.form
    if isinstance(f, TrigPolynomial):
        if not f.harmonics:
            return np.zeros(x.shape, dtype=complex)
        js = np.array([j for j, _ in f.harmonics])
        cs = np.array([c for _, c in f.harmonics])
        d = js - k
        omega = 2 * np.pi * d / a
        safe = np.where(d == 0, 1.0, omega)
        xx = x[..., None]
        terms = np.where(d == 0, xx + 0j, (np.exp(1j * safe * xx) - 1) / (1j * safe))
        return terms @ cs
    nodes, y0, y1 = _segments(q)
    omega = 2 * np.pi * k / a
    full = _linear_exp_integral(nodes[:-1], nodes[1:], y0, y1, omega)
    cum = np.concatenate(([0j], np.cumsum(full)))
    j = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(y0) - 1)
    xl = nodes[j]
    frac = (x - xl) / (nodes[j + 1] - xl)
    yx = y0[j] + (y1[j] - y0[j]) * frac
    return cum[j] + _linear_exp_integral(xl, x, y0[j], yx, omega)


# ---------------------------------------------------------------------------
# Fourier table


@dataclass(frozen=True, eq=False)
class FourierTable:
    """c_k for |k| <= half_width with c_0 = 0.

    ``exact`` marks tables of trig polynomials whose degree fits inside the
    table, so that every coefficient beyond the table is known to vanish.
    """

    half_width: int
    coeffs: np.ndarray
    sup_coeff: float
    period: float
    exact: bool = False

    def c(self, k: int) -> complex:
        K = self.half_width
        if abs(k) <= K:
            return complex(self.coeffs[k + K])
        if self.exact:
            return 0j
        raise TableExtensionError(f"c_{k} requested beyond table half-width {K}")

    def take(self, ks, strict: bool = False) -> np.ndarray:
        """Vectorised lookup; out-of-table entries are 0 (or raise when ``strict``
        and the table is not exact)."""
        ks = np.asarray(ks, dtype=int)
        K = self.half_width
        inside = np.abs(ks) <= K
        if strict and not self.exact and not inside.all():
            raise TableExtensionError(
                f"coefficients up to |k|={int(np.abs(ks).max())} needed, table half-width is {K}"
            )
        out = np.zeros(ks.shape, dtype=complex)
        out[inside] = self.coeffs[ks[inside] + K]
        return out

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def scaled(self, s: float) -> "FourierTable":
        return FourierTable(self.half_width, self.coeffs * s, self.sup_coeff * abs(s), self.period, self.exact)


def fourier_table(q: PotentialSpec, K: int) -> FourierTable:
    if K < 1:
        raise ConfigError("table half-width must be >= 1")
    ks = np.arange(-K, K + 1)
    coeffs = fourier_coefficients(q, ks)
    coeffs[K] = 0.0
    exact = isinstance(q.form, TrigPolynomial) and q.form.degree <= K
    return FourierTable(K, coeffs, float(np.abs(coeffs).max()), q.period, exact)


def table_from_coefficients(coeffs: dict[int, complex], period: float = 1.0) -> FourierTable:
    """Exact table for a finite coefficient map (c_0 is dropped)."""
    K = max([abs(k) for k in coeffs] + [1])
    arr = np.zeros(2 * K + 1, dtype=complex)
    for k, v in coeffs.items():
        if k != 0:
            arr[k + K] = v
    return FourierTable(K, arr, float(np.abs(arr).max()), period, True)


def trig_potential(table: FourierTable, real_valued: bool = True) -> PotentialSpec:
    """Inverse of :func:`fourier_table` for exact tables."""
    harm = tuple((int(k), complex(c)) for k, c in zip(table.ks, table.coeffs) if c != 0)
    return PotentialSpec(table.period, TrigPolynomial(harm, real_valued))


# ---------------------------------------------------------------------------
# rho(m)


@dataclass(frozen=True)
class RhoValue:
    m: int
    N: int
    value: float
    argmax_x: float


def rho(q: PotentialSpec, m: int, grid_points: int = 1024, N: int | None = None) -> RhoValue:
    """sup_{0<=x<=a} |int_0^x q(t) e^{-+ i 2 N pi t / a} dt| with N = 2m+2 by default.

    Both signs of the exponent are evaluated and the larger supremum is kept.
    The supremum is located on a uniform grid and refined by a bounded
    golden-section/parabolic search in the cells next to the grid maximum.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    if N is None:
        N = 2 * m + 2
    a = q.period
    xs = np.linspace(0.0, a, grid_points + 1)
    best = (0.0, 0.0)
    for sign in (1, -1):
        mod = np.abs(partial_integral(q, sign * N, xs))
        i = int(np.argmax(mod))
        val, xbest = float(mod[i]), float(xs[i])
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, grid_points)]
        if val > 0 and hi > lo:
            res = minimize_scalar(
                lambda t: -abs(complex(partial_integral(q, sign * N, np.array([t]))[0])),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-12 * a},
            )
            if -res.fun > val:
                val, xbest = float(-res.fun), float(res.x)
        if val > best[0]:
            best = (val, xbest)
    return RhoValue(m, N, best[0], best[1])


# ---------------------------------------------------------------------------
# cumulative profiles Q, G+, G-


@dataclass(frozen=True, eq=False)
class CumulativeProfile:
    kind: str
    m: int | None
    evaluator: Callable[[np.ndarray], np.ndarray]
    mean: complex

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def centered(self, x):
        return self.evaluator(np.asarray(x, dtype=float)) - self.mean


def cumulative_profile(q: PotentialSpec, kind: str, m: int | None = None, N: int | None = None) -> CumulativeProfile:
    """Q(x) = a^{-1} int_0^x q, or G+-(x, m) = a^{-1} int_0^x q e^{-+i2N pi t/a} dt - a^{-1} c_{+-N} x.

    ``q`` is expected to be mean-free. ``kind`` is one of ``"Q"``, ``"G+"``,
    ``"G-"``.
    """
    a = q.period
    if kind == "Q":
        k = 0
    elif kind in ("G+", "G-"):
        if N is None:
            if m is None:
                raise ValueError("G profiles need m (or N)")
            N = 2 * m + 2
        k = N if kind == "G+" else -N
    else:
        raise ValueError(f"unknown profile kind {kind!r}")
    ck = fourier_coefficient(q, k)

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        return partial_integral(q, k, x) / a - ck * x / a

    if isinstance(q.form, TrigPolynomial):
        # mean of (theta_d - 1)/(i 2 pi d) over a period is -1/(i 2 pi d)
        mean = 0j
        for j, cj in q.form.harmonics:
            if j != k:
                mean -= cj / (1j * 2 * np.pi * (j - k))
    else:
        from .kernels import quad

        pts = list(breakpoints(q))
        re = quad(lambda t: evaluator(np.array([t]))[0].real, 0.0, a, points=pts)
        im = quad(lambda t: evaluator(np.array([t]))[0].imag, 0.0, a, points=pts)
        mean = complex(re, im) / a
    return CumulativeProfile(kind, m, evaluator, complex(mean))
