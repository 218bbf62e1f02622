"""Numerical primitives shared by the other modules.

The eigensolver, root finder, quadrature and regression are thin contract
wrappers around LAPACK / SciPy / NumPy. The ODE integrator is a jitted
Dormand-Prince 5(4) pair because shooting calls it thousands of times.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import integrate as _integrate
from scipy.optimize import brentq

from .errors import BracketError, EigenError, QuadratureError, StepSizeError, UnsupportedFormError
from .potential import PotentialSpec, TrigPolynomial, _segments

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# Hermitian eigenproblem


def hermitian_eigen(A: np.ndarray, vectors: bool = True):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Returns ``(w, V)`` with ``A @ V[:, i] = w[i] * V[:, i]``; with
    ``vectors=False`` only ``w`` is returned.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    scale = float(np.abs(A).max()) if A.size else 0.0
    if np.abs(A - A.conj().T).max() > 1e-12 * max(scale, 1e-300):
        raise ValueError("matrix is not Hermitian")
    try:
        if vectors:
            return np.linalg.eigh(A)
        return np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        fingerprint = {
            "n": A.shape[0],
            "frobenius": float(np.linalg.norm(A)),
            "trace": complex(np.trace(A)),
        }
        raise EigenError(f"eigensolver did not converge: {exc}", fingerprint) from exc


# ---------------------------------------------------------------------------
# ODE integration


@dataclass(frozen=True)
class OdeState:
    x: float
    y: float
    yp: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.yp)):
            raise ValueError(f"non-finite ODE state {self}")


# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@njit(cache=True)
def _qval(x, kind, ks, cr, ci, w, sx0, sy0, sslope):
    if kind == 0:
        s = 0.0
        for i in range(ks.size):
            t = w * ks[i] * x
            s += cr[i] * math.cos(t) - ci[i] * math.sin(t)
        return s
    return sy0 + sslope * (x - sx0)


@njit(cache=True)
def _rhs(x, y, out, lam, kind, ks, cr, ci, w, sx0, sy0, sslope):
    f = _qval(x, kind, ks, cr, ci, w, sx0, sy0, sslope) - lam
    for i in range(0, y.size, 2):
        out[i] = y[i + 1]
        out[i + 1] = f * y[i]


@njit(cache=True)
def _dopri(y, lam, x0, x1, tol, kind, ks, cr, ci, a, nodes, v0, v1, hmin):
    """Advance y (pairs of (y, y')) from x0 to x1; returns (y, status, steps).

    status 0 = ok, 1 = step underflow, 2 = step budget exhausted.
    """
    n = y.size
    y = y.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    yt = np.empty(n)
    ynew = np.empty(n)
    w = 2.0 * math.pi / a
    h = min(x1 - x0, 0.1 / math.sqrt(1.0 + abs(lam)))
    steps = 0
    nseg = nodes.size - 1
    for j in range(nseg):
        xs = max(x0, nodes[j])
        xe = min(x1, nodes[j + 1])
        if xe <= xs:
            continue
        sx0 = nodes[j]
        sy0 = v0[j]
        sslope = (v1[j] - v0[j]) / (nodes[j + 1] - nodes[j])
        x = xs
        _rhs(x, y, k1, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
        while x < xe:
            if steps > 10000000:
                return y, 2, steps
            last = False
            if x + h >= xe or xe - (x + h) < 1e-15 * (1.0 + abs(xe)):
                hs = xe - x
                last = True
            else:
                hs = h
            for i in range(n):
                yt[i] = y[i] + hs * _A21 * k1[i]
            _rhs(x + hs / 5, yt, k2, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
            for i in range(n):
                yt[i] = y[i] + hs * (_A31 * k1[i] + _A32 * k2[i])
            _rhs(x + 3 * hs / 10, yt, k3, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
            for i in range(n):
                yt[i] = y[i] + hs * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
            _rhs(x + 4 * hs / 5, yt, k4, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
            for i in range(n):
                yt[i] = y[i] + hs * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            _rhs(x + 8 * hs / 9, yt, k5, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
            for i in range(n):
                yt[i] = y[i] + hs * (
                    _A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i]
                )
            _rhs(x + hs, yt, k6, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
            for i in range(n):
                ynew[i] = y[i] + hs * (
                    _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
                )
            _rhs(x + hs, ynew, k7, lam, kind, ks, cr, ci, w, sx0, sy0, sslope)
            err = 0.0
            for i in range(n):
                e = hs * (
                    _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
                )
                sc = tol * (1.0 + max(abs(y[i]), abs(ynew[i])))
                r = abs(e) / sc
                if r > err:
                    err = r
            steps += 1
            if err <= 1.0:
                x = xe if last else x + hs
                for i in range(n):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not last:
                    h = hs * fac
            else:
                h = hs * max(0.2, 0.9 * err ** -0.2)
                if h < hmin:
                    return y, 1, steps
    return y, 0, steps


@lru_cache(maxsize=64)
def _ode_arrays(q: PotentialSpec):
    f = q.form
    if isinstance(f, TrigPolynomial):
        if not f.real_valued:
            raise UnsupportedFormError("the shooting integrator needs a real potential")
        ks = np.array([k for k, _ in f.harmonics], dtype=float)
        cr = np.array([c.real for _, c in f.harmonics])
        ci = np.array([c.imag for _, c in f.harmonics])
        nodes = np.array([0.0, q.period])
        return 0, ks, cr, ci, nodes, np.zeros(1), np.zeros(1)
    nodes, v0, v1 = _segments(q)
    empty = np.zeros(0)
    return 1, empty, empty, empty, nodes, v0, v1


def _check_tol(tol):
    if not (1e-13 <= tol <= 1e-6):
        raise ValueError(f"ODE tolerance {tol} outside [1e-13, 1e-6]")


def _solve(q: PotentialSpec, lam: float, y0: np.ndarray, x0: float, x1: float, tol: float):
    _check_tol(tol)
    if x1 < x0:
        raise ValueError("integration runs forward only (x_end >= x)")
    kind, ks, cr, ci, nodes, v0, v1 = _ode_arrays(q)
    if kind == 0:
        # trig polynomials are smooth: a single segment covering the request
        nodes = np.array([min(x0, 0.0), max(x1, q.period)])
    # a mean-normalised potential stands for form + shift
    y, status, steps = _dopri(
        np.asarray(y0, dtype=float), float(lam) - q.shift, float(x0), float(x1), float(tol),
        kind, ks, cr, ci, float(q.period), nodes, v0, v1, 1e-14 * q.period,
    )
    if status == 1:
        raise StepSizeError(f"step size underflow integrating to x={x1} at lambda={lam}")
    if status == 2:
        raise StepSizeError(f"step budget exhausted at lambda={lam}")
    return y


def integrate_ode(q: PotentialSpec, lam: float, init: OdeState, x_end: float, tol: float = 1e-10) -> OdeState:
    """Advance y'' = (q(x) - lam) y from ``init`` to ``x_end``.

    Embedded Dormand-Prince 5(4) with local error per step held below
    ``tol * (1 + |y|)``; steps never cross a breakpoint of a piecewise
    potential. Raises :class:`StepSizeError` when the step underflows
    ``1e-14 * a``. The ``shift`` of a mean-normalised potential is part of q.
    """
    y = _solve(q, lam, np.array([init.y, init.yp]), init.x, x_end, tol)
    return OdeState(float(x_end), float(y[0]), float(y[1]))


def monodromy(q: PotentialSpec, lam: float, tol: float = 1e-10) -> np.ndarray:
    """[[y1(a), y2(a)], [y1'(a), y2'(a)]] for y1(0)=1, y1'(0)=0, y2(0)=0, y2'(0)=1."""
    y = _solve(q, lam, np.array([1.0, 0.0, 0.0, 1.0]), 0.0, q.period, tol)
    return np.array([[y[0], y[2]], [y[1], y[3]]])


# ---------------------------------------------------------------------------
# roots, quadrature, regression


def find_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of ``f`` in [lo, hi] by Brent's method, located to within ``tol``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(
            f"f(lo)={flo:.3e} and f(hi)={fhi:.3e} do not bracket a root on [{lo}, {hi}]",
            [(lo, flo), (hi, fhi)],
        )
    return brentq(f, lo, hi, xtol=tol, rtol=4 * _EPS, maxiter=500)


def quad(f, lo: float, hi: float, points=None, tol: float = 1e-12) -> float:
    """Adaptive quadrature of a real integrand; raises when the error estimate
    exceeds ``max(tol, 1e-10 |result|)``."""
    pts = [p for p in (points or []) if lo < p < hi] or None
    with warnings.catch_warnings():
        # the error estimate below is the contract; scipy's warning is redundant
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        val, err = _integrate.quad(f, lo, hi, points=pts, epsabs=tol, epsrel=1e-12, limit=500)
    if err > max(tol, 1e-10 * abs(val)):
        raise QuadratureError(f"quadrature reached only {err:.2e}", achieved=err)
    return val


def fit_log_slope(points) -> tuple[float, float]:
    """Least-squares line through (ln m, ln value); returns (slope, intercept)."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points for a rate fit")
    m = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if np.any(v <= 0) or np.any(m <= 0):
        raise ValueError("rate fits need positive m and values")
    slope, intercept = np.polyfit(np.log(m), np.log(v), 1)
    return float(slope), float(intercept)
