"""Independent reference computations and frozen values used by the tests.

Nothing here imports the package's numerical kernels.
"""
import math

import mpmath
import numpy as np

# Mathieu characteristic values for y'' + (lam - 2 cos 2x) y = 0, i.e. q_M = 1
# (Abramowitz & Stegun table 20.1, 7 decimals).
MATHIEU_Q1 = {
    "a0": -0.4551386,
    "b1": -0.1102488,
    "a1": 1.8591081,
    "b2": 3.9170248,
    "a2": 4.3713010,
}

# gap/(2 gamma) - 1 for q = 2 gamma cos(20 pi x), a = 1, band N = 10, from a
# 40-digit Galerkin eigenvalue computation (converged in K by K = 24).
RESONANT_N10_DEVIATION = {
    0.2: -6.41623890094e-10,
    0.1: -1.60405972678e-10,
    0.05: -4.01014931791e-11,
}


def rk4_monodromy(qfun, lam, a, n):
    """Fixed-step RK4 monodromy [[y1, y2], [y1', y2']] with n steps."""
    h = a / n

    def f(x, Y):
        qx = qfun(x) - lam
        return np.array([Y[2], Y[3], qx * Y[0], qx * Y[1]])

    Y = np.array([1.0, 0.0, 0.0, 1.0])
    x = 0.0
    for _ in range(n):
        k1 = f(x, Y)
        k2 = f(x + h / 2, Y + h / 2 * k1)
        k3 = f(x + h / 2, Y + h / 2 * k2)
        k4 = f(x + h, Y + h * k3)
        Y = Y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += h
    return np.array([[Y[0], Y[1]], [Y[2], Y[3]]])


def richardson_monodromy(qfun, lam, a, n=4000):
    m1 = rk4_monodromy(qfun, lam, a, n)
    m2 = rk4_monodromy(qfun, lam, a, 2 * n)
    return (16 * m2 - m1) / 15


def mp_galerkin_eigenvalues(coeffs, K, a, antiperiodic=False, dps=40):
    """Eigenvalues of the truncated operator in exact-ish arithmetic.

    ``coeffs`` maps k to c_k. Periodic modes k = -K..K with energies
    (2 k pi / a)^2; antiperiodic modes use frequencies 2k+1, k = -K..K-1.
    """
    with mpmath.workdps(dps):
        if antiperiodic:
            freqs = [2 * k + 1 for k in range(-K, K)]
        else:
            freqs = [2 * k for k in range(-K, K + 1)]
        n = len(freqs)
        H = mpmath.matrix(n, n)
        pi = mpmath.pi
        for i in range(n):
            H[i, i] = (freqs[i] * pi / a) ** 2
            for j in range(n):
                d = (freqs[i] - freqs[j]) // 2
                if d in coeffs and i != j:
                    H[i, j] = mpmath.mpc(coeffs[d])
        ev = mpmath.eighe(H, eigvals_only=True)
        return sorted(float(mpmath.re(e)) for e in ev)


def sturm_count(A, x):
    """Number of eigenvalues of the Hermitian matrix A below x, from the signs
    of the leading principal minors of A - x I (computed in mpmath)."""
    n = A.shape[0]
    with mpmath.workdps(50):
        M = mpmath.matrix(A.tolist()) - x * mpmath.eye(n)
        count = 0
        prev = mpmath.mpf(1)
        for k in range(1, n + 1):
            d = mpmath.re(mpmath.det(M[:k, :k]))
            if d * prev < 0:
                count += 1
            prev = d
        return count


def bisect_eigenvalues(A, lo, hi, tol=1e-11):
    """All eigenvalues of a Hermitian matrix in [lo, hi] by bisection on sturm_count."""
    n = A.shape[0]
    out = []
    for i in range(n):
        a, b = lo, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if sturm_count(A, mid) > i:
                b = mid
            else:
                a = mid
        out.append(0.5 * (a + b))
    return out


def enumerate_series(c, N, lam, a):
    """a, b, a', b' by explicit loops over a dict of coefficients."""
    def Lam(j):
        return lam - (N - 2 * j) ** 2 * math.pi**2 / a**2

    def get(k):
        return c.get(k, 0)

    av = bv = ap = bp = 0
    for k in c:
        if k not in (0, N):
            av += get(k) * get(-k) / Lam(k)
            bv += get(k) * get(N - k) / Lam(k)
        if k not in (0, -N):
            ap += get(k) * get(-k) / Lam(-k)
            bp += get(k) * get(-N - k) / Lam(-k)
    return av, bv, ap, bp


def profile_values(c, shift, x, a):
    """a^{-1} int_0^x q e^{-i 2 shift pi t/a} dt - c_shift x / a, from the
    antiderivative of each exponential (mean not removed)."""
    x = np.asarray(x, dtype=float)
    val = np.zeros(x.shape, dtype=complex)
    for k, ck in c.items():
        d = k - shift
        if d == 0:
            continue
        val += ck * (np.exp(2j * math.pi * d * x / a) - 1) / (2j * math.pi * d)
    return val


def identity_integrals(c, m, a, n=4096):
    """Integral sides of all nine identities by periodic trapezoid on n points.

    The integrands are trigonometric polynomials of degree well below n, so
    the rule is exact up to rounding.
    """
    N = 2 * m + 2
    x = np.arange(n) * a / n
    q = sum(ck * np.exp(2j * math.pi * k * x / a) for k, ck in c.items())
    P = profile_values(c, 0, x, a)
    G = profile_values(c, N, x, a)
    H = profile_values(c, -N, x, a)
    P, G, H = P - P.mean(), G - G.mean(), H - H.mean()
    th = lambda s: np.exp(2j * math.pi * s * x / a)
    f = 4 * math.pi**2
    return {
        "a_d3": -(a**2) * np.mean(G * G * th(2 * N)),
        "b_I0": -(a**2) * np.mean(P * P * th(-N)),
        "S1": f * np.mean(P * P * q),
        "S2": -f * np.mean(P * G * q * th(N)),
        "S3": -f * np.mean(P * H * q * th(-N)),
        "S4": f * np.mean(G * H * q),
        "I1": -f * np.mean(P * P * q * th(-N)),
        "I2": f * np.mean(P * G * q),
        "I3": -f * np.mean(G * G * q * th(N)),
    }


def random_symmetric_table(rng, max_width=8):
    K = int(rng.integers(1, max_width + 1))
    c = {}
    for k in range(1, K + 1):
        z = float(rng.normal())
        c[k] = z
        c[-k] = z
    return c
