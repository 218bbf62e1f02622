"""Periodic and antiperiodic spectra of y'' + (lambda - q) y = 0 on [0, a].

Two independent routes:

* Fourier-Galerkin: the operator in the exponential basis, truncated to
  |mode| <= K, diagonalised, then each band pair is polished by a Schur
  complement on its two principal modes.
* Shooting: roots of the Floquet discriminant D(lambda) = y1(a) + y2'(a) at
  D = 2 (periodic) or D = -2 (antiperiodic), seeded by Galerkin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.linalg import toeplitz

from .errors import BandAssignmentError, BracketError
from .kernels import find_root, hermitian_eigen, monodromy
from .potential import FourierTable, PotentialSpec, fourier_table, normalize_mean

DEGENERATE_GAP = 1e-10


class BC(str, Enum):
    PERIODIC = "periodic"
    ANTIPERIODIC = "antiperiodic"


def band_frequency(bc: BC, m: int) -> int:
    return 2 * m + 2 if BC(bc) is BC.PERIODIC else 2 * m + 1


def mode_energy(freq, a: float):
    """(freq pi / a)^2, the unperturbed energy of exp(i freq pi x / a)."""
    return (np.asarray(freq, dtype=float) * math.pi / a) ** 2


def mode_frequencies(bc: BC, K: int) -> np.ndarray:
    """Frequencies f of the basis exp(i f pi x / a) kept at truncation K."""
    if BC(bc) is BC.PERIODIC:
        return 2 * np.arange(-K, K + 1)
    return 2 * np.arange(-K, K) + 1


def default_truncation(N_max: int) -> int:
    return max(4 * N_max, 32)


@dataclass(frozen=True)
class BandIndex:
    bc: BC
    m: int
    N: int
    center: float

    @classmethod
    def make(cls, bc, m: int, a: float) -> "BandIndex":
        if m < 0:
            raise ValueError("band index m must be >= 0")
        N = band_frequency(bc, m)
        return cls(BC(bc), m, N, float(mode_energy(N, a)))

    @property
    def window(self) -> float:
        """Half-width of the isolation window, in units of lambda / center * N^2."""
        return (2 * self.N - 1) * self.center / self.N**2


@dataclass(frozen=True)
class EigenPair:
    band: BandIndex
    lower: float
    upper: float
    gap: float
    method: str
    degenerate: bool = False
    polished: bool = False
    isolated: bool = True

    def __post_init__(self):
        if self.upper < self.lower:
            raise ValueError("EigenPair needs lower <= upper")


@dataclass(frozen=True)
class ModeDecomposition:
    u: complex
    v: complex
    h_norm: float
    h_sup: float

    @property
    def principal_weight(self) -> float:
        return abs(self.u) ** 2 + abs(self.v) ** 2


@dataclass(frozen=True)
class DiscriminantSample:
    lam: float
    D: float


# ---------------------------------------------------------------------------
# Galerkin


def galerkin_matrix(coeffs: FourierTable, bc, K: int, a: float | None = None) -> np.ndarray:
    """Truncated operator -d^2/dx^2 + q in the exponential basis.

    Rows/columns follow :func:`mode_frequencies`; entry (k, l) is
    delta_{kl} (f_k pi/a)^2 + c_{k-l}.
    """
    a = coeffs.period if a is None else a
    freqs = mode_frequencies(bc, K)
    n = freqs.size
    lags = np.arange(n)
    col = coeffs.take(lags, strict=True)
    row = coeffs.take(-lags, strict=True)
    H = toeplitz(col, row).astype(complex)
    H[np.diag_indices(n)] += mode_energy(freqs, a)
    return H


def _principal_positions(bc: BC, m: int, K: int) -> tuple[int, int]:
    """Matrix positions of the modes with frequency +N and -N."""
    if BC(bc) is BC.PERIODIC:
        return K + m + 1, K - m - 1
    return K + m, K - m - 1


def _schur_polish(H, pos, center, lam, which, iters=30):
    """Fixed point lam = eig_which(H_PP + H_PQ (lam - H_QQ)^{-1} H_QP), in lam - center."""
    n = H.shape[0]
    P = list(pos)
    Q = np.setdiff1d(np.arange(n), P)
    HPP = H[np.ix_(P, P)].copy()
    HPP[np.diag_indices(2)] -= center
    HPQ = H[np.ix_(P, Q)]
    HQQ = H[np.ix_(Q, Q)].copy()
    HQQ[np.diag_indices(Q.size)] -= center
    L = lam - center
    prev_step = math.inf
    for _ in range(iters):
        X = np.linalg.solve(L * np.eye(Q.size) - HQQ, HPQ.conj().T)
        Heff = HPP + HPQ @ X
        Heff = 0.5 * (Heff + Heff.conj().T)
        L_new = float(np.linalg.eigvalsh(Heff)[which])
        step = abs(L_new - L)
        L = L_new
        if step <= 4 * np.finfo(float).eps * max(abs(L), 1e-300) or step == 0.0:
            return center + L, True
        if step > prev_step:
            return center + L, False
        prev_step = step
    return center + L, False


def galerkin_eigensystem(q: PotentialSpec, bc, K: int, vectors: bool = False):
    """(eigenvalues including the mean shift, eigenvectors or None, frequencies, matrix)."""
    qn = normalize_mean(q)
    table = fourier_table(qn, 2 * K)
    H = galerkin_matrix(table, bc, K)
    if vectors:
        w, V = hermitian_eigen(H, vectors=True)
    else:
        w, V = hermitian_eigen(H, vectors=False), None
    return w + qn.shift, V, mode_frequencies(bc, K), H, qn.shift


def pair_bands(eigenvalues: np.ndarray, bc, m_max: int, a: float, m_min: int = 0, shift: float = 0.0):
    """Group ascending eigenvalues into band pairs by oscillation count and check
    that each pair sits alone inside its isolation window.

    Returns ``(ground, [(BandIndex, lower, upper, isolated), ...])``; ``ground``
    is the lowest periodic eigenvalue (``None`` for antiperiodic). A pair that
    strays outside its own window without colliding with a neighbour (strong
    potentials, low bands) is returned with ``isolated=False``. Windows are
    centred at center + ``shift``, the mean of the potential.
    """
    bc = BC(bc)
    w = np.asarray(eigenvalues)
    offset = 1 if bc is BC.PERIODIC else 0
    if offset + 2 * m_max + 2 > w.size:
        raise BandAssignmentError(f"truncation too small for band m={m_max}", m_max)
    out = []
    for m in range(m_min, m_max + 1):
        band = BandIndex.make(bc, m, a)
        i = offset + 2 * m
        lo, hi = float(w[i]), float(w[i + 1])
        half = band.window
        mid = band.center + shift
        neighbours = [w[j] for j in (i - 1, i + 2) if 0 <= j < w.size]
        if any(abs(x - mid) < half for x in neighbours):
            raise BandAssignmentError(f"band m={m}: more than two eigenvalues in one window", m)
        isolated = abs(lo - mid) < half and abs(hi - mid) < half
        out.append((band, lo, hi, isolated))
    ground = float(w[0]) if bc is BC.PERIODIC else None
    return ground, out


def _make_pair(band, lo, hi, method, polished=False, isolated=True):
    if hi - lo < DEGENERATE_GAP:
        mid = 0.5 * (lo + hi)
        return EigenPair(band, mid, mid, 0.0, method, True, polished, isolated)
    return EigenPair(band, lo, hi, hi - lo, method, False, polished, isolated)


def band_spectrum(
    q: PotentialSpec, bc, m_max: int, K: int | None = None, polish: bool = True, m_min: int = 0
) -> list[EigenPair]:
    """Galerkin band pairs for m = m_min..m_max.

    With ``polish`` each pair is refined by a Schur complement on its two
    principal modes, which removes the eigensolver's O(eps ||H||) error from
    the gap.
    """
    bc = BC(bc)
    N_max = band_frequency(bc, m_max)
    K = default_truncation(N_max) if K is None else K
    if K < 2 * N_max + 8:
        raise ValueError(f"truncation K={K} too small for band frequency {N_max}")
    w, _, _, H, shift = galerkin_eigensystem(q, bc, K)
    _, pairs = pair_bands(w, bc, m_max, q.period, m_min, shift)
    result = []
    for band, lo, hi, isolated in pairs:
        done = False
        if polish:
            pos = _principal_positions(bc, band.m, K)
            plo, ok_lo = _schur_polish(H, pos, band.center, lo - shift, 0)
            phi, ok_hi = _schur_polish(H, pos, band.center, hi - shift, 1)
            tol = 1e-7 * max(1.0, band.center)
            if ok_lo and ok_hi and abs(plo + shift - lo) < tol and abs(phi + shift - hi) < tol:
                lo, hi, done = plo + shift, phi + shift, True
        result.append(_make_pair(band, min(lo, hi), max(lo, hi), "galerkin", done, isolated))
    return result


def ground_state(q: PotentialSpec, K: int = 32) -> float:
    w, *_ = galerkin_eigensystem(q, BC.PERIODIC, K)
    return float(w[0])


def band_modes(q: PotentialSpec, bc, m_range, K: int | None = None):
    """Mode decompositions of both Galerkin eigenvectors of every band in ``m_range``.

    Returns a list of ``(m, j, ModeDecomposition)`` with j = 1 (lower), 2 (upper).
    """
    bc = BC(bc)
    ms = list(m_range)
    N_max = band_frequency(bc, max(ms))
    K = default_truncation(N_max) if K is None else K
    w, V, _, _, shift = galerkin_eigensystem(q, bc, K, vectors=True)
    offset = 1 if bc is BC.PERIODIC else 0
    pair_bands(w, bc, max(ms), q.period, min(ms), shift)
    out = []
    for m in ms:
        band = BandIndex.make(bc, m, q.period)
        for j in (1, 2):
            out.append((m, j, mode_decomposition(V[:, offset + 2 * m + j - 1], band)))
    return out


def mode_decomposition(eigvec: np.ndarray, band: BandIndex) -> ModeDecomposition:
    """Split a normalised Galerkin eigenvector into u theta_{+N} + v theta_{-N} + h.

    ``h_sup`` is the triangle-inequality bound sum |h_k| on sup |h|.
    """
    v = np.asarray(eigvec)
    n = v.size
    if band.bc is BC.PERIODIC:
        if n % 2 != 1:
            raise ValueError("periodic Galerkin vectors have odd length")
        K = (n - 1) // 2
    else:
        if n % 2 != 0:
            raise ValueError("antiperiodic Galerkin vectors have even length")
        K = n // 2
    ip, im = _principal_positions(band.bc, band.m, K)
    rest = np.delete(v, [ip, im])
    return ModeDecomposition(
        complex(v[ip]), complex(v[im]), float(np.linalg.norm(rest)), float(np.abs(rest).sum())
    )


# ---------------------------------------------------------------------------
# shooting


def floquet_discriminant(q: PotentialSpec, lam: float, tol: float = 1e-10) -> DiscriminantSample:
    M = monodromy(q, lam, tol)
    return DiscriminantSample(float(lam), float(M[0, 0] + M[1, 1]))


def _gap_function(q, sign, ode_tol):
    """g = (D^2 - 4)/(sign*D + 2) = sign*D - 2, assembled from monodromy entries.

    D^2 - 4 = (y1 - y2')^2 + 4 y2 y1' uses no cancellation against det = 1, so
    near a (nearly) coexisting pair the noise in g shrinks with the entries.
    g >= 0 inside the instability interval and < 0 just outside it.
    """
    samples = []

    def g(lam):
        M = monodromy(q, lam, ode_tol)
        y1, y2, y1p, y2p = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        delta = (y1 - y2p) ** 2 + 4.0 * y2 * y1p
        val = delta / (sign * (y1 + y2p) + 2.0)
        samples.append((float(lam), float(val)))
        return val

    return g, samples


def _dirichlet(q, ode_tol):
    return lambda lam: monodromy(q, lam, ode_tol)[0, 1]


def _expand(f, anchor, direction, w0, want_negative, samples, cap):
    w = w0
    for _ in range(7):
        x = anchor + direction * min(w, cap)
        fx = f(x)
        if (fx < 0) == want_negative and fx != 0:
            return x
        w *= 2
    raise BracketError(f"could not bracket a root near {anchor}", list(samples))


def refine_pair_shooting(q: PotentialSpec, pair: EigenPair, tol: float = 1e-10, ode_tol: float | None = None) -> EigenPair:
    """Band pair from the Floquet discriminant, seeded by a Galerkin pair.

    Brackets around each seed start at half-width ``gap + 10 tol`` (plus a
    relative margin) and are doubled up to six times. Pairs narrower than
    ``tol`` are reported degenerate.
    """
    ode_tol = min(max(tol, 1e-13), 1e-6) if ode_tol is None else ode_tol
    band = pair.band
    sign = 1.0 if band.bc is BC.PERIODIC else -1.0
    g, samples = _gap_function(q, sign, ode_tol)
    margin = 10 * tol + 1e-10 * max(1.0, band.center)
    w0 = pair.gap + margin
    cap = 0.5 * band.window
    mid = 0.5 * (pair.lower + pair.upper)
    split = mid if g(mid) > 0 else None
    if split is None:
        # a Dirichlet eigenvalue lies in every closed instability interval
        y2 = _dirichlet(q, ode_tol)
        for i in range(7):
            w = min(w0 * 2**i, cap)
            lo, hi = mid - w, mid + w
            if np.sign(y2(lo)) != np.sign(y2(hi)):
                break
        else:
            raise BracketError(f"no Dirichlet root near band m={band.m}", samples)
        mu = find_root(y2, lo, hi, tol)
        if g(mu) > 0:
            split = mu
        else:
            return EigenPair(band, mu, mu, 0.0, "shooting", degenerate=True)
    lo_b = _expand(g, pair.lower, -1.0, w0, True, samples, cap)
    hi_b = _expand(g, pair.upper, +1.0, w0, True, samples, cap)
    lower = find_root(g, lo_b, split, tol)
    upper = find_root(g, split, hi_b, tol)
    if upper - lower < tol:
        midr = 0.5 * (lower + upper)
        return EigenPair(band, midr, midr, 0.0, "shooting", degenerate=True)
    return EigenPair(band, lower, upper, upper - lower, "shooting")


def refine_ground_shooting(q: PotentialSpec, lam0: float, tol: float = 1e-10, ode_tol: float | None = None) -> float:
    """Lowest periodic eigenvalue: the single root of D - 2 below the first band."""
    ode_tol = min(max(tol, 1e-13), 1e-6) if ode_tol is None else ode_tol
    g, samples = _gap_function(q, 1.0, ode_tol)
    w = 10 * tol + 1e-10 * max(1.0, abs(lam0))
    for _ in range(40):
        lo, hi = lam0 - w, lam0 + w
        if g(lo) > 0 and g(hi) < 0:
            return find_root(g, lo, hi, tol)
        w *= 2
    raise BracketError(f"could not bracket the ground state near {lam0}", samples)


def shooting_spectrum(q: PotentialSpec, bc, m_max: int, tol: float = 1e-10, K: int | None = None):
    """Galerkin-seeded shooting for bands 0..m_max; periodic also returns the ground state."""
    bc = BC(bc)
    seeds = band_spectrum(q, bc, m_max, K)
    pairs = [replace(refine_pair_shooting(q, p, tol), isolated=p.isolated) for p in seeds]
    ground = None
    if bc is BC.PERIODIC:
        N_max = band_frequency(bc, m_max)
        K = default_truncation(N_max) if K is None else K
        ground = refine_ground_shooting(q, ground_state(q, K), tol)
    return ground, pairs
