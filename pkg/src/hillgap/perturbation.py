"""Perturbation series around a band center and the asymptotic checks built on them.

For band frequency N (N = 2m+2 periodic, 2m+1 antiperiodic) and
Lambda_k(lam) = lam - (N - 2k)^2 pi^2 / a^2:

    a(lam)  = sum c_k c_{-k}    / Lambda_k(lam)
    b(lam)  = sum c_k c_{N-k}   / Lambda_k(lam)        k not in {0, N}
    a'(lam) = sum c_k c_{-k}    / Lambda_{-k}(lam)
    b'(lam) = sum c_k c_{-N-k}  / Lambda_{-k}(lam)     k not in {0, -N}

The two-mode reduction then gives lam - center ~ a +- |c_N + b|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma

from .errors import NearResonanceError
from .kernels import fit_log_slope
from .potential import (
    FourierTable,
    PotentialSpec,
    TrigPolynomial,
    fourier_coefficient,
    fourier_table,
    rho,
    trig_potential,
)
from .spectrum import BC, EigenPair, band_frequency, band_spectrum

RESONANCE_TOL = 1e-8


def _center(N: int, a: float) -> float:
    return (N * math.pi / a) ** 2


def mean_value(q: PotentialSpec) -> float:
    """Mean of q over a period; it shifts every eigenvalue rigidly."""
    return q.shift + fourier_coefficient(q, 0).real


def default_series_width(q: PotentialSpec, N: int) -> int:
    """Table half-width used for the series: the degree of a trig polynomial,
    otherwise max(64, 4N)."""
    if isinstance(q.form, TrigPolynomial) and q.form.degree > 0:
        return q.form.degree
    return max(64, 4 * N)


# ---------------------------------------------------------------------------
# series a, b, a', b'


@dataclass(frozen=True)
class SeriesTerms:
    m: int
    a_val: complex
    b_val: complex
    a_prime: complex
    b_prime: complex
    r_bound: float
    r_prime_bound: float
    truncation: int
    lam_used: float
    tail_bound: float = 0.0
    bc: BC = BC.PERIODIC
    N: int = 0


def _denominators(ks, N, lam, a, sign):
    """Lambda_{sign*k}(lam) for an integer array ``ks``."""
    return lam - ((N - 2 * sign * ks) * math.pi / a) ** 2


def _check_resonance(den, center, m):
    if den.size and np.min(np.abs(den)) < RESONANCE_TOL * max(center, 1.0):
        raise NearResonanceError(f"band m={m}: a series denominator vanishes (lam near another band center)")


def _harmonic_tail(N: int, M1: int) -> float:
    """sum over |k| > M1, k != N of 1/(|k| |N - k|)."""
    total = 0.0
    # negative side: 1/(t (t + N)) for t > M1
    total += (digamma(M1 + 1 + N) - digamma(M1 + 1)) / N
    # positive side: explicit until past N, then 1/(k (k - N)) telescopes
    start = M1 + 1
    if start <= N:
        ks = np.arange(start, N + 1)
        ks = ks[ks != N]
        total += float(np.sum(1.0 / (ks * np.abs(N - ks)))) if ks.size else 0.0
        start = N + 1
    total += (digamma(start) - digamma(start - N)) / N
    return float(total)


def series_terms(
    coeffs: FourierTable,
    m: int,
    lam: float | None = None,
    M1: int | None = None,
    bc=BC.PERIODIC,
    with_bounds: bool = True,
) -> SeriesTerms:
    """Partial sums over |k| <= M1 at ``lam`` (default: the band center).

    ``tail_bound`` bounds the omitted |k| > M1 part of each sum by
    sup|c|^2 a^2/(4 pi^2) sum 1/(|k||N-k|); it is 0 for exact tables with
    M1 at least the table width.
    """
    bc = BC(bc)
    a = coeffs.period
    N = band_frequency(bc, m)
    center = _center(N, a)
    lam = center if lam is None else float(lam)
    M1 = coeffs.half_width if M1 is None else int(M1)
    if M1 < 1:
        raise ValueError("M1 must be >= 1")
    if M1 > coeffs.half_width and not coeffs.exact:
        raise ValueError(f"M1={M1} exceeds the table half-width {coeffs.half_width}")

    ks = np.arange(-M1, M1 + 1)
    ck = coeffs.take(ks)
    cmk = coeffs.take(-ks)

    keep = (ks != 0) & (ks != N)
    den = _denominators(ks[keep], N, lam, a, 1)
    _check_resonance(den, center, m)
    a_val = np.sum(ck[keep] * cmk[keep] / den)
    b_val = np.sum(ck[keep] * coeffs.take(N - ks[keep]) / den)

    keep_p = (ks != 0) & (ks != -N)
    den_p = _denominators(ks[keep_p], N, lam, a, -1)
    _check_resonance(den_p, center, m)
    a_prime = np.sum(ck[keep_p] * cmk[keep_p] / den_p)
    b_prime = np.sum(ck[keep_p] * coeffs.take(-N - ks[keep_p]) / den_p)

    if coeffs.exact and M1 >= coeffs.half_width:
        tail = 0.0
    else:
        tail = coeffs.sup_coeff**2 * a**2 / (4 * math.pi**2) * _harmonic_tail(N, M1)

    rb = r_bound(coeffs, m, M1, bc) if with_bounds else float("nan")
    rpb = r_bound(coeffs, m, M1, bc, primed=True) if with_bounds else float("nan")
    return SeriesTerms(
        m, complex(a_val), complex(b_val), complex(a_prime), complex(b_prime),
        rb, rpb, M1, lam, float(tail), bc, N,
    )


def r_bound(coeffs: FourierTable, m: int, M1: int | None = None, bc=BC.PERIODIC, primed: bool = False) -> float:
    """3 sup|c| sum |c_k1 c_k2| / (|Lambda0_k1| |Lambda0_{k1+k2}|) over the admissible set.

    Admissible: k1, k2, k1+k2 != 0 and k1, k1+k2 != N (-N for the primed sum),
    with |k1|, |k2| <= M1.
    """
    bc = BC(bc)
    a = coeffs.period
    N = band_frequency(bc, m)
    M1 = coeffs.half_width if M1 is None else int(M1)
    ks = np.arange(-M1, M1 + 1)
    absc = np.abs(coeffs.take(ks))
    if not absc.any():
        return 0.0
    target = -N if primed else N
    s = 4 * math.pi**2 / a**2
    # |Lambda0| for the shifted index: 4 |k| |N -+ k| pi^2/a^2
    def lam0(k):
        return s * np.abs(k) * np.abs(N - (-k if primed else k))

    k1 = ks[:, None]
    k2 = ks[None, :]
    tot = k1 + k2
    ok = (k1 != 0) & (k2 != 0) & (tot != 0) & (k1 != target) & (tot != target)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = absc[:, None] * absc[None, :] / (lam0(k1) * lam0(tot))
    return float(3 * coeffs.sup_coeff * np.sum(w[ok]))


# ---------------------------------------------------------------------------
# Titchmarsh-type prediction


@dataclass(frozen=True)
class TitchmarshPrediction:
    m: int
    center: float
    predicted_lower: float
    predicted_upper: float
    order_term: float
    leading_lower: float
    leading_upper: float
    bc: BC = BC.PERIODIC
    N: int = 0
    refined: bool = False
    diverged: bool = False


def _second_order(table, m, lam, bc, sign, M1):
    st = series_terms(table, m, lam, M1, bc, with_bounds=False)
    c = table.c(st.N)
    center = _center(st.N, table.period)
    return center + st.a_val.real + sign * abs(c + st.b_val)


def titchmarsh_predict(
    q: PotentialSpec,
    m: int,
    refine: bool = False,
    bc=BC.PERIODIC,
    M1: int | None = None,
    table: FourierTable | None = None,
    passes: int = 3,
) -> TitchmarshPrediction:
    """Leading prediction center +- |c_N| and second-order center + Re a +- |c_N + b|.

    ``center`` includes the mean of q, which the series themselves ignore.

    With ``refine`` the series is re-evaluated at the current prediction up
    to ``passes`` times; a growing step or a near-resonance falls back to
    the center-frozen values and sets ``diverged``.
    """
    if m < 1:
        raise ValueError("titchmarsh_predict needs m >= 1")
    bc = BC(bc)
    N = band_frequency(bc, m)
    if table is None:
        table = fourier_table(q, default_series_width(q, N) if M1 is None else M1)
    a = q.period
    center = _center(N, a)
    mean = mean_value(q)
    cN = abs(table.c(N))
    r = rho(q, m, N=N).value

    frozen = [_second_order(table, m, center, bc, s, M1) for s in (-1, 1)]
    preds = list(frozen)
    diverged = False
    if refine:
        try:
            for idx, s in enumerate((-1, 1)):
                lam, step = frozen[idx], abs(frozen[idx] - center)
                for _ in range(passes):
                    new = _second_order(table, m, lam, bc, s, M1)
                    if abs(new - lam) > step:
                        raise NearResonanceError("fixed-point step grew")
                    step, lam = abs(new - lam), new
                preds[idx] = lam
        except NearResonanceError:
            preds, diverged = list(frozen), True
    lo, hi = sorted(p + mean for p in preds)
    center += mean
    return TitchmarshPrediction(
        m, center, lo, hi, r / m, center - cN, center + cN, bc, N, refine and not diverged, diverged
    )


# ---------------------------------------------------------------------------
# hypothesis diagnostics


@dataclass(frozen=True)
class ConditionReport:
    m_range: tuple[int, ...]
    rho: tuple[float, ...]
    c_abs: tuple[float, ...]
    ratio_main: tuple[float, ...]
    ratio_sim: tuple[float, ...]
    eps_margin: tuple[float, ...]
    flagged: tuple[bool, ...]
    verdicts: dict = field(default_factory=dict)
    trends: dict = field(default_factory=dict)
    inapplicable: bool = False
    bc: BC = BC.PERIODIC


def condition_report(
    q: PotentialSpec,
    m_range,
    eps: float = 0.25,
    bc=BC.PERIODIC,
    c1_band: tuple[float, float] = (0.1, 10.0),
    zero_tol: float = 1e-14,
) -> ConditionReport:
    """Sequences rho/(m|c_N|), |c_N|/rho and m|c_N| with per-condition verdicts.

    Verdicts: ``maincon`` = fitted log-slope of rho/(m|c_N|) below -0.1;
    ``c1`` = |c_N|/rho inside ``c1_band`` everywhere; ``c2`` = min m|c_N| > eps.
    Bands with c_N = 0 are flagged (NaN entries); any flagged band makes all
    three verdicts False, and a fully flagged range makes them None.
    """
    bc = BC(bc)
    ms = tuple(int(m) for m in m_range)
    if not ms:
        raise ValueError("m_range is empty")
    rhos, cs, main, sim, marg, flags = [], [], [], [], [], []
    for m in ms:
        N = band_frequency(bc, m)
        r = rho(q, m, N=N).value
        c = abs(fourier_coefficient(q, N))
        flag = c <= zero_tol
        rhos.append(r)
        cs.append(c)
        flags.append(flag)
        main.append(math.nan if flag else r / (m * c))
        sim.append(math.nan if flag or r == 0 else c / r)
        marg.append(math.nan if flag else m * c)

    trends = {}
    inapplicable = all(flags)
    if inapplicable:
        verdicts = {"maincon": None, "c1": None, "c2": None}
    elif any(flags):
        verdicts = {"maincon": False, "c1": False, "c2": False}
    else:
        verdicts = {}
        if len(ms) >= 3:
            slope, _ = fit_log_slope(zip(ms, main))
            trends["maincon_slope"] = slope
            verdicts["maincon"] = slope < -0.1
        else:
            verdicts["maincon"] = None
        trends["sim_min"], trends["sim_max"] = float(np.nanmin(sim)), float(np.nanmax(sim))
        verdicts["c1"] = bool(c1_band[0] <= trends["sim_min"] and trends["sim_max"] <= c1_band[1])
        trends["eps_min"] = float(min(marg))
        verdicts["c2"] = trends["eps_min"] > eps
    return ConditionReport(
        ms, tuple(rhos), tuple(cs), tuple(main), tuple(sim), tuple(marg), tuple(flags),
        verdicts, trends, inapplicable, bc,
    )


# ---------------------------------------------------------------------------
# gap widths


@dataclass(frozen=True)
class GapRow:
    m: int
    N: int
    ell: float
    c_abs: float
    normalized_half: float
    normalized_full: float
    residual: float
    rho: float
    flagged: bool


@dataclass(frozen=True)
class GapReport:
    rows: tuple[GapRow, ...]
    bc: BC
    slope: float | None = None

    @property
    def max_half_deviation(self) -> float:
        vals = [abs(r.normalized_half - 1) for r in self.rows if not r.flagged]
        return max(vals) if vals else math.nan


def gap_report(
    pairs: list[EigenPair], coeffs: FourierTable, q: PotentialSpec | None = None, zero_tol: float = 1e-14
) -> GapReport:
    """Gap widths against |c_N| under both normalisations.

    rho(m) comes from ``q`` when given, else from the table's trig
    polynomial. ``slope`` is the fitted log-slope of residual*m/rho(m).
    """
    if not pairs:
        return GapReport((), BC.PERIODIC)
    bcs = {p.band.bc for p in pairs}
    if len(bcs) != 1:
        raise ValueError("gap_report needs pairs from a single boundary condition")
    bc = bcs.pop()
    qq = q if q is not None else trig_potential(coeffs)
    rows = []
    for p in sorted(pairs, key=lambda p: p.band.m):
        N = p.band.N
        c = abs(coeffs.c(N))
        flag = c <= zero_tol
        r = rho(qq, p.band.m, N=N).value
        rows.append(
            GapRow(
                p.band.m, N, p.gap, c,
                math.nan if flag else p.gap / (2 * c),
                math.nan if flag else p.gap / c,
                abs(p.gap - 2 * c), r, flag,
            )
        )
    pts = [(r.m, r.residual * r.m / r.rho) for r in rows if r.m > 0 and r.rho > 0 and r.residual > 0]
    slope = fit_log_slope(pts)[0] if len(pts) >= 3 else None
    return GapReport(tuple(rows), bc, slope)


# ---------------------------------------------------------------------------
# eigenvalue residuals and simplicity


@dataclass(frozen=True)
class ResidualRow:
    m: int
    N: int
    center: float
    c_abs: float
    rho: float
    lower: float
    upper: float
    residual_1: float
    residual_2: float
    second_order_error: float
    leading_error: float


@dataclass(frozen=True)
class AsymptoticReport:
    rows: tuple[ResidualRow, ...]
    bc: BC
    slopes: tuple[float, float]
    scaled_ratio: tuple[float, float]
    scaled_max: tuple[float, float]
    second_order_wins: float


def asymptotic_report(
    q: PotentialSpec,
    m_range,
    bc=BC.PERIODIC,
    K: int | None = None,
    pairs: list[EigenPair] | None = None,
) -> AsymptoticReport:
    """Residuals |lam_j - center -+ |c_N|| and the second-order comparison.

    ``scaled_ratio`` is max/min of residual_j*m/rho(m); ``slopes`` are fitted
    log-slopes of residual_j against m; ``second_order_wins`` is the fraction
    of bands where the second-order prediction is at least as accurate as
    the leading one.
    """
    bc = BC(bc)
    ms = [int(m) for m in m_range]
    if pairs is None:
        pairs = band_spectrum(q, bc, max(ms), K, m_min=min(ms))
    by_m = {p.band.m: p for p in pairs}
    table = fourier_table(q, default_series_width(q, band_frequency(bc, max(ms))))
    rows = []
    for m in ms:
        p = by_m[m]
        N = p.band.N
        c = abs(table.c(N))
        pred = titchmarsh_predict(q, m, bc=bc, table=table)
        center = pred.center
        r = pred.order_term * m
        err2 = max(abs(p.lower - pred.predicted_lower), abs(p.upper - pred.predicted_upper))
        err1 = max(abs(p.lower - pred.leading_lower), abs(p.upper - pred.leading_upper))
        rows.append(
            ResidualRow(
                m, N, center, c, r, p.lower, p.upper,
                abs(p.lower - (center - c)), abs(p.upper - (center + c)),
                err2, err1,
            )
        )
    slopes, ratios, maxes = [], [], []
    for attr in ("residual_1", "residual_2"):
        vals = [(row.m, getattr(row, attr)) for row in rows]
        scaled = [v * m / row.rho for (m, v), row in zip(vals, rows) if row.rho > 0]
        if len(vals) >= 3 and all(v > 0 for _, v in vals):
            slopes.append(fit_log_slope(vals)[0])
        else:
            slopes.append(math.nan)
        pos = [s for s in scaled if s > 0]
        ratios.append(max(pos) / min(pos) if pos else math.nan)
        maxes.append(max(scaled) if scaled else math.nan)
    wins = sum(row.second_order_error <= row.leading_error for row in rows) / len(rows)
    return AsymptoticReport(tuple(rows), bc, tuple(slopes), tuple(ratios), tuple(maxes), wins)


@dataclass(frozen=True)
class SimplicityResult:
    m: int
    simple: bool
    gap: float
    threshold: float
    margin: float
    claimed: bool


def simplicity_check(
    pairs: list[EigenPair],
    m_range,
    coeffs: FourierTable,
    q: PotentialSpec | None = None,
    eig_tol: float = 1e-10,
    C: float | None = None,
) -> tuple[list[SimplicityResult], dict]:
    """Band m counts as simple when gap > max(2 eig_tol, |c_N|/2 - C rho(m)/m).

    C defaults to the fitted max over the range of
    max_j |lam_j - center -+ |c_N|| * m / rho(m). ``claimed`` marks bands for
    which the hypotheses hold (c_N != 0 and a holding decay condition), so a
    simple=False there is a counterexample. The summary dict carries C, the
    condition verdict and ``consistent`` (every claimed band is simple).
    """
    qq = q if q is not None else trig_potential(coeffs)
    mean = mean_value(qq)
    ms = [int(m) for m in m_range]
    by_m = {p.band.m: p for p in pairs}
    bc = next(iter(by_m.values())).band.bc if by_m else BC.PERIODIC
    data = []
    for m in ms:
        p = by_m[m]
        c = abs(coeffs.c(p.band.N))
        r = rho(qq, m, N=p.band.N).value
        center = p.band.center + mean
        res = max(abs(p.lower - (center - c)), abs(p.upper - (center + c)))
        data.append((m, p, c, r, res))
    if C is None:
        scaled = [res * m / r for m, _, _, r, res in data if r > 0]
        C = max(scaled) if scaled else 0.0
    cond = condition_report(qq, ms, bc=bc) if len(ms) >= 3 else None
    hyp = bool(cond and (cond.verdicts.get("maincon") or cond.verdicts.get("c1") or cond.verdicts.get("c2")))
    out = []
    for m, p, c, r, _ in data:
        thr = max(2 * eig_tol, 0.5 * c - C * r / m)
        out.append(SimplicityResult(m, p.gap > thr, p.gap, thr, p.gap - thr, hyp and c > 0))
    summary = {
        "C": C,
        "hypothesis": hyp,
        "consistent": all(s.simple for s in out if s.claimed),
    }
    return out, summary
