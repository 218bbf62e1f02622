"""Batch driver: ``hillgap <subcommand> --config run.ini``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import io
import json
import math
import re
import sys
from contextlib import contextmanager
from dataclasses import dataclass

from . import potential as pot
from .errors import ConfigError, HillGapError, NumericalError
from .identities import check_all
from .perturbation import (
    asymptotic_report,
    condition_report,
    default_series_width,
    gap_report,
    series_terms,
    simplicity_check,
)
from .potential import PotentialSpec, fourier_coefficient, fourier_table, rho
from .spectrum import BC, band_frequency, band_spectrum, default_truncation, refine_pair_shooting

SUBCOMMANDS = ("coeffs", "spectrum", "gaps", "asym", "identities", "report")
NAMED = ("zero", "mathieu", "square", "harmonic_decay", "single_harmonic")


@dataclass
class RunConfig:
    potential: PotentialSpec
    bcs: tuple[BC, ...]
    m_min: int
    m_max: int
    truncation: int
    series_truncation: int | None
    eigen_tol: float
    ode_tol: float
    quad_tol: float
    epsilon: float
    fmt: str
    out: str | None


# ---------------------------------------------------------------------------
# config parsing


def _field_error(section, key, msg):
    return ConfigError(f"[{section}] {key}: {msg}")


def _get(cp, section, key, conv, default=None):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    try:
        return conv(raw)
    except (ValueError, SyntaxError, TypeError) as exc:
        raise _field_error(section, key, f"cannot parse {raw!r} ({exc})") from None


def _literal(raw):
    return ast.literal_eval(raw)


def _named_potential(name, args, kwargs, period):
    if name not in NAMED:
        raise _field_error("potential", "name", f"unknown potential {name!r}; choose from {', '.join(NAMED)}")
    if period is not None:
        kwargs.setdefault("period", period)
    factory = getattr(pot, name)
    try:
        return factory(*args, **kwargs)
    except TypeError as exc:
        raise _field_error("potential", "name", str(exc)) from None


@contextmanager
def _in_field(key):
    try:
        yield
    except (ConfigError, TypeError, ValueError) as exc:
        if str(exc).startswith("[potential]"):
            raise
        raise _field_error("potential", key, str(exc)) from None


def _parse_potential(cp) -> PotentialSpec:
    sec = "potential"
    if not cp.has_section(sec):
        raise ConfigError("missing [potential] section")
    period = _get(cp, sec, "period", float)
    if cp.has_option(sec, "harmonics"):
        triples = _get(cp, sec, "harmonics", _literal)
        if triples and isinstance(triples[0], (int, float)):
            triples = (triples,)
        try:
            harm = tuple((int(k), complex(float(re_), float(im))) for k, re_, im in triples)
        except (TypeError, ValueError):
            raise _field_error(sec, "harmonics", "expected (k, re, im) triples") from None
        try:
            real = cp.getboolean(sec, "real_valued", fallback=True)
        except ValueError:
            raise _field_error(sec, "real_valued", "expected a boolean") from None
        with _in_field("harmonics"):
            return PotentialSpec(1.0 if period is None else period, pot.TrigPolynomial(harm, real), name="trig")
    if cp.has_option(sec, "values") and cp.has_option(sec, "breakpoints"):
        bp = _get(cp, sec, "breakpoints", _literal)
        vals = _get(cp, sec, "values", _literal)
        with _in_field("breakpoints"):
            form = pot.PiecewiseConstant(tuple(float(b) for b in bp), tuple(float(v) for v in vals))
            return PotentialSpec(form.breakpoints[-1] if period is None else period, form, name="piecewise")
    if cp.has_option(sec, "samples"):
        vals = _get(cp, sec, "samples", _literal)
        with _in_field("samples"):
            form = pot.Sampled(tuple(float(v) for v in vals))
            return PotentialSpec(1.0 if period is None else period, form, name="sampled")
    if not cp.has_option(sec, "name"):
        raise _field_error(sec, "name", "give a named potential, harmonics, breakpoints+values or samples")
    raw = cp.get(sec, "name").strip()
    match = re.fullmatch(r"(\w+)\s*(?:\((.*)\))?", raw)
    if not match:
        raise _field_error(sec, "name", f"cannot parse {raw!r}")
    name, argstr = match.groups()
    args = ()
    if argstr:
        try:
            args = ast.literal_eval(f"({argstr},)")
        except (ValueError, SyntaxError):
            raise _field_error(sec, "name", f"bad arguments in {raw!r}") from None
    kwargs = {}
    for key, conv in (("gamma", float), ("alpha", float), ("degree", int), ("N", int)):
        val = _get(cp, sec, key, conv)
        if val is not None:
            kwargs["K" if key == "degree" else key] = val
    return _named_potential(name, args, kwargs, period)


def parse_m_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"--m-range: expected a:b, got {text!r}") from None
    return lo, hi


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
    overrides = overrides or {}
    q = _parse_potential(cp)

    bc_raw = _get(cp, "bands", "bc", str, "periodic").lower()
    if bc_raw == "both":
        bcs = (BC.PERIODIC, BC.ANTIPERIODIC)
    elif bc_raw in ("periodic", "antiperiodic"):
        bcs = (BC(bc_raw),)
    else:
        raise _field_error("bands", "bc", f"expected periodic, antiperiodic or both, got {bc_raw!r}")
    m_min = _get(cp, "bands", "m_min", int, 5)
    m_max = _get(cp, "bands", "m_max", int, 24)
    if overrides.get("m_range"):
        m_min, m_max = overrides["m_range"]
    if m_min < 1:
        raise _field_error("bands", "m_min", f"must be >= 1, got {m_min}")
    if m_max > 64:
        raise _field_error("bands", "m_max", f"must be <= 64, got {m_max}")
    if m_max < m_min:
        raise _field_error("bands", "m_max", f"must be >= m_min={m_min}, got {m_max}")
    K = _get(cp, "bands", "truncation", int)
    if overrides.get("truncation") is not None:
        K = overrides["truncation"]
    need = 4 * (2 * m_max + 2)
    if K is None:
        K = max(default_truncation(2 * m_max + 2), need)
    if K < need:
        raise _field_error("bands", "truncation", f"must be >= 4*(2*m_max+2) = {need}, got {K}")
    M1 = _get(cp, "bands", "series_truncation", int)
    if M1 is not None and M1 < 1:
        raise _field_error("bands", "series_truncation", "must be >= 1")

    eig = _get(cp, "tolerances", "eigen", float, 1e-10)
    ode = _get(cp, "tolerances", "ode", float, 1e-10)
    qt = _get(cp, "tolerances", "quadrature", float, 1e-12)
    eps = _get(cp, "tolerances", "epsilon", float, 0.25)
    for key, val in (("eigen", eig), ("quadrature", qt), ("epsilon", eps)):
        if not (val > 0 and math.isfinite(val)):
            raise _field_error("tolerances", key, f"must be positive, got {val}")
    if not 1e-13 <= ode <= 1e-6:
        raise _field_error("tolerances", "ode", f"must lie in [1e-13, 1e-6], got {ode}")

    fmt = overrides.get("format") or _get(cp, "output", "format", str, "csv")
    if fmt not in ("csv", "json"):
        raise _field_error("output", "format", f"expected csv or json, got {fmt!r}")
    out = overrides.get("out") or _get(cp, "output", "path", str)
    if out == "-":
        out = None
    return RunConfig(q, bcs, m_min, m_max, K, M1, eig, ode, qt, eps, fmt, out)


# ---------------------------------------------------------------------------
# tables


class Section:
    def __init__(self, name, columns):
        self.name = name
        self.columns = list(columns)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: {len(values)} values for {len(self.columns)} columns")
        self.rows.append([_clean(v) for v in values])


def _clean(v):
    if isinstance(v, BC):
        return v.value
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    v = float(v) + 0.0  # no negative zero in the output
    return None if not math.isfinite(v) else v


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def render(sections, fmt):
    if fmt == "json":
        doc = {s.name: [dict(zip(s.columns, row)) for row in s.rows] for s in sections}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    for i, s in enumerate(sections):
        if i:
            buf.write("\n")
        buf.write(f"# {s.name}\n")
        buf.write(",".join(s.columns) + "\n")
        for row in s.rows:
            buf.write(",".join(_csv_cell(v) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands


def _ms(cfg):
    return range(cfg.m_min, cfg.m_max + 1)


def _pairs(cfg, bc):
    return band_spectrum(cfg.potential, bc, cfg.m_max, cfg.truncation, m_min=cfg.m_min)


def _table(cfg, bc):
    N = band_frequency(bc, cfg.m_max)
    width = cfg.series_truncation or default_series_width(cfg.potential, N)
    return fourier_table(cfg.potential, width)


def run_coeffs(cfg):
    sec = Section("coeffs", ["bc", "m", "N", "c_re", "c_im", "c_abs", "rho", "rho_argmax"])
    for bc in cfg.bcs:
        for m in _ms(cfg):
            N = band_frequency(bc, m)
            c = fourier_coefficient(cfg.potential, N)
            r = rho(cfg.potential, m, N=N)
            sec.add(bc, m, N, c.real, c.imag, abs(c), r.value, r.argmax_x)
    return [sec]


def run_spectrum(cfg):
    sec = Section("spectrum", ["bc", "m", "N", "center", "method", "lower", "upper", "gap", "degenerate", "isolated"])
    for bc in cfg.bcs:
        for p in _pairs(cfg, bc):
            s = refine_pair_shooting(cfg.potential, p, cfg.eigen_tol, cfg.ode_tol)
            for e in (p, s):
                sec.add(bc, p.band.m, p.band.N, p.band.center, e.method, e.lower, e.upper, e.gap, e.degenerate, p.isolated)
    return [sec]


def run_gaps(cfg):
    rows = Section(
        "gaps",
        ["bc", "m", "N", "ell", "c_abs", "normalized_half", "normalized_full", "residual", "rho", "flagged"],
    )
    fit = Section("gaps_fit", ["bc", "slope_scaled_residual", "max_half_deviation"])
    simple = Section("simplicity", ["bc", "m", "simple", "gap", "threshold", "margin", "claimed"])
    for bc in cfg.bcs:
        pairs = _pairs(cfg, bc)
        table = _table(cfg, bc)
        rep = gap_report(pairs, table, cfg.potential)
        for r in rep.rows:
            rows.add(bc, r.m, r.N, r.ell, r.c_abs, r.normalized_half, r.normalized_full, r.residual, r.rho, r.flagged)
        fit.add(bc, rep.slope, rep.max_half_deviation)
        results, _ = simplicity_check(pairs, _ms(cfg), table, cfg.potential, cfg.eigen_tol)
        for s in results:
            simple.add(bc, s.m, s.simple, s.gap, s.threshold, s.margin, s.claimed)
    return [rows, fit, simple]


def run_asym(cfg):
    asym = Section(
        "asym",
        ["bc", "m", "N", "center", "c_abs", "rho", "lower", "upper", "residual_1", "residual_2",
         "scaled_1", "scaled_2", "second_order_error", "leading_error",
         "a_re", "a_im", "b_re", "b_im", "r_bound", "tail_bound"],
    )
    fit = Section(
        "asym_fit",
        ["bc", "slope_1", "slope_2", "scaled_ratio_1", "scaled_ratio_2", "second_order_wins"],
    )
    cond = Section("conditions", ["bc", "m", "rho", "c_abs", "ratio_main", "ratio_sim", "eps_margin", "flagged"])
    verdict = Section(
        "condition_verdicts",
        ["bc", "maincon", "c1", "c2", "maincon_slope", "sim_min", "sim_max", "eps_min", "inapplicable"],
    )
    for bc in cfg.bcs:
        pairs = _pairs(cfg, bc)
        table = _table(cfg, bc)
        rep = asymptotic_report(cfg.potential, _ms(cfg), bc, cfg.truncation, pairs)
        for r in rep.rows:
            st = series_terms(table, r.m, M1=cfg.series_truncation, bc=bc)
            s1 = r.residual_1 * r.m / r.rho if r.rho > 0 else None
            s2 = r.residual_2 * r.m / r.rho if r.rho > 0 else None
            asym.add(
                bc, r.m, r.N, r.center, r.c_abs, r.rho, r.lower, r.upper, r.residual_1, r.residual_2,
                s1, s2, r.second_order_error, r.leading_error,
                st.a_val.real, st.a_val.imag, st.b_val.real, st.b_val.imag, st.r_bound, st.tail_bound,
            )
        fit.add(bc, *rep.slopes, *rep.scaled_ratio, rep.second_order_wins)
        cr = condition_report(cfg.potential, _ms(cfg), cfg.epsilon, bc)
        for i, m in enumerate(cr.m_range):
            cond.add(bc, m, cr.rho[i], cr.c_abs[i], cr.ratio_main[i], cr.ratio_sim[i], cr.eps_margin[i], cr.flagged[i])
        t = cr.trends
        verdict.add(
            bc, cr.verdicts.get("maincon"), cr.verdicts.get("c1"), cr.verdicts.get("c2"),
            t.get("maincon_slope"), t.get("sim_min"), t.get("sim_max"), t.get("eps_min"), cr.inapplicable,
        )
    return [asym, fit, cond, verdict]


def run_identities(cfg):
    sec = Section(
        "identities",
        ["m", "name", "sum_re", "sum_im", "integral_re", "integral_im", "abs_diff",
         "literal_re", "literal_im", "boundary_abs"],
    )
    q = cfg.potential
    if not isinstance(q.form, pot.TrigPolynomial):
        raise ConfigError("[potential]: identities need a trigonometric-polynomial potential")
    table = fourier_table(q, max(q.form.degree, 1))
    for m in _ms(cfg):
        for r in check_all(table, m):
            sec.add(
                m, r.name, r.sum_value.real, r.sum_value.imag, r.integral_value.real, r.integral_value.imag,
                r.abs_diff, r.literal_sum.real, r.literal_sum.imag, abs(r.boundary),
            )
    return [sec]


def run_report(cfg):
    out = run_coeffs(cfg) + run_spectrum(cfg) + run_gaps(cfg) + run_asym(cfg)
    if isinstance(cfg.potential.form, pot.TrigPolynomial):
        out += run_identities(cfg)
    return out


RUNNERS = {
    "coeffs": run_coeffs,
    "spectrum": run_spectrum,
    "gaps": run_gaps,
    "asym": run_asym,
    "identities": run_identities,
    "report": run_report,
}


def run(subcommand: str, cfg: RunConfig) -> str:
    return render(RUNNERS[subcommand](cfg), cfg.fmt)


def build_parser():
    parser = argparse.ArgumentParser(prog="hillgap", description="Band edges and gap asymptotics for Hill's equation.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="INI file with [potential] [bands] [tolerances] [output] sections")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--m-range", help="band range a:b, overrides [bands]")
    parser.add_argument("--truncation", type=int, help="Galerkin half-width K, overrides [bands]")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"format": args.format, "out": args.out, "truncation": args.truncation}
        if args.m_range:
            overrides["m_range"] = parse_m_range(args.m_range)
        cfg = load_config(args.config, overrides)
        text = run(args.subcommand, cfg)
    except NumericalError as exc:
        print(f"hillgap: numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except HillGapError as exc:
        print(f"hillgap: config error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
