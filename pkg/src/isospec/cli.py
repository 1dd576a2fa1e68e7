"""Command-line entry point.

Every experiment runs behind one `isospec` command with a validated,
hash-stamped configuration.  All outputs are deterministic: rerunning a
subcommand with the same config produces byte-identical files.

Exit codes: 0 all requested checks pass (or are not applicable), 2 an
invariant check failed, 3 configuration error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import functools
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .dd import to_decimal
from .envelopes import AgmonWindow, agmon_study
from .experiments import (DEFAULT_H_GRID, MAX_SWEEP_INDEX, VariationFamily,
                          alpha_free_pair, beta_free_pair, fit_rate,
                          fundamental_theorem_check, hadamard_check,
                          rescaling_convergence, superpoly_agreement, sweep)
from .hermite import companion_roots, recurrence_roots, root_bound
from .potentials import (HARMONIC, BumpSpec, check_non_isometric)
from .schrodinger import (DEFAULT_N, EIGENVALUE_TOL, RESIDUAL_TOL, GridSpec,
                          choose_domain, spectrum)
from .svgplot import Series, line_plot

SCHEMA_VERSION = 1

HADAMARD_RTOL = 1e-5
FTC_RTOL = 1e-6
ROUTE_AGREEMENT_TOL = 1e-12
SUPERPOLY_FLOOR = 6.0
# pi^(-1/4) e^(-1/2): scaled harmonic ground-state value at its turning point
HARMONIC_BOUNDARY = 0.4555806720113325
HARMONIC_BOUNDARY_RTOL = 1e-6
RESCALE_ZERO_TOL = 1e-6

SUBCOMMANDS = ("potential", "spectrum", "sweep", "fit", "hadamard",
               "rescale", "agmon", "hermite", "all")


class ConfigError(Exception):
    """Validation failures, each message prefixed with its field path."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; serialized into every output header.

    An amplitude of exactly 0 removes that bump (degenerate controls).
    half_width=None lets the solver pick the domain per h.  The seed is
    reserved: every computation is deterministic, but the field is kept so
    configs stay forward-compatible and hashes stay meaningful.
    """

    alpha_support: tuple[float, float] = (1.1, 1.9)
    alpha_amplitude: float = 0.5
    beta_support: tuple[float, float] = (3.1, 3.9)
    beta_amplitude: float = 1.0
    h_grid: tuple[float, ...] = DEFAULT_H_GRID
    j_max: int = 3
    n: int = DEFAULT_N
    half_width: float | None = None
    delta: float = 0.2
    window_r: float = 2.5
    window_R: float = 4.5
    eigenvalue_tol: float = EIGENVALUE_TOL
    residual_tol: float = RESIDUAL_TOL
    domain_target: float = 1e-30
    side: str = "plus"
    hadamard_h: float = 0.5
    hadamard_j: int = 0
    hadamard_t: float = 0.5
    hadamard_dt: float = 1e-3
    ftc_nodes: int = 16
    hermite_j_max: int = 50
    rescale_interval: tuple[float, float] = (-4.0, 4.0)
    out_dir: str = "runs"
    formats: tuple[str, ...] = ("csv", "json", "svg")
    jobs: int | None = None
    seed: int = 0


def validate_config(cfg: RunConfig) -> list[str]:
    errors = []

    def bad(field: str, msg: str) -> None:
        errors.append(f"{field}: {msg}")

    for name, support in (("alpha_support", cfg.alpha_support),
                          ("beta_support", cfg.beta_support)):
        if len(support) != 2:
            bad(name, "needs exactly [lo, hi]")
        elif not support[0] < support[1]:
            bad(name, "needs lo < hi")
        elif support[0] <= 0.0:
            bad(f"{name}[0]", "bump support must sit right of the origin")
    for name, amp in (("alpha_amplitude", cfg.alpha_amplitude),
                      ("beta_amplitude", cfg.beta_amplitude)):
        if amp < 0.0:
            bad(name, "must be >= 0 (0 removes the bump)")
    if not cfg.h_grid:
        bad("h_grid", "must be nonempty")
    else:
        for i, h in enumerate(cfg.h_grid):
            if not h > 0.0:
                bad(f"h_grid[{i}]", "must be positive")
        if any(a <= b for a, b in zip(cfg.h_grid, cfg.h_grid[1:])):
            bad("h_grid", "must be strictly descending")
    if not isinstance(cfg.j_max, int) or not 0 <= cfg.j_max <= MAX_SWEEP_INDEX:
        bad("j_max", f"must be an integer in [0, {MAX_SWEEP_INDEX}]")
    if not isinstance(cfg.n, int) or cfg.n < 8:
        bad("n", "must be an integer >= 8")
    if cfg.half_width is not None and not cfg.half_width > 0.0:
        bad("half_width", "must be positive when given")
    if not 0.0 < cfg.delta < 1.0:
        bad("delta", "must lie in (0, 1)")
    if not 0.0 < cfg.window_r < cfg.window_R:
        bad("window_r", "needs 0 < window_r < window_R")
    for name, tol in (("eigenvalue_tol", cfg.eigenvalue_tol),
                      ("residual_tol", cfg.residual_tol),
                      ("domain_target", cfg.domain_target)):
        if not tol > 0.0:
            bad(name, "must be positive")
    if cfg.side not in ("plus", "minus"):
        bad("side", "must be 'plus' or 'minus'")
    if not 0 <= cfg.hadamard_j <= MAX_SWEEP_INDEX:
        bad("hadamard_j", f"must be in [0, {MAX_SWEEP_INDEX}]")
    if not cfg.hadamard_h > 0.0:
        bad("hadamard_h", "must be positive")
    if not cfg.hadamard_dt > 0.0:
        bad("hadamard_dt", "must be positive")
    elif not (0.0 < cfg.hadamard_t - cfg.hadamard_dt
              and cfg.hadamard_t + cfg.hadamard_dt < 1.0):
        bad("hadamard_t", "needs 0 < t - dt and t + dt < 1")
    if cfg.ftc_nodes < 8:
        bad("ftc_nodes", "must be >= 8")
    if not (isinstance(cfg.hermite_j_max, int)
            and 2 <= cfg.hermite_j_max <= 60):
        bad("hermite_j_max", "must be an integer in [2, 60]")
    if len(cfg.rescale_interval) != 2:
        bad("rescale_interval", "needs exactly [lo, hi]")
    elif not cfg.rescale_interval[0] < cfg.rescale_interval[1]:
        bad("rescale_interval", "needs lo < hi")
    if not cfg.formats:
        bad("formats", "must request at least one format")
    for i, fmt in enumerate(cfg.formats):
        if fmt not in ("csv", "json", "svg"):
            bad(f"formats[{i}]", f"unknown format {fmt!r}")
    if cfg.jobs is not None and (not isinstance(cfg.jobs, int) or cfg.jobs < 1):
        bad("jobs", "must be a positive integer when given")
    if not isinstance(cfg.seed, int):
        bad("seed", "must be an integer")
    if not cfg.out_dir:
        bad("out_dir", "must be nonempty")
    return errors


_TUPLE_FIELDS = ("alpha_support", "beta_support", "h_grid",
                 "rescale_interval", "formats")


def config_json(cfg: RunConfig) -> str:
    return json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"))


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(config_json(cfg).encode()).hexdigest()


def load_config(path: str | None, overrides: dict) -> RunConfig:
    values = asdict(RunConfig())
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except OSError as exc:
            raise ConfigError([f"config: cannot read {path}: {exc}"])
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config: invalid JSON in {path}: {exc}"])
        if not isinstance(data, dict):
            raise ConfigError([f"config: {path} must hold a JSON object"])
        unknown = sorted(set(data) - set(values))
        if unknown:
            raise ConfigError([f"{k}: unknown config field" for k in unknown])
        values.update(data)
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in _TUPLE_FIELDS:
        if isinstance(values[key], list):
            values[key] = tuple(values[key])
    cfg = RunConfig(**values)
    errors = validate_config(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


# ---------------------------------------------------------------------------
# shared construction helpers

def build_bumps(cfg: RunConfig) -> tuple[BumpSpec | None, BumpSpec | None]:
    alpha = None if cfg.alpha_amplitude == 0.0 else BumpSpec(
        cfg.alpha_support[0], cfg.alpha_support[1], cfg.alpha_amplitude)
    beta = None if cfg.beta_amplitude == 0.0 else BumpSpec(
        cfg.beta_support[0], cfg.beta_support[1], cfg.beta_amplitude)
    return alpha, beta


def build_pair(cfg: RunConfig):
    alpha, beta = build_bumps(cfg)
    if alpha is not None and beta is not None:
        from .potentials import make_pair
        return make_pair(alpha, beta)
    if alpha is not None:
        return beta_free_pair(alpha)
    if beta is not None:
        return alpha_free_pair(beta)
    return HARMONIC, HARMONIC


def _pick_side(cfg: RunConfig):
    v_minus, v_plus = build_pair(cfg)
    return v_plus if cfg.side == "plus" else v_minus


def _grid_for(cfg: RunConfig, V, h: float) -> GridSpec:
    if cfg.half_width is not None:
        return GridSpec(cfg.half_width, cfg.n)
    return choose_domain(V, h, cfg.j_max, cfg.domain_target, cfg.n)


def _f(x) -> str:
    return repr(float(x))


def _check(name: str, status: str, detail: str) -> dict:
    return {"name": name, "status": status, "detail": detail}


@dataclass
class ModuleResult:
    name: str
    results: dict
    checks: list[dict]
    csv_columns: tuple[str, ...]
    csv_rows: list[tuple[str, ...]]
    svg: str | None = None

    @property
    def passed(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)


@functools.lru_cache(maxsize=4)
def _sweep_records(cfg: RunConfig):
    return sweep(build_pair(cfg), cfg.h_grid, cfg.j_max, n=cfg.n,
                 tol=cfg.eigenvalue_tol, target=cfg.domain_target,
                 jobs=cfg.jobs)


# ---------------------------------------------------------------------------
# subcommand runners

def run_potential(cfg: RunConfig) -> ModuleResult:
    v_minus, v_plus = build_pair(cfg)
    span = max(4.0, v_minus.support_radius, v_plus.support_radius) + 1.0
    xs = np.linspace(-span, span, 801)
    ym = v_minus.eval_float(xs)
    yp = v_plus.eval_float(xs)
    rows = [(_f(x), _f(a), _f(b)) for x, a, b in zip(xs, ym, yp)]
    alpha, beta = build_bumps(cfg)
    checks = []
    results = {"span": span, "samples": len(xs)}
    if alpha is not None and beta is not None:
        rep = check_non_isometric(v_minus, v_plus)
        ok = rep.max_direct_diff > 0.0 and rep.max_reflected_diff > 0.0
        checks.append(_check(
            "non_isometric", "pass" if ok else "fail",
            f"max|V- - V+|={rep.max_direct_diff:.6e}, "
            f"max|V-(-x) - V+(x)|={rep.max_reflected_diff:.6e}"))
        results["max_direct_diff"] = rep.max_direct_diff
        results["max_reflected_diff"] = rep.max_reflected_diff
    else:
        checks.append(_check("non_isometric", "not applicable",
                             "degenerate pair (a bump is absent)"))
    svg = line_plot(
        [Series(tuple(xs), tuple(ym), "V-"),
         Series(tuple(xs), tuple(yp), "V+", dashed=True)],
        title="potential pair", xlabel="x", ylabel="V(x)")
    return ModuleResult("potential", results, checks,
                        ("x", "v_minus", "v_plus"), rows, svg)


def run_spectrum(cfg: RunConfig) -> ModuleResult:
    V = _pick_side(cfg)
    rows = []
    per_h = {}
    for h in cfg.h_grid:
        g = _grid_for(cfg, V, h)
        spec = spectrum(V, h, cfg.j_max, g, cfg.eigenvalue_tol)
        entries = []
        for j, e, err in spec.entries:
            ref = h * (2 * j + 1)
            rows.append((_f(h), str(j), to_decimal(e), _f(err), _f(ref),
                         _f(float(e) - ref)))
            entries.append({"j": j, "eigenvalue": to_decimal(e),
                            "err": float(err)})
        per_h[_f(h)] = entries
    results = {"side": cfg.side, "per_h": per_h}
    return ModuleResult(
        "spectrum", results, [],
        ("h", "j", "eigenvalue", "err", "harmonic_ref", "harmonic_deviation"),
        rows)


def _pair_config(cfg: RunConfig) -> dict:
    alpha, beta = build_bumps(cfg)
    def enc(b):
        if b is None:
            return None
        return {"support": [b.support_lo, b.support_hi],
                "amplitude": b.amplitude}
    return {"alpha": enc(alpha), "beta": enc(beta)}


def run_sweep(cfg: RunConfig) -> ModuleResult:
    records = _sweep_records(cfg)
    rows = [(_f(r.h), str(r.j), to_decimal(r.e_plus), to_decimal(r.e_minus),
             to_decimal(r.gap), _f(r.err_plus), _f(r.err_minus),
             _f(r.gap_err), str(r.usable).lower(), _f(r.harmonic_ref))
            for r in records]
    checks = []
    per_j = {}
    for j in range(cfg.j_max + 1):
        at_j = [r for r in records if r.j == j]
        usable = [r for r in at_j if r.usable]
        per_j[str(j)] = {"gaps": [
            {"h": r.h, "gap": float(r.gap), "gap_err": r.gap_err,
             "usable": r.usable} for r in at_j]}
        name = f"gap_positive[j={j}]"
        if not usable:
            checks.append(_check(name, "not applicable",
                                 "no gap clears the noise floor"))
        else:
            negative = [r for r in usable if float(r.gap) <= 0.0]
            if negative:
                worst = min(negative, key=lambda r: float(r.gap))
                checks.append(_check(
                    name, "fail",
                    f"nonpositive usable gap at (h={worst.h}, j={j}): "
                    f"{float(worst.gap):.6e}"))
            else:
                lo = min(float(r.gap) for r in usable)
                checks.append(_check(
                    name, "pass",
                    f"{len(usable)} usable gaps, min {lo:.6e}"))
    svg = None
    series = []
    for j in range(cfg.j_max + 1):
        pts = [(1.0 / r.h, math.log10(abs(float(r.gap))))
               for r in records if r.j == j and float(r.gap) != 0.0]
        if len(pts) >= 2:
            series.append(Series(tuple(p[0] for p in pts),
                                 tuple(p[1] for p in pts),
                                 f"j={j}", markers=True))
    if series:
        svg = line_plot(series, title="spectral gap decay",
                        xlabel="1/h", ylabel="log10 |gap|")
    results = {"pair_config": _pair_config(cfg),
               "h_grid": list(cfg.h_grid), "per_j": per_j}
    return ModuleResult(
        "sweep", results, checks,
        ("h", "j", "e_plus", "e_minus", "gap", "err_plus", "err_minus",
         "gap_err", "usable", "harmonic_ref"), rows, svg)


def run_fit(cfg: RunConfig) -> ModuleResult:
    records = _sweep_records(cfg)
    alpha, beta = build_bumps(cfg)
    checks = []
    rows = []
    per_j = {}
    orders = None
    if len(cfg.h_grid) >= 4:
        orders = superpoly_agreement(records)
    fit_series = []
    bracket_info = None
    for j in range(cfg.j_max + 1):
        entry = {"gaps": [{"h": r.h, "gap": float(r.gap), "usable": r.usable}
                          for r in records if r.j == j]}
        if orders is not None:
            entry["gap_orders"] = [
                {"h_coarse": p.h_coarse, "h_fine": p.h_fine, "order": p.order}
                for p in orders[j].gap_orders]
            numeric = [p.order for p in orders[j].gap_orders
                       if p.order is not None]
            name = f"gap_order_monotone[j={j}]"
            if len(numeric) < 2:
                checks.append(_check(name, "not applicable",
                                     "fewer than 2 usable order estimates"))
            else:
                increasing = all(a < b for a, b in zip(numeric, numeric[1:]))
                deep = numeric[-1] > SUPERPOLY_FLOOR
                status = "pass" if increasing and deep else "fail"
                checks.append(_check(
                    name, status,
                    f"orders {['%.2f' % o for o in numeric]}, "
                    f"floor {SUPERPOLY_FLOOR}"))
        if alpha is None or beta is None:
            checks.append(_check(f"fit[j={j}]", "not applicable",
                                 "degenerate pair has no decay rate"))
            per_j[str(j)] = entry
            continue
        try:
            fit = fit_rate(records, j, alpha, beta)
        except ValueError as exc:
            msg = str(exc)
            status = ("fail" if "nonpositive usable gap" in msg
                      else "not applicable")
            checks.append(_check(f"fit[j={j}]", status, msg))
            per_j[str(j)] = entry
            continue
        band_lo, band_hi = fit.band
        entry["fit"] = {"slope": fit.slope, "intercept": fit.intercept,
                        "r_squared": fit.r_squared, "rate": fit.rate,
                        "n_points": fit.n_points,
                        "h_range": list(fit.h_range)}
        entry["bracket"] = {"c_lo": fit.c_lo, "c_hi": fit.c_hi,
                            "band": [band_lo, band_hi]}
        entry["in_band"] = fit.in_band
        checks.append(_check(
            f"fit_r_squared[j={j}]",
            "pass" if fit.r_squared >= 0.999 else "fail",
            f"R^2 = {fit.r_squared:.6f}"))
        checks.append(_check(
            f"fit_rate_in_band[j={j}]",
            "pass" if fit.in_band else "fail",
            f"rate {fit.rate:.4f} vs band [{band_lo:.4f}, {band_hi:.4f}]"))
        rows.append((str(j), str(fit.n_points), _f(fit.slope),
                     _f(fit.intercept), _f(fit.r_squared), _f(fit.rate),
                     _f(fit.c_lo), _f(fit.c_hi), _f(band_lo), _f(band_hi),
                     str(fit.in_band).lower()))
        usable = [r for r in records if r.j == j and r.usable
                  and float(r.gap) > 0.0]
        xs = tuple(1.0 / r.h for r in usable)
        ys = tuple(math.log10(float(r.gap)) for r in usable)
        fit_series.append(Series(xs, ys, f"j={j} data", markers=True))
        line = tuple((fit.slope * x + fit.intercept) / math.log(10.0)
                     for x in xs)
        fit_series.append(Series(xs, line, f"j={j} fit", dashed=True))
        if bracket_info is None:
            bracket_info = (fit, xs)
        per_j[str(j)] = entry
    svg = None
    if fit_series:
        fit0, xs = bracket_info
        anchor = fit0.intercept / math.log(10.0)
        for label, slope in (("0.8 c_lo slope", -0.8 * fit0.c_lo),
                             ("1.2 c_hi slope", -1.2 * fit0.c_hi)):
            ys = tuple(anchor + slope * x / math.log(10.0) for x in xs)
            fit_series.append(Series(xs, ys, label, color="#999999",
                                     dashed=True))
        svg = line_plot(fit_series, title="gap decay-rate fit",
                        xlabel="1/h", ylabel="log10 gap")
    results = {"pair_config": _pair_config(cfg),
               "h_grid": list(cfg.h_grid), "per_j": per_j}
    return ModuleResult(
        "fit", results, checks,
        ("j", "n_points", "slope", "intercept", "r_squared", "rate",
         "c_lo", "c_hi", "band_lo", "band_hi", "in_band"), rows, svg)


def run_hadamard(cfg: RunConfig) -> ModuleResult:
    alpha, beta = build_bumps(cfg)
    checks = []
    rows = []
    reports = {}
    if alpha is None:
        checks.append(_check("hadamard", "not applicable",
                             "variation family needs the inner bump"))
        return ModuleResult(
            "hadamard", {"reports": reports}, checks,
            ("kind", "orientation", "h", "j", "t", "dt", "nodes",
             "derivative_or_diff", "quadrature", "rel_err"), rows)
    for orient in (1, -1):
        fam = VariationFamily(alpha, beta, orientation=orient)
        rep = hadamard_check(fam, cfg.hadamard_h, cfg.hadamard_j,
                             cfg.hadamard_t, cfg.hadamard_dt, n=cfg.n,
                             tol=cfg.eigenvalue_tol, ef_tol=cfg.residual_tol,
                             target=cfg.domain_target)
        rows.append(("hadamard", f"{orient:+d}", _f(rep.h), str(rep.j),
                     _f(rep.t), _f(rep.dt), "",
                     to_decimal(rep.fd_derivative),
                     to_decimal(rep.quadrature_derivative), _f(rep.rel_err)))
        checks.append(_check(
            f"hadamard_rel_err[orientation={orient:+d}]",
            "pass" if rep.rel_err <= HADAMARD_RTOL else "fail",
            f"rel_err {rep.rel_err:.3e} vs {HADAMARD_RTOL}"))
        reports[f"hadamard[{orient:+d}]"] = {
            "fd_derivative": to_decimal(rep.fd_derivative),
            "quadrature_derivative": to_decimal(rep.quadrature_derivative),
            "rel_err": rep.rel_err}
        ftc = fundamental_theorem_check(fam, cfg.hadamard_h, cfg.hadamard_j,
                                        cfg.ftc_nodes, n=cfg.n,
                                        tol=cfg.eigenvalue_tol,
                                        ef_tol=cfg.residual_tol,
                                        target=cfg.domain_target)
        rows.append(("ftc", f"{orient:+d}", _f(ftc.h), str(ftc.j), "", "",
                     str(ftc.n_steps), to_decimal(ftc.endpoint_diff),
                     to_decimal(ftc.integrated_derivative), _f(ftc.rel_err)))
        checks.append(_check(
            f"ftc_rel_err[orientation={orient:+d}]",
            "pass" if ftc.rel_err <= FTC_RTOL else "fail",
            f"rel_err {ftc.rel_err:.3e} vs {FTC_RTOL}"))
        reports[f"ftc[{orient:+d}]"] = {
            "endpoint_diff": to_decimal(ftc.endpoint_diff),
            "integrated_derivative": to_decimal(ftc.integrated_derivative),
            "rel_err": ftc.rel_err}
    results = {"pair_config": _pair_config(cfg), "h": cfg.hadamard_h,
               "j": cfg.hadamard_j, "t": cfg.hadamard_t,
               "dt": cfg.hadamard_dt, "nodes": cfg.ftc_nodes,
               "reports": reports}
    return ModuleResult(
        "hadamard", results, checks,
        ("kind", "orientation", "h", "j", "t", "dt", "nodes",
         "derivative_or_diff", "quadrature", "rel_err"), rows)


def run_rescale(cfg: RunConfig) -> ModuleResult:
    V = _pick_side(cfg)
    alpha, beta = build_bumps(cfg)
    degenerate = alpha is None and beta is None
    checks = []
    rows = []
    per_j = {}
    series = []
    for j in range(min(cfg.j_max, 2) + 1):
        recs = rescaling_convergence(V, j, cfg.h_grid,
                                     interval=cfg.rescale_interval, n=cfg.n,
                                     tol=cfg.eigenvalue_tol,
                                     ef_tol=cfg.residual_tol,
                                     target=cfg.domain_target)
        for r in recs:
            rows.append((str(j), _f(r.h), _f(r.l2_diff), _f(r.linf_diff)))
        per_j[str(j)] = [{"h": r.h, "l2_diff": r.l2_diff,
                          "linf_diff": r.linf_diff} for r in recs]
        l2 = [r.l2_diff for r in recs]
        linf = [r.linf_diff for r in recs]
        if degenerate:
            checks.append(_check(
                f"rescale_harmonic_zero[j={j}]",
                "pass" if max(max(l2), max(linf)) <= RESCALE_ZERO_TOL
                else "fail",
                f"max l2 {max(l2):.3e}, max linf {max(linf):.3e} "
                f"vs {RESCALE_ZERO_TOL}"))
        elif len(recs) < 2:
            checks.append(_check(f"rescale_decreasing[j={j}]",
                                 "not applicable", "needs at least 2 h"))
        else:
            ok = (all(a > b for a, b in zip(l2, l2[1:]))
                  and all(a > b for a, b in zip(linf, linf[1:])))
            checks.append(_check(
                f"rescale_decreasing[j={j}]", "pass" if ok else "fail",
                f"l2 {['%.3e' % v for v in l2]}"))
        if len(recs) >= 2:
            series.append(Series(tuple(r.h for r in recs),
                                 tuple(math.log10(max(r.l2_diff, 1e-300))
                                       for r in recs),
                                 f"j={j}", markers=True))
    svg = None
    if series:
        svg = line_plot(series, title="rescaled eigenfunction distance",
                        xlabel="h", ylabel="log10 L2 difference")
    results = {"pair_config": _pair_config(cfg), "side": cfg.side,
               "interval": list(cfg.rescale_interval), "per_j": per_j}
    return ModuleResult("rescale", results, checks,
                        ("j", "h", "l2_diff", "linf_diff"), rows, svg)


def run_agmon(cfg: RunConfig) -> ModuleResult:
    V = _pick_side(cfg)
    alpha, beta = build_bumps(cfg)
    window = AgmonWindow(cfg.window_r, cfg.window_R, cfg.delta)
    js = tuple(range(cfg.j_max + 1))
    study = agmon_study(V, js, cfg.h_grid, window,
                        grid_for=lambda h: _grid_for(cfg, V, h),
                        tol=cfg.eigenvalue_tol)
    rows = [(_f(r.h), str(r.j), _f(r.c_req), _f(r.d_req),
             _f(r.boundary_left), _f(r.boundary_right),
             _f(r.barrier_min_margin), _f(r.window_r)) for r in study.rows]
    checks = []
    h_ref = cfg.h_grid[0]
    per_j = {}
    for j in js:
        at_j = [r for r in study.rows if r.j == j]
        ref = next(r for r in at_j if r.h == h_ref)
        c_max = max(r.c_req for r in at_j)
        d_min = min(r.d_req for r in at_j)
        checks.append(_check(
            f"envelope_upper_bounded[j={j}]",
            "pass" if c_max <= 3.0 * ref.c_req else "fail",
            f"max C_req {c_max:.6f} vs 3x reference {3.0 * ref.c_req:.6f}"))
        checks.append(_check(
            f"envelope_lower_positive[j={j}]",
            "pass" if d_min >= ref.d_req / 3.0 else "fail",
            f"min D_req {d_min:.6f} vs reference/3 {ref.d_req / 3.0:.6f}"))
        b_min = min(min(r.boundary_left, r.boundary_right) for r in at_j)
        b_ref = min(ref.boundary_left, ref.boundary_right)
        checks.append(_check(
            f"boundary_above_half[j={j}]",
            "pass" if b_min >= 0.5 * b_ref else "fail",
            f"min boundary {b_min:.6f} vs half reference {0.5 * b_ref:.6f}"))
        checks.append(_check(
            f"barrier_holds[j={j}]",
            "pass" if all(r.barrier_min_margin > 0.0 for r in at_j)
            else "fail",
            f"min margin {min(r.barrier_min_margin for r in at_j):.6e}"))
        per_j[str(j)] = [
            {"h": r.h, "c_req": r.c_req, "d_req": r.d_req,
             "boundary_left": r.boundary_left,
             "boundary_right": r.boundary_right,
             "barrier_min_margin": r.barrier_min_margin,
             "window_r": r.window_r} for r in at_j]
    if alpha is None and beta is None and 0 in js:
        ref = next(r for r in study.rows if r.j == 0 and r.h == h_ref)
        rel = abs(ref.boundary_left - HARMONIC_BOUNDARY) / HARMONIC_BOUNDARY
        checks.append(_check(
            "harmonic_boundary_closed_form[j=0]",
            "pass" if rel <= HARMONIC_BOUNDARY_RTOL else "fail",
            f"rel err {rel:.3e} vs {HARMONIC_BOUNDARY_RTOL}"))
    results = {"pair_config": _pair_config(cfg), "side": cfg.side,
               "window": {"r": cfg.window_r, "R": cfg.window_R,
                          "delta": cfg.delta},
               "per_j": per_j,
               "boundary_exponents": [
                   {"j": j, "exponent": s}
                   for j, s in study.boundary_exponents]}
    return ModuleResult(
        "agmon", results, checks,
        ("h", "j", "c_req", "d_req", "boundary_left", "boundary_right",
         "barrier_min_margin", "window_r"), rows)


def run_hermite(cfg: RunConfig) -> ModuleResult:
    rows = []
    worst_margin = math.inf
    worst_diff = 0.0
    ordering_ok = True
    for j in range(2, cfg.hermite_j_max + 1):
        comp = sorted(companion_roots(j), key=float)
        rec = sorted(recurrence_roots(j), key=float)
        diff = max(abs(float(a - b)) for a, b in zip(comp, rec))
        m = max(abs(float(r)) for r in comp)
        tight, loose = root_bound(j)
        tight_f, loose_f = float(tight), float(loose)
        ordering_ok = ordering_ok and m <= tight_f <= loose_f
        worst_margin = min(worst_margin, tight_f - m)
        worst_diff = max(worst_diff, diff)
        rows.append((str(j), _f(m), _f(tight_f), _f(loose_f), _f(diff)))
    checks = [
        _check("root_bound_ordering",
               "pass" if ordering_ok else "fail",
               f"min(tight - max_root) = {worst_margin:.6e}"),
        _check("route_agreement",
               "pass" if worst_diff <= ROUTE_AGREEMENT_TOL else "fail",
               f"max |companion - recurrence| = {worst_diff:.3e} "
               f"vs {ROUTE_AGREEMENT_TOL}"),
    ]
    results = {"j_range": [2, cfg.hermite_j_max],
               "worst_bound_margin": worst_margin,
               "worst_route_diff": worst_diff}
    return ModuleResult(
        "hermite", results, checks,
        ("j", "max_root", "tight_bound", "loose_bound", "route_diff"), rows)


RUNNERS = {
    "potential": run_potential,
    "spectrum": run_spectrum,
    "sweep": run_sweep,
    "fit": run_fit,
    "hadamard": run_hadamard,
    "rescale": run_rescale,
    "agmon": run_agmon,
    "hermite": run_hermite,
}

ALL_ORDER = ("potential", "hermite", "spectrum", "sweep", "fit", "hadamard",
             "rescale", "agmon")


# ---------------------------------------------------------------------------
# output plumbing

def write_outputs(cfg: RunConfig, mr: ModuleResult) -> list[str]:
    os.makedirs(cfg.out_dir, exist_ok=True)
    digest = config_hash(cfg)
    serialized = config_json(cfg)
    paths = []
    if "csv" in cfg.formats:
        path = os.path.join(cfg.out_dir, f"{mr.name}.csv")
        lines = [f"# schema_version: {SCHEMA_VERSION}",
                 f"# config_sha256: {digest}",
                 f"# config: {serialized}",
                 ",".join(mr.csv_columns)]
        lines.extend(",".join(row) for row in mr.csv_rows)
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        paths.append(path)
    if "json" in cfg.formats:
        path = os.path.join(cfg.out_dir, f"{mr.name}.json")
        doc = {"schema_version": SCHEMA_VERSION, "subcommand": mr.name,
               "config": json.loads(serialized), "config_sha256": digest,
               "results": mr.results, "checks": mr.checks,
               "passed": mr.passed}
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        paths.append(path)
    if "svg" in cfg.formats and mr.svg is not None:
        path = os.path.join(cfg.out_dir, f"{mr.name}.svg")
        header = (f"<!-- schema_version: {SCHEMA_VERSION} "
                  f"config_sha256: {digest} -->\n")
        with open(path, "w", encoding="utf-8") as f:
            f.write(header + mr.svg)
        paths.append(path)
    return paths


def _print_checks(mr: ModuleResult) -> None:
    for c in mr.checks:
        print(f"[{c['status']}] {mr.name}.{c['name']}: {c['detail']}")


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 3)."""

    def error(self, message):
        raise ConfigError([f"arguments: {message}"])


_EPILOGS = {
    "potential": "CSV columns: x, v_minus, v_plus",
    "spectrum": ("CSV columns: h, j, eigenvalue (32 digits), err, "
                 "harmonic_ref, harmonic_deviation"),
    "sweep": ("CSV columns: h, j, e_plus, e_minus, gap (32 digits), "
              "err_plus, err_minus, gap_err, usable, harmonic_ref"),
    "fit": ("CSV columns: j, n_points, slope, intercept, r_squared, rate, "
            "c_lo, c_hi, band_lo, band_hi, in_band"),
    "hadamard": ("CSV columns: kind, orientation, h, j, t, dt, nodes, "
                 "derivative_or_diff, quadrature, rel_err"),
    "rescale": "CSV columns: j, h, l2_diff, linf_diff",
    "agmon": ("CSV columns: h, j, c_req, d_req, boundary_left, "
              "boundary_right, barrier_min_margin, window_r"),
    "hermite": ("CSV columns: j, max_root, tight_bound, loose_bound, "
                "route_diff"),
    "all": "Runs every subcommand and writes summary.json",
}


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", metavar="PATH",
                   help="JSON config file; explicit flags override it")
    g.add_argument("--out-dir", dest="out_dir", help="output directory")
    g.add_argument("--formats", nargs="+", choices=("csv", "json", "svg"),
                   help="output formats to write")
    g.add_argument("--jobs", type=int,
                   help="parallel solver tasks (default: available cores)")
    g.add_argument("--seed", type=int,
                   help="reserved; runs are deterministic")
    p = common.add_argument_group("pair and solver")
    p.add_argument("--alpha-support", dest="alpha_support", nargs=2,
                   type=float, metavar=("LO", "HI"),
                   help="inner bump support")
    p.add_argument("--alpha-amplitude", dest="alpha_amplitude", type=float,
                   help="inner bump amplitude (0 removes it)")
    p.add_argument("--beta-support", dest="beta_support", nargs=2,
                   type=float, metavar=("LO", "HI"),
                   help="outer bump support")
    p.add_argument("--beta-amplitude", dest="beta_amplitude", type=float,
                   help="outer bump amplitude (0 removes it)")
    p.add_argument("--h-grid", dest="h_grid", nargs="+", type=float,
                   metavar="H", help="strictly descending h values")
    p.add_argument("--j-max", dest="j_max", type=int,
                   help=f"largest eigenvalue index (<= {MAX_SWEEP_INDEX})")
    p.add_argument("--n", type=int, help="base grid point count")
    p.add_argument("--half-width", dest="half_width", type=float,
                   help="fixed domain half-width for spectrum/rescale/agmon "
                        "grids (default: chosen per h)")
    p.add_argument("--delta", type=float, help="envelope margin in (0, 1)")
    p.add_argument("--window", dest="window", nargs=2, type=float,
                   metavar=("R_IN", "R_OUT"), help="envelope window radii")
    p.add_argument("--side", choices=("plus", "minus"),
                   help="which member of the pair single-potential "
                        "subcommands use")
    p.add_argument("--eigenvalue-tol", dest="eigenvalue_tol", type=float,
                   help="bisection width target")
    p.add_argument("--residual-tol", dest="residual_tol", type=float,
                   help="eigenfunction residual target")
    p.add_argument("--domain-target", dest="domain_target", type=float,
                   help="tail mass bound for automatic domain choice")

    parser = _Parser(prog="isospec", allow_abbrev=False,
                     description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common], epilog=_EPILOGS[name],
                            allow_abbrev=False,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        if name in ("hadamard", "all"):
            sp.add_argument("--hadamard-h", dest="hadamard_h", type=float,
                            help="h for the variational identities")
            sp.add_argument("--hadamard-j", dest="hadamard_j", type=int,
                            help="eigenvalue index for the identities")
            sp.add_argument("--t", dest="hadamard_t", type=float,
                            help="family parameter for the derivative")
            sp.add_argument("--dt", dest="hadamard_dt", type=float,
                            help="central-difference half step")
            sp.add_argument("--nodes", dest="ftc_nodes", type=int,
                            help="Gauss-Legendre nodes for the t integral")
        if name in ("hermite", "all"):
            sp.add_argument("--jmax", dest="hermite_j_max", type=int,
                            help="largest Hermite degree (2..60)")
        if name in ("rescale", "all"):
            sp.add_argument("--interval", dest="rescale_interval", nargs=2,
                            type=float, metavar=("LO", "HI"),
                            help="rescaled comparison interval")
    return parser


_CONFIG_KEYS = tuple(RunConfig.__dataclass_fields__)


def _overrides_from(args: argparse.Namespace) -> dict:
    over = {}
    for key in _CONFIG_KEYS:
        if hasattr(args, key) and getattr(args, key) is not None:
            value = getattr(args, key)
            over[key] = tuple(value) if isinstance(value, list) else value
    if getattr(args, "window", None) is not None:
        over["window_r"], over["window_R"] = args.window
    return over


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 3
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, _overrides_from(args))
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 3

    names = ALL_ORDER if args.subcommand == "all" else (args.subcommand,)
    modules = []
    for name in names:
        try:
            modules.append(RUNNERS[name](cfg))
        except ValueError as exc:
            # a precondition the static validator cannot see (window vs
            # chosen domain, rescale coverage, ...) is still a config error
            print(f"config error: {name}: {exc}", file=sys.stderr)
            return 3
        except RuntimeError as exc:
            print(f"solver failure in {name}: {exc}", file=sys.stderr)
            return 4

    all_paths = []
    for mr in modules:
        _print_checks(mr)
        all_paths.extend(write_outputs(cfg, mr))
    if args.subcommand == "all":
        os.makedirs(cfg.out_dir, exist_ok=True)
        path = os.path.join(cfg.out_dir, "summary.json")
        doc = {"schema_version": SCHEMA_VERSION,
               "config": json.loads(config_json(cfg)),
               "config_sha256": config_hash(cfg),
               "modules": {mr.name: {"passed": mr.passed,
                                     "checks": mr.checks}
                           for mr in modules},
               "passed": all(mr.passed for mr in modules)}
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        all_paths.append(path)
    for path in all_paths:
        print(f"wrote {path}")
    return 0 if all(mr.passed for mr in modules) else 2
