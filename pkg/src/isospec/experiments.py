"""Paired-spectrum experiments: h-sweeps, gap decay-rate fits, variational
derivative identities, and rescaled eigenfunction limits."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dd import ExtendedReal, ext_div, ext_sqrt, vmul, vsub
from .hermite import hermite_function_arrays
from .potentials import (BETA_WINDOW, BumpSpec, PotentialSpec,
                         bump_eval_arrays, tunneling_action)
from .quadrature import gauss_legendre
from .schrodinger import (DEFAULT_N, EIGENVALUE_TOL, RESIDUAL_TOL,
                          choose_domain, eigenfunction_extrapolated,
                          eigenvalue_sequence, extrapolate_sequence)

MAX_SWEEP_INDEX = 5

DEFAULT_H_GRID = tuple(float(x) for x in np.geomspace(1.0, 0.3, 10))

DOMAIN_TARGET = 1e-30

# Bisection leaves each eigenvalue a midpoint error of at most 2*tol per
# grid level; the extrapolation weights sum to < 2.5 in magnitude, so 5*tol
# floors a single eigenvalue and 10*tol floors a difference of two.
EIGENVALUE_ERR_FLOOR = 5.0
GAP_ERR_FLOOR = 10.0


@dataclass(frozen=True)
class SweepRecord:
    """Both eigenvalues at one (h, j), solved on the identical grid.

    The gap e_minus - e_plus keeps its sign: positivity is a claim to test,
    not an invariant of the record.
    """

    h: float
    j: int
    e_plus: ExtendedReal
    e_minus: ExtendedReal
    gap: ExtendedReal
    harmonic_ref: float
    err_plus: float
    err_minus: float
    gap_err: float

    @property
    def usable(self) -> bool:
        """Above the noise floor: |gap| must clear 10x its error estimate."""
        return abs(float(self.gap)) > 10.0 * self.gap_err


def sweep(pair, h_grid, j_max: int, *, n: int = DEFAULT_N,
          tol: float = EIGENVALUE_TOL, target: float = DOMAIN_TARGET,
          levels: int = 3, jobs: int | None = None) -> list[SweepRecord]:
    """One SweepRecord per (h, j), gaps extrapolated directly per level.

    Each (h, j, side) eigenvalue sequence is an independent pure task; they
    run on a thread pool (the bisection kernels drop the GIL) and results
    are aggregated by key, never by completion order.
    """
    v_minus, v_plus = pair
    hs = [float(x) for x in h_grid]
    if not hs or any(x <= 0.0 for x in hs):
        raise ValueError("h grid must be positive")
    if any(a <= b for a, b in zip(hs, hs[1:])):
        raise ValueError("h grid must be strictly descending")
    if not isinstance(j_max, int) or not 0 <= j_max <= MAX_SWEEP_INDEX:
        raise ValueError(f"j_max must be an integer in [0, {MAX_SWEEP_INDEX}]")

    # v_plus has a bare harmonic left tail, the slowest decay of the two,
    # so its domain choice is conservative for both potentials and keeps
    # the grids identical.
    grids = {h: choose_domain(v_plus, h, j_max, target, n) for h in hs}

    keys = [(h, j, side) for h in hs for j in range(j_max + 1)
            for side in ("minus", "plus")]
    sides = {"minus": v_minus, "plus": v_plus}
    seqs: dict[tuple, list[ExtendedReal]] = {}
    with ThreadPoolExecutor(max_workers=jobs or os.cpu_count() or 1) as ex:
        futures = {key: ex.submit(eigenvalue_sequence, sides[key[2]], key[0],
                                  key[1], grids[key[0]], tol, levels)
                   for key in keys}
        for key, fut in futures.items():
            try:
                seqs[key] = fut.result()
            except Exception as exc:
                raise RuntimeError(
                    f"eigenvalue solve failed at h={key[0]}, j={key[1]} "
                    f"({key[2]} side)") from exc

    records = []
    for h in hs:
        for j in range(j_max + 1):
            seq_m = seqs[(h, j, "minus")]
            seq_p = seqs[(h, j, "plus")]
            e_m, err_m = extrapolate_sequence(seq_m)
            e_p, err_p = extrapolate_sequence(seq_p)
            gap, gap_corr = extrapolate_sequence(
                [m - p for m, p in zip(seq_m, seq_p)])
            records.append(SweepRecord(
                h=h, j=j, e_plus=e_p, e_minus=e_m, gap=gap,
                harmonic_ref=h * (2 * j + 1),
                err_plus=float(err_p) + EIGENVALUE_ERR_FLOOR * tol,
                err_minus=float(err_m) + EIGENVALUE_ERR_FLOOR * tol,
                gap_err=float(gap_corr) + GAP_ERR_FLOOR * tol))
    return records


def beta_free_pair(alpha: BumpSpec) -> tuple[PotentialSpec, PotentialSpec]:
    """Degenerate control: outer bump removed, both sides identical."""
    base = PotentialSpec(((alpha, 1),))
    return base, base


def alpha_free_pair(beta: BumpSpec) -> tuple[PotentialSpec, PotentialSpec]:
    """Degenerate control: inner bump removed, the sides are reflections."""
    return PotentialSpec(((beta, -1),)), PotentialSpec(((beta, 1),))


# ---------------------------------------------------------------------------
# superpolynomial agreement diagnostics

@dataclass(frozen=True)
class OrderPoint:
    """Local convergence order between two consecutive h values.

    order is None when either value sits below its noise floor; such pairs
    are reported, never dropped.
    """

    h_coarse: float
    h_fine: float
    order: float | None


@dataclass(frozen=True)
class OrderDiagnostics:
    j: int
    gap_orders: tuple[OrderPoint, ...]
    plus_orders: tuple[OrderPoint, ...]
    minus_orders: tuple[OrderPoint, ...]


def local_order(h_coarse: float, value_coarse: float,
                h_fine: float, value_fine: float) -> float:
    """Exponent N with value ~ h^N between two h samples."""
    return math.log(value_coarse / value_fine) / math.log(h_coarse / h_fine)


def _order_chain(points: list[tuple[float, float, float]]) -> tuple[OrderPoint, ...]:
    out = []
    for (h1, v1, f1), (h2, v2, f2) in zip(points, points[1:]):
        if v1 > f1 and v2 > f2:
            out.append(OrderPoint(h1, h2, local_order(h1, v1, h2, v2)))
        else:
            out.append(OrderPoint(h1, h2, None))
    return tuple(out)


def superpoly_agreement(records: list[SweepRecord]) -> dict[int, OrderDiagnostics]:
    """Local order of |gap| and of |E - h(2j+1)| between consecutive h."""
    hs = sorted({r.h for r in records}, reverse=True)
    if len(hs) < 4:
        raise ValueError("need at least 4 h values for order diagnostics")
    out = {}
    for j in sorted({r.j for r in records}):
        rows = sorted((r for r in records if r.j == j),
                      key=lambda r: -r.h)
        gap_pts, plus_pts, minus_pts = [], [], []
        for r in rows:
            ref = ExtendedReal(r.h) * (2 * r.j + 1)
            gap_pts.append((r.h, abs(float(r.gap)), 10.0 * r.gap_err))
            plus_pts.append((r.h, abs(float(r.e_plus - ref)), 10.0 * r.err_plus))
            minus_pts.append((r.h, abs(float(r.e_minus - ref)), 10.0 * r.err_minus))
        out[j] = OrderDiagnostics(j, _order_chain(gap_pts),
                                  _order_chain(plus_pts),
                                  _order_chain(minus_pts))
    return out


# ---------------------------------------------------------------------------
# exponential decay-rate fit with quadrature action bracket

@dataclass(frozen=True)
class RateFit:
    """Least-squares line of log(gap) against 1/h, with the action bracket.

    rate = -slope is the fitted decay exponent; the bracket [c_lo, c_hi]
    doubles the two tunneling actions that bound it: from 0 to the outer
    window's near edge through the inner bump alone, and from 0 through the
    full outer bump with the inner bump absent.
    """

    j: int
    slope: float
    intercept: float
    r_squared: float
    h_range: tuple[float, float]
    n_points: int
    c_lo: float
    c_hi: float

    def __post_init__(self):
        if self.n_points < 5:
            raise ValueError("rate fit requires at least 5 points")
        if not self.c_lo < self.c_hi:
            raise ValueError("action bracket must satisfy c_lo < c_hi")

    @property
    def rate(self) -> float:
        return -self.slope

    @property
    def band(self) -> tuple[float, float]:
        """Acceptance band widened for prefactor curvature at finite h."""
        return 0.8 * self.c_lo, 1.2 * self.c_hi

    @property
    def in_band(self) -> bool:
        lo, hi = self.band
        return lo <= self.rate <= hi


def rate_bracket(alpha: BumpSpec, beta: BumpSpec) -> tuple[float, float]:
    """Doubled tunneling actions bracketing the gap decay rate.

    The shallow route stops where the outer window begins and sees only the
    inner bump; the deep route crosses the whole outer bump with the inner
    one removed.  Sorted so the bracket is always ordered.
    """
    near = 2.0 * float(tunneling_action(PotentialSpec(((alpha, 1),)),
                                        BETA_WINDOW[0]))
    far = 2.0 * float(tunneling_action(PotentialSpec(((beta, 1),)),
                                       BETA_WINDOW[1]))
    lo, hi = sorted((near, far))
    return lo, hi


def fit_rate(records: list[SweepRecord], j: int, alpha: BumpSpec,
             beta: BumpSpec) -> RateFit:
    """Fit log(gap) = intercept + slope/h over the usable records at index j.

    Refuses to fit when a usable gap is nonpositive: that would contradict
    the strict ordering the experiment exists to verify, so it must surface
    as a failure, not vanish into a dropped point.
    """
    rows = [r for r in records if r.j == j]
    if not rows:
        raise ValueError(f"no records at j={j}")
    usable = [r for r in rows if r.usable]
    for r in usable:
        if float(r.gap) <= 0.0:
            raise ValueError(
                f"nonpositive usable gap at (h={r.h}, j={j}): "
                f"{float(r.gap):.6e}")
    if len(usable) < 5:
        raise ValueError(f"need at least 5 usable gaps at j={j}, "
                         f"have {len(usable)}")
    x = np.array([1.0 / r.h for r in usable])
    y = np.array([math.log(float(r.gap)) for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    centered = y - y.mean()
    ss_tot = float(np.dot(centered, centered))
    r_squared = 1.0 - ss_res / ss_tot
    c_lo, c_hi = rate_bracket(alpha, beta)
    return RateFit(j=j, slope=float(slope), intercept=float(intercept),
                   r_squared=r_squared,
                   h_range=(min(r.h for r in usable), max(r.h for r in usable)),
                   n_points=len(usable), c_lo=c_lo, c_hi=c_hi)


# ---------------------------------------------------------------------------
# variational identities in the outer-bump strength

@dataclass(frozen=True)
class VariationFamily:
    """x^2 + alpha(x) + t*beta(orientation*x) for t in [0, 1].

    beta=None models the degenerate family with no outer bump at all;
    potential_at is then constant in t.
    """

    alpha: BumpSpec
    beta: BumpSpec | None
    orientation: int = 1

    def __post_init__(self):
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")

    def potential_at(self, t: float) -> PotentialSpec:
        if not 0.0 <= t <= 1.0:
            raise ValueError("family parameter t must lie in [0, 1]")
        base = ((self.alpha, 1),)
        if self.beta is None or t == 0.0:
            return PotentialSpec(base)
        scaled = BumpSpec(self.beta.support_lo, self.beta.support_hi,
                          t * self.beta.amplitude)
        return PotentialSpec(base + ((scaled, self.orientation),))

    def variation_weight(self, xh: np.ndarray, xl: np.ndarray
                         ) -> tuple[np.ndarray, np.ndarray]:
        """d/dt of the potential: the oriented outer bump at full strength."""
        if self.beta is None:
            return np.zeros_like(xh), np.zeros_like(xh)
        if self.orientation == 1:
            return bump_eval_arrays(self.beta, xh, xl)
        return bump_eval_arrays(self.beta, -xh, -xl)


def _relative_to(value: ExtendedReal, reference: ExtendedReal) -> float:
    diff = abs(float(value - reference))
    den = abs(float(reference))
    return diff / den if den > 0.0 else diff


@dataclass(frozen=True)
class HadamardReport:
    h: float
    j: int
    t: float
    dt: float
    orientation: int
    fd_derivative: ExtendedReal
    quadrature_derivative: ExtendedReal
    rel_err: float


def hadamard_check(fam: VariationFamily, h: float, j: int, t: float,
                   dt: float, *, n: int = DEFAULT_N,
                   tol: float = EIGENVALUE_TOL, ef_tol: float = RESIDUAL_TOL,
                   target: float = DOMAIN_TARGET) -> HadamardReport:
    """Central-difference dE/dt against the first-order quadrature identity
    dE/dt = integral of (d/dt V) psi^2."""
    if not (0.0 < t - dt and t + dt < 1.0):
        raise ValueError("need 0 < t - dt and t + dt < 1")
    # the beta-free member decays slowest, so its domain covers every t
    g = choose_domain(fam.potential_at(0.0), h, j, target, n)
    t_hi, t_lo = t + dt, t - dt
    seq_hi = eigenvalue_sequence(fam.potential_at(t_hi), h, j, g, tol)
    seq_lo = eigenvalue_sequence(fam.potential_at(t_lo), h, j, g, tol)
    # extrapolate the per-level differences: the discretization residual is
    # nearly identical on both branches and cancels, which two separately
    # extrapolated eigenvalues would not achieve
    diff, _ = extrapolate_sequence([a - b for a, b in zip(seq_hi, seq_lo)])
    psi = eigenfunction_extrapolated(fam.potential_at(t), h, j, g, tol, ef_tol)
    wh, wl = fam.variation_weight(psi.xs, np.zeros_like(psi.xs))
    quad = psi.trapezoid_of_product(wh, wl)
    if fam.beta is None:
        step = ExtendedReal(t_hi) - t_lo
    else:
        # the solver saw amplitudes rounded from t +- dt, so divide by the
        # step actually applied, not the nominal 2*dt
        amp = fam.beta.amplitude
        step = (ExtendedReal(t_hi * amp) - t_lo * amp) / amp
    fd = diff / step
    return HadamardReport(h=h, j=j, t=t, dt=dt, orientation=fam.orientation,
                          fd_derivative=fd, quadrature_derivative=quad,
                          rel_err=_relative_to(fd, quad))


@dataclass(frozen=True)
class FtcReport:
    h: float
    j: int
    orientation: int
    n_steps: int
    endpoint_diff: ExtendedReal
    integrated_derivative: ExtendedReal
    rel_err: float


def fundamental_theorem_check(fam: VariationFamily, h: float, j: int,
                              n_steps: int = 16, *, n: int = DEFAULT_N,
                              tol: float = EIGENVALUE_TOL,
                              ef_tol: float = RESIDUAL_TOL,
                              target: float = DOMAIN_TARGET) -> FtcReport:
    """E(1) - E(0) against the quadrature derivative integrated over t by
    Gauss-Legendre; the integrand is smooth in t."""
    if n_steps < 8:
        raise ValueError("need at least 8 integration nodes")
    g = choose_domain(fam.potential_at(0.0), h, j, target, n)
    seq0 = eigenvalue_sequence(fam.potential_at(0.0), h, j, g, tol)
    seq1 = eigenvalue_sequence(fam.potential_at(1.0), h, j, g, tol)
    # extrapolating the per-level differences cancels the discretization
    # residual the two endpoint eigenvalues share
    direct, _ = extrapolate_sequence([a - b for a, b in zip(seq1, seq0)])
    half = ExtendedReal(0.5)
    total = ExtendedReal(0.0)
    for node, weight in gauss_legendre(n_steps):
        # bump amplitudes are plain floats, so rounding the node is free
        t_k = float(half * (node + 1))
        psi = eigenfunction_extrapolated(fam.potential_at(t_k), h, j, g,
                                         tol, ef_tol)
        wh, wl = fam.variation_weight(psi.xs, np.zeros_like(psi.xs))
        total = total + half * weight * psi.trapezoid_of_product(wh, wl)
    return FtcReport(h=h, j=j, orientation=fam.orientation, n_steps=n_steps,
                     endpoint_diff=direct, integrated_derivative=total,
                     rel_err=_relative_to(total, direct))


# ---------------------------------------------------------------------------
# rescaled eigenfunction limit

@dataclass(frozen=True)
class RescalingRecord:
    h: float
    l2_diff: float
    linf_diff: float


def rescaling_convergence(V: PotentialSpec, j: int, h_grid,
                          interval: tuple[float, float] = (-4.0, 4.0), *,
                          n: int = DEFAULT_N, tol: float = EIGENVALUE_TOL,
                          ef_tol: float = RESIDUAL_TOL,
                          target: float = DOMAIN_TARGET) -> list[RescalingRecord]:
    """Distance from h^(1/4) psi(sqrt(h) y) to the matching normalized
    Hermite function over the interval, per h.

    Rescaled samples live at y_i = x_i/sqrt(h), so no interpolation enters;
    signs are aligned by maximizing the inner product.  Trapezoid L2 norm
    and max norm over the window are returned as plain floats.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must be nonempty")
    out = []
    for h in h_grid:
        h = float(h)
        if h <= 0.0:
            raise ValueError("h must be positive")
        g = choose_domain(V, h, j, target, n)
        cover = g.half_width / math.sqrt(h)
        if lo < -cover or hi > cover:
            raise ValueError(
                f"interval {interval} outside rescaled coverage "
                f"(+-{cover:.3f}) at h={h}")
        psi = eigenfunction_extrapolated(V, h, j, g, tol, ef_tol)
        root_h = ext_sqrt(ExtendedReal(h))
        quarter = ext_sqrt(root_h)
        inv_root = ext_div(1, root_h)
        yh, yl = vmul(psi.xs, np.zeros_like(psi.xs),
                      inv_root.hi, inv_root.lo)
        sel = (yh >= lo) & (yh <= hi)
        kh, kl = hermite_function_arrays(j, yh[sel], yl[sel])
        th, tl = vmul(psi.values_hi[sel], psi.values_lo[sel],
                      quarter.hi, quarter.lo)
        dot = kernels.dd_dot(th, tl, kh, kl)
        if dot[0] < 0.0:
            th, tl = -th, -tl
        dh, dl = vsub(th, tl, kh, kl)
        sq_h, sq_l = vmul(dh, dl, dh, dl)
        total = ExtendedReal.from_pair(*kernels.dd_sum(sq_h, sq_l))
        # trapezoid: half weight at the two window edges
        ends = (ExtendedReal.from_pair(sq_h[0], sq_l[0])
                + ExtendedReal.from_pair(sq_h[-1], sq_l[-1]))
        total = total - ExtendedReal(0.5) * ends
        dy = ext_div(ExtendedReal(g.spacing), root_h)
        l2 = ext_sqrt(total * dy)
        linf = float(np.max(np.abs(dh + dl)))
        out.append(RescalingRecord(h=h, l2_diff=float(l2), linf_diff=linf))
    return out
