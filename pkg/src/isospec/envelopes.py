"""Two-sided decay envelopes, turning-point boundary values, and the
barrier comparison inequality for computed eigenfunctions.

The envelope constants are empirical: C_req is the smallest constant making
the upper envelope |psi| <= C e^{-(1-d)^2 Phi/h} hold on the sampled window,
D_req the largest for the lower one.  The claim under test is stability:
across an h-grid neither blows up nor collapses.  Boundary values at the
turning points are scaled by h^{1/4} (the L2-unitary rescaling amplitude;
the measured exponent is reported alongside), and the barrier comparison
bounds |psi(x2)| from below by a tunneling factor times |psi(x1)|.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dd import ExtendedReal, Number, ext_exp, ext_sqrt, vadd, vexp, vmul
from .potentials import PotentialSpec, action_profile
from .schrodinger import GridSpec, eigenfunction_extrapolated


@dataclass(frozen=True)
class AgmonWindow:
    """Annulus r < |x| < R with exponent margin delta."""

    r: float
    R: float
    delta: float

    def __post_init__(self):
        if not 0 < self.r < self.R:
            raise ValueError("need 0 < r < R")
        if not 0 < self.delta < 1:
            raise ValueError("need 0 < delta < 1")


@dataclass(frozen=True)
class EnvelopeReport:
    """Per-h envelope constants for one eigenindex and window."""

    window: AgmonWindow
    j: int
    kind: str  # "upper" (C_req) or "lower" (D_req)
    values: tuple[tuple[float, ExtendedReal], ...]

    def __post_init__(self):
        if self.kind not in ("upper", "lower"):
            raise ValueError("kind must be 'upper' or 'lower'")
        for h, c in self.values:
            if h <= 0 or float(c) < 0:
                raise ValueError("need h > 0 and nonnegative constants")

    def constants(self) -> list[float]:
        return [float(c) for _, c in self.values]

    def at(self, h: float) -> ExtendedReal:
        for hh, c in self.values:
            if hh == h:
                return c
        raise KeyError(h)


def turning_point(E: Number) -> ExtendedReal:
    """Edge sqrt(E) of the classically allowed region [-sqrt(E), sqrt(E)]."""
    e = ExtendedReal(E)
    if e < 0:
        raise ValueError("turning point needs a nonnegative energy")
    return ext_sqrt(e)


def _window_indices(grid: GridSpec, w: AgmonWindow) -> tuple[np.ndarray, np.ndarray]:
    xs = grid.points()
    if w.R >= grid.half_width:
        raise ValueError("window extends past the grid boundary")
    inside = (np.abs(xs) > w.r) & (np.abs(xs) < w.R)
    return np.nonzero(inside & (xs < 0))[0], np.nonzero(inside & (xs > 0))[0]


def _check_window(psi, w: AgmonWindow) -> None:
    tp = turning_point(psi.eigenvalue)
    if not ExtendedReal(w.r) > tp:
        raise ValueError(
            f"window inner radius {w.r} does not exceed the turning point "
            f"{float(tp):.6f}")


def _extremal_weighted_value(psi, V: PotentialSpec, h: float, w: AgmonWindow,
                             exponent_factor: float, take_max: bool) -> ExtendedReal:
    """max or min over window samples of |psi| * exp(factor * Phi / h)."""
    left, right = _window_indices(psi.grid, w)
    best: ExtendedReal | None = None
    for idx in (left, right):
        if idx.size == 0:
            continue
        xs = psi.grid.points()[idx]
        ph, pl = action_profile(V, xs)
        from .dd import vscale
        eh, el = vexp(*vscale(ph, pl, exponent_factor / h))
        ah = np.abs(psi.values_hi[idx])
        al = np.where(psi.values_hi[idx] < 0, -psi.values_lo[idx],
                      psi.values_lo[idx])
        vh, vl = vmul(ah, al, eh, el)
        k = int(np.argmax(vh + vl)) if take_max else int(np.argmin(vh + vl))
        cand = ExtendedReal.from_pair(vh[k], vl[k])
        if best is None or (cand > best if take_max else cand < best):
            best = cand
    assert best is not None, "window contains no grid points"
    return best


def upper_envelope_constant(psi, V: PotentialSpec, h: float,
                            w: AgmonWindow) -> ExtendedReal:
    """Smallest C with |psi(x)| <= C e^{-(1-delta)^2 Phi(x)/h} on the window."""
    _check_window(psi, w)
    factor = float(ExtendedReal(1.0 - w.delta) ** 2)
    return _extremal_weighted_value(psi, V, h, w, factor, take_max=True)


def lower_envelope_constant(psi, V: PotentialSpec, h: float,
                            w: AgmonWindow) -> ExtendedReal:
    """Largest D with |psi(x)| >= D e^{-(1+delta)^2 Phi(x)/h} on the window."""
    _check_window(psi, w)
    factor = float(ExtendedReal(1.0 + w.delta) ** 2)
    return _extremal_weighted_value(psi, V, h, w, factor, take_max=False)


def boundary_value_scaled(psi, E: Number, h: float) -> tuple[ExtendedReal, ExtendedReal]:
    """h^{1/4} |psi(+-sqrt(E))| by linear interpolation on the grid."""
    tp = float(turning_point(E))
    if tp >= psi.grid.half_width:
        raise ValueError("turning point lies outside the grid")
    scale = ext_sqrt(ext_sqrt(ExtendedReal(h)))
    left = abs(psi.interp(-tp)) * scale
    right = abs(psi.interp(tp)) * scale
    return left, right


@dataclass(frozen=True)
class BarrierReport:
    lhs: ExtendedReal
    rhs: ExtendedReal
    holds: bool
    barrier_sup: float  # v = sup sqrt(V) over the sampled comparison range


def barrier_comparison_check(psi, V: PotentialSpec, E: Number, h: float,
                             x1: float, x2: float, eps: float) -> BarrierReport:
    """Check |psi(x2)| >= e^{-v(x2-x1)/h} (1 - e^{-2 eps v x2/h}) |psi(x1)|.

    v is the sampled sup of sqrt(V) over [x1, x2(1+eps)]; grid samples in
    the range plus both endpoints, so a monotone potential attains v at
    x2(1+eps) exactly.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    tp = float(turning_point(E))
    if not tp <= x1 < x2:
        raise ValueError("need sqrt(E) <= x1 < x2")
    hi_end = x2 * (1.0 + eps)
    if hi_end >= psi.grid.half_width:
        raise ValueError("comparison range extends past the grid")
    xs = psi.grid.points()
    sel = xs[(xs >= x1) & (xs <= hi_end)]
    ts = np.concatenate(([x1], sel, [hi_end]))
    vh, vl = V.eval_arrays(ts, np.zeros_like(ts))
    k = int(np.argmax(vh))
    v = ext_sqrt(ExtendedReal.from_pair(vh[k], vl[k]))
    decay = ext_exp(-(v * (x2 - x1)) / h)
    fill = ExtendedReal(1) - ext_exp(-(v * (2.0 * eps * x2)) / h)
    rhs = decay * fill * abs(psi.interp(x1))
    lhs = abs(psi.interp(x2))
    return BarrierReport(lhs, rhs, bool(lhs >= rhs), float(v))


def boundary_scaling_exponent(hs: list[float], values: list[float]) -> float:
    """Least-squares slope of log|psi(sqrt(E))| against log h.

    The unscaled boundary values should follow h^{-1/4}, so the slope is
    expected near -0.25.
    """
    xs = np.log(np.asarray(hs, dtype=float))
    ys = np.log(np.asarray(values, dtype=float))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# h-sweep study

DEFAULT_WINDOW = AgmonWindow(2.5, 4.5, 0.2)
BARRIER_TARGETS = (2.5, 3.0, 3.5, 4.0)
BARRIER_EPS = 0.2


@dataclass(frozen=True)
class AgmonRow:
    h: float
    j: int
    c_req: float
    d_req: float
    boundary_left: float
    boundary_right: float
    barrier_min_margin: float
    window_r: float  # inner radius actually used (clamped past turning point)


@dataclass(frozen=True)
class AgmonStudy:
    rows: tuple[AgmonRow, ...]
    upper_reports: tuple[EnvelopeReport, ...]
    lower_reports: tuple[EnvelopeReport, ...]
    boundary_exponents: tuple[tuple[int, float], ...]  # (j, measured slope)


def effective_window(w: AgmonWindow, tp: float) -> AgmonWindow:
    """Clamp the inner radius just past the turning point when needed.

    The envelope bounds only apply in the forbidden region; for large h the
    turning point of an excited state can cross the nominal inner radius.
    """
    if tp < w.r:
        return w
    r_eff = tp * 1.02 + 1e-6
    if r_eff >= w.R:
        raise ValueError("turning point crowds out the whole window")
    return AgmonWindow(r_eff, w.R, w.delta)


def agmon_study(V: PotentialSpec, js, h_grid, window: AgmonWindow = DEFAULT_WINDOW,
                grid_for=None, tol: float = 1e-28) -> AgmonStudy:
    """Envelope constants, boundary values, and barrier margins over a sweep.

    grid_for(h) supplies the solver grid; defaults to L chosen for the
    truncation target with the standard point count.
    """
    from .schrodinger import DEFAULT_N, choose_domain

    if grid_for is None:
        def grid_for(h):
            return choose_domain(V, h, max(js), 1e-30, DEFAULT_N)

    rows = []
    uppers = []
    lowers = []
    exponents = []
    for j in sorted(js):
        # solve every h first and clamp the window once per j, at the
        # largest turning point: comparing constants across h is only
        # meaningful at a fixed window
        solved = []
        for h in h_grid:
            g = grid_for(h)
            psi = eigenfunction_extrapolated(V, h, j, g, tol=tol)
            solved.append((h, psi, float(turning_point(psi.eigenvalue))))
        w_eff = effective_window(window, max(tp for _, _, tp in solved))
        upper_vals = []
        lower_vals = []
        raw_boundary = []
        for h, psi, tp in solved:
            c_req = upper_envelope_constant(psi, V, h, w_eff)
            d_req = lower_envelope_constant(psi, V, h, w_eff)
            bl, br = boundary_value_scaled(psi, psi.eigenvalue, h)
            margin = _min_barrier_margin(psi, V, h, tp)
            rows.append(AgmonRow(h, j, float(c_req), float(d_req), float(bl),
                                 float(br), margin, w_eff.r))
            upper_vals.append((h, c_req))
            lower_vals.append((h, d_req))
            raw_boundary.append(max(float(bl), float(br)) / h ** 0.25)
        uppers.append(EnvelopeReport(w_eff, j, "upper", tuple(upper_vals)))
        lowers.append(EnvelopeReport(w_eff, j, "lower", tuple(lower_vals)))
        exponents.append((j, boundary_scaling_exponent(list(h_grid), raw_boundary)))
    return AgmonStudy(tuple(rows), tuple(uppers), tuple(lowers), tuple(exponents))


def _min_barrier_margin(psi, V: PotentialSpec, h: float, tp: float) -> float:
    margin = None
    for x2 in BARRIER_TARGETS:
        if x2 <= tp:
            continue  # x1 = turning point needs x1 < x2
        rep = barrier_comparison_check(psi, V, psi.eigenvalue, h, tp, x2, BARRIER_EPS)
        m = float(rep.lhs - rep.rhs)
        margin = m if margin is None else min(margin, m)
    assert margin is not None
    return margin
