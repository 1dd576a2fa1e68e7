"""Potentials V(x) = x^2 + sum of smooth compactly supported bumps.

A bump is the standard mollifier A*exp(-1/(1-u^2)) on a mapped support
interval; it vanishes identically outside and all one-sided derivatives
vanish at the endpoints.  A pair (V_minus, V_plus) built by make_pair
differs only in the reflection of the outer bump, which is the whole point:
the two potentials are non-isometric yet nearly isospectral.

Tunneling actions Phi(x) = |int_0^x sqrt(V)| are computed by adaptive
Gauss-Legendre in double-double, either pointwise or as a cumulative
profile along a grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quadrature
from .dd import (
    ExtendedReal,
    Number,
    ext_div,
    ext_exp,
    ext_sqrt,
    vadd,
    vdiv,
    vexp,
    vmul,
    vscale,
    vsqrt,
    v_two_sum,
)
from .kernels import dd_cumsum


@dataclass(frozen=True)
class BumpSpec:
    """Compactly supported mollifier bump on (support_lo, support_hi)."""

    support_lo: float
    support_hi: float
    amplitude: float

    def __post_init__(self):
        if not self.support_lo < self.support_hi:
            raise ValueError("bump support must have support_lo < support_hi")
        if not self.amplitude > 0:
            raise ValueError("bump amplitude must be positive")


def bump_eval(b: BumpSpec, x: Number) -> ExtendedReal:
    """A*exp(-1/(1-u^2)) with u the affine map of (lo, hi) onto (-1, 1)."""
    x = ExtendedReal(x)
    num = 2 * x - (b.support_lo + ExtendedReal(b.support_hi))
    u = num / (ExtendedReal(b.support_hi) - b.support_lo)
    t = 1 - u * u
    if not t > 0:
        return ExtendedReal(0.0)
    return b.amplitude * ext_exp(-ext_div(1, t))


def bump_eval_arrays(b: BumpSpec, xh: np.ndarray, xl: np.ndarray
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bump_eval over double-double sample arrays."""
    return _bump_eval_arrays(b, xh, xl)


def _bump_eval_arrays(b: BumpSpec, xh: np.ndarray, xl: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sh, sl = v_two_sum(np.float64(b.support_lo), np.float64(b.support_hi))
    dh, dl = v_two_sum(np.float64(b.support_hi), -np.float64(b.support_lo))
    nh, nl = vscale(xh, xl, 2.0)
    nh, nl = vadd(nh, nl, -sh, -sl)
    uh, ul = vdiv(nh, nl, np.broadcast_to(dh, nh.shape), np.broadcast_to(dl, nh.shape))
    qh, ql = vmul(uh, ul, uh, ul)
    th, tl = vadd(np.ones_like(qh), np.zeros_like(qh), -qh, -ql)
    out_h = np.zeros_like(xh)
    out_l = np.zeros_like(xh)
    mask = (th > 0.0) | ((th == 0.0) & (tl > 0.0))
    if np.any(mask):
        inv_h, inv_l = vdiv(np.ones(mask.sum()), np.zeros(mask.sum()), th[mask], tl[mask])
        eh, el = vexp(-inv_h, -inv_l)
        eh, el = vscale(eh, el, b.amplitude)
        out_h[mask] = eh
        out_l[mask] = el
    return out_h, out_l


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = x^2 + sum of oriented bumps; orientation -1 evaluates at -x."""

    bumps: tuple[tuple[BumpSpec, int], ...] = ()

    def __post_init__(self):
        for _, orient in self.bumps:
            if orient not in (-1, 1):
                raise ValueError("bump orientation must be +1 or -1")

    @property
    def support_radius(self) -> float:
        """Beyond this |x| the potential is exactly x^2."""
        r = 0.0
        for b, _ in self.bumps:
            r = max(r, abs(b.support_lo), abs(b.support_hi))
        return r

    def eval_ext(self, x: Number) -> ExtendedReal:
        x = ExtendedReal(x)
        acc = x * x
        for b, orient in self.bumps:
            acc = acc + bump_eval(b, x if orient == 1 else -x)
        return acc

    def eval_arrays(self, xh: np.ndarray, xl: np.ndarray | None = None
                    ) -> tuple[np.ndarray, np.ndarray]:
        xh = np.asarray(xh, dtype=float)
        if xl is None:
            xl = np.zeros_like(xh)
        acc_h, acc_l = vmul(xh, xl, xh, xl)
        for b, orient in self.bumps:
            if orient == 1:
                bh, bl = _bump_eval_arrays(b, xh, xl)
            else:
                bh, bl = _bump_eval_arrays(b, -xh, -xl)
            acc_h, acc_l = vadd(acc_h, acc_l, bh, bl)
        return acc_h, acc_l

    def eval_float(self, x) -> np.ndarray:
        """Plain double evaluation, for seeding and plotting only."""
        x = np.asarray(x, dtype=float)
        acc = x * x
        for b, orient in self.bumps:
            y = x if orient == 1 else -x
            u = (2 * y - b.support_lo - b.support_hi) / (b.support_hi - b.support_lo)
            mask = np.abs(u) < 1.0
            um = u[mask]
            acc = acc.copy()
            acc[mask] += b.amplitude * np.exp(-1.0 / (1.0 - um * um))
        return acc


HARMONIC = PotentialSpec()

DEFAULT_ALPHA = BumpSpec(1.1, 1.9, 0.5)
DEFAULT_BETA = BumpSpec(3.1, 3.9, 1.0)

# the mandated support windows for the inner and outer bump
ALPHA_WINDOW = (1.0, 2.0)
BETA_WINDOW = (3.0, 4.0)


def make_pair(alpha: BumpSpec, beta: BumpSpec) -> tuple[PotentialSpec, PotentialSpec]:
    """(V_minus, V_plus): x^2 + alpha(x) + beta(-+x) with validated supports."""
    if not (ALPHA_WINDOW[0] <= alpha.support_lo and alpha.support_hi <= ALPHA_WINDOW[1]):
        raise ValueError(f"inner bump support must lie within {ALPHA_WINDOW}")
    if not (BETA_WINDOW[0] <= beta.support_lo and beta.support_hi <= BETA_WINDOW[1]):
        raise ValueError(f"outer bump support must lie within {BETA_WINDOW}")
    if alpha.support_hi > beta.support_lo:
        raise ValueError("bump supports must not overlap")
    v_minus = PotentialSpec(((alpha, 1), (beta, -1)))
    v_plus = PotentialSpec(((alpha, 1), (beta, 1)))
    return v_minus, v_plus


def default_pair() -> tuple[PotentialSpec, PotentialSpec]:
    return make_pair(DEFAULT_ALPHA, DEFAULT_BETA)


def tunneling_action(V: PotentialSpec, x: Number, tol: float = 1e-20) -> ExtendedReal:
    """Phi(x) = |int_0^x sqrt(V(t)) dt| by adaptive quadrature."""
    assert tol > 0
    return abs(quadrature.integrate(lambda t: ext_sqrt(V.eval_ext(t)), 0.0, x, tol))


MAX_PANEL_WIDTH = 0.01


def action_profile(V: PotentialSpec, xs: np.ndarray,
                   max_panel: float = MAX_PANEL_WIDTH) -> tuple[np.ndarray, np.ndarray]:
    """Phi at every grid point of the ascending array xs.

    Each grid interval is tiled by equal sub-panels no wider than max_panel
    and integrated with a 15-point Gauss-Legendre rule per sub-panel, all in
    vectorized double-double; the profile is anchored at 0 by two adaptive
    scalar integrals and accumulated outward.
    """
    xs = np.asarray(xs, dtype=float)
    n = xs.shape[0]
    assert n >= 2 and np.all(np.diff(xs) > 0)
    xih, xil, wh, wl = quadrature.gauss_legendre_arrays(15)

    def panel_integrals(lo_h, lo_l, hi_h, hi_l):
        # one vectorized 15-node panel per interval, dd endpoints
        ch, cl = vadd(lo_h, lo_l, hi_h, hi_l)
        ch, cl = vscale(ch, cl, 0.5)
        rh, rl = vadd(hi_h, hi_l, -lo_h, -lo_l)
        rh, rl = vscale(rh, rl, 0.5)
        acc_h = np.zeros_like(ch)
        acc_l = np.zeros_like(ch)
        for k in range(xih.shape[0]):
            ph, pl = vmul(rh, rl, np.broadcast_to(xih[k], rh.shape),
                          np.broadcast_to(xil[k], rh.shape))
            ph, pl = vadd(ch, cl, ph, pl)
            vh_, vl_ = V.eval_arrays(ph, pl)
            vh_, vl_ = vsqrt(vh_, vl_)
            vh_, vl_ = vmul(vh_, vl_, np.broadcast_to(wh[k], rh.shape),
                            np.broadcast_to(wl[k], rh.shape))
            acc_h, acc_l = vadd(acc_h, acc_l, vh_, vl_)
        return vmul(acc_h, acc_l, rh, rl)

    zeros = np.zeros(n - 1)
    width_h, width_l = v_two_sum(xs[1:], -xs[:-1])
    m = max(1, int(np.ceil(float(np.max(width_h)) / max_panel)))
    # split points s_k = a + (k/m)*w tile each interval exactly because
    # neighbours share the identically computed endpoint
    seg_h = np.zeros(n - 1)
    seg_l = np.zeros(n - 1)
    frac = np.arange(m + 1) / m
    prev_h, prev_l = xs[:-1], zeros
    for k in range(1, m + 1):
        if k == m:
            cur_h, cur_l = xs[1:], zeros
        else:
            th, tl = vscale(width_h, width_l, frac[k])
            cur_h, cur_l = vadd(xs[:-1], zeros, th, tl)
        ph, pl = panel_integrals(prev_h, prev_l, cur_h, cur_l)
        seg_h, seg_l = vadd(seg_h, seg_l, ph, pl)
        prev_h, prev_l = cur_h, cur_l

    out_h = np.zeros(n)
    out_l = np.zeros(n)
    ip = int(np.searchsorted(xs, 0.0))

    if ip < n:
        # anchor: integral from 0 to the first nonnegative grid point
        a0 = tunneling_action(V, xs[ip]) if xs[ip] > 0 else ExtendedReal(0.0)
        ch, cl = dd_cumsum(seg_h[ip:], seg_l[ip:])
        right_h, right_l = vadd(ch, cl, np.broadcast_to(a0.hi, ch.shape),
                                np.broadcast_to(a0.lo, ch.shape))
        out_h[ip] = a0.hi
        out_l[ip] = a0.lo
        out_h[ip + 1:] = right_h
        out_l[ip + 1:] = right_l
    if ip > 0:
        b0 = tunneling_action(V, xs[ip - 1])
        ch, cl = dd_cumsum(seg_h[:ip - 1][::-1].copy(), seg_l[:ip - 1][::-1].copy())
        left_h, left_l = vadd(ch, cl, np.broadcast_to(b0.hi, ch.shape),
                              np.broadcast_to(b0.lo, ch.shape))
        out_h[ip - 1] = b0.hi
        out_l[ip - 1] = b0.lo
        out_h[:ip - 1] = left_h[::-1]
        out_l[:ip - 1] = left_l[::-1]
    return out_h, out_l


def endpoint_flatness(b: BumpSpec, orders: int = 6, step: float = 1e-3) -> float:
    """Largest one-sided k-th difference quotient at the support endpoints,
    k = 1..orders, stencils pointing away from the support.

    The bump vanishes identically outside its support, so every outward
    quotient must be exactly zero; a nonzero value means the evaluation
    leaks past an endpoint.  (Inward quotients are useless as a smoothness
    proxy here: dividing the flat-but-positive tail by step^k blows up for
    k >= 4 at this step size.)
    """
    from math import comb
    worst = 0.0
    for ep, outward in ((b.support_lo, -1.0), (b.support_hi, 1.0)):
        for k in range(1, orders + 1):
            acc = ExtendedReal(0)
            for i in range(k + 1):
                x = ep + outward * i * step
                acc = acc + (-1) ** (k - i) * comb(k, i) * bump_eval(b, x)
            worst = max(worst, abs(float(acc)) / step ** k)
    return worst


@dataclass(frozen=True)
class NonIsometryReport:
    max_direct_diff: float
    max_reflected_diff: float


def check_non_isometric(V1: PotentialSpec, V2: PotentialSpec,
                        samples: int = 400) -> NonIsometryReport:
    """Max |V1 - V2| and |V1(-x) - V2(x)| over a symmetric sample grid.

    Both must be positive for non-isometry: with the x^2 tail pinned, the
    only candidate line isometries are the identity and the reflection.
    """
    assert samples >= 100
    span = max(V1.support_radius, V2.support_radius, 4.0) + 1.0
    xs = np.linspace(-span, span, samples)
    a1h, a1l = V1.eval_arrays(xs)
    a2h, a2l = V2.eval_arrays(xs)
    r1h, r1l = V1.eval_arrays(-xs)
    dh, dl = vadd(a1h, a1l, -a2h, -a2l)
    direct = float(np.max(np.abs(dh + dl)))
    dh, dl = vadd(r1h, r1l, -a2h, -a2l)
    reflected = float(np.max(np.abs(dh + dl)))
    return NonIsometryReport(direct, reflected)
