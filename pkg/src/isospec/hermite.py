"""Hermite polynomials, normalized Hermite functions, and their roots.

Roots are computed by two independent routes that must agree: eigenvalues
of the symmetric companion matrix (zero diagonal, offdiagonal sqrt(k/2),
whose squares are exact dyadics) and direct sign-change bisection of the
three-term recurrence.  Root locations feed the rescaling-limit checks;
the extreme root obeys sqrt((j-2)/2) + sqrt((j-1)/2), itself at most
sqrt(2j-2).
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .dd import PI, ExtendedReal, Number, ext_sqrt, vadd, vexp, vmul, vscale

MAX_DEGREE = 60  # factorial normalization stays in double-double range


def _check_degree(j: int) -> None:
    if not isinstance(j, int):
        raise TypeError("degree must be an int")
    if j < 0:
        raise ValueError("degree must be nonnegative")
    if j > MAX_DEGREE:
        raise ValueError(f"degree {j} exceeds supported maximum {MAX_DEGREE}")


def hermite_poly(j: int, x: Number) -> ExtendedReal:
    """Physicists' Hermite polynomial P_j(x)."""
    _check_degree(j)
    xe = ExtendedReal(x)
    return ExtendedReal.from_pair(*kernels.hermite_eval(j, xe.hi, xe.lo))


def _norm_constant(j: int) -> ExtendedReal:
    # sqrt(2^j j! sqrt(pi)); the integer part is exact
    f = ExtendedReal(math.factorial(j) * 2**j)
    return ext_sqrt(f * ext_sqrt(PI))


def hermite_function(j: int, x: Number) -> ExtendedReal:
    """L2-normalized Hermite function P_j(x) e^{-x^2/2} / sqrt(2^j j! sqrt(pi))."""
    _check_degree(j)
    xe = ExtendedReal(x)
    p = hermite_poly(j, xe)
    from .dd import ext_exp
    g = ext_exp(-(xe * xe) / 2)
    return p * g / _norm_constant(j)


def hermite_function_arrays(j: int, yh: np.ndarray,
                            yl: np.ndarray | None = None
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized hermite_function over dd sample arrays."""
    _check_degree(j)
    yh = np.asarray(yh, dtype=float)
    yl = np.zeros_like(yh) if yl is None else np.asarray(yl, dtype=float)
    ph = np.ones_like(yh)
    pl = np.zeros_like(yh)
    if j >= 1:
        th, tl = vscale(yh, yl, 2.0)
        cur_h, cur_l = th.copy(), tl.copy()
        for k in range(1, j):
            nh, nl = vmul(th, tl, cur_h, cur_l)
            mh, ml = vscale(ph, pl, -2.0 * k)
            nh, nl = vadd(nh, nl, mh, ml)
            ph, pl = cur_h, cur_l
            cur_h, cur_l = nh, nl
        ph, pl = cur_h, cur_l
    sq_h, sq_l = vmul(yh, yl, yh, yl)
    gh, gl = vexp(*vscale(sq_h, sq_l, -0.5))
    oh, ol = vmul(ph, pl, gh, gl)
    c = 1 / _norm_constant(j)
    return vmul(oh, ol, np.broadcast_to(c.hi, oh.shape),
                np.broadcast_to(c.lo, oh.shape))


def root_bound(j: int) -> tuple[ExtendedReal, ExtendedReal]:
    """(tight, loose) bounds for the largest root magnitude, degree >= 2."""
    _check_degree(j)
    if j < 2:
        raise ValueError("root bounds need degree >= 2")
    tight = ext_sqrt(ExtendedReal(j - 2) / 2) + ext_sqrt(ExtendedReal(j - 1) / 2)
    loose = ext_sqrt(ExtendedReal(2 * j - 2))
    return tight, loose


def companion_roots(j: int, tol: float = 1e-28) -> list[ExtendedReal]:
    """All j roots of P_j as eigenvalues of the companion matrix.

    The matrix is symmetric tridiagonal with zero diagonal and offdiagonal
    entries sqrt(k/2), so the squared entries k/2 used by the Sturm count
    are exact dyadic rationals.
    """
    _check_degree(j)
    if j == 0:
        return []
    if j == 1:
        return [ExtendedReal(0.0)]
    dh = np.zeros(j)
    dl = np.zeros(j)
    b2h = np.arange(1, j) / 2.0  # exact
    b2l = np.zeros(j - 1)
    radius = float(ext_sqrt(ExtendedReal(2 * j - 2))) * (1 + 1e-12)
    roots = []
    for k in range(j):
        mh, ml, width = kernels.bisect_eigenvalue(
            dh, dl, b2h, b2l, k, -radius, 0.0, radius, 0.0, tol)
        if width > 4.0 * tol:
            raise RuntimeError(f"root bisection stalled at width {width}")
        roots.append(ExtendedReal.from_pair(mh, ml))
    return roots


def recurrence_roots(j: int, tol: float = 1e-28) -> list[ExtendedReal]:
    """All j roots by sign-change bisection of the recurrence itself.

    Starts from a uniform scan just past the loose root bound and densifies
    until exactly j sign changes are bracketed.
    """
    _check_degree(j)
    if j == 0:
        return []
    if j == 1:
        return [ExtendedReal(0.0)]
    radius = float(ext_sqrt(ExtendedReal(2 * j - 2))) * (1 + 1e-12)
    cells = max(4 * j, 32) | 1  # odd: keeps the exact root at 0 off the grid
    for _ in range(6):
        grid = np.linspace(-radius, radius, cells + 1)
        signs = np.sign([kernels.hermite_eval(j, float(x), 0.0)[0] for x in grid])
        flips = [(grid[i], grid[i + 1])
                 for i in range(cells) if signs[i] * signs[i + 1] < 0]
        if len(flips) == j:
            break
        cells = cells * 4 + 1  # roots can cluster; refine the scan, stay odd
    else:
        raise RuntimeError(f"could not isolate {j} sign changes")
    roots = []
    for a, b in flips:
        mh, ml = kernels.hermite_root_bisect(j, a, 0.0, b, 0.0, tol)
        roots.append(ExtendedReal.from_pair(mh, ml))
    return roots


def max_root(j: int, tol: float = 1e-28) -> ExtendedReal:
    """Largest root magnitude of P_j, degree >= 2."""
    roots = companion_roots(j, tol)
    return max(abs(r) for r in roots)
