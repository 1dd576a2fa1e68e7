"""Compiled double-double kernels for the hot tridiagonal loops.

Every kernel carries values as (hi, lo) float64 pairs using the same
error-free transformations as dd.py.  Correctness of those transformations
under the JIT is asserted at import time (selfcheck), so a toolchain that
reassociates floating point or fuses multiplies is rejected loudly instead
of corrupting eigenvalues silently.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)

_SPLITTER = 134217729.0
_TINY_PIVOT = 1e-60


@njit(**_OPTS)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(**_OPTS)
def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(**_OPTS)
def _two_prod(a, b):
    p = a * b
    ta = _SPLITTER * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLITTER * b
    bhi = tb - (tb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


@njit(**_OPTS)
def _add2(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    t, f = _two_sum(al, bl)
    e += t
    s, e = _quick_two_sum(s, e)
    e += f
    return _quick_two_sum(s, e)


@njit(**_OPTS)
def _mul2(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh + al * bl
    return _quick_two_sum(p, e)


@njit(**_OPTS)
def _div2(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _mul2(bh, bl, q1, 0.0)
    rh, rl = _add2(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = _mul2(bh, bl, q2, 0.0)
    rh, rl = _add2(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = _quick_two_sum(q1, q2)
    return _add2(q1, q2, q3, 0.0)


@njit(**_OPTS)
def _sqrt2(ah, al):
    if ah <= 0.0:
        return 0.0, 0.0
    x = 1.0 / np.sqrt(ah)
    y = ah * x
    ph, pl = _two_prod(y, y)
    dh, _ = _add2(ah, al, -ph, -pl)
    return _quick_two_sum(y, dh * (x * 0.5))


@njit(**_OPTS)
def _neg_dd(h, l):
    return -h, -l


@njit(**_OPTS)
def _lt_dd(ah, al, bh, bl):
    return ah < bh or (ah == bh and al < bl)


# ---------------------------------------------------------------------------
# reductions

@njit(**_OPTS)
def dd_sum(vh, vl):
    sh = 0.0
    sl = 0.0
    for i in range(vh.shape[0]):
        sh, sl = _add2(sh, sl, vh[i], vl[i])
    return sh, sl


@njit(**_OPTS)
def dd_dot(ah, al, bh, bl):
    sh = 0.0
    sl = 0.0
    for i in range(ah.shape[0]):
        ph, pl = _mul2(ah[i], al[i], bh[i], bl[i])
        sh, sl = _add2(sh, sl, ph, pl)
    return sh, sl


@njit(**_OPTS)
def dd_cumsum(vh, vl):
    n = vh.shape[0]
    outh = np.empty(n)
    outl = np.empty(n)
    sh = 0.0
    sl = 0.0
    for i in range(n):
        sh, sl = _add2(sh, sl, vh[i], vl[i])
        outh[i] = sh
        outl[i] = sl
    return outh, outl


# ---------------------------------------------------------------------------
# Sturm sequence and bisection

@njit(**_OPTS)
def sturm_count(dh, dl, b2h, b2l, lamh, laml):
    """Number of eigenvalues strictly below lam for a symmetric tridiagonal
    matrix with diagonal (dh, dl) and squared offdiagonal (b2h, b2l)."""
    n = dh.shape[0]
    count = 0
    qh = 0.0
    ql = 0.0
    for i in range(n):
        uh, ul = _add2(dh[i], dl[i], -lamh, -laml)
        if i > 0:
            rh, rl = _div2(b2h[i - 1], b2l[i - 1], qh, ql)
            uh, ul = _add2(uh, ul, -rh, -rl)
        if uh == 0.0 and ul == 0.0:
            uh = -_TINY_PIVOT
            ul = 0.0
        qh = uh
        ql = ul
        if qh < 0.0 or (qh == 0.0 and ql < 0.0):
            count += 1
    return count


@njit(**_OPTS)
def bisect_eigenvalue(dh, dl, b2h, b2l, j, ah, al, bh, bl, tol):
    """Bisect for the j-th (0-based) eigenvalue inside the bracket [a, b].

    Requires sturm_count(a) <= j < sturm_count(b); the caller validates
    that before dispatch.  Returns the final bracket midpoint.
    """
    for _ in range(400):
        wh, wl = _add2(bh, bl, -ah, -al)
        if wh + wl <= tol:
            break
        mh, ml = _add2(ah, al, bh, bl)
        mh *= 0.5
        ml *= 0.5
        if (mh == ah and ml == al) or (mh == bh and ml == bl):
            break
        if sturm_count(dh, dl, b2h, b2l, mh, ml) >= j + 1:
            bh, bl = mh, ml
        else:
            ah, al = mh, ml
    mh, ml = _add2(ah, al, bh, bl)
    wh, wl = _add2(bh, bl, -ah, -al)
    return 0.5 * mh, 0.5 * ml, 0.5 * (wh + wl)


# ---------------------------------------------------------------------------
# inverse iteration with banded LU (partial pivoting, one fill-in band)

@njit(**_OPTS)
def inverse_iteration(dh, dl, oh, ol, eh, el, v0, max_iter, target):
    """Eigenvector for the shift (eh, el) by inverse iteration in dd.

    dh/dl: diagonal; oh/ol: offdiagonal (symmetric).  Returns
    (vhi, vlo, residual, iterations) with v 2-normalized; residual is
    ||(T - E)v||_2 relative to ||v||_2 = 1.
    """
    n = dh.shape[0]
    m = n - 1
    # shifted diagonal
    adh = np.empty(n)
    adl = np.empty(n)
    for i in range(n):
        adh[i], adl[i] = _add2(dh[i], dl[i], -eh, -el)

    # banded LU of (T - E) with partial pivoting; u2 is the fill-in band
    u0h = adh.copy()
    u0l = adl.copy()
    u1h = np.zeros(max(m, 1))
    u1l = np.zeros(max(m, 1))
    u2h = np.zeros(max(n - 2, 1))
    u2l = np.zeros(max(n - 2, 1))
    mlh = np.zeros(max(m, 1))
    mll = np.zeros(max(m, 1))
    swap = np.zeros(max(m, 1), np.bool_)
    for i in range(m):
        u1h[i] = oh[i]
        u1l[i] = ol[i]
    for i in range(m):
        b0h, b0l = oh[i], ol[i]
        b1h, b1l = u0h[i + 1], u0l[i + 1]
        if i + 1 < m:
            b2h_, b2l_ = u1h[i + 1], u1l[i + 1]
        else:
            b2h_, b2l_ = 0.0, 0.0
        if abs(b0h) > abs(u0h[i]):
            swap[i] = True
            u0h[i], u0l[i], b0h, b0l = b0h, b0l, u0h[i], u0l[i]
            u1h[i], u1l[i], b1h, b1l = b1h, b1l, u1h[i], u1l[i]
            if i < n - 2:
                u2h[i], u2l[i], b2h_, b2l_ = b2h_, b2l_, u2h[i], u2l[i]
        if u0h[i] == 0.0 and u0l[i] == 0.0:
            u0h[i] = _TINY_PIVOT
        mh_, ml_ = _div2(b0h, b0l, u0h[i], u0l[i])
        mlh[i] = mh_
        mll[i] = ml_
        ph, pl = _mul2(mh_, ml_, u1h[i], u1l[i])
        u0h[i + 1], u0l[i + 1] = _add2(b1h, b1l, -ph, -pl)
        if i + 1 < m:
            if i < n - 2:
                ph, pl = _mul2(mh_, ml_, u2h[i], u2l[i])
                u1h[i + 1], u1l[i + 1] = _add2(b2h_, b2l_, -ph, -pl)
            else:
                u1h[i + 1], u1l[i + 1] = b2h_, b2l_
    if u0h[n - 1] == 0.0 and u0l[n - 1] == 0.0:
        u0h[n - 1] = _TINY_PIVOT

    vh = v0.copy()
    vl = np.zeros(n)
    best_res = np.inf
    best_h = v0.copy()
    best_l = np.zeros(n)
    iters = 0
    wh = np.empty(n)
    wl = np.empty(n)
    for it in range(max_iter):
        iters = it + 1
        # forward substitution with the stored row operations
        for i in range(n):
            wh[i] = vh[i]
            wl[i] = vl[i]
        for i in range(m):
            if swap[i]:
                wh[i], wh[i + 1] = wh[i + 1], wh[i]
                wl[i], wl[i + 1] = wl[i + 1], wl[i]
            ph, pl = _mul2(mlh[i], mll[i], wh[i], wl[i])
            wh[i + 1], wl[i + 1] = _add2(wh[i + 1], wl[i + 1], -ph, -pl)
        # back substitution
        for i in range(n - 1, -1, -1):
            th, tl = wh[i], wl[i]
            if i + 1 < n:
                ph, pl = _mul2(u1h[i], u1l[i], wh[i + 1], wl[i + 1])
                th, tl = _add2(th, tl, -ph, -pl)
            if i + 2 < n:
                ph, pl = _mul2(u2h[i], u2l[i], wh[i + 2], wl[i + 2])
                th, tl = _add2(th, tl, -ph, -pl)
            wh[i], wl[i] = _div2(th, tl, u0h[i], u0l[i])
        # 2-normalize
        nh, nl = dd_dot(wh, wl, wh, wl)
        nh, nl = _sqrt2(nh, nl)
        if nh == 0.0:
            break
        for i in range(n):
            vh[i], vl[i] = _div2(wh[i], wl[i], nh, nl)
        # residual ||(T-E)v||
        rh_acc = 0.0
        rl_acc = 0.0
        for i in range(n):
            th, tl = _mul2(adh[i], adl[i], vh[i], vl[i])
            if i > 0:
                ph, pl = _mul2(oh[i - 1], ol[i - 1], vh[i - 1], vl[i - 1])
                th, tl = _add2(th, tl, ph, pl)
            if i + 1 < n:
                ph, pl = _mul2(oh[i], ol[i], vh[i + 1], vl[i + 1])
                th, tl = _add2(th, tl, ph, pl)
            ph, pl = _mul2(th, tl, th, tl)
            rh_acc, rl_acc = _add2(rh_acc, rl_acc, ph, pl)
        rh_acc, rl_acc = _sqrt2(rh_acc, rl_acc)
        if rh_acc < best_res:
            best_res = rh_acc
            for i in range(n):
                best_h[i] = vh[i]
                best_l[i] = vl[i]
        if rh_acc <= target:
            break
    return best_h, best_l, best_res, iters


# ---------------------------------------------------------------------------
# Hermite recurrence evaluation and sign-change root bisection

@njit(**_OPTS)
def hermite_eval(j, xh, xl):
    """P_j at (xh, xl) by the forward recurrence P_{k+1} = 2x P_k - 2k P_{k-1}."""
    if j == 0:
        return 1.0, 0.0
    txh, txl = _add2(xh, xl, xh, xl)
    pm1h, pm1l = 1.0, 0.0
    ph, pl = txh, txl
    for k in range(1, j):
        ah, al = _mul2(txh, txl, ph, pl)
        bh, bl = _mul2(2.0 * k, 0.0, pm1h, pm1l)
        nh, nl = _add2(ah, al, -bh, -bl)
        pm1h, pm1l = ph, pl
        ph, pl = nh, nl
    return ph, pl


@njit(**_OPTS)
def hermite_root_bisect(j, ah, al, bh, bl, tol):
    """One root of P_j inside [a, b]; requires a sign change over the bracket."""
    fah, _ = hermite_eval(j, ah, al)
    for _ in range(300):
        wh, wl = _add2(bh, bl, -ah, -al)
        if wh + wl <= tol:
            break
        mh, ml = _add2(ah, al, bh, bl)
        mh *= 0.5
        ml *= 0.5
        if (mh == ah and ml == al) or (mh == bh and ml == bl):
            break
        fmh, fml = hermite_eval(j, mh, ml)
        if fmh == 0.0 and fml == 0.0:
            return mh, ml
        if (fmh < 0.0) == (fah < 0.0):
            ah, al = mh, ml
            fah = fmh
        else:
            bh, bl = mh, ml
    mh, ml = _add2(ah, al, bh, bl)
    return 0.5 * mh, 0.5 * ml


# ---------------------------------------------------------------------------
# import-time guard: the JIT must preserve error-free transformations

@njit(**_OPTS)
def _eft_probe():
    s, e = _two_sum(1.0, 1e-30)
    p, f = _two_prod(1.0 + 2.0**-27, 1.0 - 2.0**-27)
    return s, e, p, f


def selfcheck() -> None:
    """Assert EFT exactness under the JIT; raises RuntimeError on failure."""
    s, e, p, f = _eft_probe()
    # frozen expected values from exact rational arithmetic
    if not (s == 1.0 and e == 1e-30 and p == 1.0 and f == -(2.0**-54)):
        raise RuntimeError(
            "compiled kernels do not preserve error-free float transformations; "
            "rebuild without value-changing FP optimizations"
        )


selfcheck()
