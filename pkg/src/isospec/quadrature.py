"""Gauss-Legendre quadrature in double-double precision.

Nodes are refined from double-precision seeds by Newton iteration on the
Legendre recurrence, carried out in ExtendedReal, so each rule is accurate
to ~31 digits.  The adaptive integrator bisects panels until the two-half
refinement changes the panel value by less than the local tolerance.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .dd import ExtendedReal, Number

_DEFAULT_RULE = 15


def _legendre_with_prev(n: int, x: ExtendedReal) -> tuple[ExtendedReal, ExtendedReal]:
    # returns (P_n(x), P_{n-1}(x)) via (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
    p0 = ExtendedReal(1.0)
    p1 = x
    for k in range(1, n):
        p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
        p0 = p1
        p1 = p2
    return p1, p0


def _derivative(n: int, x: ExtendedReal, pn: ExtendedReal, pnm1: ExtendedReal) -> ExtendedReal:
    return n * (x * pn - pnm1) / (x * x - 1.0)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[tuple[ExtendedReal, ExtendedReal], ...]:
    """Nodes and weights of the n-point rule on [-1, 1], ~31-digit accurate."""
    assert n >= 1
    seeds, _ = np.polynomial.legendre.leggauss(n)
    half = []
    for s in seeds[(n + 1) // 2:]:  # positive nodes; mirror for exact symmetry
        x = ExtendedReal(float(s))
        for _ in range(3):
            pn, pnm1 = _legendre_with_prev(n, x)
            x = x - pn / _derivative(n, x, pn, pnm1)
        pn, pnm1 = _legendre_with_prev(n, x)
        dp = _derivative(n, x, pn, pnm1)
        w = 2 / ((1 - x * x) * dp * dp)
        half.append((x, w))
    rule = [(-x, w) for (x, w) in reversed(half)]
    if n % 2 == 1:
        x0 = ExtendedReal(0.0)
        pn, pnm1 = _legendre_with_prev(n, x0)
        dp = _derivative(n, x0, pn, pnm1)
        rule.append((x0, 2 / (dp * dp)))
    rule.extend(half)
    return tuple(rule)


def gauss_legendre_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The same rule as (node_hi, node_lo, weight_hi, weight_lo) float arrays."""
    rule = gauss_legendre(n)
    xh = np.array([x.hi for x, _ in rule])
    xl = np.array([x.lo for x, _ in rule])
    wh = np.array([w.hi for _, w in rule])
    wl = np.array([w.lo for _, w in rule])
    return xh, xl, wh, wl


def _panel(f: Callable[[ExtendedReal], ExtendedReal], a: ExtendedReal, b: ExtendedReal,
           rule) -> ExtendedReal:
    c = (a + b) * 0.5
    r = (b - a) * 0.5
    acc = ExtendedReal(0.0)
    for x, w in rule:
        acc = acc + w * f(c + r * x)
    return acc * r


def _adapt(f, a, b, whole, tol, depth, rule) -> ExtendedReal:
    m = (a + b) * 0.5
    left = _panel(f, a, m, rule)
    right = _panel(f, m, b, rule)
    refined = left + right
    if float(abs(refined - whole)) <= tol or depth >= 48:
        return refined
    return _adapt(f, a, m, left, tol * 0.5, depth + 1, rule) + _adapt(
        f, m, b, right, tol * 0.5, depth + 1, rule)


def integrate(f: Callable[[ExtendedReal], ExtendedReal], a: Number, b: Number,
              tol: float = 1e-20, rule_size: int = _DEFAULT_RULE) -> ExtendedReal:
    """Adaptive integral of f over [a, b] to absolute tolerance tol."""
    assert tol > 0
    a = ExtendedReal(a)
    b = ExtendedReal(b)
    if a == b:
        return ExtendedReal(0.0)
    if b < a:
        return -integrate(f, b, a, tol, rule_size)
    rule = gauss_legendre(rule_size)
    return _adapt(f, a, b, _panel(f, a, b, rule), tol, 0, rule)
