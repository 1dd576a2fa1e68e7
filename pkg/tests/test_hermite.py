"""Hermite polynomial, function, and root tests.

Closed-form oracles were frozen from a 40-digit mpmath session; the two
root routes (companion matrix vs recurrence bisection) must agree to far
better than either route's tolerance.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isospec import kernels
from isospec.dd import ExtendedReal, parse_decimal, vmul
from isospec.hermite import (MAX_DEGREE, companion_roots, hermite_function,
                             hermite_function_arrays, hermite_poly, max_root,
                             recurrence_roots, root_bound)

PI_NEG_QUARTER = parse_decimal("7.51125544464942482858703004776227693e-1")
INV_SQRT2 = parse_decimal("7.07106781186547524400844362104849039e-1")
SQRT_3_HALVES = parse_decimal("1.2247448713915890490986420373529457")


def test_poly_low_degrees_exact():
    assert float(hermite_poly(0, 0.37)) == 1.0
    # P_1 = 2x, P_2 = 4x^2 - 2 with dyadic inputs are exact in dd
    assert float(hermite_poly(1, 0.5)) == 1.0
    assert float(hermite_poly(2, 1.0)) == 2.0
    assert float(hermite_poly(3, 0.0)) == 0.0


def test_poly_recurrence_against_direct():
    # P_4 = 16x^4 - 48x^2 + 12 evaluated at a few rationals
    for x in (-1.5, -0.25, 0.0, 0.75, 2.0):
        direct = 16 * x**4 - 48 * x**2 + 12
        got = float(hermite_poly(4, x))
        assert got == pytest.approx(direct, rel=1e-30, abs=1e-28)


def test_function_peak_value():
    got = hermite_function(0, 0.0)
    assert abs(float(got - PI_NEG_QUARTER)) < 1e-30


def test_function_normalization():
    # trapezoid over [-12, 12] converges spectrally for a Schwartz function;
    # 2^-10 spacing is exact, and the endpoint values are ~1e-32 so the
    # half-weight correction is irrelevant
    xs = np.linspace(-12.0, 12.0, 24577)
    vh, vl = hermite_function_arrays(2, xs)
    sq_h, sq_l = vmul(vh, vl, vh, vl)
    s = ExtendedReal.from_pair(*kernels.dd_sum(sq_h, sq_l))
    total = s * (2.0 ** -10)
    assert abs(float(total - 1)) < 1e-20


def test_vector_matches_scalar():
    xs = np.linspace(-5.0, 5.0, 41)
    vh, vl = hermite_function_arrays(6, xs)
    for i, x in enumerate(xs):
        want = hermite_function(6, float(x))
        got = ExtendedReal.from_pair(vh[i], vl[i])
        # the two paths order the normalization multiply differently
        assert abs(float(got - want)) <= 1e-30 * max(1.0, abs(float(want)))


def test_companion_roots_tiny_degrees():
    assert companion_roots(0) == []
    zeros = companion_roots(1)
    assert len(zeros) == 1 and float(zeros[0]) == 0.0
    r2 = companion_roots(2)
    assert len(r2) == 2
    assert abs(float(r2[0] + INV_SQRT2)) < 1e-28
    assert abs(float(r2[1] - INV_SQRT2)) < 1e-28


def test_companion_roots_degree_three():
    r3 = companion_roots(3)
    assert abs(float(r3[0] + SQRT_3_HALVES)) < 1e-28
    assert abs(float(r3[1])) < 1e-28
    assert abs(float(r3[2] - SQRT_3_HALVES)) < 1e-28


@pytest.mark.parametrize("j", [5, 17, 50])
def test_root_routes_agree(j):
    a = companion_roots(j)
    b = recurrence_roots(j)
    assert len(a) == len(b) == j
    worst = max(abs(float(x - y)) for x, y in zip(a, b))
    assert worst < 1e-26


def test_roots_are_symmetric_and_sorted():
    roots = companion_roots(8)
    for lo, hi in zip(roots, roots[1:]):
        assert float(lo) < float(hi)
    for r, s in zip(roots, reversed(roots)):
        assert abs(float(r + s)) < 1e-28


def test_interlacing():
    outer = [float(r) for r in companion_roots(10)]
    inner = [float(r) for r in companion_roots(9)]
    for k in range(9):
        assert outer[k] < inner[k] < outer[k + 1]


def test_derivative_identity():
    # d/dx P_j = 2j P_{j-1}; central difference in dd keeps the
    # cancellation harmless at this step size
    j, step = 7, 1e-7
    for x in np.linspace(-3.0, 3.0, 20):
        x = float(x)
        fd = (hermite_poly(j, x + step) - hermite_poly(j, x - step)) / (2 * step)
        exact = 2 * j * hermite_poly(j - 1, x)
        assert abs(float(fd - exact)) <= 1e-8 * (1.0 + abs(float(exact)))


def test_root_bound_ordering():
    with pytest.raises(ValueError):
        root_bound(1)
    for j in (2, 3, 10, 33, 50):
        tight, loose = root_bound(j)
        assert float(tight) <= float(loose)
        assert float(max_root(j)) <= float(tight)


def test_degree_guards():
    with pytest.raises(TypeError):
        hermite_poly(2.0, 1.0)
    with pytest.raises(ValueError):
        hermite_poly(-1, 1.0)
    with pytest.raises(ValueError):
        hermite_poly(MAX_DEGREE + 1, 1.0)
    assert float(hermite_poly(MAX_DEGREE, 0.0)) != 0.0  # even degree


@settings(max_examples=150, deadline=None)
@given(j=st.integers(min_value=0, max_value=20),
       x=st.floats(min_value=-15.0, max_value=15.0,
                   allow_nan=False, allow_infinity=False))
def test_function_uniformly_bounded(j, x):
    # the normalized functions never exceed the j=0 peak
    value = abs(float(hermite_function(j, x)))
    assert value <= float(PI_NEG_QUARTER) * (1 + 1e-15)
