"""Extended-precision scalar arithmetic: exactness and accuracy contracts.

Oracles: exact rational arithmetic via fractions.Fraction for add/mul,
mpmath at 60 digits for the transcendental functions.
"""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isospec.dd import (
    LN2,
    PI,
    ExtendedReal,
    ext_add,
    ext_div,
    ext_exp,
    ext_log,
    ext_mul,
    ext_sqrt,
    ext_sub,
    parse_decimal,
    to_decimal,
    vadd,
    vexp,
    vmul,
    vscale,
    vsqrt,
    vsub,
)

mpmath.mp.dps = 60


def as_mpf(x: ExtendedReal) -> mpmath.mpf:
    return mpmath.mpf(x.hi) + mpmath.mpf(x.lo)


def rel_err(x: ExtendedReal, exact) -> float:
    e = mpmath.mpf(exact) if not isinstance(exact, mpmath.mpf) else exact
    if e == 0:
        return float(abs(as_mpf(x)))
    return float(abs((as_mpf(x) - e) / e))


finite = st.floats(min_value=-1e10, max_value=1e10, allow_nan=False, allow_infinity=False)
# products below ~1e-290 lose the rounding-error term to IEEE underflow, so
# keep multiplicative operands clear of the denormal range
away_from_zero = finite.filter(lambda v: v == 0.0 or abs(v) > 1e-100)


# -- exactness oracles (rational arithmetic)

def test_mul_cross_term_exact():
    # (1 + 2^-54)(1 - 2^-54) = 1 - 2^-108, representable exactly as a pair
    a = ExtendedReal.from_pair(1.0, 2.0**-54)
    b = ExtendedReal.from_pair(1.0, -(2.0**-54))
    r = ext_mul(a, b)
    exact = (Fraction(1) + Fraction(2) ** -54) * (Fraction(1) - Fraction(2) ** -54)
    assert exact == Fraction(1) - Fraction(2) ** -108
    assert r.to_fraction() == exact
    assert r.hi == 1.0 and r.lo == -(2.0**-108)


def test_add_exact_on_well_separated():
    r = ext_add(1.0, 1e-30)
    assert r.to_fraction() == Fraction(1) + Fraction(1e-30)


@given(finite, finite)
@settings(max_examples=300, deadline=None)
def test_add_relative_error(a, b):
    r = ext_add(a, b)
    exact = Fraction(a) + Fraction(b)
    if exact == 0:
        assert r == 0.0
    else:
        err = abs((r.to_fraction() - exact) / exact)
        assert err <= Fraction(1, 10**30)


@given(away_from_zero, away_from_zero)
@settings(max_examples=300, deadline=None)
def test_mul_relative_error(a, b):
    r = ext_mul(a, b)
    exact = Fraction(a) * Fraction(b)
    if exact == 0:
        assert r == 0.0
    else:
        err = abs((r.to_fraction() - exact) / exact)
        assert err <= Fraction(1, 10**30)


@given(finite, finite, finite)
@settings(max_examples=200, deadline=None)
def test_add_associativity_29_digits(a, b, c):
    left = ext_add(ext_add(a, b), c)
    right = ext_add(a, ext_add(b, c))
    exact = Fraction(a) + Fraction(b) + Fraction(c)
    if exact == 0:
        return
    scale = abs(exact)
    assert abs(left.to_fraction() - right.to_fraction()) / scale <= Fraction(1, 10**29)


@given(away_from_zero, away_from_zero)
@settings(max_examples=200, deadline=None)
def test_div_inverts_mul(a, b):
    if abs(b) < 1e-3:
        return
    r = ext_div(ext_mul(a, b), b)
    exact = Fraction(a)
    if exact == 0:
        assert abs(float(r)) <= 1e-40
    else:
        assert abs((r.to_fraction() - exact) / exact) <= Fraction(1, 10**29)


# -- identity cases

def test_sqrt_perfect_square_exact():
    r = ext_sqrt(4.0)
    assert r.hi == 2.0 and r.lo == 0.0


def test_exp_zero_exact():
    r = ext_exp(0.0)
    assert r.hi == 1.0 and r.lo == 0.0


def test_sqrt_domain_error():
    with pytest.raises(ValueError):
        ext_sqrt(-1.0)


def test_log_domain_error():
    with pytest.raises(ValueError):
        ext_log(0.0)
    with pytest.raises(ValueError):
        ext_log(-2.5)


# -- transcendental accuracy vs mpmath

@pytest.mark.parametrize("x", [1e-20, 1e-10, 0.1, 0.5, 1.0, 2.0, math.pi, 10.0, 1e5, 1e10, 1e20])
def test_sqrt_accuracy(x):
    assert rel_err(ext_sqrt(x), mpmath.sqrt(x)) <= 1e-28


@pytest.mark.parametrize("x", [-50.0, -10.0, -1.0, -1e-5, 1e-5, 0.3, 1.0, 2.5, 10.0, 50.0, 300.0])
def test_exp_accuracy(x):
    assert rel_err(ext_exp(x), mpmath.exp(x)) <= 1e-28


@pytest.mark.parametrize("x", [1e-20, 1e-6, 0.5, 1.0, 2.0, 100.0, 1e10, 1e20])
def test_log_accuracy(x):
    if x == 1.0:
        assert abs(float(ext_log(x))) <= 1e-30
    else:
        assert rel_err(ext_log(x), mpmath.log(x)) <= 1e-28


@pytest.mark.parametrize("x", [1e-20, 1e-8, 0.25, 1.0, 7.5, 1e4, 1e12, 1e20])
def test_exp_log_roundtrip_28_digits(x):
    r = ext_exp(ext_log(x))
    assert rel_err(r, x) <= 1e-28


def test_exp_underflow_and_overflow_guards():
    assert ext_exp(-1000.0) == 0.0
    with pytest.raises(OverflowError):
        ext_exp(1000.0)


def test_constants_match_mpmath():
    assert float(abs(as_mpf(PI) - mpmath.pi)) <= 1e-32
    assert float(abs(as_mpf(LN2) - mpmath.log(2))) <= 1e-32


# -- order and value semantics

def test_total_order_consistent_with_rationals():
    vals = [
        ExtendedReal.from_pair(1.0, -(2.0**-80)),
        ExtendedReal(1.0),
        ExtendedReal.from_pair(1.0, 2.0**-80),
        ExtendedReal(0.5),
        ExtendedReal(-3.0),
    ]
    by_dd = sorted(vals)
    by_exact = sorted(vals, key=lambda v: v.to_fraction())
    assert [v.to_fraction() for v in by_dd] == [v.to_fraction() for v in by_exact]
    assert by_dd[0] == -3.0 and by_dd[-1] > 1.0


def test_operator_overloads_mixed_operands():
    x = ExtendedReal(3.0)
    assert float(x + 1) == 4.0
    assert float(1 + x) == 4.0
    assert float(x - 0.5) == 2.5
    assert float(2.0 - x) == -1.0
    assert float(2 * x) == 6.0
    assert float(x / 2) == 1.5
    assert float(6 / x) == 2.0
    assert float(-x) == -3.0
    assert float(abs(ExtendedReal(-2.0))) == 2.0
    assert x > 2 and x >= 3 and x < 4 and x <= 3 and x == 3


def test_large_int_coercion_exact():
    n = math.factorial(40)
    x = ExtendedReal(n)
    assert abs((x.to_fraction() - n) / Fraction(n)) <= Fraction(1, 10**30)


# -- serialization

def test_to_decimal_has_32_significant_digits():
    s = to_decimal(ext_div(1, 3))
    mantissa = s.split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) == 32


@pytest.mark.parametrize("s", ["0.1", "1.5e-3", "-2.718281828459045235360287471352", "42"])
def test_parse_decimal_correctly_rounded(s):
    x = parse_decimal(s)
    exact = Fraction(s)
    err = abs(x.to_fraction() - exact)
    assert err <= abs(exact) * Fraction(1, 2**104) if exact != 0 else err == 0


@given(finite)
@settings(max_examples=100, deadline=None)
def test_serialization_roundtrip(v):
    x = ext_mul(v, ext_add(1.0, 1e-17))
    y = parse_decimal(to_decimal(x))
    if x == 0.0:
        assert y == 0.0
    else:
        assert abs((y.to_fraction() - x.to_fraction()) / x.to_fraction()) <= Fraction(1, 10**30)


# -- vector kernels agree with the scalar ones

def test_vector_ops_match_scalar():
    rng = np.random.default_rng(7)
    a = rng.uniform(-50, 50, 64)
    al = a * 1e-18
    b = rng.uniform(0.1, 40, 64)
    bl = b * -3e-19
    for (vh, vl), op in [
        (vadd(a, al, b, bl), ext_add),
        (vsub(a, al, b, bl), ext_sub),
        (vmul(a, al, b, bl), ext_mul),
    ]:
        for i in range(64):
            s = op(ExtendedReal.from_pair(a[i], al[i]), ExtendedReal.from_pair(b[i], bl[i]))
            assert vh[i] == s.hi and vl[i] == s.lo
    sh, sl = vscale(a, al, 1.25)
    for i in range(64):
        s = ext_mul(ExtendedReal.from_pair(a[i], al[i]), 1.25)
        assert sh[i] == s.hi and sl[i] == s.lo


def test_vector_sqrt_and_exp_match_scalar():
    rng = np.random.default_rng(11)
    a = np.concatenate([[0.0, 1e-12, 4.0], rng.uniform(0.01, 900, 40)])
    rh, rl = vsqrt(a, np.zeros_like(a))
    for i, v in enumerate(a):
        s = ext_sqrt(v)
        assert rh[i] == s.hi and rl[i] == s.lo
    e = np.concatenate([[-800.0, -50.0, 0.0, 1.0], rng.uniform(-40, 40, 40)])
    eh, el = vexp(e, np.zeros_like(e))
    for i, v in enumerate(e):
        s = ext_exp(v)
        assert eh[i] == s.hi and el[i] == s.lo


def test_vexp_extreme_negative_underflows_to_zero():
    h, l = vexp(np.array([-1e15, -4.5e15]), np.zeros(2))
    assert np.all(h == 0.0) and np.all(l == 0.0)
