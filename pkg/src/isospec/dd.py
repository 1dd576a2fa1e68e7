"""Double-double arithmetic: ~31 significant decimal digits from float pairs.

An ExtendedReal is an unevaluated sum hi + lo of two IEEE doubles with
|lo| <= ulp(hi)/2.  All operations use error-free transformations (Knuth
two_sum, Dekker split/two_prod), so no fused multiply-add is required.
Relative error is <= 2^-104 per add/mul and <= 1e-28 for exp/log/sqrt.

The module also provides the same operations vectorized over numpy arrays
held as (hi, lo) array pairs; those are used by the grid-based solvers.
"""
from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant

Number = Union["ExtendedReal", float, int]


# ---------------------------------------------------------------------------
# error-free transformations on bare floats

def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    # requires |a| >= |b| or a == 0
    s = a + b
    return s, b - (s - a)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ta = _SPLITTER * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLITTER * b
    bhi = tb - (tb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


# ---------------------------------------------------------------------------
# core double-double kernels on (hi, lo) pairs

def _add(ahi: float, alo: float, bhi: float, blo: float) -> tuple[float, float]:
    s, e = _two_sum(ahi, bhi)
    t, f = _two_sum(alo, blo)
    e += t
    s, e = _quick_two_sum(s, e)
    e += f
    return _quick_two_sum(s, e)


def _mul(ahi: float, alo: float, bhi: float, blo: float) -> tuple[float, float]:
    p, e = _two_prod(ahi, bhi)
    # the alo*blo cross term matters: (1+2^-54)(1-2^-54) must hit 1-2^-108
    e += ahi * blo + alo * bhi + alo * blo
    return _quick_two_sum(p, e)


def _div(ahi: float, alo: float, bhi: float, blo: float) -> tuple[float, float]:
    q1 = ahi / bhi
    ph, pl = _mul(bhi, blo, q1, 0.0)
    rh, rl = _add(ahi, alo, -ph, -pl)
    q2 = rh / bhi
    ph, pl = _mul(bhi, blo, q2, 0.0)
    rh, rl = _add(rh, rl, -ph, -pl)
    q3 = rh / bhi
    q1, q2 = _quick_two_sum(q1, q2)
    return _add(q1, q2, q3, 0.0)


def _sqrt(ahi: float, alo: float) -> tuple[float, float]:
    if ahi == 0.0 and alo == 0.0:
        return 0.0, 0.0
    if ahi < 0.0:
        raise ValueError("sqrt of negative value")
    # Karp: y ~ sqrt(a); correction (a - y^2) * (1/sqrt(a)) / 2
    x = 1.0 / math.sqrt(ahi)
    y = ahi * x
    ph, pl = _two_prod(y, y)
    dh, _ = _add(ahi, alo, -ph, -pl)
    return _quick_two_sum(y, dh * (x * 0.5))


_LN2_HI = 0.6931471805599453
_LN2_LO = 2.3190468138462996e-17
_PI_HI = 3.141592653589793
_PI_LO = 1.2246467991473532e-16

# exp: reduce by ln2 then by 2^9, 10 Taylor terms, 9 squarings
_EXP_TERMS = 10
_EXP_SHIFT = 9


def _inv_fact_pair(k: int) -> tuple[float, float]:
    f = Fraction(1, math.factorial(k))
    hi = float(f)
    return hi, float(f - Fraction(hi))


_INV_FACT = [_inv_fact_pair(k) for k in range(_EXP_TERMS + 1)]


def _exp(ahi: float, alo: float) -> tuple[float, float]:
    if ahi == 0.0 and alo == 0.0:
        return 1.0, 0.0
    if ahi > 708.0:
        raise OverflowError("exp argument too large")
    if ahi < -745.0:
        return 0.0, 0.0
    m = round(ahi / _LN2_HI)
    ph, pl = _two_prod(float(m), _LN2_HI)
    pl += m * _LN2_LO
    rh, rl = _add(ahi, alo, -ph, -pl)
    scale = 1.0 / (1 << _EXP_SHIFT)
    rh *= scale
    rl *= scale
    # expm1 of the reduced argument by Taylor series
    th, tl = rh, rl
    sh, sl = rh, rl
    for k in range(2, _EXP_TERMS + 1):
        th, tl = _mul(th, tl, rh, rl)
        fh, fl = _INV_FACT[k]
        ch, cl = _mul(th, tl, fh, fl)
        sh, sl = _add(sh, sl, ch, cl)
    # undo the 2^9 reduction: expm1(2u) = expm1(u)^2 + 2 expm1(u)
    for _ in range(_EXP_SHIFT):
        qh, ql = _mul(sh, sl, sh, sl)
        sh, sl = _add(qh, ql, 2.0 * sh, 2.0 * sl)
    sh, sl = _add(sh, sl, 1.0, 0.0)
    return math.ldexp(sh, m), math.ldexp(sl, m)


def _log(ahi: float, alo: float) -> tuple[float, float]:
    if ahi <= 0.0:
        raise ValueError("log of nonpositive value")
    # Newton on y -> y + a*exp(-y) - 1 starting from the double seed
    yh, yl = math.log(ahi), 0.0
    for _ in range(2):
        eh, el = _exp(-yh, -yl)
        th, tl = _mul(ahi, alo, eh, el)
        yh, yl = _add(yh, yl, th, tl)
        yh, yl = _add(yh, yl, -1.0, 0.0)
    return yh, yl


# ---------------------------------------------------------------------------
# public scalar type

class ExtendedReal:
    """Immutable double-double scalar.

    Construct from float/int, from a decimal string (correctly rounded via
    Fraction), or from an explicit normalized (hi, lo) pair.
    """

    __slots__ = ("hi", "lo")

    def __init__(self, hi: Number | str = 0.0, lo: float = 0.0):
        if isinstance(hi, ExtendedReal):
            object.__setattr__(self, "hi", hi.hi)
            object.__setattr__(self, "lo", hi.lo)
            return
        if isinstance(hi, str):
            h, l = _from_fraction(Fraction(hi))
        elif isinstance(hi, int) and abs(hi) >= 2**53:
            h, l = _from_fraction(Fraction(hi))
        else:
            h, l = _quick_two_sum(float(hi), float(lo))
        object.__setattr__(self, "hi", h)
        object.__setattr__(self, "lo", l)

    def __setattr__(self, name, value):
        raise AttributeError("ExtendedReal is immutable")

    # -- conversions

    @classmethod
    def from_pair(cls, hi: float, lo: float) -> "ExtendedReal":
        out = cls.__new__(cls)
        # plain floats only: numpy scalars would leak into hash/float()
        object.__setattr__(out, "hi", float(hi))
        object.__setattr__(out, "lo", float(lo))
        return out

    @classmethod
    def from_fraction(cls, f: Fraction) -> "ExtendedReal":
        return cls.from_pair(*_from_fraction(f))

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def __float__(self) -> float:
        return self.hi + self.lo

    # -- arithmetic

    def __add__(self, other: Number) -> "ExtendedReal":
        o = _coerce(other)
        return ExtendedReal.from_pair(*_add(self.hi, self.lo, o[0], o[1]))

    __radd__ = __add__

    def __sub__(self, other: Number) -> "ExtendedReal":
        o = _coerce(other)
        return ExtendedReal.from_pair(*_add(self.hi, self.lo, -o[0], -o[1]))

    def __rsub__(self, other: Number) -> "ExtendedReal":
        o = _coerce(other)
        return ExtendedReal.from_pair(*_add(o[0], o[1], -self.hi, -self.lo))

    def __mul__(self, other: Number) -> "ExtendedReal":
        o = _coerce(other)
        return ExtendedReal.from_pair(*_mul(self.hi, self.lo, o[0], o[1]))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "ExtendedReal":
        o = _coerce(other)
        return ExtendedReal.from_pair(*_div(self.hi, self.lo, o[0], o[1]))

    def __rtruediv__(self, other: Number) -> "ExtendedReal":
        o = _coerce(other)
        return ExtendedReal.from_pair(*_div(o[0], o[1], self.hi, self.lo))

    def __pow__(self, k: int) -> "ExtendedReal":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = ExtendedReal(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self) -> "ExtendedReal":
        return ExtendedReal.from_pair(-self.hi, -self.lo)

    def __abs__(self) -> "ExtendedReal":
        return -self if self.hi < 0.0 else self

    # -- total order (lexicographic on normalized pairs)

    def _key(self, other: Number) -> tuple[float, float]:
        return _coerce(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (ExtendedReal, float, int)):
            return NotImplemented
        o = self._key(other)
        return self.hi == o[0] and self.lo == o[1]

    def __lt__(self, other: Number) -> bool:
        o = self._key(other)
        return self.hi < o[0] or (self.hi == o[0] and self.lo < o[1])

    def __le__(self, other: Number) -> bool:
        return self < other or self == other

    def __gt__(self, other: Number) -> bool:
        o = self._key(other)
        return self.hi > o[0] or (self.hi == o[0] and self.lo > o[1])

    def __ge__(self, other: Number) -> bool:
        return self > other or self == other

    def __hash__(self) -> int:
        return hash((self.hi, self.lo))

    def __repr__(self) -> str:
        return f"ExtendedReal('{to_decimal(self)}')"

    def __str__(self) -> str:
        return to_decimal(self)


def _coerce(x: Number) -> tuple[float, float]:
    if isinstance(x, ExtendedReal):
        return x.hi, x.lo
    if isinstance(x, int) and abs(x) >= 2**53:
        return _from_fraction(Fraction(x))
    return float(x), 0.0


def _from_fraction(f: Fraction) -> tuple[float, float]:
    hi = float(f)
    if not math.isfinite(hi):
        raise OverflowError("value out of double-double range")
    lo = float(f - Fraction(hi))
    return _quick_two_sum(hi, lo)


# ---------------------------------------------------------------------------
# contract operations

def ext_add(a: Number, b: Number) -> ExtendedReal:
    x, y = _coerce(a), _coerce(b)
    return ExtendedReal.from_pair(*_add(x[0], x[1], y[0], y[1]))


def ext_sub(a: Number, b: Number) -> ExtendedReal:
    x, y = _coerce(a), _coerce(b)
    return ExtendedReal.from_pair(*_add(x[0], x[1], -y[0], -y[1]))


def ext_mul(a: Number, b: Number) -> ExtendedReal:
    x, y = _coerce(a), _coerce(b)
    return ExtendedReal.from_pair(*_mul(x[0], x[1], y[0], y[1]))


def ext_div(a: Number, b: Number) -> ExtendedReal:
    x, y = _coerce(a), _coerce(b)
    return ExtendedReal.from_pair(*_div(x[0], x[1], y[0], y[1]))


def ext_sqrt(a: Number) -> ExtendedReal:
    x = _coerce(a)
    return ExtendedReal.from_pair(*_sqrt(x[0], x[1]))


def ext_exp(a: Number) -> ExtendedReal:
    x = _coerce(a)
    return ExtendedReal.from_pair(*_exp(x[0], x[1]))


def ext_log(a: Number) -> ExtendedReal:
    x = _coerce(a)
    return ExtendedReal.from_pair(*_log(x[0], x[1]))


PI = ExtendedReal.from_pair(_PI_HI, _PI_LO)
LN2 = ExtendedReal.from_pair(_LN2_HI, _LN2_LO)
ZERO = ExtendedReal.from_pair(0.0, 0.0)
ONE = ExtendedReal.from_pair(1.0, 0.0)


# ---------------------------------------------------------------------------
# decimal serialization (32 significant digits in all file outputs)

SERIAL_DIGITS = 32


def to_decimal(x: ExtendedReal, digits: int = SERIAL_DIGITS) -> str:
    assert digits > 0
    with localcontext() as ctx:
        ctx.prec = digits + 10
        d = Decimal(x.hi) + Decimal(x.lo)
    return f"{d:.{digits - 1}e}"


def parse_decimal(s: str) -> ExtendedReal:
    return ExtendedReal.from_fraction(Fraction(s))


# ---------------------------------------------------------------------------
# vectorized double-double over numpy arrays, as (hi, lo) pairs.
# Same algorithms as the scalar kernels; numpy ufuncs evaluate strict IEEE
# elementwise so the error-free transformations remain exact.

def v_two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def v_quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def v_two_prod(a, b):
    p = a * b
    ta = _SPLITTER * a
    ahi = ta - (ta - a)
    alo = a - ahi
    tb = _SPLITTER * b
    bhi = tb - (tb - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def vadd(ahi, alo, bhi, blo):
    s, e = v_two_sum(ahi, bhi)
    t, f = v_two_sum(alo, blo)
    e = e + t
    s, e = v_quick_two_sum(s, e)
    e = e + f
    return v_quick_two_sum(s, e)


def vsub(ahi, alo, bhi, blo):
    return vadd(ahi, alo, -bhi, -blo)


def vmul(ahi, alo, bhi, blo):
    p, e = v_two_prod(ahi, bhi)
    e = e + (ahi * blo + alo * bhi + alo * blo)
    return v_quick_two_sum(p, e)


def vscale(ahi, alo, s: float):
    p, e = v_two_prod(ahi, s)
    e = e + alo * s
    return v_quick_two_sum(p, e)


def vdiv(ahi, alo, bhi, blo):
    q1 = ahi / bhi
    ph, pl = vmul(bhi, blo, q1, np.zeros_like(q1))
    rh, rl = vadd(ahi, alo, -ph, -pl)
    q2 = rh / bhi
    ph, pl = vmul(bhi, blo, q2, np.zeros_like(q2))
    rh, rl = vadd(rh, rl, -ph, -pl)
    q3 = rh / bhi
    q1, q2 = v_quick_two_sum(q1, q2)
    return vadd(q1, q2, q3, np.zeros_like(q3))


def vsqrt(ahi, alo):
    ahi = np.asarray(ahi, dtype=float)
    alo = np.asarray(alo, dtype=float)
    if np.any(ahi < 0.0):
        raise ValueError("sqrt of negative value")
    nz = ahi > 0.0
    x = np.zeros_like(ahi)
    np.divide(1.0, np.sqrt(ahi, where=nz, out=np.ones_like(ahi)), where=nz, out=x)
    y = ahi * x
    ph, pl = v_two_prod(y, y)
    dh, _ = vadd(ahi, alo, -ph, -pl)
    rh, rl = v_quick_two_sum(y, dh * (x * 0.5))
    rh[~nz] = 0.0
    rl[~nz] = 0.0
    return rh, rl


def vexp(ahi, alo):
    ahi = np.asarray(ahi, dtype=float)
    alo = np.asarray(alo, dtype=float)
    if np.any(ahi > 708.0):
        raise OverflowError("exp argument too large")
    under = ahi < -745.0
    if np.any(under):
        # clamp so the range reduction never overflows; zeroed at the end
        ahi = np.where(under, -746.0, ahi)
        alo = np.where(under, 0.0, alo)
    m = np.round(ahi / _LN2_HI)
    ph, pl = v_two_prod(m, _LN2_HI)
    pl = pl + m * _LN2_LO
    rh, rl = vadd(ahi, alo, -ph, -pl)
    scale = 1.0 / (1 << _EXP_SHIFT)
    rh = rh * scale
    rl = rl * scale
    th, tl = rh.copy(), rl.copy()
    sh, sl = rh.copy(), rl.copy()
    for k in range(2, _EXP_TERMS + 1):
        th, tl = vmul(th, tl, rh, rl)
        fh, fl = _INV_FACT[k]
        ch, cl = vmul(th, tl, fh, fl)
        sh, sl = vadd(sh, sl, ch, cl)
    for _ in range(_EXP_SHIFT):
        qh, ql = vmul(sh, sl, sh, sl)
        sh, sl = vadd(qh, ql, 2.0 * sh, 2.0 * sl)
    sh, sl = vadd(sh, sl, np.ones_like(sh), np.zeros_like(sh))
    mi = m.astype(np.int64)
    out_h = np.ldexp(sh, mi)
    out_l = np.ldexp(sl, mi)
    # exact zeros for deep underflow, matching the scalar guard
    if np.any(under):
        out_h = np.where(under, 0.0, out_h)
        out_l = np.where(under, 0.0, out_l)
    return out_h, out_l
