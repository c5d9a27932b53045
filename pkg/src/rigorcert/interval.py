"""Closed intervals with decimal endpoints and their outward-rounded operations.

Every operation takes the working precision ``p`` (significant digits) and
returns an interval containing the exact image of its arguments.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from math import floor

from . import kernel
from .elementary import enclose, half_pi_interval, pi_bounds
from .errors import DivByZeroInterval, DomainError
from .numeric import Number, _exact_ctx, contexts, exact, exact_mul, nearest_context

__all__ = [
    "Interval", "DivByZeroInterval", "DomainError",
    "iadd", "isub", "imul", "idiv", "ineg", "ipow", "isqrt", "isin", "icos",
    "iatan", "iasin", "iacos", "iatn", "iatn_deriv", "iabs", "iabs_interval",
]

_ONE = Decimal(1)
_MINUS_ONE = Decimal(-1)
_ZERO = Decimal(0)


def _dec(x: Number) -> Decimal:
    if isinstance(x, Decimal):
        return x
    if isinstance(x, int):
        return Decimal(x)
    from .numeric import fraction_to_decimal

    return fraction_to_decimal(exact(x))


@dataclass(frozen=True, slots=True)
class Interval:
    lo: Decimal
    hi: Decimal

    def __post_init__(self):
        if not isinstance(self.lo, Decimal):
            object.__setattr__(self, "lo", _dec(self.lo))
        if not isinstance(self.hi, Decimal):
            object.__setattr__(self, "hi", _dec(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Number) -> Interval:
        d = _dec(x)
        return cls(d, d)

    @property
    def width(self) -> Decimal:
        return _exact_ctx().subtract(self.hi, self.lo)

    @property
    def midpoint(self) -> Fraction:
        return (Fraction(self.lo) + Fraction(self.hi)) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float):
            x = Fraction(x)
        return self.lo <= x <= self.hi

    def intersects(self, other: Interval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: Interval) -> Interval:
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def as_tuple(self) -> tuple[Decimal, Decimal]:
        return self.lo, self.hi

    def __str__(self):
        from .numeric import format_decimal

        return f"[{format_decimal(self.lo)}, {format_decimal(self.hi)}]"


def iadd(a: Interval, b: Interval, p: int) -> Interval:
    dn, up = contexts(p)
    return Interval(*kernel.iadd(a.lo, a.hi, b.lo, b.hi, dn, up))


def isub(a: Interval, b: Interval, p: int) -> Interval:
    dn, up = contexts(p)
    return Interval(*kernel.isub(a.lo, a.hi, b.lo, b.hi, dn, up))


def imul(a: Interval, b: Interval, p: int) -> Interval:
    dn, up = contexts(p)
    return Interval(*kernel.imul(a.lo, a.hi, b.lo, b.hi, dn, up))


def idiv(a: Interval, b: Interval, p: int) -> Interval:
    """Raises :class:`DivByZeroInterval` when ``0`` lies in ``b``."""
    dn, up = contexts(p)
    return Interval(*kernel.idiv(a.lo, a.hi, b.lo, b.hi, dn, up))


def ineg(a: Interval, p: int | None = None) -> Interval:
    return Interval(*kernel.ineg(a.lo, a.hi))


def ipow(a: Interval, n: int, p: int) -> Interval:
    if n < 0:
        raise ValueError("exponent must be a natural number")
    dn, up = contexts(p)
    return Interval(*kernel.ipow(a.lo, a.hi, n, dn, up, _exact_ctx()))


def iabs(a: Interval) -> Decimal:
    """Magnitude ``max(|lo|, |hi|)``, exact."""
    return max(a.lo.copy_abs(), a.hi.copy_abs())


def iabs_interval(a: Interval) -> Interval:
    """Image of ``|x|`` over ``a``."""
    return Interval(*kernel.iabs(a.lo, a.hi))


# -- endpoint-level functions, shared with the expression tape ---------------

def _sqrt_dir(x: Decimal, p: int, direction: str) -> Decimal:
    if x == 0:
        return _ZERO
    r = nearest_context(p).sqrt(x)
    dn, up = contexts(p)
    sq = exact_mul(r, r)
    if direction == "down":
        return dn.next_minus(r) if sq > x else dn.plus(r)
    return up.next_plus(r) if sq < x else up.plus(r)


def sqrt_t(lo: Decimal, hi: Decimal, p: int):
    if lo < 0:
        raise DomainError(f"sqrt of interval with negative part [{lo}, {hi}]")
    return _sqrt_dir(lo, p, "down"), _sqrt_dir(hi, p, "up")


def atan_t(lo, hi, p):
    a = _ZERO if lo == 0 else enclose("atan", lo, p)[0]
    b = _ZERO if hi == 0 else enclose("atan", hi, p)[1]
    return a, b


def _unit_check(lo, hi, name):
    if lo < _MINUS_ONE or hi > _ONE:
        raise DomainError(f"{name} of interval outside [-1, 1]: [{lo}, {hi}]")


def _asin_lo(x, p):
    if x == 0:
        return _ZERO
    if x == _ONE:
        return half_pi_interval(p)[0]
    if x == _MINUS_ONE:
        return half_pi_interval(p)[1].copy_negate()
    return enclose("asin", x, p)[0]


def _asin_hi(x, p):
    if x == 0:
        return _ZERO
    if x == _ONE:
        return half_pi_interval(p)[1]
    if x == _MINUS_ONE:
        return half_pi_interval(p)[0].copy_negate()
    return enclose("asin", x, p)[1]


def asin_t(lo, hi, p):
    _unit_check(lo, hi, "asin")
    return _asin_lo(lo, p), _asin_hi(hi, p)


def acos_t(lo, hi, p):
    _unit_check(lo, hi, "acos")
    dn, up = contexts(p)
    hp_lo, hp_hi = half_pi_interval(p + 2)
    # acos = pi/2 - asin, decreasing
    a = _ZERO if hi == _ONE else dn.subtract(hp_lo, _asin_hi(hi, p + 2))
    b = up.subtract(hp_hi, _asin_lo(lo, p + 2))
    return a, b


def _atn_point(x, p, order, side):
    if x == 0:
        # atn^(m)(0) = (-1)^m m!/(2m+1)
        from math import factorial

        dn, up = contexts(p)
        v = Decimal(factorial(order) * (-1) ** order)
        d = Decimal(2 * order + 1)
        return dn.divide(v, d) if side == 0 else up.divide(v, d)
    return enclose("atn", x, p, order)[side]


@lru_cache(maxsize=None)
def atn_deriv_t(order):
    def f(lo, hi, p):
        if lo <= _MINUS_ONE:
            raise DomainError(f"atn needs x > -1, got [{lo}, {hi}]")
        # the m-th derivative is decreasing for even m, increasing for odd m
        if order % 2 == 0:
            return _atn_point(hi, p, order, 0), _atn_point(lo, p, order, 1)
        return _atn_point(lo, p, order, 0), _atn_point(hi, p, order, 1)

    f.__name__ = f"atn_d{order}"
    return f


atn_t = atn_deriv_t(0)


def _trig_t(kind):
    # sin peaks at pi/2 + k pi, cos at k pi; value there is (-1)^k
    offset = Fraction(1, 2) if kind == "sin" else Fraction(0)

    def f(lo, hi, p):
        if hi - lo >= 7:
            return _MINUS_ONE, _ONE
        if kind == "cos" and lo == hi == 0:
            return _ONE, _ONE
        if kind == "sin" and lo == hi == 0:
            return _ZERO, _ZERO
        a = enclose(kind, lo, p)
        b = enclose(kind, hi, p)
        rlo = min(a[0], b[0])
        rhi = max(a[1], b[1])
        flo, fhi = Fraction(lo), Fraction(hi)
        bits = 64 + max(abs(flo), abs(fhi), 1).__floor__().bit_length()
        pl, ph = pi_bounds(bits)
        pm = (pl + ph) / 2
        k0 = floor(flo / pm - offset) - 1
        k1 = floor(fhi / pm - offset) + 1
        for k in range(k0, k1 + 1):
            c = k + offset
            cl, ch = (c * pl, c * ph) if c >= 0 else (c * ph, c * pl)
            if ch >= flo and cl <= fhi:
                if k % 2 == 0:
                    rhi = _ONE
                else:
                    rlo = _MINUS_ONE
        return max(rlo, _MINUS_ONE), min(rhi, _ONE)

    f.__name__ = f"{kind}_t"
    return f


sin_t = _trig_t("sin")
cos_t = _trig_t("cos")


def _wrap(fn):
    def op(a: Interval, p: int) -> Interval:
        return Interval(*fn(a.lo, a.hi, p))

    op.__name__ = "i" + fn.__name__.replace("_t", "")
    return op


isqrt = _wrap(sqrt_t)
isqrt.__doc__ = "Square root; lower end squared is <= lo, upper end squared is >= hi."
isin = _wrap(sin_t)
icos = _wrap(cos_t)
iatan = _wrap(atan_t)
iasin = _wrap(asin_t)
iacos = _wrap(acos_t)
iatn = _wrap(atn_t)
iatn.__doc__ = "arctan(sqrt x)/sqrt x continued analytically to x > -1 (decreasing)."


def iatn_deriv(a: Interval, order: int, p: int) -> Interval:
    return Interval(*atn_deriv_t(order)(a.lo, a.hi, p))
