"""Decimal scalars with directed rounding, exact rationals and rigorous constants.

Endpoints are :class:`decimal.Decimal` values.  Every arithmetic result is
produced by a context whose rounding mode points in the safe direction, so a
lower endpoint is never above and an upper endpoint never below the exact
value.  Rationals are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import re
from decimal import (
    ROUND_CEILING,
    ROUND_FLOOR,
    ROUND_HALF_EVEN,
    Context,
    Decimal,
    DivisionByZero,
    InvalidOperation,
    Overflow,
)
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

__all__ = [
    "DEFAULT_PRECISION", "NegativeInput", "contexts", "round_dir", "round_nearest",
    "canonical", "format_decimal", "parse_decimal", "exact", "fraction_to_decimal",
    "rational_sqrt_exact", "pi_enclosure",
]

DEFAULT_PRECISION = 10

_EMAX = 999_999_999
_EMIN = -999_999_999

ZERO = Decimal(0)
ONE = Decimal(1)

Number = Union[int, Fraction, Decimal]


class NegativeInput(ValueError):
    """A square root was requested for a negative rational."""


def check_precision(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or p < 1:
        raise ValueError(f"precision must be a positive integer, got {p!r}")
    return p


@lru_cache(maxsize=None)
def contexts(p: int) -> tuple[Context, Context]:
    """Return ``(down, up)`` contexts rounding to ``p`` significant digits."""
    check_precision(p)
    traps = [InvalidOperation, DivisionByZero, Overflow]
    down = Context(prec=p, rounding=ROUND_FLOOR, Emax=_EMAX, Emin=_EMIN, traps=traps)
    up = Context(prec=p, rounding=ROUND_CEILING, Emax=_EMAX, Emin=_EMIN, traps=traps)
    return down, up


@lru_cache(maxsize=None)
def nearest_context(p: int) -> Context:
    check_precision(p)
    return Context(prec=p, rounding=ROUND_HALF_EVEN, Emax=_EMAX, Emin=_EMIN,
                   traps=[InvalidOperation, DivisionByZero, Overflow])


def exact(x: Number) -> Fraction:
    """Exact rational value of an int, Fraction or Decimal."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def round_dir(x: Number, p: int, direction: str) -> Decimal:
    """Round ``x`` to the tightest ``p``-digit decimal below (``"down"``) or above (``"up"``)."""
    down, up = contexts(p)
    if direction == "down":
        ctx = down
    elif direction == "up":
        ctx = up
    else:
        raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")
    if isinstance(x, Decimal):
        return ctx.plus(x)
    if isinstance(x, int):
        return ctx.plus(Decimal(x))
    return ctx.divide(Decimal(x.numerator), Decimal(x.denominator))


def round_nearest(x: Number, p: int) -> Decimal:
    ctx = nearest_context(p)
    if isinstance(x, Decimal):
        return ctx.plus(x)
    x = exact(x)
    return ctx.divide(Decimal(x.numerator), Decimal(x.denominator))


def canonical(d: Decimal) -> Decimal:
    """Strip trailing zeros without any rounding (``Decimal.normalize`` would round)."""
    if not d.is_finite():
        raise ValueError(f"non-finite decimal {d}")
    sign, digits, exp = d.as_tuple()
    if not any(digits):
        return Decimal(0)
    digits = list(digits)
    while digits and digits[-1] == 0:
        digits.pop()
        exp += 1
    return Decimal((sign, tuple(digits), exp))


def format_decimal(d: Decimal) -> str:
    """Canonical literal: no trailing zeros, plain notation unless the exponent is extreme."""
    d = canonical(d)
    sign, digits, exp = d.as_tuple()
    if not digits or digits == (0,):
        return "0"
    body = "".join(map(str, digits))
    prefix = "-" if sign else ""
    adjusted = len(body) - 1 + exp
    if 0 <= exp <= 20:
        return prefix + body + "0" * exp
    if exp < 0 and adjusted >= -20:
        if adjusted >= 0:
            point = len(body) + exp
            return prefix + body[:point] + "." + body[point:]
        return prefix + "0." + "0" * (-adjusted - 1) + body
    mant = body[0] + ("." + body[1:] if len(body) > 1 else "")
    return f"{prefix}{mant}e{adjusted}"


_DECIMAL_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")


def parse_decimal(text: str) -> Decimal:
    """Parse a decimal literal exactly (``-0.00032``, ``3.15e0``)."""
    text = text.strip()
    if not _DECIMAL_RE.match(text):
        raise ValueError(f"not a decimal literal: {text!r}")
    return canonical(Decimal(text))


def is_decimal_fraction(x: Fraction) -> bool:
    """True when the denominator has no prime factors besides 2 and 5."""
    d = x.denominator
    for q in (2, 5):
        while d % q == 0:
            d //= q
    return d == 1


def fraction_to_decimal(x: Fraction) -> Decimal:
    """Exact conversion of a terminating rational to Decimal."""
    if not is_decimal_fraction(x):
        raise ValueError(f"{x} has no finite decimal expansion")
    num, den = x.numerator, x.denominator
    k = 0
    while (10 ** k) % den:
        k += 1
    return canonical(Decimal(num * (10 ** k // den)).scaleb(-k, _exact_ctx()))


@lru_cache(maxsize=1)
def _exact_ctx() -> Context:
    return Context(prec=999_999_999, rounding=ROUND_HALF_EVEN, Emax=_EMAX, Emin=_EMIN,
                   traps=[InvalidOperation, DivisionByZero, Overflow])


def exact_mul(a: Decimal, b: Decimal) -> Decimal:
    return _exact_ctx().multiply(a, b)


def exact_add(a: Decimal, b: Decimal) -> Decimal:
    return _exact_ctx().add(a, b)


def exact_sub(a: Decimal, b: Decimal) -> Decimal:
    return _exact_ctx().subtract(a, b)


def exact_pow(a: Decimal, n: int) -> Decimal:
    """``a**n`` with no rounding (integer mantissa power)."""
    sign, digits, exp = a.as_tuple()
    m = int("".join(map(str, digits))) if digits else 0
    m = m ** n
    s = 1 if (sign and n % 2) else 0
    return Decimal((s, tuple(int(c) for c in str(m)), exp * n))


def rational_sqrt_exact(x: Number) -> Fraction | None:
    """Exact square root of a rational square, ``None`` when the root is irrational."""
    x = exact(x)
    if x < 0:
        raise NegativeInput(f"square root of negative rational {x}")
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _leibniz_sum(a: int, b: int) -> tuple[int, int]:
    # sum_{i=a}^{b-1} (-1)^i/(2i+1) as an unreduced P/Q, by binary splitting
    if b - a == 1:
        return (-1 if a % 2 else 1), 2 * a + 1
    m = (a + b) // 2
    p1, q1 = _leibniz_sum(a, m)
    p2, q2 = _leibniz_sum(m, b)
    return p1 * q2 + p2 * q1, q1 * q2


def pi_enclosure(n: int, p: int = 20):
    """Enclosure of pi from the Leibniz partial sum ``S_n`` and its error bound ``1/(2n+3)``.

    ``|pi/4 - S_n| <= 1/(2n+3)``, so pi lies in ``4*(S_n -+ 1/(2n+3))``; both
    ends are computed exactly and then rounded outward to ``p`` digits.
    """
    from .interval import Interval

    if n < 0:
        raise ValueError("n must be non-negative")
    num, den = _leibniz_sum(0, n + 1)
    r = 2 * n + 3
    down, up = contexts(p)
    # unreduced: a gcd on these operands costs more than the division
    q = Decimal(den * r)
    lo = down.divide(Decimal(4 * (num * r - den)), q)
    hi = up.divide(Decimal(4 * (num * r + den)), q)
    return Interval(lo, hi)
