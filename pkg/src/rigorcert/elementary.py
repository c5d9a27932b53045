"""Rigorous point enclosures of the transcendental functions.

Values are carried as fixed-point balls ``(mid, rad)`` of Python ints scaled by
``2**bits``: the true value lies in ``[(mid - rad)/2**bits, (mid + rad)/2**bits]``.
Ball operations widen the radius for every truncation, so any chain of them
stays sound; the series kernels report their own error bound.  The final ball
is rounded outward to a ``p``-digit decimal pair.
"""
from __future__ import annotations

from decimal import Decimal
from functools import lru_cache
from math import factorial, isqrt

from .kernel import artanh_series, atan_series, atn_series, cos_series, sin_series
from .numeric import contexts


class _NeedBits(ArithmeticError):
    pass


def _from_decimal(d: Decimal, bits: int) -> tuple[int, int]:
    n, den = d.as_integer_ratio()
    q, rem = divmod(n << bits, den)
    return q, (1 if rem else 0)


def _mul(a, ra, b, rb, bits):
    return (a * b) >> bits, ((abs(a) * rb + abs(b) * ra + ra * rb) >> bits) + 2


def _div(a, ra, b, rb, bits):
    ab = abs(b)
    if ab <= rb:
        raise _NeedBits("divisor ball contains zero")
    return (a << bits) // b, (((abs(a) * rb + ab * ra) << bits) // (ab * (ab - rb))) + 2


def _sqrt(a, ra, bits):
    hi = a + ra
    if hi < 0:
        raise _NeedBits("square root of a negative ball")
    lo = max(a - ra, 0)
    slo = isqrt(lo << bits)
    shi = isqrt(hi << bits) + 1
    m = (slo + shi) // 2
    return m, max(m - slo, shi - m)


def _rescale(m, r, frm, to):
    shift = frm - to
    if shift <= 0:
        return m << -shift, r << -shift
    return m >> shift, (r >> shift) + 2


@lru_cache(maxsize=64)
def pi_ball(bits: int) -> tuple[int, int]:
    """pi by Machin's formula 16 atan(1/5) - 4 atan(1/239)."""
    g = bits + 12
    one = 1 << g
    s1, e1 = atan_series(one // 5, g)
    s2, e2 = atan_series(one // 239, g)
    return _rescale(16 * s1 - 4 * s2, 16 * (e1 + 1) + 4 * (e2 + 1), g, bits)


def _half_pi(bits):
    m, r = pi_ball(bits)
    return m >> 1, (r >> 1) + 1


def _atan_small(t, rt, bits):
    # halve the angle until |t| <= 1/4: atan(t) = 2 atan(t / (1 + sqrt(1 + t^2)))
    one = 1 << bits
    if rt > one >> 4:
        raise _NeedBits("argument ball too wide")
    h = 0
    while abs(t) + rt > one >> 2:
        sm, sr = _mul(t, rt, t, rt, bits)
        sm, sr = _sqrt(one + sm, sr, bits)
        t, rt = _div(t, rt, one + sm, sr, bits)
        h += 1
    s, e = atan_series(t, bits)
    return s << h, (e + rt) << h


def atan_ball(x, rx, bits):
    if x < 0:
        m, r = atan_ball(-x, rx, bits)
        return -m, r
    one = 1 << bits
    if x - rx > 2 * one:
        im, ir = _div(one, 0, x, rx, bits)
        am, ar = _atan_small(im, ir, bits)
        hm, hr = _half_pi(bits)
        return hm - am, hr + ar
    return _atan_small(x, rx, bits)


def artanh_ball(t, rt, bits):
    """artanh for 0 <= t < 1 via tanh(u/2) = tanh(u) / (1 + sqrt(1 - tanh(u)^2))."""
    one = 1 << bits
    h = 0
    while abs(t) + rt > one >> 2:
        if h > 4 * bits:
            raise _NeedBits("artanh reduction does not converge")
        sm, sr = _mul(t, rt, t, rt, bits)
        dm = one - sm
        if dm - sr <= 0:
            raise _NeedBits("artanh argument too close to 1")
        qm, qr = _sqrt(dm, sr, bits)
        t, rt = _div(t, rt, one + qm, qr, bits)
        h += 1
    s, e = artanh_series(t, bits)
    # |artanh'| <= 16/15 on |t| <= 1/4
    return s << h, (e + 2 * rt) << h


def sincos_ball(x, rx, bits):
    """(sin, cos) balls; reduction modulo pi/2 carries enough extra bits for |x|."""
    extra = max(0, abs(x).bit_length() - bits) + 8
    g = bits + extra
    x2 = x << extra
    rx2 = rx << extra
    hm, hr = _half_pi(g)
    k = (2 * x2 + hm) // (2 * hm)
    r = x2 - k * hm
    rr = rx2 + abs(k) * hr
    if abs(r) + rr > 1 << g:
        raise _NeedBits("argument reduction failed")
    s, es = sin_series(r, g)
    c, ec = cos_series(r, g)
    es += rr
    ec += rr
    q = k % 4
    if q == 0:
        sin_b, cos_b = (s, es), (c, ec)
    elif q == 1:
        sin_b, cos_b = (c, ec), (-s, es)
    elif q == 2:
        sin_b, cos_b = (-s, es), (-c, ec)
    else:
        sin_b, cos_b = (-c, ec), (s, es)
    return _rescale(*sin_b, g, bits), _rescale(*cos_b, g, bits)


def asin_ball(x, rx, bits):
    """asin for |x| < 1 as atan(x / sqrt(1 - x^2))."""
    one = 1 << bits
    sm, sr = _mul(x, rx, x, rx, bits)
    dm = one - sm
    if dm - sr <= 0:
        raise _NeedBits("asin argument too close to 1")
    qm, qr = _sqrt(dm, sr, bits)
    tm, tr = _div(x, rx, qm, qr, bits)
    return atan_ball(tm, tr, bits)


def acos_ball(x, rx, bits):
    am, ar = asin_ball(x, rx, bits)
    hm, hr = _half_pi(bits)
    return hm - am, hr + ar


def _atn_lipschitz(m):
    # |atn^(m+1)| <= (m+1)! / ((2m+3) (1 - 0.3)^(m+2)) for x >= -0.3
    return (factorial(m + 1) * 10 ** (m + 2)) // (7 ** (m + 2) * (2 * m + 3)) + 1


def atn_ball(x, rx, bits, m=0):
    """m-th derivative of atn(x) = arctan(sqrt x)/sqrt x, continued to x > -1."""
    one = 1 << bits
    if 10 * (abs(x) + rx) <= 3 * one:
        s, e = atn_series(x, m, bits)
        return s, e + _atn_lipschitz(m) * rx + 1
    if m == 0:
        if x > 0:
            sm, sr = _sqrt(x, rx, bits)
            am, ar = atan_ball(sm, sr, bits)
        else:
            sm, sr = _sqrt(-x, rx, bits)
            am, ar = artanh_ball(sm, sr, bits)
        return _div(am, ar, sm, sr, bits)
    # 2x a^(m) = (-1)^(m-1) (m-1)!/(1+x)^m - (2m-1) a^(m-1)
    pm, pr = atn_ball(x, rx, bits, m - 1)
    om = one + x
    if om - rx <= 0:
        raise _NeedBits("atn argument too close to -1")
    wm, wr = one, 0
    for _ in range(m):
        wm, wr = _mul(wm, wr, om, rx, bits)
    fm, fr = _div(factorial(m - 1) << bits, 0, wm, wr, bits)
    if (m - 1) % 2:
        fm = -fm
    nm = fm - (2 * m - 1) * pm
    nr = fr + (2 * m - 1) * pr
    return _div(nm, nr, 2 * x, 2 * rx, bits)


def _sin_ball(x, rx, bits):
    return sincos_ball(x, rx, bits)[0]


def _cos_ball(x, rx, bits):
    return sincos_ball(x, rx, bits)[1]


_BALLS = {
    "sin": _sin_ball,
    "cos": _cos_ball,
    "atan": atan_ball,
    "asin": asin_ball,
    "acos": acos_ball,
}


def _tight_enough(lo: Decimal, hi: Decimal, p: int) -> bool:
    big = max(abs(lo), abs(hi))
    if big == 0:
        return True
    ulp = Decimal(1).scaleb(big.adjusted() - p + 1)
    return hi - lo <= 4 * ulp


@lru_cache(maxsize=200_000)
def enclose(kind: str, x: Decimal, p: int, order: int = 0) -> tuple[Decimal, Decimal]:
    """Outward-rounded ``p``-digit enclosure of ``kind`` (or the atn derivative) at the exact point ``x``."""
    down, up = contexts(p)
    bits = (p * 10) // 3 + 32
    result = None
    for _attempt in range(5):
        xm, xr = _from_decimal(x, bits)
        try:
            if kind == "atn":
                m, r = atn_ball(xm, xr, bits, order)
            else:
                m, r = _BALLS[kind](xm, xr, bits)
        except _NeedBits:
            bits *= 2
            continue
        scale = Decimal(1 << bits)
        result = down.divide(Decimal(m - r), scale), up.divide(Decimal(m + r), scale)
        if _tight_enough(*result, p):
            return result
        bits *= 2
    if result is None:
        raise ArithmeticError(f"cannot enclose {kind}({x})")
    return result


@lru_cache(maxsize=32)
def pi_bounds(bits: int):
    """Rational lower/upper bounds on pi with about ``bits`` bits of accuracy."""
    from fractions import Fraction

    m, r = pi_ball(bits)
    return Fraction(m - r, 1 << bits), Fraction(m + r, 1 << bits)


def half_pi_interval(p: int) -> tuple[Decimal, Decimal]:
    down, up = contexts(p)
    bits = (p * 10) // 3 + 32
    m, r = _half_pi(bits)
    scale = Decimal(1 << bits)
    return down.divide(Decimal(m - r), scale), up.divide(Decimal(m + r), scale)


def pi_interval(p: int) -> tuple[Decimal, Decimal]:
    down, up = contexts(p)
    bits = (p * 10) // 3 + 32
    m, r = pi_ball(bits)
    scale = Decimal(1 << bits)
    return down.divide(Decimal(m - r), scale), up.divide(Decimal(m + r), scale)
