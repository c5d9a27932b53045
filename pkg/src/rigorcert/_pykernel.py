"""Pure-Python hot kernels.

Mirrors ``_ckernel.pyx`` function for function; :mod:`rigorcert.kernel`
picks the compiled module when it is importable.  Interval endpoints are
``decimal.Decimal`` pairs and every rounding goes through the ``down``/``up``
contexts passed in.  Fixed-point series work on Python ints scaled by
``2**bits`` and return ``(value, error)`` where ``error`` bounds the distance
to the exact series value in units of ``2**-bits``.
"""
from decimal import Decimal

from .errors import DivByZeroInterval

OP_CONST = 0
OP_ADD = 1
OP_SUB = 2
OP_MUL = 3
OP_DIV = 4
OP_NEG = 5
OP_POW = 6
OP_ABS = 7
OP_CALL = 8

_ZERO = Decimal(0)


def iadd(alo, ahi, blo, bhi, dn, up):
    return dn.add(alo, blo), up.add(ahi, bhi)


def isub(alo, ahi, blo, bhi, dn, up):
    return dn.subtract(alo, bhi), up.subtract(ahi, blo)


def ineg(alo, ahi):
    return ahi.copy_negate(), alo.copy_negate()


def imul(alo, ahi, blo, bhi, dn, up):
    m = dn.multiply
    M = up.multiply
    if alo >= 0:
        if blo >= 0:
            return m(alo, blo), M(ahi, bhi)
        if bhi <= 0:
            return m(ahi, blo), M(alo, bhi)
        return m(ahi, blo), M(ahi, bhi)
    if ahi <= 0:
        if blo >= 0:
            return m(alo, bhi), M(ahi, blo)
        if bhi <= 0:
            return m(ahi, bhi), M(alo, blo)
        return m(alo, bhi), M(alo, blo)
    if blo >= 0:
        return m(alo, bhi), M(ahi, bhi)
    if bhi <= 0:
        return m(ahi, blo), M(alo, blo)
    return min(m(alo, bhi), m(ahi, blo)), max(M(alo, blo), M(ahi, bhi))


def idiv(alo, ahi, blo, bhi, dn, up):
    d = dn.divide
    D = up.divide
    if blo > 0:
        if alo >= 0:
            return d(alo, bhi), D(ahi, blo)
        if ahi <= 0:
            return d(alo, blo), D(ahi, bhi)
        return d(alo, blo), D(ahi, blo)
    if bhi < 0:
        if alo >= 0:
            return d(ahi, bhi), D(alo, blo)
        if ahi <= 0:
            return d(ahi, blo), D(alo, bhi)
        return d(ahi, bhi), D(alo, bhi)
    raise DivByZeroInterval("divisor interval contains zero")


def _exact_power(x, n, ex):
    r = x
    for _ in range(n - 1):
        r = ex.multiply(r, x)
    return r


def ipow(alo, ahi, n, dn, up, ex):
    """Power by a natural exponent; even powers fold the sign (no dependency loss)."""
    if n == 0:
        return Decimal(1), Decimal(1)
    if n == 1:
        return alo, ahi
    if n % 2:
        return dn.plus(_exact_power(alo, n, ex)), up.plus(_exact_power(ahi, n, ex))
    if alo >= 0:
        return dn.plus(_exact_power(alo, n, ex)), up.plus(_exact_power(ahi, n, ex))
    if ahi <= 0:
        return dn.plus(_exact_power(ahi, n, ex)), up.plus(_exact_power(alo, n, ex))
    m = max(alo.copy_negate(), ahi)
    return _ZERO, up.plus(_exact_power(m, n, ex))


def iabs(alo, ahi):
    if alo >= 0:
        return alo, ahi
    if ahi <= 0:
        return ahi.copy_negate(), alo.copy_negate()
    return _ZERO, max(alo.copy_negate(), ahi)


def run_tape(code, regs, p, dn, up, ex):
    """Execute a compiled expression; ``regs`` holds the variable intervals on entry."""
    append = regs.append
    for ins in code:
        op = ins[0]
        if op == OP_ADD:
            a = regs[ins[1]]
            b = regs[ins[2]]
            append((dn.add(a[0], b[0]), up.add(a[1], b[1])))
        elif op == OP_MUL:
            a = regs[ins[1]]
            b = regs[ins[2]]
            append(imul(a[0], a[1], b[0], b[1], dn, up))
        elif op == OP_SUB:
            a = regs[ins[1]]
            b = regs[ins[2]]
            append((dn.subtract(a[0], b[1]), up.subtract(a[1], b[0])))
        elif op == OP_CONST:
            append(ins[3])
        elif op == OP_DIV:
            a = regs[ins[1]]
            b = regs[ins[2]]
            append(idiv(a[0], a[1], b[0], b[1], dn, up))
        elif op == OP_NEG:
            a = regs[ins[1]]
            append((a[1].copy_negate(), a[0].copy_negate()))
        elif op == OP_POW:
            a = regs[ins[1]]
            append(ipow(a[0], a[1], ins[3], dn, up, ex))
        elif op == OP_ABS:
            a = regs[ins[1]]
            append(iabs(a[0], a[1]))
        elif op == OP_CALL:
            a = regs[ins[1]]
            append(ins[3](a[0], a[1], p))
        else:
            raise ValueError(f"bad opcode {op}")
    return regs[-1]


def atan_series(t, bits):
    """arctan(t/2**bits) for |t| <= 2**(bits-1)."""
    t2 = (t * t) >> bits
    p = t
    e = 0
    s = 0
    es = 0
    k = 0
    while abs(p) > 4:
        d = 2 * k + 1
        if k % 2:
            s -= p // d
        else:
            s += p // d
        es += e // d + 2
        e = ((e * t2 + abs(p) + e) >> bits) + 2
        p = (p * t2) >> bits
        k += 1
    return s, es + abs(p) + e + 1


def artanh_series(t, bits):
    """artanh(t/2**bits) for |t| <= 2**(bits-1)."""
    t2 = (t * t) >> bits
    p = t
    e = 0
    s = 0
    es = 0
    k = 0
    while abs(p) > 4:
        d = 2 * k + 1
        s += p // d
        es += e // d + 2
        e = ((e * t2 + abs(p) + e) >> bits) + 2
        p = (p * t2) >> bits
        k += 1
    return s, es + 2 * (abs(p) + e) + 1


def sin_series(r, bits):
    """sin(r/2**bits) for |r| <= 2**bits."""
    r2 = (r * r) >> bits
    p = r
    e = 0
    s = 0
    es = 0
    j = 0
    while abs(p) > 4:
        if j % 2:
            s -= p
        else:
            s += p
        es += e
        d = (2 * j + 2) * (2 * j + 3)
        e = (((e * r2 + abs(p) + e) >> bits) + 2) // d + 2
        p = ((p * r2) >> bits) // d
        j += 1
    return s, es + abs(p) + e + 1


def cos_series(r, bits):
    """cos(r/2**bits) for |r| <= 2**bits."""
    r2 = (r * r) >> bits
    p = 1 << bits
    e = 0
    s = 0
    es = 0
    j = 0
    while abs(p) > 4:
        if j % 2:
            s -= p
        else:
            s += p
        es += e
        d = (2 * j + 1) * (2 * j + 2)
        e = (((e * r2 + abs(p) + e) >> bits) + 2) // d + 2
        p = ((p * r2) >> bits) // d
        j += 1
    return s, es + abs(p) + e + 1


def atn_series(x, m, bits):
    """m-th derivative of atn at x/2**bits, |x| <= 0.3 * 2**bits.

    atn^(m)(x) = sum_j (-1)^(j+m) (j+m)!/j! x^j / (2j+2m+1).
    """
    ax = abs(x)
    q = 1
    for i in range(2, m + 1):
        q *= i
    q <<= bits
    e = 0
    s = 0
    es = 0
    j = 0
    while j < 2 * m + 2 or abs(q) > 8:
        d = 2 * j + 2 * m + 1
        if (j + m) % 2:
            s -= q // d
        else:
            s += q // d
        es += e // d + 2
        e = (((e * ax) >> bits) + 2) * (j + m + 1) // (j + 1) + 2
        q = ((q * x) >> bits) * (j + m + 1) // (j + 1)
        j += 1
    return s, es + 2 * (abs(q) + e) + 2
