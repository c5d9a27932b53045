# cython: language_level=3
"""Compiled hot kernels; the same functions as ``_pykernel``.

Endpoints stay ``decimal.Decimal`` and series stay Python ints, so results
are bit-identical to the fallback.  The speedup comes from typed opcode
dispatch, ``cdef inline`` helpers that skip Python call overhead, context
methods looked up once per tape, and sign tests against a cached zero.
"""
from decimal import Decimal

from .errors import DivByZeroInterval

cdef enum:
    C_CONST = 0
    C_ADD = 1
    C_SUB = 2
    C_MUL = 3
    C_DIV = 4
    C_NEG = 5
    C_POW = 6
    C_ABS = 7
    C_CALL = 8

OP_CONST = C_CONST
OP_ADD = C_ADD
OP_SUB = C_SUB
OP_MUL = C_MUL
OP_DIV = C_DIV
OP_NEG = C_NEG
OP_POW = C_POW
OP_ABS = C_ABS
OP_CALL = C_CALL

cdef object _ZERO = Decimal(0)
cdef object _ONE = Decimal(1)


cdef inline tuple _mul(object alo, object ahi, object blo, object bhi, object m, object M):
    if alo >= _ZERO:
        if blo >= _ZERO:
            return m(alo, blo), M(ahi, bhi)
        if bhi <= _ZERO:
            return m(ahi, blo), M(alo, bhi)
        return m(ahi, blo), M(ahi, bhi)
    if ahi <= _ZERO:
        if blo >= _ZERO:
            return m(alo, bhi), M(ahi, blo)
        if bhi <= _ZERO:
            return m(ahi, bhi), M(alo, blo)
        return m(alo, bhi), M(alo, blo)
    if blo >= _ZERO:
        return m(alo, bhi), M(ahi, bhi)
    if bhi <= _ZERO:
        return m(ahi, blo), M(alo, blo)
    return min(m(alo, bhi), m(ahi, blo)), max(M(alo, blo), M(ahi, bhi))


cdef inline tuple _div(object alo, object ahi, object blo, object bhi, object d, object D):
    if blo > _ZERO:
        if alo >= _ZERO:
            return d(alo, bhi), D(ahi, blo)
        if ahi <= _ZERO:
            return d(alo, blo), D(ahi, bhi)
        return d(alo, blo), D(ahi, blo)
    if bhi < _ZERO:
        if alo >= _ZERO:
            return d(ahi, bhi), D(alo, blo)
        if ahi <= _ZERO:
            return d(ahi, blo), D(alo, bhi)
        return d(ahi, bhi), D(alo, bhi)
    raise DivByZeroInterval("divisor interval contains zero")


cdef object _exact_power(object x, long n, object em):
    cdef long i
    r = x
    for i in range(n - 1):
        r = em(r, x)
    return r


cdef tuple _pow(object alo, object ahi, long n, object dp, object up_, object em):
    if n == 0:
        return _ONE, _ONE
    if n == 1:
        return alo, ahi
    if n % 2 or alo >= _ZERO:
        return dp(_exact_power(alo, n, em)), up_(_exact_power(ahi, n, em))
    if ahi <= _ZERO:
        return dp(_exact_power(ahi, n, em)), up_(_exact_power(alo, n, em))
    return _ZERO, up_(_exact_power(max(alo.copy_negate(), ahi), n, em))


cdef inline tuple _abs(object alo, object ahi):
    if alo >= _ZERO:
        return alo, ahi
    if ahi <= _ZERO:
        return ahi.copy_negate(), alo.copy_negate()
    return _ZERO, max(alo.copy_negate(), ahi)


def iadd(alo, ahi, blo, bhi, dn, up):
    return dn.add(alo, blo), up.add(ahi, bhi)


def isub(alo, ahi, blo, bhi, dn, up):
    return dn.subtract(alo, bhi), up.subtract(ahi, blo)


def ineg(alo, ahi):
    return ahi.copy_negate(), alo.copy_negate()


def imul(alo, ahi, blo, bhi, dn, up):
    return _mul(alo, ahi, blo, bhi, dn.multiply, up.multiply)


def idiv(alo, ahi, blo, bhi, dn, up):
    return _div(alo, ahi, blo, bhi, dn.divide, up.divide)


def ipow(alo, ahi, long n, dn, up, ex):
    """Power by a natural exponent; even powers fold the sign (no dependency loss)."""
    return _pow(alo, ahi, n, dn.plus, up.plus, ex.multiply)


def iabs(alo, ahi):
    return _abs(alo, ahi)


def run_tape(list code, list regs, p, dn, up, ex):
    """Execute a compiled expression; ``regs`` holds the variable intervals on entry."""
    cdef tuple ins, a, b
    cdef int op
    add, Add = dn.add, up.add
    sub, Sub = dn.subtract, up.subtract
    mul, Mul = dn.multiply, up.multiply
    div, Div = dn.divide, up.divide
    for ins in code:
        op = ins[0]
        if op == C_ADD:
            a = <tuple>regs[ins[1]]
            b = <tuple>regs[ins[2]]
            regs.append((add(a[0], b[0]), Add(a[1], b[1])))
        elif op == C_MUL:
            a = <tuple>regs[ins[1]]
            b = <tuple>regs[ins[2]]
            regs.append(_mul(a[0], a[1], b[0], b[1], mul, Mul))
        elif op == C_SUB:
            a = <tuple>regs[ins[1]]
            b = <tuple>regs[ins[2]]
            regs.append((sub(a[0], b[1]), Sub(a[1], b[0])))
        elif op == C_CONST:
            regs.append(ins[3])
        elif op == C_DIV:
            a = <tuple>regs[ins[1]]
            b = <tuple>regs[ins[2]]
            regs.append(_div(a[0], a[1], b[0], b[1], div, Div))
        elif op == C_NEG:
            a = <tuple>regs[ins[1]]
            regs.append((a[1].copy_negate(), a[0].copy_negate()))
        elif op == C_POW:
            a = <tuple>regs[ins[1]]
            regs.append(_pow(a[0], a[1], ins[3], dn.plus, up.plus, ex.multiply))
        elif op == C_ABS:
            a = <tuple>regs[ins[1]]
            regs.append(_abs(a[0], a[1]))
        elif op == C_CALL:
            a = <tuple>regs[ins[1]]
            regs.append(ins[3](a[0], a[1], p))
        else:
            raise ValueError(f"bad opcode {op}")
    return regs[len(regs) - 1]


def atan_series(t, bits):
    """arctan(t/2**bits) for |t| <= 2**(bits-1)."""
    t2 = (t * t) >> bits
    p = t
    e = 0
    s = 0
    es = 0
    cdef long k = 0
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
    cdef long k = 0
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
    cdef long j = 0
    cdef long d
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
    cdef long j = 0
    cdef long d
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
    cdef long j = 0
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
