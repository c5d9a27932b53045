"""Expression trees for inequality bodies.

An :class:`Expr` is an immutable node ``(op, args, val)``.  Nodes hash and
compare structurally, so compiled tapes and derivatives can be cached on them.
"""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from typing import Sequence

from . import interval as _iv
from . import kernel
from .errors import DivByZeroInterval, DomainError, NotDifferentiable, NotExact, UndefinedPoint
from .interval import Interval
from .numeric import (
    _exact_ctx, canonical, contexts, exact, fraction_to_decimal, is_decimal_fraction, rational_sqrt_exact, round_dir,
)

MAX_VARS = 6

UNARY_FUNCS = ("sqrt", "sin", "cos", "atan", "asin", "acos", "atn", "abs")
_LEAVES = ("var", "const", "pi")


class Expr:
    __slots__ = ("op", "args", "val", "_hash", "_cache")

    def __init__(self, op: str, args: tuple = (), val=None):
        self.op = op
        self.args = args
        self.val = val
        self._hash = None
        self._cache = None

    def __reduce__(self):
        return Expr, (self.op, self.args, self.val)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.op, self.val, self.args))
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (self.op == other.op and self.val == other.val
                and hash(self) == hash(other) and self.args == other.args)

    def __repr__(self):
        from .syntax import print_expr

        return f"Expr({print_expr(self)!r})"

    def cache(self) -> dict:
        if self._cache is None:
            self._cache = {}
        return self._cache

    # building helpers, mostly for tests and the LP demo
    def __add__(self, o):
        return Expr("add", (self, as_expr(o)))

    def __radd__(self, o):
        return Expr("add", (as_expr(o), self))

    def __sub__(self, o):
        return Expr("sub", (self, as_expr(o)))

    def __rsub__(self, o):
        return Expr("sub", (as_expr(o), self))

    def __mul__(self, o):
        return Expr("mul", (self, as_expr(o)))

    def __rmul__(self, o):
        return Expr("mul", (as_expr(o), self))

    def __truediv__(self, o):
        return Expr("div", (self, as_expr(o)))

    def __rtruediv__(self, o):
        return Expr("div", (as_expr(o), self))

    def __neg__(self):
        return Expr("neg", (self,))

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a natural number")
        return Expr("pow", (self,), n)


def var(i: int) -> Expr:
    """Variable by zero-based index."""
    if not 0 <= i < MAX_VARS:
        raise ValueError(f"variable index {i} out of range")
    return Expr("var", (), i)


def const(x) -> Expr:
    if isinstance(x, Fraction):
        from .numeric import fraction_to_decimal

        x = fraction_to_decimal(x)
    elif isinstance(x, str):
        from .numeric import parse_decimal

        x = parse_decimal(x)
    return Expr("const", (), canonical(Decimal(x)))


PI = Expr("pi")


def as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def _func(name):
    def f(a) -> Expr:
        return Expr(name, (as_expr(a),))

    f.__name__ = name
    return f


sqrt = _func("sqrt")
sin = _func("sin")
cos = _func("cos")
atan = _func("atan")
asin = _func("asin")
acos = _func("acos")
atn = _func("atn")
absolute = _func("abs")


def atn_deriv(a: Expr, order: int) -> Expr:
    if order == 0:
        return Expr("atn", (a,))
    return Expr("atnd", (a,), order)


def variables(e: Expr) -> set[int]:
    out = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n.op == "var":
            out.add(n.val)
        stack.extend(n.args)
    return out


def size(e: Expr) -> int:
    return 1 + sum(size(a) for a in e.args)


# -- light simplification used by differentiate ------------------------------

_ZERO = Expr("const", (), Decimal(0))
_ONE = Expr("const", (), Decimal(1))
_TWO = Expr("const", (), Decimal(2))


def _is_const(e, v=None):
    return e.op == "const" and (v is None or e.val == v)


def _add(a, b):
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return Expr("const", (), canonical(_exact_ctx().add(a.val, b.val)))
    return Expr("add", (a, b))


def _sub(a, b):
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return Expr("const", (), canonical(_exact_ctx().subtract(a.val, b.val)))
    return Expr("sub", (a, b))


def _neg(a):
    if _is_const(a):
        return Expr("const", (), canonical(a.val.copy_negate()))
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def _mul(a, b):
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return _neg(b)
    if _is_const(b, -1):
        return _neg(a)
    if _is_const(a) and _is_const(b):
        return Expr("const", (), canonical(_exact_ctx().multiply(a.val, b.val)))
    return Expr("mul", (a, b))


def _div(a, b):
    if _is_const(a, 0):
        return _ZERO
    if _is_const(b, 1):
        return a
    return Expr("div", (a, b))


def _pow(a, n):
    if n == 0:
        return _ONE
    if n == 1:
        return a
    return Expr("pow", (a,), n)


def differentiate(f: Expr, i: int) -> Expr:
    """Partial derivative with respect to variable ``i`` (zero-based)."""
    cache = f.cache()
    key = ("d", i)
    d = cache.get(key)
    if d is None:
        d = cache[key] = _diff(f, i)
    return d


def _diff(f: Expr, i: int) -> Expr:
    op = f.op
    if op == "var":
        return _ONE if f.val == i else _ZERO
    if op in ("const", "pi"):
        return _ZERO
    if i not in _vars_cached(f):
        return _ZERO
    a = f.args[0]
    da = differentiate(a, i)
    if op == "add":
        return _add(da, differentiate(f.args[1], i))
    if op == "sub":
        return _sub(da, differentiate(f.args[1], i))
    if op == "neg":
        return _neg(da)
    if op == "mul":
        b = f.args[1]
        return _add(_mul(da, b), _mul(a, differentiate(b, i)))
    if op == "div":
        b = f.args[1]
        db = differentiate(b, i)
        if _is_const(db, 0):
            return _div(da, b)
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, 2))
    if op == "pow":
        n = f.val
        return _mul(_mul(Expr("const", (), Decimal(n)), _pow(a, n - 1)), da)
    if op == "sqrt":
        return _div(da, _mul(_TWO, f))
    if op == "sin":
        return _mul(Expr("cos", (a,)), da)
    if op == "cos":
        return _neg(_mul(Expr("sin", (a,)), da))
    if op == "atan":
        return _div(da, _add(_ONE, _pow(a, 2)))
    if op == "asin":
        return _div(da, Expr("sqrt", (_sub(_ONE, _pow(a, 2)),)))
    if op == "acos":
        return _neg(_div(da, Expr("sqrt", (_sub(_ONE, _pow(a, 2)),))))
    if op == "atn":
        return _mul(Expr("atnd", (a,), 1), da)
    if op == "atnd":
        return _mul(Expr("atnd", (a,), f.val + 1), da)
    if op == "abs":
        raise NotDifferentiable("abs has no derivative rule")
    raise ValueError(f"unknown op {op}")


def _vars_cached(f: Expr) -> set[int]:
    cache = f.cache()
    v = cache.get("vars")
    if v is None:
        v = cache["vars"] = variables(f)
    return v


# -- compilation to a flat tape ----------------------------------------------

_BINARY = {"add": kernel.OP_ADD, "sub": kernel.OP_SUB, "mul": kernel.OP_MUL, "div": kernel.OP_DIV}


def _call_fn(e: Expr):
    op = e.op
    if op == "atnd":
        return _iv.atn_deriv_t(e.val)
    return {
        "sqrt": _iv.sqrt_t, "sin": _iv.sin_t, "cos": _iv.cos_t, "atan": _iv.atan_t,
        "asin": _iv.asin_t, "acos": _iv.acos_t, "atn": _iv.atn_t,
    }[op]


def compile_tape(f: Expr, nvars: int) -> list[tuple]:
    """Flatten ``f`` into SSA instructions; registers ``0..nvars-1`` hold the variables."""
    cache = f.cache()
    key = ("tape", nvars)
    tape = cache.get(key)
    if tape is not None:
        return tape
    code: list[tuple] = []
    slot: dict[Expr, int] = {}

    def emit(e: Expr) -> int:
        r = slot.get(e)
        if r is not None:
            return r
        op = e.op
        if op == "var":
            if e.val >= nvars:
                raise ValueError(f"variable index {e.val} exceeds arity {nvars}")
            return e.val
        if op == "const":
            code.append((kernel.OP_CONST, 0, 0, (e.val, e.val)))
        elif op == "pi":
            code.append((kernel.OP_CALL, _zero_reg(code, nvars), 0, _pi_call))
        elif op in _BINARY:
            a = emit(e.args[0])
            b = emit(e.args[1])
            code.append((_BINARY[op], a, b, None))
        elif op == "neg":
            code.append((kernel.OP_NEG, emit(e.args[0]), 0, None))
        elif op == "pow":
            code.append((kernel.OP_POW, emit(e.args[0]), 0, e.val))
        elif op == "abs":
            code.append((kernel.OP_ABS, emit(e.args[0]), 0, None))
        else:
            code.append((kernel.OP_CALL, emit(e.args[0]), 0, _call_fn(e)))
        r = nvars + len(code) - 1
        slot[e] = r
        return r

    out = emit(f)
    if out < nvars:
        # bare variable: copy through an exact no-op
        code.append((kernel.OP_ADD, out, _zero_reg(code, nvars), None))
    cache[key] = code
    return code


def _zero_reg(code, nvars):
    code.append((kernel.OP_CONST, 0, 0, (Decimal(0), Decimal(0))))
    return nvars + len(code) - 1


def _pi_call(lo, hi, p):
    from .elementary import pi_interval

    return pi_interval(p)


def eval_natural(f: Expr, box: Sequence[Interval], p: int) -> Interval | None:
    """Natural interval extension of ``f`` over ``box`` at ``p`` digits.

    Returns ``None`` (undefined) when some subterm leaves the domain of a
    partial operation anywhere on the box.
    """
    t = eval_tuple(f, [(b.lo, b.hi) for b in box], p)
    return None if t is None else Interval(*t)


def eval_tuple(f: Expr, bounds: list, p: int):
    code = compile_tape(f, len(bounds))
    dn, up = contexts(p)
    try:
        return kernel.run_tape(code, list(bounds), p, dn, up, _exact_ctx())
    except (DivByZeroInterval, DomainError):
        return None


# -- exact rational evaluation -----------------------------------------------

_EXACT_AT_ZERO = {"sin": 0, "atan": 0, "asin": 0, "cos": 1, "atn": 1}


def eval_exact(f: Expr, x: Sequence) -> Fraction:
    """Exact value of ``f`` at a rational point.

    Raises :class:`NotExact` when the value is not a rational computable from
    field operations and square roots of rational squares, and
    :class:`UndefinedPoint` on division by zero or a negative square root.
    """
    pt = [exact(v) for v in x]
    return _exact(f, pt)


def _exact(f, pt):
    op = f.op
    if op == "var":
        return pt[f.val]
    if op == "const":
        return Fraction(f.val)
    if op == "pi":
        raise NotExact("pi is irrational")
    a = _exact(f.args[0], pt)
    if op == "add":
        return a + _exact(f.args[1], pt)
    if op == "sub":
        return a - _exact(f.args[1], pt)
    if op == "mul":
        return a * _exact(f.args[1], pt)
    if op == "div":
        b = _exact(f.args[1], pt)
        if b == 0:
            raise UndefinedPoint("division by zero")
        return a / b
    if op == "neg":
        return -a
    if op == "pow":
        return a ** f.val
    if op == "abs":
        return abs(a)
    if op == "sqrt":
        if a < 0:
            raise UndefinedPoint("square root of a negative number")
        r = rational_sqrt_exact(a)
        if r is None:
            raise NotExact(f"sqrt({a}) is irrational")
        return r
    if op == "acos" and a == 1:
        return Fraction(0)
    if op in _EXACT_AT_ZERO and a == 0:
        return Fraction(_EXACT_AT_ZERO[op])
    if op in ("asin", "acos") and abs(a) > 1:
        raise UndefinedPoint(f"{op} outside [-1, 1]")
    if op in ("atn", "atnd") and a <= -1:
        raise UndefinedPoint("atn needs x > -1")
    raise NotExact(f"{op}({a}) is not a known rational")


def eval_point(f: Expr, x: Sequence, p: int) -> Interval | None:
    """Enclosure of ``f`` at a single point.

    Coordinates are exact numbers; a rational with no finite decimal
    expansion is enclosed by rounding outward at ``p`` digits.
    """
    box = []
    for v in x:
        q = exact(v)
        if is_decimal_fraction(q):
            box.append(Interval.point(fraction_to_decimal(q)))
        else:
            box.append(Interval(round_dir(q, p, "down"), round_dir(q, p, "up")))
    return eval_natural(f, box, p)
