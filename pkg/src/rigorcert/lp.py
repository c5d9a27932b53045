"""Infeasibility certificates for bounded linear systems.

Rows are ``a . x <= b`` with rational data.  Every variable has bounds
``0 <= l_j <= x_j <= u_j``; those become the rows ``-x_j <= -l_j`` and
``x_j <= u_j`` placed after the ordinary rows.  A certificate is a vector of
nonnegative multipliers, one per row, whose weighted sum is ``0 . x <= c``
with ``c < 0``.  Only :func:`check_infeasible` is trusted; the LP solver and
the repair step merely propose multipliers.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from math import lcm
from typing import Sequence

from .cert import Certificate, check
from .errors import FormatError, NotExact, ParseError, UndefinedPoint
from .expr import Expr, eval_exact, eval_natural, variables
from .numeric import canonical, exact, format_decimal, fraction_to_decimal, is_decimal_fraction, parse_decimal
from .syntax import InequalitySpec, parse_expr, print_expr

Row = tuple[tuple[Fraction, ...], Fraction]


class UnboundedVariable(ValueError):
    pass


class Hopeless(ArithmeticError):
    """The repaired multipliers do not give a negative right-hand side."""


class NoCertificateFound(ArithmeticError):
    pass


class MissingBoundCertificate(ValueError):
    pass


@dataclass(frozen=True)
class LinearSystem:
    num_vars: int
    rows: tuple[Row, ...]
    bounds: tuple[tuple[Fraction, Fraction], ...]
    id: str = ""

    def __post_init__(self):
        if len(self.bounds) != self.num_vars:
            raise UnboundedVariable("every variable needs a lower and an upper bound")
        for j, (lo, hi) in enumerate(self.bounds):
            if lo < 0 or lo > hi:
                raise ValueError(f"variable {j + 1}: need 0 <= lower <= upper, got [{lo}, {hi}]")
        for coeffs, _ in self.rows:
            if len(coeffs) != self.num_vars:
                raise ValueError("row length does not match the number of variables")

    def normalized(self) -> list[Row]:
        """Ordinary rows, then ``-x_j <= -l_j`` and ``x_j <= u_j`` for each variable."""
        n = self.num_vars
        out = list(self.rows)
        for j, (lo, hi) in enumerate(self.bounds):
            e = [Fraction(0)] * n
            e[j] = Fraction(-1)
            out.append((tuple(e), -lo))
            e = [Fraction(0)] * n
            e[j] = Fraction(1)
            out.append((tuple(e), hi))
        return out

    def canonical_text(self) -> str:
        lines = [f'lp "{self.id}" vars {self.num_vars};']
        for j, (lo, hi) in enumerate(self.bounds):
            lines.append(f"bound {j + 1} {_fmt_q(lo)} {_fmt_q(hi)};")
        for coeffs, rhs in self.rows:
            lines.append("row " + " ".join(_fmt_q(c) for c in coeffs) + f" <= {_fmt_q(rhs)};")
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def _fmt_q(q: Fraction) -> str:
    if is_decimal_fraction(q):
        return format_decimal(fraction_to_decimal(q))
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class DualCertificate:
    multipliers: tuple[Fraction, ...]

    @property
    def scale(self) -> int:
        """Smallest power of 10 making every multiplier integral (an lcm for non-decimals)."""
        den = lcm(*(m.denominator for m in self.multipliers)) if self.multipliers else 1
        k = 1
        while k % den:
            if k > den * 10 ** 3:
                return den
            k *= 10
        return k

    def scaled(self) -> tuple[int, ...]:
        s = self.scale
        return tuple(int(m * s) for m in self.multipliers)


@dataclass(frozen=True)
class LPVerdict:
    ok: bool
    reason: str = ""
    rhs: Fraction | None = None
    coefficients: tuple[Fraction, ...] = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return f"certified: 0 <= {_fmt_q(self.rhs)}"
        return f"rejected: {self.reason}"


def check_infeasible(sys: LinearSystem, dual: DualCertificate) -> LPVerdict:
    """Exact Farkas check in integer arithmetic."""
    rows = sys.normalized()
    lam = dual.multipliers
    if len(lam) != len(rows):
        return LPVerdict(False, f"length_mismatch: {len(lam)} multipliers for {len(rows)} rows")
    for i, m in enumerate(lam):
        if m < 0:
            return LPVerdict(False, f"negative_multiplier {i + 1}")
    # scale rows and multipliers to integers, then sum without any rounding
    rs = lcm(*(q.denominator for coeffs, b in rows for q in coeffs + (b,)))
    ms = dual.scale
    ilam = [int(m * ms) for m in lam]
    n = sys.num_vars
    tot = [0] * n
    rhs = 0
    for li, (coeffs, b) in zip(ilam, rows):
        if li == 0:
            continue
        for j in range(n):
            tot[j] += li * int(coeffs[j] * rs)
        rhs += li * int(b * rs)
    coeffs = tuple(Fraction(t, rs * ms) for t in tot)
    total = Fraction(rhs, rs * ms)
    for j, t in enumerate(tot):
        if t != 0:
            return LPVerdict(False, f"nonzero_coefficient {j + 1}", total, coeffs)
    if rhs >= 0:
        return LPVerdict(False, "nonnegative_rhs", total, coeffs)
    return LPVerdict(True, "", total, coeffs)


def _repair(sys: LinearSystem, lam: Sequence[Fraction]) -> tuple[DualCertificate, Fraction]:
    n = sys.num_vars
    lam = [max(Fraction(0), q) for q in lam]
    resid = [sum((lam[i] * sys.rows[i][0][j] for i in range(len(lam))), Fraction(0)) for j in range(n)]
    rhs = sum((lam[i] * sys.rows[i][1] for i in range(len(lam))), Fraction(0))
    extra = []
    for j, r in enumerate(resid):
        lo, hi = sys.bounds[j]
        if r > 0:
            # r * (-x_j <= -l_j) cancels +r x_j
            extra += [r, Fraction(0)]
            rhs -= r * lo
        elif r < 0:
            extra += [Fraction(0), -r]
            rhs += -r * hi
        else:
            extra += [Fraction(0), Fraction(0)]
    return DualCertificate(tuple(lam + extra)), rhs


def modify_dual(sys: LinearSystem, approx: Sequence) -> DualCertificate:
    """Turn approximate multipliers for the ordinary rows into an exact certificate.

    Bound-row multipliers are chosen to cancel each variable's coefficient
    exactly.  Float input is tried at 15 down to 3 significant digits, since
    shorter decimals often survive the cancellation better.
    """
    if len(approx) != len(sys.rows):
        raise ValueError(f"need {len(sys.rows)} multipliers, got {len(approx)}")
    if all(isinstance(a, (Decimal, Fraction, int, str)) for a in approx):
        candidates = [[exact(a) for a in approx]]
    else:
        candidates = [[Fraction(Decimal(f"{float(a):.{k}g}")) for a in approx] for k in range(15, 2, -1)]
    for lam in candidates:
        dual, rhs = _repair(sys, lam)
        assert all(c == 0 for c in check_infeasible(sys, dual).coefficients)
        if rhs < 0:
            return dual
    raise Hopeless("repaired multipliers give a nonnegative right-hand side")


def find_dual_approx(sys: LinearSystem, tol: float = 1e-9) -> list[float]:
    """Approximate row multipliers from the slack LP ``min sum s  s.t.  A x - s <= b``.

    Uses a floating-point solver; the output is only a hint for :func:`modify_dual`.
    """
    import numpy as np
    from scipy.optimize import linprog

    n, m = sys.num_vars, len(sys.rows)
    if m == 0:
        raise NoCertificateFound("no ordinary rows")
    A = np.zeros((m, n + m))
    b = np.zeros(m)
    for i, (coeffs, rhs) in enumerate(sys.rows):
        A[i, :n] = [float(c) for c in coeffs]
        A[i, n + i] = -1.0
        b[i] = float(rhs)
    c = np.concatenate([np.zeros(n), np.ones(m)])
    bounds = [(float(lo), float(hi)) for lo, hi in sys.bounds] + [(0, None)] * m
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise NoCertificateFound(f"LP solver failed: {res.message}")
    if res.fun <= tol:
        raise NoCertificateFound("slack optimum is zero: the system looks feasible")
    return [max(0.0, -float(v)) for v in res.ineqlin.marginals]


def certify(sys: LinearSystem, hint: Sequence | None = None) -> DualCertificate:
    """Hint (or solver) -> repair -> exact check.

    A hint covering every normalized row is taken as a complete certificate
    and checked without repair.
    """
    if hint is not None and len(hint) == len(sys.normalized()) != len(sys.rows):
        dual = DualCertificate(tuple(exact(a) for a in hint))
    else:
        approx = list(hint) if hint is not None else find_dual_approx(sys)
        dual = modify_dual(sys, approx)
    v = check_infeasible(sys, dual)
    if not v:
        raise Hopeless(v.reason)
    return dual


# -- symbolic rows and relaxation ---------------------------------------------

@dataclass(frozen=True)
class SymbolicRow:
    coeffs: tuple[Expr, ...]
    rhs: Expr


@dataclass(frozen=True)
class SymbolicSystem:
    id: str
    num_vars: int
    rows: tuple[SymbolicRow, ...]
    bounds: tuple[tuple[Decimal, Decimal] | None, ...]


def _const_value(e: Expr):
    """Exact value of a constant expression, or None when it is irrational."""
    try:
        return eval_exact(e, [])
    except (NotExact, UndefinedPoint):
        return None


def _directed(e: Expr, digits: int, direction: str) -> Fraction:
    v = _const_value(e)
    if v is not None:
        return v
    r = eval_natural(e, [], digits + 30)
    if r is None:
        raise ValueError(f"constant {print_expr(e)} is undefined")
    q = Decimal(1).scaleb(-digits)
    if direction == "down":
        return Fraction(r.lo.quantize(q, rounding="ROUND_FLOOR"))
    return Fraction(r.hi.quantize(q, rounding="ROUND_CEILING"))


def relax(sym: SymbolicSystem, digits: int = 2) -> LinearSystem:
    """Rational system implied by ``sym``: coefficients floored, right-hand sides ceiled.

    Valid because every variable is nonnegative: lowering a coefficient can
    only lower ``a . x``.  Exact rational constants are kept as they are.
    """
    if digits < 0:
        raise ValueError("digits must be nonnegative")
    for j, bd in enumerate(sym.bounds):
        if bd is None:
            raise UnboundedVariable(f"variable {j + 1} has no bound line")
    rows = tuple(
        (tuple(_directed(c, digits, "down") for c in r.coeffs), _directed(r.rhs, digits, "up"))
        for r in sym.rows
    )
    bounds = tuple((Fraction(lo), Fraction(hi)) for lo, hi in sym.bounds)
    return LinearSystem(sym.num_vars, rows, bounds, sym.id)


# -- file formats -------------------------------------------------------------

_LP_TOKEN = re.compile(r'\s*(?:(#[^\n]*)|("[^"\n]*")|(<=|;)|([^\s;]+))')


def _lp_tokens(text: str):
    pos, line = 0, 1
    out = []
    while pos < len(text):
        m = _LP_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        line_of = line + text.count("\n", pos, m.start(m.lastindex))
        line += text.count("\n", pos, m.end())
        if m.group(1) is None:
            out.append((m.group(m.lastindex), line_of))
        pos = m.end()
    return out


def _const_expr(tok: str, line: int) -> Expr:
    try:
        e = parse_expr(tok, ())
    except ParseError as err:
        raise ParseError(f"bad coefficient {tok!r}: {err.message}", line) from None
    if variables(e):
        raise ParseError(f"coefficient {tok!r} is not a constant", line)
    return e


def parse_lp(text: str) -> list[SymbolicSystem]:
    """Parse ``lp "<id>" vars n;`` blocks with ``bound`` and ``row`` lines."""
    toks = _lp_tokens(text)
    systems = []
    i = 0
    seen = set()

    def take(k):
        nonlocal i
        if i >= len(toks):
            raise ParseError("unexpected end of input", toks[-1][1] if toks else 1)
        t = toks[i]
        i += 1
        if k is not None and t[0] != k:
            raise ParseError(f"expected {k!r}, found {t[0]!r}", t[1])
        return t

    def until_semicolon():
        out = []
        while True:
            t = take(None)
            if t[0] == ";":
                return out
            out.append(t)

    while i < len(toks):
        take("lp")
        sid, line = take(None)
        if not (sid.startswith('"') and sid.endswith('"') and len(sid) > 2):
            raise ParseError("expected a quoted id", line)
        sid = sid[1:-1]
        if sid in seen:
            raise ParseError(f"duplicate id {sid!r}", line)
        seen.add(sid)
        take("vars")
        nt, line = take(None)
        if not nt.isdigit() or int(nt) < 1:
            raise ParseError("vars needs a positive integer", line)
        n = int(nt)
        take(";")
        bounds: list = [None] * n
        rows = []
        while i < len(toks) and toks[i][0] in ("bound", "row"):
            kw, line = take(None)
            items = until_semicolon()
            if kw == "bound":
                if len(items) != 3 or not items[0][0].isdigit() or not 1 <= int(items[0][0]) <= n:
                    raise ParseError("bound needs: index lo hi", line)
                j = int(items[0][0]) - 1
                if bounds[j] is not None:
                    raise ParseError(f"variable {j + 1} bounded twice", line)
                try:
                    lo, hi = (canonical(parse_decimal(t)) for t, _ in items[1:])
                except ValueError:
                    raise ParseError("bounds must be decimals", line) from None
                if lo < 0 or lo > hi:
                    raise ParseError("need 0 <= lo <= hi", line)
                bounds[j] = (lo, hi)
            else:
                if len(items) != n + 2 or items[n][0] != "<=":
                    raise ParseError(f"row needs {n} coefficients, '<=' and a right-hand side", line)
                coeffs = tuple(_const_expr(t, ln) for t, ln in items[:n])
                rows.append(SymbolicRow(coeffs, _const_expr(*items[n + 1])))
        systems.append(SymbolicSystem(sid, n, tuple(rows), tuple(bounds)))
    if not systems:
        raise ParseError("no lp blocks", 1)
    return systems


def parse_dual_hints(text: str) -> dict[str, list[Decimal]]:
    """``dual "<id>" l1 ... lm;`` lines."""
    out = {}
    toks = _lp_tokens(text)
    i = 0
    while i < len(toks):
        kw, line = toks[i]
        if kw != "dual" or i + 1 >= len(toks):
            raise ParseError(f"expected 'dual', found {kw!r}", line)
        sid = toks[i + 1][0]
        if not (sid.startswith('"') and sid.endswith('"')):
            raise ParseError("expected a quoted id", line)
        i += 2
        vals = []
        while i < len(toks) and toks[i][0] != ";":
            try:
                vals.append(parse_decimal(toks[i][0]))
            except ValueError:
                raise ParseError(f"bad multiplier {toks[i][0]!r}", toks[i][1]) from None
            i += 1
        if i >= len(toks):
            raise ParseError("missing ';'", line)
        i += 1
        out[sid[1:-1]] = vals
    return out


def write_lpcert(sys: LinearSystem, dual: DualCertificate, digits: int) -> bytes:
    v = check_infeasible(sys, dual)
    lines = [
        f'lpcert v1 "{sys.id}"',
        f"system {sys.digest}",
        f"digits {digits}",
        f"scale {dual.scale}",
        "multipliers " + " ".join(str(k) for k in dual.scaled()),
        "contradiction " + " ".join(_fmt_q(c) for c in v.coefficients) + f" <= {_fmt_q(v.rhs)}",
    ]
    return ("\n".join(lines) + "\n").encode()


@dataclass(frozen=True)
class LPCertFile:
    id: str
    system_digest: str
    digits: int
    dual: DualCertificate
    contradiction: str


def read_lpcert(data: bytes) -> LPCertFile:
    try:
        lines = data.decode().splitlines()
    except UnicodeDecodeError:
        raise FormatError("not UTF-8") from None
    if len(lines) != 6:
        raise FormatError("lpcert needs exactly 6 lines")
    m = re.fullmatch(r'lpcert (\S+) "([^"]*)"', lines[0])
    if not m:
        raise FormatError("bad lpcert header")
    if m.group(1) != "v1":
        raise FormatError(f"unknown version {m.group(1)!r}")
    fields = {}
    for line, key in zip(lines[1:], ("system", "digits", "scale", "multipliers", "contradiction")):
        k, _, rest = line.partition(" ")
        if k != key:
            raise FormatError(f"expected {key!r} line")
        fields[k] = rest
    try:
        digits = int(fields["digits"])
        scale = int(fields["scale"])
        mult = tuple(Fraction(int(t), scale) for t in fields["multipliers"].split())
    except (ValueError, ZeroDivisionError):
        raise FormatError("bad number in lpcert") from None
    if scale <= 0 or digits < 0:
        raise FormatError("scale must be positive and digits nonnegative")
    return LPCertFile(m.group(2), fields["system"], digits, DualCertificate(mult), fields["contradiction"])


# -- nonlinear systems by substitution ----------------------------------------

@dataclass(frozen=True)
class Substitution:
    """A fresh variable standing for ``term`` with proved bounds ``lower <= term <= upper``.

    ``corners`` optionally names the sharp corner for each bound obligation
    (``None`` when the bound is not attained).
    """
    term: Expr
    lower: Decimal
    upper: Decimal
    corners: tuple = (None, None)
    certificates: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class NonlinearSystem:
    id: str
    names: tuple[str, ...]
    bounds: tuple[tuple[Decimal, Decimal], ...]
    rows: tuple[tuple[Expr, Decimal], ...]


def bound_obligations(sys: NonlinearSystem, k: int, sub: Substitution) -> list[InequalitySpec]:
    """Specs whose proofs justify ``lower <= term <= upper`` on the domain."""
    from .expr import const
    from .interval import Interval

    domain = tuple(Interval(lo, hi) for lo, hi in sys.bounds)
    lo_claim = Expr("sub", (const(sub.lower), sub.term))
    hi_claim = Expr("sub", (sub.term, const(sub.upper)))
    return [
        InequalitySpec(f"{sys.id}:sub{k + 1}:lower", sys.names, domain, (lo_claim,), False, sub.corners[0]),
        InequalitySpec(f"{sys.id}:sub{k + 1}:upper", sys.names, domain, (hi_claim,), False, sub.corners[1]),
    ]


def _linear_form(e: Expr, nvars: int) -> tuple[list[Fraction], Fraction]:
    """Coefficients and constant of an affine expression; ValueError otherwise."""
    op = e.op
    if op == "var":
        c = [Fraction(0)] * nvars
        c[e.val] = Fraction(1)
        return c, Fraction(0)
    if op == "const":
        return [Fraction(0)] * nvars, Fraction(e.val)
    if op in ("add", "sub"):
        (a, ka), (b, kb) = (_linear_form(x, nvars) for x in e.args)
        s = 1 if op == "add" else -1
        return [x + s * y for x, y in zip(a, b)], ka + s * kb
    if op == "neg":
        a, k = _linear_form(e.args[0], nvars)
        return [-x for x in a], -k
    if op in ("mul", "div"):
        (a, ka), (b, kb) = (_linear_form(x, nvars) for x in e.args)
        if op == "div":
            if any(b) or kb == 0:
                raise ValueError("division by a non-constant in a linear row")
            return [x / kb for x in a], ka / kb
        if not any(a):
            return [ka * y for y in b], ka * kb
        if not any(b):
            return [kb * x for x in a], ka * kb
    raise ValueError(f"row is not linear after substitution: {print_expr(e)}")


def _substitute(e: Expr, table: dict) -> Expr:
    if e in table:
        return table[e]
    if not e.args:
        return e
    return Expr(e.op, tuple(_substitute(a, table) for a in e.args), e.val)


def linearize_demo(sys: NonlinearSystem, subs: Sequence[Substitution] = ()) -> LinearSystem:
    """Replace each substituted term by a fresh variable and attach its proved bounds.

    Every bound must come with a certificate accepted by the checker.
    """
    from .expr import var

    n = len(sys.names)
    table = {}
    extra_bounds = []
    for k, sub in enumerate(subs):
        for ob in bound_obligations(sys, k, sub):
            c = sub.certificates.get(ob.id)
            if not isinstance(c, Certificate):
                raise MissingBoundCertificate(f"no certificate for {ob.id}")
            v = check(ob, c)
            if not v:
                raise MissingBoundCertificate(f"certificate for {ob.id} rejected: {v}")
        table[sub.term] = var(n + k)
        extra_bounds.append((Fraction(sub.lower), Fraction(sub.upper)))
    total = n + len(subs)
    rows = []
    for e, rhs in sys.rows:
        coeffs, k = _linear_form(_substitute(e, table), total)
        rows.append((tuple(coeffs), Fraction(rhs) - k))
    bounds = tuple((Fraction(lo), Fraction(hi)) for lo, hi in sys.bounds) + tuple(extra_bounds)
    return LinearSystem(total, tuple(rows), bounds, sys.id)
