"""Reader and printer for inequality files.

A file holds one or more blocks like::

    ineq "ex1"
      vars x in [1, 2];
      claims atan(x) - x < 0;

Disjunctions are written with ``\\/``.  A single non-strict claim may carry
``sharp at lo;`` (one ``lo``/``hi`` per variable).  ``#`` starts a comment.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from decimal import Decimal

from .errors import DuplicateId, ParseError
from .expr import MAX_VARS, UNARY_FUNCS, Expr, const, var
from .interval import Interval
from .numeric import canonical, format_decimal, parse_decimal

KEYWORDS = {"ineq", "vars", "in", "claims", "sharp", "at", "lo", "hi", "pi"} | set(UNARY_FUNCS)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|\\/|[-+*/^(),;\[\]<])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


@dataclass(frozen=True)
class InequalitySpec:
    """``claims[0] < 0 or claims[1] < 0 or ...`` for every point of ``domain``."""

    id: str
    names: tuple[str, ...]
    domain: tuple[Interval, ...]
    claims: tuple[Expr, ...]
    strict: bool = True
    sharp_corner: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 1 <= len(self.names) <= MAX_VARS:
            raise ValueError(f"{self.id}: between 1 and {MAX_VARS} variables required")
        if len(self.domain) != len(self.names):
            raise ValueError(f"{self.id}: one interval per variable required")
        if not self.claims:
            raise ValueError(f"{self.id}: at least one claim required")
        if not self.strict and len(self.claims) != 1:
            raise ValueError(f"{self.id}: a non-strict inequality must have a single claim")
        if self.sharp_corner is not None:
            if self.strict:
                raise ValueError(f"{self.id}: sharp corner needs a non-strict claim")
            if len(self.sharp_corner) != len(self.names) or set(self.sharp_corner) - {"lo", "hi"}:
                raise ValueError(f"{self.id}: sharp corner needs one lo/hi per variable")

    @property
    def arity(self) -> int:
        return len(self.names)

    def corner_point(self) -> tuple[Decimal, ...]:
        return tuple(b.lo if c == "lo" else b.hi for b, c in zip(self.domain, self.sharp_corner))

    @property
    def digest(self) -> str:
        return hashlib.sha256(print_spec(self).encode()).hexdigest()


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.names: dict[str, int] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, text):
        if self.tok.text == text and self.tok.kind != "string":
            return self.next()
        return None

    def expect(self, text):
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def expect_kind(self, kind, what):
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.next()

    # file := spec+
    def file(self) -> list[InequalitySpec]:
        specs = []
        seen = set()
        if self.tok.kind == "eof":
            raise self.error("empty input")
        while self.tok.kind != "eof":
            start = self.tok
            s = self.spec()
            if s.id in seen:
                raise DuplicateId(f"duplicate id {s.id!r}", start.line, start.col)
            seen.add(s.id)
            specs.append(s)
        return specs

    def signed_decimal(self) -> Decimal:
        neg = self.accept("-") is not None
        if not neg:
            self.accept("+")
        t = self.expect_kind("number", "a decimal number")
        d = parse_decimal(t.text)
        return canonical(d.copy_negate() if neg else d)

    def spec(self) -> InequalitySpec:
        start = self.expect("ineq")
        sid = self.expect_kind("string", "a quoted id").text[1:-1]
        if not sid:
            raise self.error("empty id", start)
        self.expect("vars")
        self.names = {}
        names, domain = [], []
        while True:
            t = self.expect_kind("ident", "a variable name")
            if t.text in KEYWORDS:
                raise self.error(f"{t.text!r} is reserved", t)
            if t.text in self.names:
                raise self.error(f"variable {t.text!r} declared twice", t)
            if len(names) == MAX_VARS:
                raise self.error(f"at most {MAX_VARS} variables", t)
            self.expect("in")
            lb = self.expect("[")
            lo = self.signed_decimal()
            self.expect(",")
            hi = self.signed_decimal()
            self.expect("]")
            if lo > hi:
                raise self.error("empty interval", lb)
            self.names[t.text] = len(names)
            names.append(t.text)
            domain.append(Interval(lo, hi))
            if not self.accept(","):
                break
        self.expect(";")
        self.expect("claims")
        claims, rels = [], []
        while True:
            e = self.expr()
            rel = self.tok
            if not (self.accept("<") or self.accept("<=")):
                raise self.error("expected '<' or '<='")
            z = self.expect_kind("number", "0")
            if parse_decimal(z.text) != 0:
                raise self.error("right-hand side must be 0", z)
            claims.append(e)
            rels.append(rel)
            if not self.accept("\\/"):
                break
        self.expect(";")
        strict = all(r.text == "<" for r in rels)
        if not strict:
            if len(claims) > 1:
                bad = next(r for r in rels if r.text == "<=")
                raise self.error("a disjunction must be strict", bad)
        corner = None
        if self.tok.text == "sharp":
            st = self.next()
            if strict:
                raise self.error("sharp needs a non-strict claim", st)
            self.expect("at")
            corner = []
            while self.tok.text in ("lo", "hi"):
                corner.append(self.next().text)
            if len(corner) != len(names):
                raise self.error(f"sharp corner needs {len(names)} lo/hi entries")
            self.expect(";")
            corner = tuple(corner)
        return InequalitySpec(sid, tuple(names), tuple(domain), tuple(claims), strict, corner)

    # expr := term (('+'|'-') term)*
    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = "add" if self.next().text == "+" else "sub"
            e = Expr(op, (e, self.term()))
        return e

    # term := unary (('*'|'/') unary)*
    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = "mul" if self.next().text == "*" else "div"
            e = Expr(op, (e, self.unary()))
        return e

    # unary := '-' unary | power; a minus directly on a bare number is a negative literal
    def unary(self) -> Expr:
        if self.accept("-"):
            nxt = self.toks[self.i + 1]
            if self.tok.kind == "number" and nxt.text != "^":
                return const(parse_decimal(self.next().text).copy_negate())
            return Expr("neg", (self.unary(),))
        return self.power()

    # power := atom ('^' NAT)?
    def power(self) -> Expr:
        e = self.atom()
        while self.accept("^"):
            t = self.expect_kind("number", "a natural exponent")
            if not t.text.isdigit():
                raise self.error("exponent must be a natural number", t)
            e = Expr("pow", (e,), int(t.text))
        return e

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.next()
            return const(parse_decimal(t.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.next()
            if t.text == "pi":
                return Expr("pi")
            if t.text in UNARY_FUNCS:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Expr(t.text, (e,))
            if t.text in self.names:
                return var(self.names[t.text])
            raise self.error(f"unknown name {t.text!r}", t)
        raise self.error(f"unexpected {t.text or 'end of input'!r}", t)


def parse_spec(text: str) -> list[InequalitySpec]:
    return _Parser(text).file()


def parse_expr(text: str, names: tuple[str, ...] = ("x", "y", "z", "u", "v", "w")) -> Expr:
    p = _Parser(text)
    p.names = {n: i for i, n in enumerate(names)}
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return e


# -- printing -----------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYM = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}


def _prec(e: Expr) -> int:
    if e.op == "const" and e.val < 0:
        return 3
    return _PREC.get(e.op, 5)


def print_expr(e: Expr, names=None) -> str:
    names = names or tuple(f"x{i + 1}" for i in range(MAX_VARS))

    def go(e: Expr) -> str:
        op = e.op
        if op == "var":
            return names[e.val]
        if op == "const":
            return format_decimal(e.val)
        if op == "pi":
            return "pi"
        if op in _SYM:
            a, b = e.args
            p = _PREC[op]
            sa = go(a)
            if _prec(a) < p:
                sa = f"({sa})"
            sb = go(b)
            # left-associative: equal precedence on the right needs parentheses
            if _prec(b) <= p:
                sb = f"({sb})"
            return sa + _SYM[op] + sb
        if op == "neg":
            a = e.args[0]
            s = go(a)
            if _prec(a) < 3 or a.op == "const":
                s = f"({s})"
            return "-" + s
        if op == "pow":
            a = e.args[0]
            s = go(a)
            if _prec(a) < 5:
                s = f"({s})"
            return f"{s}^{e.val}"
        if op == "atnd":
            return f"atn_d{e.val}({go(e.args[0])})"
        return f"{op}({go(e.args[0])})"

    return go(e)


def print_spec(s: InequalitySpec) -> str:
    """Canonical text of one spec; its sha256 is the certificate digest."""
    binds = ", ".join(
        f"{n} in [{format_decimal(b.lo)}, {format_decimal(b.hi)}]" for n, b in zip(s.names, s.domain)
    )
    rel = " < 0" if s.strict else " <= 0"
    claims = " \\/ ".join(print_expr(c, s.names) + rel for c in s.claims)
    out = [f'ineq "{s.id}"', f"  vars {binds};", f"  claims {claims};"]
    if s.sharp_corner:
        out.append(f"  sharp at {' '.join(s.sharp_corner)};")
    return "\n".join(out) + "\n"


def print_specs(specs) -> str:
    return "\n".join(print_spec(s) for s in specs)
