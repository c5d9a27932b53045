"""Proof certificates: data, text encoding and the replay checker.

A certificate records only strategy (where to split, which disjunct, which
precision, where to expand).  :func:`check` recomputes every enclosure and
trusts none of the recorded numbers beyond using them as instructions.

Text form::

    rigorcert v1 "<id>" <sha256 of the canonical spec text>
    (split 1 1.5
      (natural 1 10)
      (taylor 1 10 (1.75) 0))

Nodes, with 1-based variable and disjunct indices:

    (split V M LEFT RIGHT)
    (natural D P)
    (taylor D P (C1 .. Cn) H)
    (mono D V +|- P CHILD)
    (sharp P (T1 .. Tn) (S1 .. Sn) CHILD ...)
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Union

from .errors import FormatError, NotExact, UndefinedPoint
from .expr import eval_exact, eval_natural
from .interval import Interval
from .numeric import _exact_ctx, canonical, format_decimal, parse_decimal
from .syntax import InequalitySpec
from .taylor import MAX_REFINE_LEVELS, derivative_range, taylor_enclose

VERSION = "v1"
MAX_PRECISION = 200
MAX_HESSIAN_DEPTH = 4


@dataclass(frozen=True)
class Split:
    var: int
    mid: Decimal
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class NaturalLeaf:
    disjunct: int
    precision: int


@dataclass(frozen=True)
class TaylorLeaf:
    disjunct: int
    precision: int
    center: tuple[Decimal, ...]
    hessian_depth: int = 0


@dataclass(frozen=True)
class MonotoneNode:
    disjunct: int
    var: int
    sign: str
    precision: int
    child: "Node"


@dataclass(frozen=True)
class SharpRoot:
    precision: int
    fractions: tuple[Decimal, ...]
    signs: tuple[str, ...]
    children: tuple["Node", ...]


Node = Union[Split, NaturalLeaf, TaylorLeaf, MonotoneNode, SharpRoot]


@dataclass(frozen=True)
class Certificate:
    spec_id: str
    digest: str
    root: Node


def count_nodes(node: Node) -> dict[str, int]:
    counts = {"split": 0, "natural": 0, "taylor": 0, "mono": 0, "sharp": 0}
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Split):
            counts["split"] += 1
            stack += [n.left, n.right]
        elif isinstance(n, NaturalLeaf):
            counts["natural"] += 1
        elif isinstance(n, TaylorLeaf):
            counts["taylor"] += 1
        elif isinstance(n, MonotoneNode):
            counts["mono"] += 1
            stack.append(n.child)
        else:
            counts["sharp"] += 1
            stack += list(n.children)
    return counts


# -- geometry shared by prover and checker ------------------------------------

def split_box(box, var: int, mid: Decimal):
    b = box[var]
    left = box[:var] + (Interval(b.lo, mid),) + box[var + 1:]
    right = box[:var] + (Interval(mid, b.hi),) + box[var + 1:]
    return left, right


def facet(box, var: int, sign: str):
    """Face of ``box`` where a function monotone in ``var`` with ``sign`` is largest."""
    b = box[var]
    x = b.hi if sign == "+" else b.lo
    return box[:var] + (Interval(x, x),) + box[var + 1:]


def corner_neighborhood(box, corner, fractions):
    """The sub-box at ``corner`` whose edge ``i`` is ``fractions[i]`` of the domain edge."""
    ex = _exact_ctx()
    out = []
    for b, c, t in zip(box, corner, fractions):
        step = ex.multiply(t, b.width)
        if c == "lo":
            out.append(Interval(b.lo, ex.add(b.lo, step)))
        else:
            out.append(Interval(ex.subtract(b.hi, step), b.hi))
    return tuple(out)


def complement_boxes(box, corner, nbhd):
    """Boxes that, together with ``nbhd``, cover ``box``: one per variable."""
    out = []
    for k in range(len(box)):
        b, u = box[k], nbhd[k]
        rest = Interval(u.hi, b.hi) if corner[k] == "lo" else Interval(b.lo, u.lo)
        out.append(tuple(nbhd[:k]) + (rest,) + tuple(box[k + 1:]))
    return out


def required_sign(corner_side: str) -> str:
    # the maximum sits at the corner when f falls away from it
    return "-" if corner_side == "lo" else "+"


def leaf_ok(enclosure: Interval | None, strict: bool) -> bool:
    if enclosure is None:
        return False
    return enclosure.hi < 0 if strict else enclosure.hi <= 0


# -- checking -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    path: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "verified"
        where = "/".join(self.path) or "root"
        return f"rejected at {where}: {self.reason}"


class _Reject(Exception):
    def __init__(self, reason, path):
        super().__init__(reason)
        self.reason = reason
        self.path = path


def check(spec: InequalitySpec, cert: Certificate) -> Verdict:
    """Replay ``cert`` against ``spec``; no search, no escalation."""
    if cert.spec_id != spec.id:
        return Verdict(False, f"certificate is for {cert.spec_id!r}, not {spec.id!r}")
    if cert.digest != spec.digest:
        return Verdict(False, "spec digest mismatch")
    try:
        _Checker(spec).root(cert.root)
    except _Reject as r:
        return Verdict(False, r.reason, tuple(r.path))
    except RecursionError:
        return Verdict(False, "certificate nesting too deep")
    return Verdict(True)


class _Checker:
    def __init__(self, spec: InequalitySpec):
        self.spec = spec
        self.n = spec.arity

    def fail(self, reason, path):
        raise _Reject(reason, path)

    def precision(self, p, path):
        if not isinstance(p, int) or not 1 <= p <= MAX_PRECISION:
            self.fail(f"precision {p} out of range", path)

    def disjunct(self, d, active, path):
        if not isinstance(d, int) or not 0 <= d < len(self.spec.claims):
            self.fail(f"malformed: no disjunct {d + 1}", path)
        if d not in active:
            self.fail(f"disjunct {d + 1} not allowed below a monotone reduction on another disjunct", path)

    def var(self, v, path):
        if not isinstance(v, int) or not 0 <= v < self.n:
            self.fail(f"malformed: no variable {v + 1}", path)

    def defined(self, f, box, p, path):
        # derivative rules can drop subterms, so f itself must be defined on the cell
        if eval_natural(f, box, p) is None:
            self.fail("function undefined on the cell", path)

    def root(self, node):
        spec = self.spec
        if isinstance(node, SharpRoot):
            self.sharp(node)
        else:
            self.node(node, spec.domain, frozenset(range(len(spec.claims))), spec.strict, [])

    def sharp(self, node: SharpRoot):
        spec = self.spec
        path = ["sharp"]
        if spec.sharp_corner is None:
            self.fail("sharp root for a spec without a sharp corner", path)
        self.precision(node.precision, path)
        n = self.n
        if len(node.fractions) != n or len(node.signs) != n or len(node.children) != n:
            self.fail("malformed: sharp node needs one fraction, sign and child per variable", path)
        if any(b.is_point() for b in spec.domain):
            self.fail("sharp corner needs a full-dimensional domain", path)
        for t in node.fractions:
            if not 0 < t < 1:
                self.fail(f"neighborhood fraction {t} not in (0, 1)", path)
        f = spec.claims[0]
        try:
            v = eval_exact(f, spec.corner_point())
        except (NotExact, UndefinedPoint) as e:
            self.fail(f"corner value not exact: {e}", path)
        if v != 0:
            self.fail(f"corner value is {v}, not 0", path)
        nbhd = corner_neighborhood(spec.domain, spec.sharp_corner, node.fractions)
        self.defined(f, nbhd, node.precision, path)
        for i, (side, s) in enumerate(zip(spec.sharp_corner, node.signs)):
            want = required_sign(side)
            if s != want:
                self.fail(f"sign for variable {i + 1} must be {want}", path)
            r = derivative_range(f, i, nbhd, node.precision)
            if r is None or not (r.hi <= 0 if s == "-" else r.lo >= 0):
                self.fail(f"sign obligation failed for variable {i + 1}: {r}", path)
        for k, (child, box) in enumerate(zip(node.children, complement_boxes(spec.domain, spec.sharp_corner, nbhd))):
            self.node(child, box, frozenset([0]), True, path + [f"c{k + 1}"])

    def node(self, node, box, active, strict, path):
        claims = self.spec.claims
        if isinstance(node, Split):
            self.var(node.var, path)
            b = box[node.var]
            if not isinstance(node.mid, Decimal) or not b.lo < node.mid < b.hi:
                self.fail(f"split point {node.mid} not inside {b}", path)
            left, right = split_box(box, node.var, node.mid)
            self.node(node.left, left, active, strict, path + ["L"])
            self.node(node.right, right, active, strict, path + ["R"])
        elif isinstance(node, NaturalLeaf):
            self.disjunct(node.disjunct, active, path)
            self.precision(node.precision, path)
            r = eval_natural(claims[node.disjunct], box, node.precision)
            if not leaf_ok(r, strict):
                self.fail(f"natural enclosure {r if r else 'undefined'} not below 0", path)
        elif isinstance(node, TaylorLeaf):
            self.disjunct(node.disjunct, active, path)
            self.precision(node.precision, path)
            if len(node.center) != self.n or any(not b.lo <= c <= b.hi for b, c in zip(box, node.center)):
                self.fail("taylor center outside the cell", path)
            hd = node.hessian_depth
            if not isinstance(hd, int) or not 0 <= hd <= MAX_HESSIAN_DEPTH or hd * len(box) > MAX_REFINE_LEVELS:
                self.fail(f"hessian depth {hd} out of range", path)
            self.defined(claims[node.disjunct], box, node.precision, path)
            t = taylor_enclose(claims[node.disjunct], box, node.precision, node.center, node.hessian_depth)
            r = None if t is None else t.enclosure
            if not leaf_ok(r, strict):
                self.fail(f"taylor enclosure {r if r else 'undefined'} not below 0", path)
        elif isinstance(node, MonotoneNode):
            self.disjunct(node.disjunct, active, path)
            self.var(node.var, path)
            self.precision(node.precision, path)
            if node.sign not in ("+", "-"):
                self.fail(f"bad sign {node.sign!r}", path)
            if box[node.var].is_point():
                self.fail("monotone reduction on a degenerate edge", path)
            self.defined(claims[node.disjunct], box, node.precision, path)
            r = derivative_range(claims[node.disjunct], node.var, box, node.precision)
            if r is None or not (r.lo >= 0 if node.sign == "+" else r.hi <= 0):
                self.fail(f"derivative in variable {node.var + 1} is not {node.sign}: {r}", path)
            self.node(node.child, facet(box, node.var, node.sign), frozenset([node.disjunct]), strict,
                      path + ["mono"])
        elif isinstance(node, SharpRoot):
            self.fail("sharp node below the root", path)
        else:
            self.fail(f"unknown node {type(node).__name__}", path)


# -- text encoding ------------------------------------------------------------

def _fmt(node: Node, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(node, NaturalLeaf):
        out.append(f"{pad}(natural {node.disjunct + 1} {node.precision})")
    elif isinstance(node, TaylorLeaf):
        c = " ".join(format_decimal(x) for x in node.center)
        out.append(f"{pad}(taylor {node.disjunct + 1} {node.precision} ({c}) {node.hessian_depth})")
    elif isinstance(node, Split):
        out.append(f"{pad}(split {node.var + 1} {format_decimal(node.mid)}")
        _fmt(node.left, indent + 1, out)
        _fmt(node.right, indent + 1, out)
        out[-1] += ")"
    elif isinstance(node, MonotoneNode):
        out.append(f"{pad}(mono {node.disjunct + 1} {node.var + 1} {node.sign} {node.precision}")
        _fmt(node.child, indent + 1, out)
        out[-1] += ")"
    elif isinstance(node, SharpRoot):
        t = " ".join(format_decimal(x) for x in node.fractions)
        s = " ".join(node.signs)
        out.append(f"{pad}(sharp {node.precision} ({t}) ({s})")
        for c in node.children:
            _fmt(c, indent + 1, out)
        out[-1] += ")"
    else:
        raise TypeError(f"not a certificate node: {node!r}")


def serialize(cert: Certificate) -> bytes:
    if '"' in cert.spec_id or "\n" in cert.spec_id:
        raise ValueError("spec id cannot contain quotes or newlines")
    lines = [f'rigorcert {VERSION} "{cert.spec_id}" {cert.digest}']
    _fmt(cert.root, 0, lines)
    return ("\n".join(lines) + "\n").encode()


_HEADER = re.compile(r'rigorcert (\S+) "([^"\n]*)" ([0-9a-f]{64})\n')
_ATOM = re.compile(r"\s*(\(|\)|[^\s()]+)")


def _tokens(text: str, pos: int) -> list[str]:
    out = []
    while True:
        m = _ATOM.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise FormatError(f"unexpected text at offset {pos}")
            return out
        out.append(m.group(1))
        pos = m.end()


def _read(tokens: list[str]):
    """Nested lists of atoms from a token stream."""
    stack = [[]]
    for t in tokens:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise FormatError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise FormatError("truncated certificate: unclosed '('")
    if len(stack[0]) != 1 or not isinstance(stack[0][0], list):
        raise FormatError("expected exactly one node tree")
    return stack[0][0]


def _int(a, what, lo=0):
    if not isinstance(a, str) or not a.isdigit():
        raise FormatError(f"{what}: expected a natural number, got {a!r}")
    v = int(a)
    if v < lo:
        raise FormatError(f"{what}: {v} < {lo}")
    return v


def _dec(a, what):
    if not isinstance(a, str):
        raise FormatError(f"{what}: expected a decimal")
    try:
        return canonical(parse_decimal(a))
    except (ValueError, ArithmeticError):
        raise FormatError(f"{what}: bad decimal {a!r}") from None


def _list(a, what):
    if not isinstance(a, list) or any(isinstance(x, list) for x in a):
        raise FormatError(f"{what}: expected a flat list")
    return a


def _node(s) -> Node:
    if not isinstance(s, list) or not s or isinstance(s[0], list):
        raise FormatError("expected a node")
    tag, args = s[0], s[1:]

    def arity(k):
        if len(args) != k:
            raise FormatError(f"{tag}: expected {k} fields, got {len(args)}")

    if tag == "split":
        arity(4)
        return Split(_int(args[0], "split var", 1) - 1, _dec(args[1], "split point"), _node(args[2]), _node(args[3]))
    if tag == "natural":
        arity(2)
        return NaturalLeaf(_int(args[0], "disjunct", 1) - 1, _int(args[1], "precision", 1))
    if tag == "taylor":
        arity(4)
        center = tuple(_dec(c, "center") for c in _list(args[2], "center"))
        return TaylorLeaf(_int(args[0], "disjunct", 1) - 1, _int(args[1], "precision", 1), center,
                          _int(args[3], "hessian depth"))
    if tag == "mono":
        arity(5)
        if args[2] not in ("+", "-"):
            raise FormatError(f"mono: bad sign {args[2]!r}")
        return MonotoneNode(_int(args[0], "disjunct", 1) - 1, _int(args[1], "mono var", 1) - 1, args[2],
                            _int(args[3], "precision", 1), _node(args[4]))
    if tag == "sharp":
        if len(args) < 3:
            raise FormatError("sharp: too few fields")
        fr = tuple(_dec(t, "fraction") for t in _list(args[1], "fractions"))
        signs = tuple(_list(args[2], "signs"))
        if any(x not in ("+", "-") for x in signs):
            raise FormatError("sharp: bad sign")
        return SharpRoot(_int(args[0], "precision", 1), fr, signs, tuple(_node(c) for c in args[3:]))
    raise FormatError(f"unknown node tag {tag!r}")


def deserialize(data: bytes) -> Certificate:
    try:
        text = data.decode()
    except UnicodeDecodeError:
        raise FormatError("certificate is not UTF-8") from None
    if not text.startswith("rigorcert "):
        raise FormatError("missing 'rigorcert' header")
    m = _HEADER.match(text)
    if m is None:
        raise FormatError("malformed header line")
    if m.group(1) != VERSION:
        raise FormatError(f"unknown version {m.group(1)!r}")
    try:
        root = _node(_read(_tokens(text, m.end())))
    except RecursionError:
        raise FormatError("certificate nesting too deep") from None
    return Certificate(m.group(2), m.group(3), root)
