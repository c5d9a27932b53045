"""Second-order Taylor enclosures and derivative-sign detection.

For a center ``y`` in the box and half widths ``w`` covering the box,

    f(x) in f(y) + [-e, e],   e >= sum |g_i| w_i + 1/2 sum_ij |H_ij| w_i w_j

where ``g`` encloses the gradient at ``y`` and ``H`` the hessian over the box.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from itertools import product
from typing import Sequence

from .errors import NotDifferentiable
from .expr import Expr, differentiate, eval_natural, eval_tuple
from .interval import Interval, iabs
from .numeric import contexts, exact_sub, fraction_to_decimal, nearest_context, round_dir

Box = Sequence[Interval]

# refined_range evaluates 2**(depth * n) pieces; keep that at most 256
MAX_REFINE_LEVELS = 8


@dataclass(frozen=True)
class TaylorApprox:
    center: tuple[Decimal, ...]
    half_widths: tuple[Decimal, ...]
    value_at_center: Interval
    gradient_at_center: tuple[Interval, ...]
    hessian_over_box: tuple[tuple[Interval, ...], ...]
    error_bound: Decimal
    enclosure: Interval


def taylor_center(box: Box, p: int) -> tuple[Decimal, ...]:
    """Midpoint of each edge rounded to ``p`` digits, kept inside the edge."""
    out = []
    for b in box:
        if b.is_point():
            out.append(b.lo)
            continue
        mid = b.midpoint
        q = p
        while True:
            y = fraction_to_decimal(mid) if q > 60 else nearest_context(q).divide(
                Decimal(mid.numerator), Decimal(mid.denominator))
            if b.lo <= y <= b.hi:
                break
            q += 2
        out.append(y)
    return tuple(out)


def _half_widths(box: Box, center, p: int) -> tuple[Decimal, ...]:
    return tuple(
        round_dir(Fraction(max(exact_sub(y, b.lo), exact_sub(b.hi, y))), p, "up")
        for b, y in zip(box, center)
    )


def _second(f: Expr, i: int, j: int) -> Expr:
    return differentiate(differentiate(f, i), j)


def default_hessian_depth(n: int) -> int:
    return 2 if n <= 2 else 0


def taylor_enclose(f: Expr, box: Box, p: int, center: Sequence[Decimal] | None = None,
                   hessian_depth: int | None = None) -> TaylorApprox | None:
    """Taylor enclosure of ``f`` over ``box``; ``None`` when something is undefined.

    ``hessian_depth`` bisection levels are used to tighten the hessian
    enclosure (see :func:`refined_range`); by default 2 for one or two
    variables and 0 otherwise.
    """
    n = len(box)
    if hessian_depth is None:
        hessian_depth = default_hessian_depth(n)
    y = tuple(center) if center is not None else taylor_center(box, p)
    if len(y) != n or any(not b.lo <= c <= b.hi for b, c in zip(box, y)):
        raise ValueError("center must lie in the box")
    w = _half_widths(box, y, p)
    pt = [(c, c) for c in y]
    try:
        grads = [differentiate(f, i) for i in range(n)]
        hess = [[_second(f, i, j) for j in range(i, n)] for i in range(n)]
    except NotDifferentiable:
        return None

    v = eval_tuple(f, pt, p)
    if v is None:
        return None
    g = []
    for d in grads:
        t = eval_tuple(d, pt, p)
        if t is None:
            return None
        g.append(Interval(*t))
    H = [[None] * n for _ in range(n)]
    for i in range(n):
        for k, h in enumerate(hess[i]):
            j = i + k
            r = refined_range(h, box, p, hessian_depth)
            if r is None:
                return None
            H[i][j] = H[j][i] = r

    _, up = contexts(p)
    e = Decimal(0)
    for i in range(n):
        e = up.add(e, up.multiply(iabs(g[i]), w[i]))
    half = Decimal("0.5")
    for i in range(n):
        # diagonal counts once with the 1/2, each off-diagonal pair twice
        e = up.add(e, up.multiply(up.multiply(half, iabs(H[i][i])), up.multiply(w[i], w[i])))
        for j in range(i + 1, n):
            e = up.add(e, up.multiply(iabs(H[i][j]), up.multiply(w[i], w[j])))
    dn, up = contexts(p)
    enc = Interval(dn.subtract(v[0], e), up.add(v[1], e))
    return TaylorApprox(
        center=y,
        half_widths=w,
        value_at_center=Interval(*v),
        gradient_at_center=tuple(g),
        hessian_over_box=tuple(tuple(row) for row in H),
        error_bound=e,
        enclosure=enc,
    )


def _bisect_all(box: Box, depth: int) -> list[tuple[Interval, ...]]:
    parts = []
    for b in box:
        pieces = [b]
        for _ in range(depth):
            nxt = []
            for q in pieces:
                if q.is_point():
                    nxt.append(q)
                    continue
                m = fraction_to_decimal(q.midpoint)
                nxt += [Interval(q.lo, m), Interval(m, q.hi)]
            pieces = nxt
        parts.append(pieces)
    return list(product(*parts))


def _piece_range(g: Expr, piece, p: int):
    """Range of ``g`` on one piece, pinning coordinates where ``g`` is monotone."""
    n = len(piece)
    bounds = [(b.lo, b.hi) for b in piece]
    lo_pt = list(bounds)
    hi_pt = list(bounds)
    for k in range(n):
        if piece[k].is_point():
            continue
        try:
            d = eval_tuple(differentiate(g, k), bounds, p)
        except NotDifferentiable:
            d = None
        if d is None:
            continue
        a, b = bounds[k]
        if d[0] >= 0:
            lo_pt[k], hi_pt[k] = (a, a), (b, b)
        elif d[1] <= 0:
            lo_pt[k], hi_pt[k] = (b, b), (a, a)
    lo = eval_tuple(g, lo_pt, p)
    hi = eval_tuple(g, hi_pt, p)
    if lo is None or hi is None:
        return None
    return lo[0], hi[1]


def refined_range(g: Expr, box: Box, p: int, depth: int = 0) -> Interval | None:
    """Enclosure of ``g`` over ``box``, tighter than the natural one when ``depth > 0``.

    The box is bisected ``depth`` times along every edge; on each piece the
    coordinates in which ``g`` has a fixed-sign partial are pinned to the
    minimizing (or maximizing) endpoint.  The hull of the pieces is
    intersected with the natural enclosure.
    """
    nat = eval_natural(g, box, p)
    if depth <= 0:
        return nat
    if depth * len(box) > MAX_REFINE_LEVELS:
        raise ValueError(f"refinement depth {depth} is too large for {len(box)} variables")
    lo = hi = None
    for piece in _bisect_all(box, depth):
        r = _piece_range(g, piece, p)
        if r is None:
            return nat
        lo = r[0] if lo is None else min(lo, r[0])
        hi = r[1] if hi is None else max(hi, r[1])
    if nat is not None:
        lo, hi = max(lo, nat.lo), min(hi, nat.hi)
    return Interval(lo, hi)


def derivative_range(f: Expr, i: int, box: Box, p: int) -> Interval | None:
    """Enclosure of the ``i``-th partial: natural first, Taylor if that straddles 0."""
    try:
        d = differentiate(f, i)
    except NotDifferentiable:
        return None
    r = eval_natural(d, box, p)
    if r is not None and (r.lo >= 0 or r.hi <= 0):
        return r
    t = taylor_enclose(d, box, p, hessian_depth=0)
    if t is None:
        return r
    # both contain the true range, so they overlap
    return t.enclosure if r is None else r.intersect(t.enclosure)


def sign_of(r: Interval | None) -> str | None:
    if r is None:
        return None
    if r.lo >= 0:
        return "+"
    if r.hi <= 0:
        return "-"
    return None


def monotone_directions(f: Expr, box: Box, p: int) -> list[tuple[int, str]]:
    """Variables (zero-based) in which ``f`` is monotone on ``box``, with the sign."""
    out = []
    for i, b in enumerate(box):
        if b.is_point():
            continue
        s = sign_of(derivative_range(f, i, box, p))
        if s is not None:
            out.append((i, s))
    return out
