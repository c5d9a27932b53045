"""Search for a certificate: subdivision, disjunct choice, monotonicity and sharp corners.

Nothing here is trusted.  Every certificate produced is meant to be replayed
by :func:`rigorcert.cert.check`.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

from .cert import (
    Certificate, MonotoneNode, NaturalLeaf, SharpRoot, Split, TaylorLeaf, complement_boxes,
    corner_neighborhood, count_nodes, facet, leaf_ok, required_sign, serialize, split_box,
)
from .errors import NotDifferentiable, NotExact, UndefinedPoint
from .expr import differentiate, eval_exact, eval_natural
from .interval import Interval
from .numeric import fraction_to_decimal, nearest_context
from .syntax import InequalitySpec
from .taylor import default_hessian_depth, derivative_range, sign_of, taylor_enclose

SHARP_ATTEMPTS = 6


@dataclass(frozen=True)
class ProverConfig:
    base_precision: int = 10
    max_precision: int = 40
    max_depth: int = 40
    workers: int = 1
    enable_taylor: bool = True
    enable_monotone: bool = True

    def __post_init__(self):
        if not 1 <= self.base_precision <= self.max_precision:
            raise ValueError("need 1 <= base_precision <= max_precision")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class SearchStats:
    cells_processed: int = 0
    cells_verified_natural: int = 0
    cells_verified_taylor: int = 0
    cells_reduced_monotone: int = 0
    max_depth_reached: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class ProofFailure(Exception):
    """The search gave up; ``cell`` is the box it was stuck on."""

    def __init__(self, cell, reason: str, detail: str = ""):
        self.cell = tuple(cell)
        self.reason = reason
        self.detail = detail
        box = " x ".join(str(b) for b in self.cell)
        super().__init__(f"{reason} on {box}" + (f": {detail}" if detail else ""))

    def __reduce__(self):
        return type(self), (self.cell, self.reason, self.detail)


class CornerNotZero(ProofFailure):
    pass


class CornerNotExact(ProofFailure):
    pass


class SignObligationFailed(ProofFailure):
    pass


def relative_width(b: Interval) -> Fraction:
    # the 1 keeps halving strictly shrinking even for edges that start at 0
    return Fraction(b.width) / (1 + abs(Fraction(b.lo)) + abs(Fraction(b.hi)))


def split_variable(box) -> int | None:
    """Widest edge relative to its magnitude; lowest index wins ties."""
    best, best_w = None, Fraction(0)
    for i, b in enumerate(box):
        w = relative_width(b)
        if w > best_w:
            best, best_w = i, w
    return best


def split_point(b: Interval) -> Decimal:
    """A short decimal in the middle half of ``b``."""
    mid = b.midpoint
    quarter = Fraction(b.width) / 4
    lo, hi = Fraction(b.lo) + quarter, Fraction(b.hi) - quarter
    for q in range(1, 60):
        y = nearest_context(q).divide(Decimal(mid.numerator), Decimal(mid.denominator))
        if lo <= y <= hi and b.lo < y < b.hi:
            return y
    return fraction_to_decimal(mid) if Fraction(b.lo) < mid < Fraction(b.hi) else b.lo


def _center_point(box):
    return [(y, y) for y in (split_point(b) if not b.is_point() else b.lo for b in box)]


class _Search:
    def __init__(self, spec: InequalitySpec, cfg: ProverConfig, stats: SearchStats):
        self.spec = spec
        self.cfg = cfg
        self.stats = stats
        self.claims = spec.claims
        self.all = frozenset(range(len(spec.claims)))

    def precisions(self):
        p = self.cfg.base_precision
        while True:
            yield p
            if p >= self.cfg.max_precision:
                return
            p = min(2 * p, self.cfg.max_precision)

    def leaves(self, box, active, strict, p):
        """Try natural then Taylor leaves; returns (node or None, order, best upper bound, scale)."""
        nat = {d: eval_natural(self.claims[d], box, p) for d in sorted(active)}
        defined = sorted((d for d in nat if nat[d] is not None), key=lambda d: (nat[d].lo + nat[d].hi, d))
        best = None
        scale = Decimal(1)
        for d in defined:
            r = nat[d]
            scale = max(scale, r.hi.copy_abs(), r.lo.copy_abs())
            best = r.hi if best is None else min(best, r.hi)
            if leaf_ok(r, strict):
                return NaturalLeaf(d, p), defined, best, scale
        if self.cfg.enable_taylor:
            hd = default_hessian_depth(self.spec.arity)
            for d in defined:
                t = taylor_enclose(self.claims[d], box, p, hessian_depth=hd)
                if t is None:
                    continue
                best = min(best, t.enclosure.hi)
                if leaf_ok(t.enclosure, strict):
                    return TaylorLeaf(d, p, t.center, hd), defined, best, scale
        return None, defined, best, scale

    def refuted(self, box, active, strict, p):
        pt = _center_point(box)
        for d in sorted(active):
            r = eval_natural(self.claims[d], [Interval(*x) for x in pt], p)
            # a point value that is certainly not below 0 (not above for non-strict) refutes
            if r is None or (r.lo < 0 if strict else r.lo <= 0):
                return None
        return ", ".join(str(x[0]) for x in pt)

    def monotone(self, box, d, p):
        """Variables where claim ``d`` has a fixed-sign partial, widest first (natural enclosures only)."""
        f = self.claims[d]
        out = []
        if eval_natural(f, box, p) is None:
            return out
        for i, b in enumerate(box):
            if b.is_point():
                continue
            try:
                r = eval_natural(differentiate(f, i), box, p)
            except NotDifferentiable:
                return []
            s = sign_of(r)
            if s is not None:
                out.append((-relative_width(b), i, s))
        out.sort()
        return [(i, s) for _, i, s in out]

    def cell(self, box, active, strict, depth, in_mono=False):
        st = self.stats
        st.cells_processed += 1
        st.max_depth_reached = max(st.max_depth_reached, depth)
        order = []
        for p in self.precisions():
            node, order, best, scale = self.leaves(box, active, strict, p)
            if node is not None:
                return node
            if best is None or best < 0 or best > scale.scaleb(2 - p):
                break
        p = self.cfg.base_precision
        if not order:
            if split_variable(box) is None or depth >= self.cfg.max_depth:
                raise ProofFailure(box, "all_disjuncts_undefined")
        elif not in_mono:
            witness = self.refuted(box, active, strict, p)
            if witness is not None:
                raise ProofFailure(box, "inconclusive", f"claim fails at ({witness})")
        if self.cfg.enable_monotone:
            for d in order:
                dirs = self.monotone(box, d, p)
                if not dirs:
                    continue
                i, s = dirs[0]
                try:
                    child = self.cell(facet(box, i, s), frozenset([d]), strict, depth, True)
                except ProofFailure:
                    break
                return MonotoneNode(d, i, s, p, child)
        v = split_variable(box)
        if v is None:
            raise ProofFailure(box, "inconclusive", "cell is a single point")
        if depth >= self.cfg.max_depth:
            raise ProofFailure(box, "depth_exhausted")
        mid = split_point(box[v])
        left, right = split_box(box, v, mid)
        a = self.cell(left, active, strict, depth + 1, in_mono)
        b = self.cell(right, active, strict, depth + 1, in_mono)
        return Split(v, mid, a, b)


def _finish(spec, root, stats, t0) -> Certificate:
    c = count_nodes(root)
    stats.cells_verified_natural = c["natural"]
    stats.cells_verified_taylor = c["taylor"]
    stats.cells_reduced_monotone = c["mono"]
    stats.wall_time = time.perf_counter() - t0
    return Certificate(spec.id, spec.digest, root)


def prove(spec: InequalitySpec, cfg: ProverConfig = ProverConfig(), stats: SearchStats | None = None) -> Certificate:
    """Find a certificate for ``spec`` or raise :class:`ProofFailure`."""
    if spec.sharp_corner is not None:
        return prove_sharp(spec, cfg, stats)
    stats = stats if stats is not None else SearchStats()
    t0 = time.perf_counter()
    search = _Search(spec, cfg, stats)
    # outside corner analysis, a non-strict claim is still proved with hi < 0
    root = search.cell(tuple(spec.domain), search.all, True, 0)
    return _finish(spec, root, stats, t0)


def prove_sharp(spec: InequalitySpec, cfg: ProverConfig = ProverConfig(),
                stats: SearchStats | None = None) -> Certificate:
    """Corner analysis for a non-strict claim that touches 0 at ``spec.sharp_corner``."""
    if spec.sharp_corner is None:
        raise ValueError("spec has no sharp corner")
    stats = stats if stats is not None else SearchStats()
    t0 = time.perf_counter()
    box = tuple(spec.domain)
    f = spec.claims[0]
    if any(b.is_point() for b in box):
        raise SignObligationFailed(box, "sign_obligation_failed", "domain must be full-dimensional")
    try:
        v = eval_exact(f, spec.corner_point())
    except (NotExact, UndefinedPoint) as e:
        raise CornerNotExact(box, "corner_not_exact", str(e)) from None
    if v != 0:
        raise CornerNotZero(box, "corner_not_zero", f"value {v}")
    search = _Search(spec, cfg, stats)
    signs = tuple(required_sign(c) for c in spec.sharp_corner)
    for k in range(1, SHARP_ATTEMPTS + 1):
        t = Decimal(1) / Decimal(4 ** k)
        fractions = (t,) * spec.arity
        nbhd = corner_neighborhood(box, spec.sharp_corner, fractions)
        found = None
        for p in search.precisions():
            if eval_natural(f, nbhd, p) is None:
                continue
            rs = [derivative_range(f, i, nbhd, p) for i in range(spec.arity)]
            if all(r is not None and (r.hi <= 0 if s == "-" else r.lo >= 0) for r, s in zip(rs, signs)):
                found = p
                break
        if found is None:
            continue
        children = tuple(
            search.cell(c, frozenset([0]), True, 0) for c in complement_boxes(box, spec.sharp_corner, nbhd)
        )
        root = SharpRoot(found, fractions, signs, children)
        return _finish(spec, root, stats, t0)
    raise SignObligationFailed(box, "sign_obligation_failed",
                               f"no corner neighborhood down to 4^-{SHARP_ATTEMPTS} has fixed-sign partials")


# -- batches ------------------------------------------------------------------

@dataclass
class BatchItem:
    spec_id: str
    ok: bool
    certificate: bytes | None = None
    failure: str = ""
    reason: str = ""
    stats: dict = field(default_factory=dict)


def _prove_one(args) -> BatchItem:
    spec, cfg = args
    stats = SearchStats()
    t0 = time.perf_counter()
    try:
        cert = prove(spec, cfg, stats)
    except ProofFailure as e:
        stats.wall_time = time.perf_counter() - t0
        return BatchItem(spec.id, False, None, str(e), e.reason, stats.as_dict())
    return BatchItem(spec.id, True, serialize(cert), "", "", stats.as_dict())


def batch_prove(specs, cfg: ProverConfig = ProverConfig()) -> list[BatchItem]:
    """Prove each spec; results come back in input order whatever the worker count."""
    jobs = [(s, cfg) for s in specs]
    if cfg.workers == 1 or len(jobs) <= 1:
        return [_prove_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
        return list(pool.map(_prove_one, jobs))
