"""Command line: ``rigorcert prove | check | lp | lp-check``.

Exit status is 0 when every item is verified or certified, 1 when any item
fails, and 2 for usage, input or parse errors.  Reports on stdout contain no
timings; those go to ``stats.json`` next to the written certificates.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cert import check, deserialize
from .errors import FormatError, ParseError
from .lp import (
    Hopeless, NoCertificateFound, UnboundedVariable, certify, check_infeasible, parse_dual_hints,
    parse_lp, read_lpcert, relax, write_lpcert,
)
from .prover import ProverConfig, batch_prove
from .syntax import parse_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    items: list = field(default_factory=list)

    def add(self, ident: str, verdict: str, detail: str = ""):
        self.items.append({"id": ident, "verdict": verdict, "detail": detail})

    @property
    def ok(self) -> bool:
        return all(i["verdict"] in ("verified", "certified") for i in self.items)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            summary = {"total": len(self.items), "ok": sum(i["verdict"] in ("verified", "certified") for i in self.items)}
            return json.dumps({"command": self.command, "items": self.items, "summary": summary}, indent=2)
        lines = []
        for i in self.items:
            line = f"{i['verdict'].upper():10} {i['id']}"
            if i["detail"]:
                line += f"  {i['detail']}"
            lines.append(line)
        good = sum(i["verdict"] in ("verified", "certified") for i in self.items)
        lines.append(f"{good}/{len(self.items)} ok")
        return "\n".join(lines)


def cert_filename(ident: str, suffix: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", ident) + suffix


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load_specs(path: str, only: str | None):
    specs = parse_spec(_read_text(path))
    if only is not None:
        specs = [s for s in specs if s.id == only]
        if not specs:
            raise UsageError(f"no spec with id {only!r} in {path}")
    return specs


def _default_precision() -> int:
    raw = os.environ.get("RIGOR_DEFAULT_PRECISION")
    if raw is None:
        return 10
    try:
        p = int(raw)
    except ValueError:
        raise UsageError(f"RIGOR_DEFAULT_PRECISION must be an integer, got {raw!r}") from None
    if p < 1:
        raise UsageError("RIGOR_DEFAULT_PRECISION must be positive")
    return p


def cmd_prove(args) -> int:
    specs = _load_specs(args.spec, args.only)
    p = args.precision if args.precision is not None else _default_precision()
    maxp = args.max_precision if args.max_precision is not None else max(40, p)
    try:
        cfg = ProverConfig(base_precision=p, max_precision=maxp, max_depth=args.max_depth, workers=args.jobs)
    except ValueError as e:
        raise UsageError(str(e)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    results = batch_prove(specs, cfg)
    report = RunReport("prove")
    stats = {}
    for spec, item in zip(specs, results):
        stats[spec.id] = item.stats
        if not item.ok:
            report.add(spec.id, "failure", item.failure)
            continue
        # never write a certificate the checker would not accept
        v = check(spec, deserialize(item.certificate))
        if not v:
            report.add(spec.id, "failure", f"internal: emitted certificate {v}")
            continue
        name = cert_filename(spec.id, ".cert")
        (out / name).write_bytes(item.certificate)
        report.add(spec.id, "verified", name)
    stats["_total_wall_time"] = time.perf_counter() - t0
    (out / "stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    print(report.render(args.report))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_check(args) -> int:
    specs = _load_specs(args.spec, args.only)
    d = Path(args.cert)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    report = RunReport("check")
    for spec in specs:
        f = d / cert_filename(spec.id, ".cert")
        if not f.exists():
            report.add(spec.id, "rejected", f"missing {f.name}")
            continue
        try:
            c = deserialize(f.read_bytes())
        except FormatError as e:
            report.add(spec.id, "rejected", f"format: {e}")
            continue
        v = check(spec, c)
        report.add(spec.id, "verified" if v else "rejected", "" if v else str(v))
    print(report.render(args.report))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_lp(args) -> int:
    systems = parse_lp(_read_text(args.sys))
    hints = parse_dual_hints(_read_text(args.dual_hints)) if args.dual_hints else {}
    if args.digits < 0:
        raise UsageError("--digits must be nonnegative")
    relaxed = []
    for sym in systems:
        try:
            lin = relax(sym, args.digits)
        except UnboundedVariable as e:
            raise UsageError(f"{sym.id}: {e}") from None
        h = hints.get(sym.id)
        if h is not None and len(h) not in (len(lin.rows), len(lin.normalized())):
            raise UsageError(f"{sym.id}: hint has {len(h)} multipliers, system has {len(lin.rows)} rows "
                             f"({len(lin.normalized())} with bounds)")
        relaxed.append((lin, h))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport("lp")
    for lin, h in relaxed:
        try:
            dual = certify(lin, h)
        except NoCertificateFound as e:
            report.add(lin.id, "failure", f"NoCertificateFound: {e}")
            continue
        except Hopeless as e:
            report.add(lin.id, "failure", f"Hopeless: {e}")
            continue
        name = cert_filename(lin.id, ".lpcert")
        (out / name).write_bytes(write_lpcert(lin, dual, args.digits))
        v = check_infeasible(lin, dual)
        report.add(lin.id, "certified", f"0 <= {_fmt(v.rhs)}")
    print(report.render(args.report))
    return EXIT_OK if report.ok else EXIT_FAIL


def _fmt(q) -> str:
    from .lp import _fmt_q

    return _fmt_q(q)


def cmd_lp_check(args) -> int:
    systems = parse_lp(_read_text(args.sys))
    d = Path(args.cert)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    report = RunReport("lp-check")
    for sym in systems:
        f = d / cert_filename(sym.id, ".lpcert")
        if not f.exists():
            report.add(sym.id, "rejected", f"missing {f.name}")
            continue
        try:
            c = read_lpcert(f.read_bytes())
            lin = relax(sym, c.digits)
        except (FormatError, UnboundedVariable) as e:
            report.add(sym.id, "rejected", f"format: {e}")
            continue
        if c.id != sym.id or c.system_digest != lin.digest:
            report.add(sym.id, "rejected", "system digest mismatch")
            continue
        v = check_infeasible(lin, c.dual)
        report.add(sym.id, "certified" if v else "rejected", str(v) if not v else f"0 <= {_fmt(v.rhs)}")
    print(report.render(args.report))
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rigorcert", description="Rigorous inequality prover and certificate checker.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", choices=("text", "json"), default="text")

    p = sub.add_parser("prove", help="search for certificates")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", default="certs")
    p.add_argument("--precision", type=int)
    p.add_argument("--max-precision", type=int)
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--only")
    common(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("check", help="replay certificates")
    p.add_argument("--spec", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--only")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lp", help="certify linear systems infeasible")
    p.add_argument("--sys", required=True)
    p.add_argument("--dual-hints")
    p.add_argument("--digits", type=int, default=2)
    p.add_argument("--out", default="lpcerts")
    common(p)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("lp-check", help="replay LP certificates")
    p.add_argument("--sys", required=True)
    p.add_argument("--cert", required=True)
    common(p)
    p.set_defaults(func=cmd_lp_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError) as e:
        print(f"rigorcert: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
