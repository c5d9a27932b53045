"""Compare the compiled and pure-Python kernels.

Each backend runs in its own interpreter because the choice is made at
import time.  Rounds alternate between backends and the fastest round is
reported, so background load skews the ratio less.
Usage: ``python3 benchmarks/bench_kernel.py [--repeat N] [--rounds R]``.
"""
import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

WORKLOAD = r"""
import json, sys, time
from decimal import Decimal
from rigorcert import kernel
from rigorcert.expr import compile_tape, eval_natural
from rigorcert.interval import Interval
from rigorcert.numeric import contexts
from rigorcert.prover import ProverConfig, prove
from rigorcert.syntax import parse_expr, parse_spec

repeat = int(sys.argv[1])
corpus = sys.argv[2]
out = {"backend": kernel.BACKEND}

f = parse_expr("x*sin(y) - atan(x*y)/(1 + y^2) + sqrt(x + 2)", ["x", "y"])
box = [Interval(Decimal("0.5"), Decimal("0.75")), Interval(Decimal("1"), Decimal("1.25"))]
t0 = time.perf_counter()
for _ in range(2000 * repeat):
    eval_natural(f, box, 12)
out["eval_natural_x2000"] = (time.perf_counter() - t0) / repeat

dn, up = contexts(12)
a = (Decimal("-1.2345"), Decimal("2.5"))
b = (Decimal("0.333"), Decimal("0.7"))
t0 = time.perf_counter()
for _ in range(50000 * repeat):
    c = kernel.imul(a[0], a[1], b[0], b[1], dn, up)
    c = kernel.iadd(c[0], c[1], a[0], a[1], dn, up)
out["imul_iadd_x50000"] = (time.perf_counter() - t0) / repeat

t0 = time.perf_counter()
for _ in range(200 * repeat):
    kernel.atan_series(1 << 98, 200)
    kernel.sin_series(3 << 198, 200)
out["series_x200"] = (time.perf_counter() - t0) / repeat

specs = []
for name in ("example.ineq", "desk.ineq"):
    specs += parse_spec(open(f"{corpus}/{name}").read())
t0 = time.perf_counter()
for _ in range(repeat):
    for s in specs:
        prove(s, ProverConfig())
out["prove_corpus"] = (time.perf_counter() - t0) / repeat
print(json.dumps(out))
"""


def run(backend: str, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("RIGOR_PURE_PYTHON", None)
    if backend == "python":
        env["RIGOR_PURE_PYTHON"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat), str(CORPUS)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rounds", type=int, default=5)
    args = ap.parse_args()
    rounds = {"python": [], "cython": []}
    for _ in range(args.rounds):
        for b in rounds:
            rounds[b].append(run(b, args.repeat))
    py, cy = ({k: min(r[k] for r in rs) if k != "backend" else rs[0][k] for k in rs[0]} for rs in rounds.values())
    if cy["backend"] != "cython":
        print("compiled kernel not built; only the Python timings are meaningful")
    print(f"{'workload':22} {'python s':>10} {cy['backend'] + ' s':>10} {'speedup':>8}")
    for k in py:
        if k == "backend":
            continue
        print(f"{k:22} {py[k]:10.4f} {cy[k]:10.4f} {py[k] / cy[k]:8.2f}x")


if __name__ == "__main__":
    main()
