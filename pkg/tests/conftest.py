import os
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest
from hypothesis import HealthCheck, settings

from rigorcert.interval import Interval
from rigorcert.syntax import parse_spec

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

mpmath.mp.dps = 60
# oracle values are good to ~60 digits; endpoints carry at most ~40
ORACLE_SLACK = mpmath.mpf("1e-50")


def mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(str(x))


def mp_atn(x, order=0):
    def atn(t):
        if t > 0:
            r = mpmath.sqrt(t)
            return mpmath.atan(r) / r
        if t < 0:
            r = mpmath.sqrt(-t)
            return mpmath.atanh(r) / r
        return mpmath.mpf(1)

    if order == 0:
        return atn(x)
    if abs(x) < mpmath.mpf("0.05"):
        # termwise from the power series sum (-1)^j x^j / (2j+1)
        s = mpmath.mpf(0)
        for j in range(order, order + 200):
            c = mpmath.factorial(j) / mpmath.factorial(j - order)
            s += (-1) ** j * c * x ** (j - order) / (2 * j + 1)
        return s
    return mpmath.diff(atn, x, order)


_MP_FUNCS = {
    "sqrt": mpmath.sqrt, "sin": mpmath.sin, "cos": mpmath.cos, "atan": mpmath.atan,
    "asin": mpmath.asin, "acos": mpmath.acos, "atn": mp_atn, "abs": abs,
}


def mp_eval(e, point):
    """High-precision value of an expression at a point (sequence of numbers)."""
    op = e.op
    if op == "var":
        return mpf(point[e.val])
    if op == "const":
        return mpf(e.val)
    if op == "pi":
        return +mpmath.pi
    if op == "pow":
        return mp_eval(e.args[0], point) ** e.val
    if op == "atnd":
        a = mp_eval(e.args[0], point)
        if a <= -1:
            raise ValueError(f"atn undefined at {a}")
        return mp_atn(a, e.val)
    if op in _MP_FUNCS:
        a = mp_eval(e.args[0], point)
        if (op == "sqrt" and a < 0) or (op in ("asin", "acos") and abs(a) > 1) or (op == "atn" and a <= -1):
            raise ValueError(f"{op} undefined at {a}")
        return _MP_FUNCS[op](a)
    if op == "neg":
        return -mp_eval(e.args[0], point)
    a, b = (mp_eval(x, point) for x in e.args)
    return {"add": a + b, "sub": a - b, "mul": a * b}.get(op) if op != "div" else a / b


def encloses(iv: Interval, v) -> bool:
    slack = ORACLE_SLACK * max(1, abs(v))
    return mpf(iv.lo) - slack <= v <= mpf(iv.hi) + slack


def load_specs(*names):
    out = []
    for n in names:
        out += parse_spec((CORPUS / n).read_text())
    return out


@pytest.fixture(scope="session")
def corpus_specs():
    return load_specs("example.ineq", "desk.ineq")


@pytest.fixture(scope="session")
def corpus_certs(corpus_specs):
    from rigorcert.prover import prove

    return {s.id: prove(s) for s in corpus_specs}


def box_of(*pairs):
    return tuple(Interval(Decimal(str(a)), Decimal(str(b))) for a, b in pairs)


# -- acceptance summary -----------------------------------------------------------

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None or (rep.when != "call" and not rep.failed and not rep.skipped):
        return
    n, title = m.args
    entry = _CRITERIA.setdefault(n, {"title": title, "failed": [], "passed": 0})
    if hasattr(rep, "wasxfail") or rep.failed or rep.skipped:
        entry["failed"].append(item.name)
    else:
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "FAIL" if e["failed"] else "PASS"
        line = f"{status} criterion {n}: {e['title']}"
        if e["failed"]:
            line += f"  (failing: {', '.join(e['failed'])})"
        terminalreporter.write_line(line)
