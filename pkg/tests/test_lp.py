import itertools
import random
from decimal import Decimal
from fractions import Fraction

import mpmath
import pytest

from conftest import CORPUS, mp_eval
from lp_oracle import has_feasible_vertex, random_system
from rigorcert.errors import FormatError, ParseError
from rigorcert.expr import const, var
from rigorcert.lp import (
    DualCertificate, Hopeless, LinearSystem, MissingBoundCertificate, NoCertificateFound, NonlinearSystem,
    Substitution, SymbolicRow, SymbolicSystem, UnboundedVariable, bound_obligations, certify,
    check_infeasible, find_dual_approx, linearize_demo, modify_dual, parse_dual_hints, parse_lp, read_lpcert,
    relax, write_lpcert,
)
from rigorcert.prover import prove
from rigorcert.syntax import parse_expr

F = Fraction
D = Decimal


def lp_named(path, name):
    return next(s for s in parse_lp((CORPUS / path).read_text()) if s.id == name)


@pytest.fixture(scope="module")
def worked_sys():
    return relax(lp_named("worked.lp", "worked"))


def test_worked_system_rows(worked_sys):
    assert worked_sys.rows == (((F(1), F("-1.42")), F("3.15")), ((F(1), F(1)), F(6)))
    assert worked_sys.bounds == ((F(5), F(10)), (F(0), F(10)))
    assert len(worked_sys.normalized()) == 6


def test_worked_dual_gives_exact_contradiction(worked_sys):
    hint = parse_dual_hints((CORPUS / "worked.dual").read_text())["worked"]
    assert hint == [D("0.704"), D(1), D("1.705"), D("0.001"), D("0.00032"), D(0)]
    v = check_infeasible(worked_sys, DualCertificate(tuple(F(h) for h in hint)))
    assert v
    assert v.rhs == F("-0.2974")
    assert v.coefficients == (0, 0)
    assert certify(worked_sys, hint).multipliers == tuple(F(h) for h in hint)


def test_repair_from_row_multipliers(worked_sys):
    dual = modify_dual(worked_sys, [D("0.704"), D(1)])
    v = check_infeasible(worked_sys, dual)
    # both residuals are positive (1.704 on x, 1 - 0.704 * 1.42 on y), so the lower bounds cancel them
    assert dual.multipliers == (F("0.704"), F(1), F("1.704"), F(0), F("0.00032"), F(0))
    assert v and v.rhs == F("-0.3024")


def test_repair_survives_perturbation(worked_sys):
    v = check_infeasible(worked_sys, modify_dual(worked_sys, [D("0.7041"), D(1)]))
    assert v and v.rhs < 0


def test_repair_of_zeros_is_hopeless(worked_sys):
    with pytest.raises(Hopeless):
        modify_dual(worked_sys, [0, 0])
    with pytest.raises(ValueError):
        modify_dual(worked_sys, [1])


def test_repair_always_cancels_exactly(worked_sys):
    rng = random.Random(5)
    for _ in range(200):
        approx = [D(rng.randint(0, 2000)) / 1000 for _ in worked_sys.rows]
        try:
            dual = modify_dual(worked_sys, approx)
        except Hopeless:
            continue
        assert check_infeasible(worked_sys, dual).coefficients == (0, 0)


def test_feasible_one_variable_system_never_certified():
    sys = LinearSystem(1, (((F(1),), F(1)), ((F(-1),), F(0))), ((F(0), F(3)),))
    for lam in itertools.product(range(4), repeat=4):
        assert not check_infeasible(sys, DualCertificate(tuple(map(F, lam))))


def test_negative_multiplier_rejected(worked_sys):
    v = check_infeasible(worked_sys, DualCertificate((F(1), F(-1), F(0), F(0), F(0), F(0))))
    assert v.reason == "negative_multiplier 2"
    assert check_infeasible(worked_sys, DualCertificate((F(1),))).reason.startswith("length_mismatch")


def test_nonzero_coefficient_reported(worked_sys):
    v = check_infeasible(worked_sys, DualCertificate((F(1), F(0), F(0), F(0), F(0), F(0))))
    assert v.reason == "nonzero_coefficient 1"


def test_solver_hint_is_repaired(worked_sys):
    approx = find_dual_approx(worked_sys)
    assert len(approx) == 2
    assert check_infeasible(worked_sys, modify_dual(worked_sys, approx))
    assert check_infeasible(worked_sys, certify(worked_sys))


def test_feasible_system_has_no_certificate():
    sys = relax(lp_named("feasible.lp", "feasible"))
    with pytest.raises(NoCertificateFound):
        find_dual_approx(sys)


def test_relax_symbolic_system():
    sys = relax(lp_named("symbolic.lp", "symbolic"))
    # -sqrt(2) floors to -1.42, pi ceils to 3.15, sqrt(35) = 5.916... ceils to 5.92
    assert sys.rows == (((F(1), F("-1.42")), F("3.15")), ((F(1), F(1)), F("5.92")))
    assert check_infeasible(sys, certify(sys))
    coarse = relax(lp_named("symbolic.lp", "symbolic"), digits=0)
    assert coarse.rows[1][1] == 6 and coarse.rows[0][0][1] == -2


def test_relax_directed_rounding_of_coefficients():
    row = SymbolicRow((parse_expr("-sqrt(2)"), parse_expr("sqrt(2)")), parse_expr("-pi"))
    sys = relax(SymbolicSystem("r", 2, (row,), ((D(0), D(1)), (D(0), D(1)))))
    assert sys.rows[0] == ((F("-1.42"), F("1.41")), F("-3.14"))


def test_relax_keeps_rationals():
    row = SymbolicRow((parse_expr("1/3"), parse_expr("2")), parse_expr("0.125"))
    sys = relax(SymbolicSystem("q", 2, (row,), ((D(0), D(1)), (D(0), D(1)))))
    assert sys.rows[0] == ((F(1, 3), F(2)), F(1, 8))


def test_relax_needs_bounds():
    row = SymbolicRow((const(1),), const(1))
    with pytest.raises(UnboundedVariable):
        relax(SymbolicSystem("u", 1, (row,), (None,)))
    with pytest.raises(UnboundedVariable):
        LinearSystem(2, (), ((F(0), F(1)),))


def test_relax_is_sound_on_samples():
    for name in ("symbolic", "three_vars"):
        sym = lp_named("symbolic.lp", name)
        sys = relax(sym)
        rng = random.Random(name)
        with mpmath.workdps(40):
            true_rows = [([mp_eval(c, []) for c in r.coeffs], mp_eval(r.rhs, [])) for r in sym.rows]
            for _ in range(10_000):
                pt = [F(lo) + F(rng.getrandbits(30), 1 << 30) * (F(hi) - F(lo)) for lo, hi in sys.bounds]
                for (tc, tb), (rc, rb) in zip(true_rows, sys.rows):
                    if sum(c * mpmath.mpf(x.numerator) / x.denominator for c, x in zip(tc, pt)) <= tb:
                        assert sum(c * x for c, x in zip(rc, pt)) <= rb


# -- checker against vertex enumeration ----------------------------------------

def test_checker_agrees_with_vertex_enumeration():
    rng = random.Random(2024)
    certified = infeasible = 0
    for _ in range(200):
        sys = random_system(rng)
        feasible = has_feasible_vertex(sys)
        infeasible += not feasible
        try:
            dual = certify(sys)
        except (NoCertificateFound, Hopeless):
            continue
        assert check_infeasible(sys, dual)
        assert not feasible
        certified += 1
    assert certified > 0
    assert certified >= infeasible // 2


# -- substitution ---------------------------------------------------------------

x = var(0)
SQUARE = NonlinearSystem("square", ("x",), ((D(2), D(10)),), ((x + x ** 2, D(3)),))


def square_sub(with_certs=True):
    sub = Substitution(x ** 2, D(4), D(100), (("lo",), ("hi",)))
    if with_certs:
        for ob in bound_obligations(SQUARE, 0, sub):
            sub.certificates[ob.id] = prove(ob)
    return sub


def test_linearize_square():
    sys = linearize_demo(SQUARE, [square_sub()])
    assert sys.rows == (((F(1), F(1)), F(3)),)
    assert sys.bounds == ((F(2), F(10)), (F(4), F(100)))
    assert check_infeasible(sys, certify(sys))


def test_linearize_without_substitutions():
    lin = NonlinearSystem("lin", ("x", "y"), ((D(0), D(1)), (D(0), D(2))), ((x - 2 * var(1), D(1)),))
    sys = linearize_demo(lin)
    assert sys.rows == (((F(1), F(-2)), F(1)),)
    assert sys.num_vars == 2
    with pytest.raises(ValueError):
        linearize_demo(SQUARE)


def test_linearize_needs_certificates():
    with pytest.raises(MissingBoundCertificate):
        linearize_demo(SQUARE, [square_sub(with_certs=False)])
    sub = square_sub()
    lower, upper = bound_obligations(SQUARE, 0, sub)
    sub.certificates[lower.id] = sub.certificates[upper.id]
    with pytest.raises(MissingBoundCertificate):
        linearize_demo(SQUARE, [sub])


# -- files ------------------------------------------------------------------------

def test_lpcert_round_trip(worked_sys):
    dual = modify_dual(worked_sys, [D("0.704"), D(1)])
    data = write_lpcert(worked_sys, dual, 2)
    text = data.decode()
    assert text.splitlines()[0] == 'lpcert v1 "worked"'
    assert "multipliers 704 1000 1704 0 0 0" not in text
    back = read_lpcert(data)
    assert back.dual == dual and back.system_digest == worked_sys.digest and back.digits == 2
    assert back.contradiction == "0 0 <= -0.3024"
    assert check_infeasible(worked_sys, back.dual)


@pytest.mark.parametrize("data", [
    b"",
    b'lpcert v2 "a"\nsystem x\ndigits 2\nscale 1\nmultipliers 1\ncontradiction 0 <= -1\n',
    b'lpcert v1 "a"\nsystem x\ndigits two\nscale 1\nmultipliers 1\ncontradiction 0 <= -1\n',
    b'lpcert v1 "a"\nsystem x\ndigits 2\nscale 0\nmultipliers 1\ncontradiction 0 <= -1\n',
    b'lpcert v1 "a"\nsystem x\nscale 1\ndigits 2\nmultipliers 1\ncontradiction 0 <= -1\n',
])
def test_lpcert_format_errors(data):
    with pytest.raises(FormatError):
        read_lpcert(data)


@pytest.mark.parametrize("text", [
    'lp "a" vars 1; row 1 <= 2;',
    'lp "a" vars 1; bound 1 0 1; row 1 2 <= 2;',
    'lp a vars 1; bound 1 0 1;',
    'lp "a" vars 1; bound 1 0 1; row 1 <= 2',
])
def test_lp_parse_errors(text):
    with pytest.raises((ParseError, UnboundedVariable, ValueError)):
        relax(parse_lp(text)[0])


def test_dual_hint_errors():
    with pytest.raises(ParseError):
        parse_dual_hints('dual "a" 1 x;')
    with pytest.raises(ParseError):
        parse_dual_hints('dual a 1;')
