from fractions import Fraction

import mpmath
import pytest

from qmock.errors import OutsideUnitDisk, RootClassMismatch, UnknownIdentity, ZeroFactor
from qmock.gaussian import GaussianRational
from qmock.identities import evaluate
from qmock.mocktheta import build
from qmock.radial import (
    CONJECTURES,
    RADIAL_CASES,
    PrimitiveRoot,
    admissible_roots,
    conjecture_check,
    default_schedule,
    eval_expression_numeric,
    eval_product_numeric,
    eval_series_numeric,
    finite_sum_rhs,
    get_case,
    radial_probe,
)
from qmock.radial.numeric import make_context

ctx = make_context(212)


def close(a, b, tol):
    return abs(ctx.mpc(a) - ctx.mpc(b)) < tol


def test_f3_at_zero():
    assert eval_series_numeric("f3", 0) == 1


def test_f3_at_tenth_matches_exact_series():
    x = Fraction(1, 10)
    exact = build("f3", 60).evaluate(x, ctx)
    assert close(eval_series_numeric("f3", x), exact, mpmath.mpf(10) ** -30)


def test_outside_disk():
    with pytest.raises(OutsideUnitDisk):
        eval_series_numeric("f3", 1)
    with pytest.raises(OutsideUnitDisk):
        eval_series_numeric("f3", GaussianRational(Fraction(3, 5), Fraction(4, 5)))


def test_euler_product_at_half():
    exact = evaluate("prod(q; q)", 120).evaluate(Fraction(1, 2), ctx)
    assert close(eval_product_numeric("prod(q; q)", Fraction(1, 2)), exact, mpmath.mpf(10) ** -20)


def test_phi3_companion_at_zero():
    got = eval_product_numeric(RADIAL_CASES["rad-phi3"].theta, 0)
    assert close(got, 1, mpmath.mpf(10) ** -50)


def test_vanishing_factor():
    with pytest.raises(ZeroFactor):
        eval_product_numeric("prod(2*q; q)", Fraction(1, 2))


def test_finite_sum_examples():
    assert close(finite_sum_rhs("rad-phi3", PrimitiveRoot(4, 1)), -2j, mpmath.mpf(10) ** -50)
    assert close(finite_sum_rhs("rad-f3", PrimitiveRoot(2, 1)), 4, mpmath.mpf(10) ** -50)
    assert close(finite_sum_rhs("rad-psi3", PrimitiveRoot(1, 0)), -1, mpmath.mpf(10) ** -50)
    assert close(finite_sum_rhs("rad-S0-zeta8", PrimitiveRoot(8, 1)), 1 + 1j, mpmath.mpf(10) ** -50)


def test_root_class_mismatch():
    with pytest.raises(RootClassMismatch):
        finite_sum_rhs("rad-phi3", PrimitiveRoot(3, 1))
    with pytest.raises(RootClassMismatch):
        radial_probe("rad-S0-zeta8", PrimitiveRoot(8, 3), schedule=[Fraction(1, 2)])


def test_unknown_case():
    with pytest.raises(UnknownIdentity):
        get_case("rad-nosuch")


def test_primitive_root_validation():
    with pytest.raises(ValueError):
        PrimitiveRoot(4, 2)
    assert PrimitiveRoot(4, 5).index == 1


@pytest.mark.parametrize("case", sorted(RADIAL_CASES))
def test_every_case_has_roots_up_to_12(case):
    assert len(admissible_roots(case, 12)) >= 2


@pytest.mark.parametrize("case", sorted(RADIAL_CASES))
def test_finite_sum_precision_stable(case):
    c = RADIAL_CASES[case]
    root = admissible_roots(c, 12)[-1]
    a = finite_sum_rhs(c, root, 212)
    hi = make_context(400)
    b = c.finite_sum(hi, root)
    assert abs(hi.mpc(a) - b) < mpmath.mpf(2) ** -200


def _rotate(r):
    # r * (3 + 4i)/5, an exact point of modulus r off the real axis
    return GaussianRational(Fraction(3, 5) * r, Fraction(4, 5) * r)


@pytest.mark.parametrize("case", sorted(RADIAL_CASES))
def test_numeric_paths_agree(case):
    c = RADIAL_CASES[case]
    exact = evaluate(c.mock, 160)
    for qval in (Fraction(1, 2), _rotate(Fraction(7, 10))):
        numeric = eval_expression_numeric(c.mock, qval)
        assert close(numeric, exact.evaluate(qval, ctx), mpmath.mpf(10) ** -15)


def test_completion_matches_literal_difference():
    res = radial_probe("rad-phi3", PrimitiveRoot(4, 1), schedule=default_schedule(4, 7))
    assert len(res.cross_check) == 2
    assert all(dev < mpmath.mpf(10) ** -40 for _, dev in res.cross_check)


def test_short_probe():
    res = radial_probe("rad-f3", PrimitiveRoot(2, 1), schedule=default_schedule(4, 12))
    assert res.target == 4
    assert res.trend == "monotone-converging"
    assert res.final_residual < 0.05
    assert res.radii == [1 - Fraction(1, 2**j) for j in range(4, 13)]
    assert not res.errors


def test_schedule_validation():
    with pytest.raises(ValueError):
        radial_probe("rad-f3", PrimitiveRoot(2, 1), schedule=[Fraction(1, 2), Fraction(1, 4)])
    with pytest.raises(ValueError):
        radial_probe("rad-f3", PrimitiveRoot(2, 1), schedule=[1])


def test_precision_monotonicity():
    sched = default_schedule(4, 10)
    low = radial_probe("rad-f3", PrimitiveRoot(2, 1), sched, bits=128, cross_check=0)
    high = radial_probe("rad-f3", PrimitiveRoot(2, 1), sched, bits=256, cross_check=0)
    assert high.final_residual <= low.final_residual + mpmath.mpf(10) ** -30


def test_conjecture_rows():
    rows = conjecture_check("conj-psi-q4", 0)
    assert len(rows) == 1
    assert rows[0].order == 1 and rows[0].agree and rows[0].label == "CONJECTURE"


@pytest.mark.parametrize("ident", sorted(CONJECTURES))
def test_conjectures_at_small_orders(ident):
    rows = conjecture_check(ident, 2)
    assert [r.order for r in rows] == [1, 3, 3, 5, 5, 5, 5]
    assert all(r.agree for r in rows)


def test_conjecture_errors():
    with pytest.raises(UnknownIdentity):
        conjecture_check("nosuch", 1)
    with pytest.raises(ValueError):
        conjecture_check("conj-s0-odd", -1)
