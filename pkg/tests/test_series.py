from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmock.errors import BeyondTruncation, NoStabilization, NonIntegralUnitPower, ZeroSeries
from qmock.gaussian import GaussianRational
from qmock.qproducts import poch_finite
from qmock.series import TruncatedSeries as TS
from qmock.series import cesaro_sum

I = GaussianRational(0, 1)


def poly(coeffs, order=None, start=0):
    return TS.from_coefficients(coeffs, order if order is not None else float("inf"), start)


def geometric(order):
    return poly([1] * order, order)


def test_add_cancels():
    assert poly([1, 1]) + poly([1, -1]) == TS.constant(2)


def test_add_zero_is_identity():
    a = poly([3, 0, -1], 10)
    assert a + TS.zero() == a


def test_laurent_cancellation_raises_valuation():
    a = TS.from_terms({-1: 1, 0: 1})
    b = TS.monomial(-1, -1)
    assert a.valuation == -1
    s = a + b
    assert s == TS.constant(1)
    assert s.valuation == 0


def test_add_order_is_min():
    assert (poly([1], 5) + poly([1], 9)).order == 5


def test_geometric_inverse():
    prod = poly([1, -1]) * geometric(20)
    assert prod.order == 20
    assert prod.agrees_with(TS.constant(1), 20)


def test_mul_identity():
    a = poly([1, 2, 3], 7)
    assert a * 1 == a


def test_three_factor_expansion():
    q = TS.q()
    got = (1 - q) * (1 - q**2) * (1 - q**3)
    assert got.terms() == {0: 1, 1: -1, 2: -1, 4: 1, 5: 1, 6: -1}


def test_mul_order_rule():
    a = TS.from_terms({2: 1}, order=10)
    b = TS.from_terms({1: 1}, order=12)
    assert (a * b).order == min(10 + 1, 12 + 2)


def test_invert_one_plus_q():
    inv = poly([1, 1], 8).invert()
    assert [inv.coefficient(e) for e in range(8)] == [1, -1, 1, -1, 1, -1, 1, -1]


def test_invert_constant():
    assert TS.constant(2).invert() == TS.constant(Fraction(1, 2))


def test_invert_laurent():
    a = TS.from_terms({1: 1, 2: -1}, order=12)
    inv = a.invert()
    assert inv.valuation == -1
    assert all(inv.coefficient(e) == 1 for e in range(-1, 9))


def test_invert_zero_raises():
    with pytest.raises(ZeroSeries):
        TS.zero(10).invert()


def test_substitute_sign():
    assert poly([1, 1, 1]).substitute(-1, 1) == poly([1, -1, 1])


def test_substitute_square():
    assert poly([1, 1]).substitute(1, 2) == TS.from_terms({0: 1, 2: 1})


def test_substitute_scales_order():
    assert poly([1, 1], 10).substitute(-1, 2).order == 20


def test_substitute_i_powers():
    got = poly([1, 1, 1, 1, 1]).substitute(I, 1)
    assert [got.coefficient(e) for e in range(5)] == [1, I, -1, -I, 1]


def test_substitute_fractional_exponent_with_unit_raises():
    half = TS.from_terms({Fraction(1, 2): 1})
    with pytest.raises(NonIntegralUnitPower):
        half.substitute(-1, 1)
    assert half.substitute(1, 2) == TS.q()


def test_coefficient_lookup():
    a = poly([1, -2])
    assert a.coefficient(1) == -2
    assert poly([1], 10).coefficient(5) == 0
    with pytest.raises(BeyondTruncation):
        poly([1], 10).coefficient(10)


def test_gaussian_coefficients_exact():
    a = TS.from_terms({0: I, 1: Fraction(1, 3)}, order=5)
    b = a * a
    assert b.coefficient(0) == -1
    assert b.coefficient(1) == 2 * I * Fraction(1, 3)


def test_first_mismatch_reports_exponent():
    a = poly([1, 2, 3, 4], 4)
    b = poly([1, 2, 5, 4], 4)
    e, x, y = a.first_mismatch(b)
    assert (e, x, y) == (2, 3, 5)
    assert a.first_mismatch(a) is None


def test_evaluate_matches_polynomial():
    import mpmath

    ctx = mpmath.mp.clone()
    ctx.prec = 100
    val = poly([1, 2, 3]).evaluate(Fraction(1, 2), ctx)
    assert abs(val - ctx.mpf(11) / 4) < ctx.mpf(2) ** -90


def test_cesaro_grandi():
    got = cesaro_sum(lambda n: TS.constant((-1) ** n), 5)
    assert got.value.agrees_with(TS.constant(Fraction(1, 2)), 5)


def test_cesaro_of_convergent_sum_is_ordinary_sum():
    got = cesaro_sum(lambda n: TS.monomial(1, n), 12)
    assert got.value.agrees_with(geometric(12), 12)


def test_cesaro_pochhammer_brute_force():
    order = 15

    def term(n):
        return (-1) ** n * poch_finite("q", 2, n, order)

    got = cesaro_sum(term, order).value
    partial = [TS.zero(order)]
    for n in range(2 * order + 2):
        partial.append(partial[-1] + term(n))
    even, odd = partial[2 * order + 2], partial[2 * order + 1]
    brute = (even + odd).scale(Fraction(1, 2))
    assert got.agrees_with(brute, order)


def test_cesaro_no_stabilization():
    with pytest.raises(NoStabilization):
        cesaro_sum(lambda n: TS.constant(n), 3, cap=50)


def test_exactness_under_larger_order():
    small = poch_finite("-q", 1, 6, 20).invert()
    big = poch_finite("-q", 1, 6, 40).invert()
    assert big.agrees_with(small, 20)


coeff = st.integers(-5, 5)
series = st.tuples(st.lists(coeff, min_size=1, max_size=8), st.integers(-2, 2)).map(
    lambda t: TS.from_coefficients(t[0], 12, t[1])
)


@settings(max_examples=60, deadline=None)
@given(series, series, series)
def test_ring_axioms(a, b, c):
    assert ((a + b) + c).agrees_with(a + (b + c))
    assert (a * (b + c)).agrees_with(a * b + a * c)
    assert (a * b).agrees_with(b * a)


@settings(max_examples=60, deadline=None)
@given(series)
def test_invert_two_sided(a):
    if a.is_zero():
        return
    inv = a.invert()
    one = TS.constant(1)
    assert (a * inv).agrees_with(one)
    assert (inv * a).agrees_with(one)


@settings(max_examples=40, deadline=None)
@given(series, series, st.sampled_from([1, -1, I, -I]), st.integers(1, 3))
def test_substitute_is_homomorphism(a, b, u, k):
    assert (a * b).substitute(u, k).agrees_with(a.substitute(u, k) * b.substitute(u, k))
