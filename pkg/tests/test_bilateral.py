from fractions import Fraction

import pytest

from oracles import oracle
from qmock.bilateral import (
    BilateralTermFamily,
    HyperFamily,
    appell_lerch_m,
    check_validity,
    g3_family,
    g3_star,
    g5_star,
    g6,
    g8,
    g_universal2,
    g_universal3,
    link_check,
    six_psi_six,
    six_psi_six_special,
    sum_bilateral,
    theta_sum,
    two_psi_two,
    two_psi_two_split,
)
from qmock.errors import DivergentFamily, FormalDivergence, PoleAppellLerch
from qmock.mocktheta import build
from qmock.qproducts import j_block, poch
from qmock.series import TruncatedSeries as TS


def coeffs(s, n):
    return [s.coefficient(e) for e in range(n)]


def from_list(values, order):
    return TS.from_coefficients(values, order)


def monomial_family(coef, exp):
    return BilateralTermFamily(lambda r, o: TS.monomial(coef(r), exp(r), o), exp)


def test_theta_family():
    fam = monomial_family(lambda r: 1, lambda r: r * r)
    assert check_validity(fam).ok
    assert coeffs(sum_bilateral(fam, 9), 9) == [1, 2, 0, 0, 2, 0, 0, 0, 0]


def test_fine_left_side():
    fam = monomial_family(lambda r: 6 * r + 1, lambda r: r * (3 * r + 1) // 2)
    got = sum_bilateral(fam, 16)
    assert coeffs(got, 8) == [1, -5, 7, 0, 0, -11, 0, 13]
    expect = [0] * 16
    for r in range(-5, 6):
        e = r * (3 * r + 1) // 2
        if e < 16:
            expect[e] += 6 * r + 1
    assert coeffs(got, 16) == expect


def test_constant_valuation_diverges():
    fam = monomial_family(lambda r: 1, lambda r: 0)
    v = check_validity(fam)
    assert not v.ok
    with pytest.raises(DivergentFamily):
        sum_bilateral(fam, 5)


def test_two_psi_two_invalid_direction_reported():
    fam = HyperFamily(["-q"], ["-q^2"], z="q^-3")
    v = check_validity(fam)
    assert not v.ok
    assert v.failingDirection in ("+inf", "-inf")


def test_g5_star_family_valid():
    assert check_validity(HyperFamily([], ["-q"], z="q", quad=1)).ok


def test_two_psi_two_constant_term():
    got = two_psi_two("-1", "i*q", "-i", "-q^2", "q", 20)
    assert got.coefficient(0) == 1


@pytest.mark.parametrize(
    "args",
    [("-1", "i*q", "-i", "-q^2", "q"), ("i", "-q^2", "2", "-q", "q"), ("-q", "i*q^3", "-i", "-q^2", "-q^2")],
)
def test_two_psi_two_split_assembly(args):
    assert two_psi_two(*args, 30).agrees_with(two_psi_two_split(*args, 30), 30)


def test_two_psi_two_matches_term_by_term_sum():
    a, b, c, d, z = "i", "-q^2", "2", "-q", "q"
    order = 25
    brute = TS.zero(order)
    for n in range(-order - 2, order + 2):
        o = order + 2 * n * n + 10
        t = poch(a, 1, n, o) * poch(c, 1, n, o)
        t = t / (poch(b, 1, n, o) * poch(d, 1, n, o))
        t = t * TS.monomial(1, n)
        brute = brute + t.truncate(order)
    assert two_psi_two(a, b, c, d, z, order).agrees_with(brute, order)


@pytest.mark.parametrize(
    "args",
    [("-q^2", "i", "-i", "2", "-q"), ("-q", "i", "-1", "-i", "2"), ("i*q^2", "-1", "i*q", "-q", "2")],
)
def test_six_psi_six(args):
    lhs, rhs = six_psi_six(*args, 40)
    assert lhs.agrees_with(rhs, 40)


def test_six_psi_six_special():
    for a, b, c in (("-q", "i", "2"), ("-q^2", "-1", "i*q"), ("i*q", "-i", "2*q")):
        lhs, rhs = six_psi_six_special(a, b, c, 40)
        assert lhs.agrees_with(rhs, 40)


def test_g3_constant_term():
    assert g3_family("-q", "q^2", 20).coefficient(0) == 1


def test_link_check_at_minus_q():
    lhs, rhs = link_check("-q", 40)
    assert lhs.agrees_with(rhs, 40)


def test_g3_star_negative_tail():
    order = 30
    full = g3_star("-1", "-1", order)
    uni = HyperFamily([], ["-q", "-q"], z="1", quad=1, lo=0).sum(order)
    tail = TS.zero(order)
    # the term at index -m has valuation m
    for m in range(1, order + 1):
        t = poch("-q", 1, -m, order + m * m + 5) ** 2
        t = t.invert() * TS.monomial(1, m * m)
        tail = tail + t.truncate(order)
    assert (full - uni).agrees_with(tail, order)


def test_g5_star_plain_assembly():
    order = 40
    left = g5_star("1", "-q", order)
    right = from_list(oracle("f0", order), order) + 2 * from_list(oracle("psi0", order), order)
    assert left.agrees_with(right, order)
    assert left.coefficient(0) == build("f0", 1).coefficient(0) + 2 * build("psi0", 1).coefficient(0)


def test_g5_star_shifted_assembly():
    order = 40
    left = g5_star("q", "-q", order)
    right = from_list(oracle("f1", order), order) + 2 * from_list(oracle("psi1", order), order)
    assert left.agrees_with(right, order)


def test_g8_assemblies():
    order = 40
    s0 = from_list(oracle("S0", order), order)
    t0 = from_list(oracle("T0", order), order)
    s1 = from_list(oracle("S1", order), order)
    t1 = from_list(oracle("T1", order), order)
    assert g8("-q", "-q^2", "1", order).agrees_with(s0 + 2 * t0, order)
    assert g8("-q", "-q^2", "q^2", order).agrees_with(s1 + 2 * t1, order)


def test_g6_reduces_to_g8():
    got = g6("-q", "-q^2", "q^20", "q", 15)
    assert got.agrees_with(g8("-q", "-q^2", "q", 15), 15)


def test_appell_lerch_brute_force():
    # x = q, z = -q; x z = -q^2 keeps every denominator 1 + q^(r+1) nonzero
    order = 12
    got = appell_lerch_m("q", "-q", order)
    big = order + 30
    total = TS.zero(big)
    for r in range(-20, 21):
        num = TS.monomial(1, r * (r - 1) // 2 + r, big + 40)
        den = TS.constant(1, big + 40) + TS.monomial(1, r + 1, big + 40)
        total = total + (num / den).truncate(big)
    brute = (total * j_block("-q", 1, big + 10).invert()).truncate(order)
    assert got.agrees_with(brute, order)


def test_appell_lerch_pole():
    with pytest.raises(PoleAppellLerch):
        appell_lerch_m("q", "q", 10)


def test_appell_lerch_vanishing_theta():
    # j(q; q) contains the factor 1 - 1
    with pytest.raises(FormalDivergence):
        appell_lerch_m("-q", "q", 10)


def test_appell_lerch_order_stability():
    small = appell_lerch_m("q", "-q", 15)
    big = appell_lerch_m("q", "-q", 25)
    assert big.agrees_with(small, 15)


def test_g2_constant_term():
    # only n = 0 reaches q^0: 1/((1 + 1)(1 + q))
    assert g_universal2("-1", 5).coefficient(0) == Fraction(1, 2)


def test_g2_substitution():
    direct = g_universal2("q^3", 40, base=8)
    sub = g_universal2("q^(3/8)", 5).substitute(1, 8)
    assert direct.agrees_with(sub, 40)
    direct6 = g_universal2("q^3", 42, base=6)
    sub6 = g_universal2("q^(1/2)", 7).substitute(1, 6)
    assert direct6.agrees_with(sub6, 42)


def test_g3_universal_against_family():
    x = "-q^2"
    lhs, rhs = link_check(x, 30)
    assert lhs.agrees_with(rhs, 30)
    assert g_universal3(x, 30).order == 30


def test_theta_sum():
    assert coeffs(theta_sum("1", 10), 10) == [1, 2, 0, 0, 2, 0, 0, 0, 0, 2]
