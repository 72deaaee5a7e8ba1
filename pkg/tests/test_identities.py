from fractions import Fraction

import pytest

from qmock.errors import ArityError, DSLSyntaxError, UnboundVariable, UnknownIdentity
from qmock.identities import (
    Poch,
    default_registry,
    evaluate,
    parse,
    parse_registry,
    to_text,
    verify,
    verify_all,
    verify_record,
)
from qmock.identities.registry import SECTIONS, Registry
from qmock.mocktheta import build
from qmock.radial import RADIAL_CASES, admissible_roots
from qmock.radial.cases import theta_text
from qmock.series import TruncatedSeries as TS

REQUIRED = """
jtp poch-neg psi2-t1 psi2-t2 psi2-t3 sixpsisix sixpsisix-sp g3-link g3-t4 g3-t5 g3-t6
g3s-1 g3s-2 g3s-3 gz-1 gz-2 gz-3 f3-id1 phi3-id1 nu3-id1 psi3-id1 phi3-bsum nu3-bsum
psi3-bsum curio t3-sum1 t3-sum2 f5-1 f5-2 f5-3 f5-4 g5-t1 g5-t2 f5-sum1 f5-sum2 f5-sum3
f5-sum4 mt6-1 mt6-2 mt6-3 mt6-4 g6-t1 g6-t2 g6-t3 mt6-gz0 mt6-gz1 mt6-gz2 mt6-gz3 sixr
fine mort psi6-gm psi6-q2 psi6-diff mt8-bs1 mt8-bs2 mt8-p1 mt8-p2 g8-t1 g8-t2 g8-t3
mt8-s1 mt8-s2 mt8-s3 mt8-s4 s0-g2 mock8-e2
""".split()

SAMPLED = """
psi2-t1 psi2-t2 psi2-t3 sixpsisix sixpsisix-sp g3-t4 g3-t5 g3-t6 g3s-1 g3s-2 g3s-3
gz-1 gz-2 gz-3 g5-t1 g5-t2 g6-t1 g6-t2 g6-t3 g8-t1 g8-t2 g8-t3 mort
""".split()

CESARO = ["psi3-id1", "psi3-bsum", "curio", "mt6-3", "mt6-gz0"]


def coeffs(s, n):
    return [s.coefficient(e) for e in range(n)]


# ----------------------------------------------------------------------
# parser


def test_parse_phi3_definition():
    node = parse("sum(n=0..inf, q^(n^2) / poch(-q^2; q^2; n))")
    assert evaluate(node, 40).agrees_with(build("phi3", 40), 40)


def test_round_trip():
    for text in (
        "sum(n=0..inf, q^(n^2) / poch(-q^2; q^2; n))",
        "prod(q, -q^3; q^2) / (2*J(1, 3))",
        "-i*q^-2 + 1/3*f3(-q^2) - poch(a, b; q; -2)",
    ):
        node = parse(text)
        again = parse(to_text(node))
        assert to_text(again) == to_text(node)


def test_prod_arity():
    with pytest.raises(ArityError):
        parse("prod(inf; -q; q^2)")


def test_named_function_arity():
    with pytest.raises(ArityError):
        parse("J(1)")
    with pytest.raises(ArityError):
        parse("f3(q, q)")


def test_syntax_error_location():
    with pytest.raises(DSLSyntaxError) as info:
        parse("1 +\n  (q * )")
    assert info.value.line == 2
    assert info.value.column is not None


def test_unknown_function():
    with pytest.raises(DSLSyntaxError):
        parse("zeta(q)")


def test_jtp_sugar():
    node = parse("jtp(z=-1)")
    product = evaluate(parse("prod(-q, -q, q^2; q^2)"), 40)
    assert evaluate(node, 40).agrees_with(product, 40)
    theta = TS.zero(40)
    for n in range(-7, 7):
        if n * n < 40:
            theta = theta + TS.monomial(1, n * n)
    assert product.agrees_with(theta, 40)


def test_comments_ignored():
    assert evaluate("q + 1  # trailing", 5) == evaluate("1 + q", 5)


def test_poch_node():
    assert isinstance(parse("poch(q; q; 3)"), Poch)


# ----------------------------------------------------------------------
# evaluation


def test_partition_function():
    assert coeffs(evaluate("1/poch(q;q;inf)", 6), 6) == [1, 1, 2, 3, 5, 7]


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate("poch(s; q; 3)", 10)


def test_bindings():
    got = evaluate("poch(s; q; 2)", 10, {"s": "-q"})
    assert got.agrees_with(TS.from_terms({0: 1, 1: 1, 2: 1, 3: 1}), 10)


def test_negative_index_expression():
    got = evaluate("poch(q^3; q; -1)", 12)
    assert coeffs(got, 12) == [1, 0] * 6


def test_cesaro_evaluation():
    # sum (-1)^n (q; q^2)_n alternates; its regularized value starts at 1/2
    got = evaluate("sum(n=0..inf, (-1)^n * poch(q; q^2; n))", 10, cesaro=True)
    assert got.coefficient(0) == Fraction(1, 2)


# ----------------------------------------------------------------------
# registry


def test_catalog_completeness():
    reg = default_registry()
    missing = [i for i in REQUIRED if i not in reg]
    assert missing == []


def test_sampled_entries_have_tuples():
    reg = default_registry()
    for ident in SAMPLED:
        rec = reg[ident]
        assert rec.mode == "sampled"
        assert len(rec.tuples) >= 3


def test_cesaro_entries_flagged():
    reg = default_registry()
    for ident in CESARO:
        rec = reg[ident]
        assert rec.mode == "cesaro"
        assert rec.cesaro_sides


def test_refs_are_descriptive():
    for rec in default_registry():
        assert rec.ref and "Eq." not in rec.ref


def test_section_filter():
    reg = default_registry()
    sixth = reg.select("sixth-order")
    assert sixth and all(r.section == "sixth-order" for r in sixth)
    assert {r.id for r in sixth} >= {"mt6-1", "mt6-2", "mt6-3", "mt6-4", "sixr", "fine", "psi6-diff"}
    assert sum(len(reg.select(s)) for s in SECTIONS) == len(reg)


def test_empty_selection():
    assert verify_all(selector=[]) == []


def test_unknown_identity():
    with pytest.raises(UnknownIdentity):
        verify("nosuch")


def test_fine_at_60():
    assert verify("fine", 60).status == "pass"


def test_phi3_bsum_at_60():
    assert verify("phi3-bsum", 60).status == "pass"


def test_multiplied_control():
    rep = verify("fine", 60, perturb=("mul", 30))
    assert rep.status == "fail"
    assert rep.firstMismatch[0] == 30


def test_psi6_diff_printed_coefficients():
    rec = default_registry()["psi6-diff"]
    got = evaluate(rec.lhs, 21)
    expect = {3: Fraction(1, 2), 4: -1, 8: 1, 9: Fraction(1, 2), 12: -2, 15: Fraction(1, 2), 16: 2, 20: -3}
    assert got.terms() == expect
    assert verify("psi6-diff").status == "pass"


def test_batch_reports_errors_without_aborting():
    text = """
id: bad
ref: a broken entry
section: foundations
mode: exact
lhs: 1/poch(1; q; 1)
rhs: 1

id: good
ref: trivial
section: foundations
mode: exact
lhs: poch(q; q; 1)
rhs: 1 - q
"""
    reg = Registry(parse_registry(text, check=False))
    reports = verify_all(order=10, registry=reg)
    assert [r.id for r in reports] == ["bad", "good"]
    assert [r.status for r in reports] == ["error", "pass"]


def test_determinism_and_order_independence():
    reg = default_registry()
    ids = ["jtp", "fine", "t3-sum1", "g5-t1", "mt8-bs1"]
    a = [r.to_json(timing=False) for r in verify_all(20, ids, parallelism=1)]
    b = [r.to_json(timing=False) for r in verify_all(20, list(reversed(ids)), parallelism=1)]
    c = [r.to_json(timing=False) for r in verify_all(20, ids, parallelism=2)]
    assert a == b == c
    assert [r["id"] for r in a] == sorted(ids)
    assert reg is default_registry()


@pytest.mark.parametrize("ident", default_registry().ids())
def test_negative_control(ident):
    rec = default_registry()[ident]
    order = rec.effective_order(24)
    k = int(order) // 2
    good = verify_record(rec, order)
    assert good.status == "pass"
    bad = verify_record(rec, order, perturb=("add", k))
    assert bad.status == "fail"
    assert bad.firstMismatch[0] == k
    a, b = bad.firstMismatch[1:]
    assert a != b


# ----------------------------------------------------------------------
# exact forms of the radial differences


@pytest.mark.parametrize("case", sorted(RADIAL_CASES))
def test_completion_identities(case):
    c = RADIAL_CASES[case]
    for root in admissible_roots(c, 8)[:2]:
        lhs = evaluate(f"{c.mock} - ({theta_text(c, root)})", 30)
        rhs = evaluate(c.completion(root), 30)
        assert lhs.agrees_with(rhs, 30)
