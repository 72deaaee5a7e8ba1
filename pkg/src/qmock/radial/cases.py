"""Registered radial-limit cases, their finite-sum targets and the probe.

Each case pairs a mock theta function with a theta companion.  Near the
unit circle the two sides grow like ``exp(c/(1-t))`` and cancel, so the
difference ``D(t) = mock - theta`` is taken from an exactly verified
completion identity that expresses it through series which stay bounded at
the root (see ``completion``).  The literal difference is still computed at
the first radii, with enough working precision to absorb the cancellation,
as a cross-check.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable

import mpmath

from ..errors import QSeriesError, RootClassMismatch, UnknownIdentity
from .numeric import DEFAULT_BITS, NumericEvaluator, PrimitiveRoot, _as_node, _fr, make_context

__all__ = [
    "RadialCase",
    "RadialProbeResult",
    "RADIAL_CASES",
    "default_schedule",
    "get_case",
    "finite_sum_rhs",
    "radial_probe",
    "admissible_roots",
    "theta_text",
]


@dataclass(frozen=True)
class RadialCase:
    id: str
    mock: str
    theta: str
    completion: Callable[[PrimitiveRoot], str]
    root_class: Callable[[PrimitiveRoot], bool]
    root_class_text: str
    finite_sum: Callable[[object, PrimitiveRoot], object]
    ref: str
    section: str

    def admits(self, root: PrimitiveRoot) -> bool:
        return bool(self.root_class(root))


# ----------------------------------------------------------------------
# finite sums at the root


def _z(ctx, root, power):
    return root.value(ctx, power)


def _prod(ctx, root, exps, sign=1):
    """prod over e in exps of (1 + sign*zeta^e)."""
    out = ctx.mpc(1)
    for e in exps:
        out *= 1 + sign * _z(ctx, root, e)
    return out


def _sum_f3(ctx, root):
    k = root.order // 2
    return -4 * sum((_prod(ctx, root, range(1, n + 1)) ** 2 * _z(ctx, root, n + 1) for n in range(k)), ctx.mpc(0))


def _sum_phi3(ctx, root):
    k = root.order // 4
    return -2 * sum((_prod(ctx, root, range(2, 2 * n + 1, 2)) * _z(ctx, root, n + 1) for n in range(k)), ctx.mpc(0))


def _sum_nu3(ctx, root):
    k = (root.order - 2) // 4
    return -sum((_prod(ctx, root, range(1, 2 * n, 2)) * _z(ctx, root, n) for n in range(k + 1)), ctx.mpc(0))


def _sum_psi3(ctx, root):
    k = (root.order - 1) // 2
    return -sum((_prod(ctx, root, range(1, 2 * n, 2), -1) * (-1) ** n for n in range(k + 1)), ctx.mpc(0))


def _sum_f0(ctx, root):
    k = root.order // 2
    terms = (_prod(ctx, root, range(1, n + 1)) * _z(ctx, root, (n + 1) * (n + 2) // 2) for n in range(k))
    return -2 * sum(terms, ctx.mpc(0))


def _sum_f1(ctx, root):
    k = root.order // 2
    terms = (_prod(ctx, root, range(1, n + 1)) * _z(ctx, root, n * (n + 1) // 2) for n in range(k))
    return -2 * sum(terms, ctx.mpc(0))


def _sum_F0(ctx, root):
    k = (root.order - 2) // 4
    terms = (_prod(ctx, root, range(2, 4 * n, 4), -1) * (-1) ** n * _z(ctx, root, 2 * n * n) for n in range(1, k + 1))
    return -sum(terms, ctx.mpc(0))


def _sum_F1(ctx, root):
    k = (root.order - 2) // 4
    terms = (
        _prod(ctx, root, range(2, 4 * n, 4), -1) * (-1) ** n * _z(ctx, root, 2 * n * n + 4 * n) for n in range(k + 1)
    )
    return -sum(terms, ctx.mpc(0))


def _sigma_rho(ctx, root, twist):
    k = (root.order - 1) // 2
    total = ctx.mpc(0)
    for n in range(k + 1):
        term = _prod(ctx, root, range(1, 2 * n, 2), -1) / _prod(ctx, root, range(1, n + 1))
        total += term * (-twist) ** n
    return -total / 2


def _sum_sigma6(ctx, root):
    return _sigma_rho(ctx, root, ctx.mpc(1))


def _sum_rho6(ctx, root):
    return _sigma_rho(ctx, root, _z(ctx, root, 1))


def _phi_psi6(ctx, root, shift):
    k = root.order // 2
    total = ctx.mpc(0)
    for n in range(1, k + 1):
        num = _prod(ctx, root, range(1, 2 * n - shift))
        den = _prod(ctx, root, range(1, 2 * n, 2), -1)
        total += num / den * _z(ctx, root, n)
    return -2 * total


def _sum_phi6(ctx, root):
    return _phi_psi6(ctx, root, 0)


def _sum_psi6(ctx, root):
    return _phi_psi6(ctx, root, 1)


def _eighth(ctx, root, expo):
    k = root.order // 8
    total = ctx.mpc(0)
    for n in range(k):
        num = _prod(ctx, root, range(4, 4 * n + 1, 4))
        den = _prod(ctx, root, range(2, 4 * n + 3, 4))
        total += num / den * _z(ctx, root, expo(n))
    return -2 * total


def _sum_S0(ctx, root):
    return _eighth(ctx, root, lambda n: 2 * n * n + 6 * n + 4)


def _sum_S1(ctx, root):
    return _eighth(ctx, root, lambda n: 2 * n * n + 2 * n)


def _sum_zeta8(ctx, root):
    # zeta * sum_n r^n with r = (1 - zeta)(1 - zeta^7)/2, geometric for index 1 and 7
    z = _z(ctx, root, 1)
    r = (1 - z) * (1 - _z(ctx, root, 7)) / 2
    return z / (1 - r)


# ----------------------------------------------------------------------
# the case table

_B = "prod(q; q) / prod(-q; q)^2"
_PHI3 = "prod(q^2, -q, -q; q^2) / prod(-q^2, q; q^2)"
_F0 = "q * prod(q^4, q^16, q^20; q^20) / prod(q^2; q^4) + prod(q^2, q^3, q^5; q^5) / prod(-q; q)"
_F1 = "prod(q^8, q^12, q^20; q^20) / (q * prod(q^2; q^4)) - prod(q, q^4, q^5; q^5) / (q * prod(-q; q))"
_ZETA8 = (
    "-2*q * Jm(16)^3 / (J(8, 16) * J(2, 16))"
    " - Jm(16)^10 * Jbar(2, 16) / (Jm(8)^4 * Jm(32)^4 * J(2, 16) * Jbar(10, 16))"
    " + Jbar(1, 2) * J(6, 16) / J(2, 8)"
)


def _fixed(text):
    return lambda root: text


def _order(pred):
    return lambda root: pred(root.order)


def _f3_theta(root):
    # the sign (-1)^k with 2k the root order; the case text carries it explicitly
    return f"{'-' if (root.order // 2) % 2 else ''}{_B}"


def _case(id, mock, theta, completion, cls, cls_text, fsum, ref, section):
    return RadialCase(id, mock, theta, completion, cls, cls_text, fsum, ref, section)


_CASES = [
    _case(
        "rad-f3", "f3(q)", f"(-1)^k * {_B}",
        lambda r: "2*phi3(-q)" if (r.order // 2) % 2 else "-4*psi3(-q)",
        _order(lambda m: m % 2 == 0), "order 2k",
        _sum_f3, "third-order f minus (-1)^k times the theta quotient b at even-order roots", "third-order",
    ),
    _case(
        "rad-phi3", "phi3(q)", _PHI3, _fixed("-sum(r=1..inf, poch(-1; q^2; r) * q^r)"),
        _order(lambda m: m % 4 == 0), "order 4k",
        _sum_phi3, "third-order phi minus its bilateral theta quotient at roots of order 4k", "third-order",
    ),
    _case(
        "rad-nu3", "nu3(q)", "2 * prod(-q^2; q^2)^2 * prod(q^4; q^4)",
        _fixed("-sum(r=0..inf, poch(-q; q^2; r) * q^r)"),
        _order(lambda m: m % 4 == 2), "order 4k+2",
        _sum_nu3, "third-order nu minus its bilateral theta product at roots of order 4k+2", "third-order",
    ),
    _case(
        "rad-psi3", "psi3(q)", f"{_PHI3} / 2", _fixed("-phi3(q) / 2"),
        _order(lambda m: m % 2 == 1), "order 2k+1",
        _sum_psi3, "third-order psi minus half the theta quotient at odd-order roots", "third-order",
    ),
    _case(
        "rad-f0", "f0(q)",
        "4*q * prod(q^4, q^16, q^20; q^20) / prod(q^2; q^4) + prod(q^2, q^3, q^5; q^5) / prod(-q; q)",
        _fixed("-2*psi0(q)"), _order(lambda m: m % 2 == 0), "order 2k",
        _sum_f0, "fifth-order f0 minus theta quotients of modulus 20 and 5 at even-order roots", "fifth-order",
    ),
    _case(
        "rad-f1", "f1(q)",
        "4 * prod(q^8, q^12, q^20; q^20) / prod(q^2; q^4) - prod(q, q^4, q^5; q^5) / prod(-q; q)",
        _fixed("-2*psi1(q)"), _order(lambda m: m % 2 == 0), "order 2k",
        _sum_f1, "fifth-order f1 minus theta quotients of modulus 20 and 5 at even-order roots", "fifth-order",
    ),
    _case(
        "rad-F0", "F0(q^2)", _F0, _fixed("1 - phi0(-q^2)"),
        _order(lambda m: m % 4 == 2), "order 4k+2",
        _sum_F0, "fifth-order F0 at q^2 minus theta quotients at roots of order 4k+2", "fifth-order",
    ),
    _case(
        "rad-F1", "F1(q^2)", _F1, _fixed("q^-2 * phi1(-q^2)"),
        _order(lambda m: m % 4 == 2), "order 4k+2",
        _sum_F1, "fifth-order F1 at q^2 minus theta quotients at roots of order 4k+2", "fifth-order",
    ),
    _case(
        "rad-sigma6", "sigma6(q)",
        "(2 * poch(-q; q^2; inf)^2 * prod(-q^3, -q^3, q^6; q^6) - prod(q; q^2)^2 * prod(q^3, q^3, q^6; q^6)) / 4",
        _fixed("-mu6(q) / 2"), _order(lambda m: m % 2 == 1), "order 2k+1",
        _sum_sigma6, "sixth-order sigma minus a theta combination at odd-order roots", "sixth-order",
    ),
    _case(
        "rad-phi6", "phi6(q)",
        "prod(-q; q) / prod(q^2; q^4) * (2 * prod(-q^2; q^4)^2 * prod(-q^6, -q^6, q^12; q^12)"
        " - prod(q^2; q^4)^2 * prod(q^6, q^6, q^12; q^12))",
        _fixed("-2*phi6minus(q)"), _order(lambda m: m % 2 == 0), "order 2k",
        _sum_phi6, "sixth-order phi minus a theta combination at even-order roots", "sixth-order",
    ),
    _case(
        "rad-psi6", "psi6(q)", "3*q * prod(-q; q) * prod(q^6, q^6, q^6; q^6) / prod(q^2; q^2)^2",
        _fixed("-2*psi6minus(q)"), _order(lambda m: m % 2 == 0), "order 2k",
        _sum_psi6, "sixth-order psi minus a theta quotient at even-order roots", "sixth-order",
    ),
    _case(
        "rad-rho6", "rho6(q)", "3 * prod(q; q^2) * prod(q^3, q^3, q^3; q^3) / (2 * prod(q; q)^2)",
        _fixed("-lambda6(q) / 2"), _order(lambda m: m % 2 == 1), "order 2k+1",
        _sum_rho6, "sixth-order rho minus a theta quotient at odd-order roots", "sixth-order",
    ),
    _case(
        "rad-S0", "S0(q^2)", "prod(q^2; q^2) * (prod(q; q^2)^3 + prod(-q; q^2)^3) / (2 * prod(-q^2; q^2))",
        _fixed("-2*T0(q^2)"), _order(lambda m: m % 8 == 0), "order 8k",
        _sum_S0, "eighth-order S0 at q^2 minus Euler-type products at roots of order 8k", "eighth-order",
    ),
    _case(
        "rad-S1", "S1(q^2)", "prod(q^2; q^2) * (prod(-q; q^2)^3 - prod(q; q^2)^3) / (2*q * prod(-q^2; q^2))",
        _fixed("-2*T1(q^2)"), _order(lambda m: m % 8 == 0), "order 8k",
        _sum_S1, "eighth-order S1 at q^2 minus Euler-type products at roots of order 8k", "eighth-order",
    ),
    _case(
        "rad-S0-zeta8", "S0(-q^2)", _ZETA8,
        _fixed(
            "sum(n=0..inf, q^(8*n+1) * poch(q, q^7; q^8; n) / poch(-q^8; q^8; n))"
            " + q * J(1, 8) / Jm(16) * sum(n=0..inf, q^(8*n*(n+1)) / poch(-q, -q^7; q^8; n+1))"
            " + J(16, 32)^2 * J(1, 8) / (Jbar(1, 8) * Jbar(10, 16))"
        ),
        lambda r: r.order == 8 and r.index in (1, 7), "order 8, index 1 or 7",
        _sum_zeta8, "eighth-order S0 at -q^2 minus modulus-16 theta quotients at the eighth roots exp(+-2 pi i/8)",
        "eighth-order",
    ),
    _case(
        "rad-S0-zeta8-alt", "S0(-q^2)",
        # products of base -q^2 split into base q^4
        "(prod(-i*q, i*q^3; q^4)^3 + prod(i*q, -i*q^3; q^4)^3) * prod(-q^2, q^4; q^4) / (2 * prod(q^2, -q^4; q^4))",
        _fixed("-2*T0(-q^2)"),
        lambda r: r.order == 8 and r.index in (1, 7), "order 8, index 1 or 7",
        _sum_zeta8, "eighth-order S0 at -q^2 minus the Euler-type products transported by q -> i q", "eighth-order",
    ),
]

RADIAL_CASES: dict[str, RadialCase] = {c.id: c for c in _CASES}


def get_case(case) -> RadialCase:
    if isinstance(case, RadialCase):
        return case
    try:
        return RADIAL_CASES[case]
    except KeyError:
        raise UnknownIdentity(case) from None


def theta_text(case: RadialCase, root: PrimitiveRoot) -> str:
    if case.id == "rad-f3":
        return _f3_theta(root)
    return case.theta


def admissible_roots(case, max_order: int = 12) -> list[PrimitiveRoot]:
    case = get_case(case)
    out = []
    for m in range(1, max_order + 1):
        for j in range(m):
            if math.gcd(j, m) == 1:
                r = PrimitiveRoot(m, j)
                if case.admits(r):
                    out.append(r)
    return out


def _check_root(case: RadialCase, root: PrimitiveRoot):
    if not case.admits(root):
        raise RootClassMismatch(f"{case.id} needs a root of {case.root_class_text}, got order {root.order} index {root.index}")


def finite_sum_rhs(case, root: PrimitiveRoot, bits: int = DEFAULT_BITS):
    """The exact finite sum of the radial limit, evaluated at ``bits`` precision."""
    case = get_case(case)
    _check_root(case, root)
    ctx = make_context(bits)
    return case.finite_sum(ctx, root)


# ----------------------------------------------------------------------
# probing


def default_schedule(first: int = 4, last: int = 20) -> list[Fraction]:
    """t_j = 1 - 2^-j, exact."""
    return [1 - Fraction(1, 2**j) for j in range(first, last + 1)]


def _radius(t) -> Fraction:
    if isinstance(t, (Fraction, int, str, float)):
        return Fraction(t)
    return Fraction(mpmath.nstr(t, 60, strip_zeros=True))


@dataclass
class RadialProbeResult:
    case: str
    root: PrimitiveRoot
    radii: list
    differences: list  # complex values or None where a radius failed
    target: object
    final_residual: object
    trend: str
    residuals: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)
    cross_check: list = field(default_factory=list)  # (radius, |completion - direct|)
    bits: int = DEFAULT_BITS

    @property
    def converged(self) -> bool:
        return self.trend == "monotone-converging"


def _difference(case, root, t, bits):
    ctx = make_context(bits)
    q = _fr(ctx, t) * root.value(ctx)
    ev = NumericEvaluator(ctx, q, ctx.mpf(2) ** (-bits + 24), root)
    return ev.value(_as_node(case.completion(root)))


def _direct_difference(case, root, t, bits, budget_bits):
    """mock(t zeta) - theta(t zeta) summed literally; precision grows with the cancellation."""
    work = bits
    while work <= budget_bits:
        ctx = make_context(work)
        tq = _fr(ctx, t) * root.value(ctx)
        ev = NumericEvaluator(ctx, tq, ctx.mpf(2) ** (-work + 24), root)
        theta = ev.value(_as_node(theta_text(case, root)))
        mock = ev.value(_as_node(case.mock))
        scale = max(abs(theta), abs(mock), ev.biggest, ctx.mpf(1))
        lost = int(ctx.log(scale, 2)) + 1
        if work - lost >= bits:
            return mock - theta
        work = bits + lost + 32
    return None


def _trend(residuals, floor) -> str:
    half = residuals[len(residuals) // 2 :]
    if len(half) < 2 or any(r is None for r in half):
        return "inconclusive"
    for a, b in zip(half, half[1:]):
        if not (b < a or (a <= floor and b <= floor)):
            return "inconclusive"
    return "monotone-converging"


def radial_probe(
    case,
    root: PrimitiveRoot,
    schedule=None,
    bits: int = DEFAULT_BITS,
    cross_check: int = 2,
    cross_check_bits: int = 4096,
) -> RadialProbeResult:
    """Follow D(t) = mock(t zeta) - theta(t zeta) along the schedule.

    ``cross_check`` radii at the start of the schedule are also computed by
    literal subtraction when that fits in ``cross_check_bits``.
    """
    case = get_case(case)
    _check_root(case, root)
    radii = [_radius(t) for t in schedule] if schedule is not None else default_schedule()
    if not radii or any(not (0 < r < 1) for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("schedule must be strictly increasing inside (0, 1)")
    target = finite_sum_rhs(case, root, bits)
    diffs, residuals, errors, checks = [], [], {}, []
    for i, t in enumerate(radii):
        try:
            d = _difference(case, root, t, bits)
        except (QSeriesError, ArithmeticError, ValueError) as exc:
            diffs.append(None)
            residuals.append(None)
            errors[i] = f"{type(exc).__name__}: {exc}"
            continue
        diffs.append(d)
        residuals.append(abs(d - target))
        if i < cross_check:
            try:
                direct = _direct_difference(case, root, t, bits, cross_check_bits)
            except (QSeriesError, ArithmeticError, ValueError):
                direct = None
            if direct is not None:
                checks.append((t, abs(direct - d)))
    floor = mpmath.mpf(2) ** (-int(0.8 * bits))
    last = residuals[-1]
    return RadialProbeResult(
        case=case.id,
        root=root,
        radii=radii,
        differences=diffs,
        target=target,
        final_residual=last,
        trend=_trend(residuals, floor),
        residuals=residuals,
        errors=errors,
        cross_check=checks,
        bits=bits,
    )
