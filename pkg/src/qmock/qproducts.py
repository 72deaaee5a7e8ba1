"""q-Pochhammer symbols, theta blocks and the Jacobi triple product."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import FormalDivergence, PolePochhammer
from .gaussian import GaussianRational, as_gaussian
from .series import INF, TruncatedSeries, as_fraction

__all__ = [
    "MonomialParam",
    "QStep",
    "mono",
    "poch_finite",
    "poch_neg",
    "poch",
    "poch_inf",
    "jacobi_triple_product",
    "j_block",
    "J",
    "Jbar",
    "Jm",
]


@dataclass(frozen=True)
class MonomialParam:
    """The value ``unit*q^exponent``."""

    unit: GaussianRational
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "unit", as_gaussian(self.unit))
        object.__setattr__(self, "exponent", as_fraction(self.exponent))
        if not self.unit:
            raise ValueError("monomial parameter needs a nonzero unit")

    @classmethod
    def parse(cls, text: str) -> "MonomialParam":
        """Read ``"-q^2"``, ``"i*q"``, ``"1/2*q^(3/2)"``, ``"-1"`` and so on."""
        s = text.replace(" ", "")
        m = re.fullmatch(r"(.*?)\*?q(?:\^\(?(-?\d+(?:/\d+)?)\)?)?", s)
        if m is None:
            return cls(GaussianRational.parse(s), 0)
        head, exp = m.group(1), m.group(2)
        exp = Fraction(exp) if exp else Fraction(1)
        if head in ("", "+"):
            unit = GaussianRational(1)
        elif head == "-":
            unit = GaussianRational(-1)
        else:
            unit = GaussianRational.parse(head.strip("()"))
        return cls(unit, exp)

    def __mul__(self, other):
        other = mono(other)
        return MonomialParam(self.unit * other.unit, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = mono(other)
        return MonomialParam(self.unit / other.unit, self.exponent - other.exponent)

    def __rtruediv__(self, other):
        return mono(other) / self

    def __neg__(self):
        return MonomialParam(-self.unit, self.exponent)

    def __pow__(self, k: int):
        return MonomialParam(self.unit ** k, self.exponent * k)

    def qshift(self, e) -> "MonomialParam":
        return MonomialParam(self.unit, self.exponent + as_fraction(e))

    def series(self, order=INF) -> TruncatedSeries:
        return TruncatedSeries.monomial(self.unit, self.exponent, order)

    def is_unit_one(self) -> bool:
        return self.exponent == 0 and self.unit == 1

    def __str__(self):
        u, e = self.unit, self.exponent
        if e == 0:
            return str(u)
        qs = "q" if e == 1 else (f"q^{e}" if e.denominator == 1 and e > 0 else f"q^({e})")
        if u == 1:
            return qs
        if u == -1:
            return "-" + qs
        us = str(u)
        if u.re and u.im:
            us = f"({us})"
        return f"{us}*{qs}"


def mono(x) -> MonomialParam:
    if isinstance(x, MonomialParam):
        return x
    if isinstance(x, str):
        return MonomialParam.parse(x)
    if isinstance(x, tuple):
        return MonomialParam(x[0], x[1])
    return MonomialParam(as_gaussian(x), 0)


@dataclass(frozen=True)
class QStep:
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(self, "scale", as_fraction(self.scale))
        if self.scale <= 0:
            raise ValueError("the step q^scale needs scale > 0")


def _step(s) -> Fraction:
    if isinstance(s, QStep):
        return s.scale
    s = as_fraction(s)
    if s <= 0:
        raise ValueError("the step q^scale needs scale > 0")
    return s


def _start(order, deficit) -> object:
    if order is None or order == INF:
        return INF
    return as_fraction(order) - deficit


def poch_finite(a, step, n: int, order=INF) -> TruncatedSeries:
    """``(a; q^step)_n`` for ``n >= 0``: the product of ``1 - a*q^(j*step)``."""
    a, s = mono(a), _step(step)
    if n < 0:
        raise ValueError("poch_finite needs n >= 0; use poch_neg for negative indices")
    exps = [a.exponent + j * s for j in range(n)]
    deficit = sum(min(e, 0) for e in exps)
    res = TruncatedSeries.constant(1, _start(order, deficit))
    for e in exps:
        res = res.mul_binomial(a.unit, e)
    return res.truncate(order if order is not None else INF)


def poch_neg(a, step, n: int, order) -> TruncatedSeries:
    """``(a; q^step)_{-n} = 1/(a q^{-n*step}; q^step)_n`` for ``n > 0``.

    Uses the closed form ``(-q^s/a)^n q^{s n(n-1)/2} / (q^s/a; q^s)_n``.
    """
    a, s = mono(a), _step(step)
    if n < 0:
        raise ValueError("poch_neg takes the positive size of the negative index")
    for j in range(1, n + 1):
        if a.unit == 1 and a.exponent - j * s == 0:
            raise PolePochhammer(f"({a}; {_qs(s)})_{{-{n}}} has the zero factor 1 - {a}*q^(-{j * s})")
    if n == 0:
        return TruncatedSeries.constant(1, order)
    b = MonomialParam(1 / a.unit, s - a.exponent)  # q^s/a
    pre = MonomialParam((-1 / a.unit) ** n, n * (s - a.exponent) + s * n * (n - 1) / 2)
    # division by 1 - c q^e with e < 0 lifts the order by -e
    lift = sum(-(b.exponent + j * s) for j in range(n) if b.exponent + j * s < 0)
    res = TruncatedSeries.constant(1, _start(order, pre.exponent + lift))
    for j in range(n):
        res = res.div_binomial(b.unit, b.exponent + j * s)
    return (res.shift(pre.exponent).scale(pre.unit)).truncate(order)


def poch(a, step, n: int, order=INF) -> TruncatedSeries:
    """Pochhammer symbol for any integer index."""
    if n >= 0:
        return poch_finite(a, step, n, order)
    return poch_neg(a, step, -n, order)


def poch_inv(a, step, n: int, order) -> TruncatedSeries:
    """``1/(a; q^step)_n`` for any integer ``n``.

    A negative index is evaluated as the finite product
    ``(a q^{-|n| step}; q^step)_{|n|}``, so no pole appears where the
    reciprocal is perfectly finite.
    """
    a, s = mono(a), _step(step)
    if n < 0:
        return poch_finite(a.qshift(n * s), s, -n, order)
    for j in range(n):
        if a.unit == 1 and a.exponent + j * s == 0:
            raise PolePochhammer(f"1/({a}; {_qs(s)})_{n} has the zero factor 1 - {a}*q^{j * s}")
    lift = sum(-(a.exponent + j * s) for j in range(n) if a.exponent + j * s < 0)
    res = TruncatedSeries.constant(1, _start(order, lift))
    for j in range(n):
        res = res.div_binomial(a.unit, a.exponent + j * s)
    return res.truncate(order)


@lru_cache(maxsize=4096)
def _poch_inf_cached(unit: GaussianRational, e: Fraction, s: Fraction, order: Fraction):
    # finite Laurent prefix: factors with nonpositive exponent
    prefix = []
    j = 0
    while e + j * s <= 0:
        ej = e + j * s
        if ej == 0 and unit == 1:
            raise FormalDivergence(
                f"({MonomialParam(unit, e)}; {_qs(s)})_inf contains the factor 1 - 1"
            )
        prefix.append(ej)
        j += 1
    deficit = sum(x for x in prefix if x < 0)
    res = TruncatedSeries.constant(1, order - deficit)
    for ej in prefix:
        res = res.mul_binomial(unit, ej)
    while e + j * s < order - deficit:
        res = res.mul_binomial(unit, e + j * s)
        j += 1
    return res.truncate(order)


def poch_inf(a, step, order) -> TruncatedSeries:
    """``(a; q^step)_inf`` truncated at ``order``.

    Factors with exponent below zero form a finite Laurent prefix; a factor
    that is exactly ``1 - 1`` raises FormalDivergence.
    """
    a, s = mono(a), _step(step)
    if order is None or order == INF:
        raise ValueError("infinite products need a finite truncation order")
    return _poch_inf_cached(a.unit, a.exponent, s, as_fraction(order))


def poch_inf_inv(a, step, order) -> TruncatedSeries:
    """``1/(a; q^step)_inf`` truncated at ``order``."""
    a, s = mono(a), _step(step)
    return _poch_inf_inv_cached(a.unit, a.exponent, s, as_fraction(order))


@lru_cache(maxsize=4096)
def _poch_inf_inv_cached(unit, e, s, order):
    prefix = []
    j = 0
    while e + j * s <= 0:
        ej = e + j * s
        if ej == 0 and unit == 1:
            raise FormalDivergence(
                f"({MonomialParam(unit, e)}; {_qs(s)})_inf contains the factor 1 - 1"
            )
        prefix.append(ej)
        j += 1
    lift = sum(-x for x in prefix if x < 0)
    res = TruncatedSeries.constant(1, order - lift)
    for ej in prefix:
        res = res.div_binomial(unit, ej)
    while e + j * s < order:
        res = res.div_binomial(unit, e + j * s)
        j += 1
    return res.truncate(order)


def jacobi_triple_product(z, order) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Both sides of ``sum (-z)^n q^{n^2} = (zq, q/z, q^2; q^2)_inf``."""
    from .bilateral import theta_sum

    z = mono(z)
    lhs = theta_sum(-z, order)
    zq = z.qshift(1)
    qz = MonomialParam(1 / z.unit, 1 - z.exponent)
    rhs = poch_inf(zq, 2, order) * poch_inf(qz, 2, order) * poch_inf(MonomialParam(1, 2), 2, order)
    return lhs.truncate(order), rhs.truncate(order)


def j_block(x, base, order) -> TruncatedSeries:
    """``j(x; q^base) = (x, q^base/x, q^base; q^base)_inf``."""
    x, m = mono(x), _step(base)
    other = MonomialParam(1 / x.unit, m - x.exponent)
    return (
        poch_inf(x, m, order) * poch_inf(other, m, order) * poch_inf(MonomialParam(1, m), m, order)
    ).truncate(order)


def J(a, m, order) -> TruncatedSeries:
    """``J_{a,m} = j(q^a; q^m)``."""
    return j_block(MonomialParam(1, a), m, order)


def Jbar(a, m, order) -> TruncatedSeries:
    """``Jbar_{a,m} = j(-q^a; q^m)``."""
    return j_block(MonomialParam(-1, a), m, order)


def Jm(m, order) -> TruncatedSeries:
    """``J_m = (q^m; q^m)_inf``."""
    return poch_inf(MonomialParam(1, m), m, order)


def _qs(s: Fraction) -> str:
    return str(MonomialParam(1, s))
