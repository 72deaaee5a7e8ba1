"""Bilateral series: the general family engine plus the named evaluators.

A family is summed over all integers; its term valuations must grow in both
directions (formal validity), which is the formal-series replacement for the
usual analytic convergence conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DivergentFamily, PoleAppellLerch, PolePochhammer
from .gaussian import GaussianRational
from .qproducts import MonomialParam, mono, poch, poch_inf, poch_inf_inv, poch_inv, j_block
from .series import INF, TruncatedSeries, as_fraction

__all__ = [
    "BilateralTermFamily",
    "FormalValidity",
    "HyperFamily",
    "check_validity",
    "sum_bilateral",
    "theta_sum",
    "product_ratio",
    "two_psi_two",
    "two_psi_two_split",
    "six_psi_six",
    "six_psi_six_special",
    "g3_family",
    "g3_star",
    "g_universal3",
    "link_check",
    "g5_star",
    "g6",
    "g8",
    "appell_lerch_m",
    "g_universal2",
]

DEFAULT_HORIZON = 64


@dataclass(frozen=True)
class FormalValidity:
    ok: bool
    failingDirection: str  # "+inf", "-inf" or "none"
    witness: int | None = None


class BilateralTermFamily:
    """Summands ``term_at(r, order)`` with lower bounds ``valuation_bound(r)``."""

    def __init__(
        self,
        term_at: Callable[[int, object], TruncatedSeries],
        valuation_bound: Callable[[int], object],
        lo: int | None = None,
        hi: int | None = None,
    ):
        self.term_at = term_at
        self.valuation_bound = valuation_bound
        self.lo = lo
        self.hi = hi

    def regime_start(self, direction: int) -> int:
        """Index past which the valuation increments are monotone (0 if unknown)."""
        return 0

    def validity(self, horizon: int = DEFAULT_HORIZON) -> FormalValidity:
        return _scan_validity(self, horizon)

    def sum(self, order) -> TruncatedSeries:
        order = as_fraction(order)
        total = TruncatedSeries.zero(order)
        for r in _index_range(self, order):
            if self.valuation_bound(r) >= order:
                continue
            total = total + self.term_at(r, order).truncate(order)
        return total


def _delta(f, r, step):
    a, b = f.valuation_bound(r), f.valuation_bound(r + step)
    if a == INF or b == INF:
        return INF
    return b - a


def _scan_validity(f: BilateralTermFamily, horizon: int) -> FormalValidity:
    for direction, label, bound in ((1, "+inf", f.hi), (-1, "-inf", f.lo)):
        if bound is not None:
            continue
        start = f.regime_start(direction)
        # increments over the tail of the horizon must be positive and nondecreasing
        lo_idx = start + direction * (horizon // 2)
        hi_idx = start + direction * horizon
        prev = None
        r = lo_idx
        while r != hi_idx:
            d = _delta(f, r, direction)
            if d != INF and (d <= 0 or (prev is not None and prev != INF and d < prev)):
                return FormalValidity(False, label, r)
            if d != INF:
                prev = d
            r += direction
    return FormalValidity(True, "none", None)


def check_validity(f: BilateralTermFamily, horizon: int = DEFAULT_HORIZON) -> FormalValidity:
    return f.validity(horizon)


def _index_range(f: BilateralTermFamily, order):
    """Indices whose valuation bound may lie below ``order``."""
    v = f.validity()
    if not v.ok:
        raise DivergentFamily(
            f"term valuations do not grow towards {v.failingDirection} (witness index {v.witness})"
        )
    out = []
    for direction in (1, -1):
        if direction == 1:
            if f.hi is not None and f.hi < 0:
                continue
            r = max(0, f.lo) if f.lo is not None else 0
            stop = f.hi
        else:
            if f.lo is not None and f.lo >= 0:
                continue
            r = min(-1, f.hi) if f.hi is not None else -1
            stop = f.lo
        start = f.regime_start(direction)
        while stop is None or (stop - r) * direction >= 0:
            vb = f.valuation_bound(r)
            if vb < order:
                out.append(r)
            elif (r - start) * direction >= 0:
                d = _delta(f, r, direction)
                if d == INF or d > 0:
                    # past the regime start increments never decrease
                    break
            r += direction
    return sorted(out)


def sum_bilateral(f: BilateralTermFamily, order) -> TruncatedSeries:
    """Sum of all terms of ``f`` below ``order``."""
    return f.sum(order)


# ----------------------------------------------------------------------
# Pochhammer-ratio families


def _factor_val(unit: GaussianRational, e: Fraction):
    """Valuation of ``1 - unit*q^e``, or None when the factor is zero."""
    if e == 0 and unit == 1:
        return None
    return e if e < 0 else Fraction(0)


class HyperFamily(BilateralTermFamily):
    """Terms ``prod (a_i; q^s)_n / prod (b_i; q^s)_n * z^n * q^(quad*n^2) * W_n``.

    ``W_n = (1 - w q^(2 n s)) / (1 - w)`` when ``wp=w`` is given (the
    very-well-poised factor), else 1.  Summation runs over ``lo <= n <= hi``
    (``None`` meaning unbounded).
    """

    def __init__(
        self,
        numer: Sequence = (),
        denom: Sequence = (),
        z=1,
        step=1,
        quad=0,
        wp=None,
        lo: int | None = None,
        hi: int | None = None,
    ):
        self.numer = tuple(mono(a) for a in numer)
        self.denom = tuple(mono(b) for b in denom)
        self.z = mono(z)
        self.s = as_fraction(step)
        self.quad = as_fraction(quad)
        self.wp = mono(wp) if wp is not None else None
        if self.wp is not None and self.wp.is_unit_one():
            raise PolePochhammer("well-poised factor 1/(1 - w) with w = 1")
        self.lo = lo
        self.hi = hi
        self._vals: dict[int, object] = {0: Fraction(0)}
        self.term_at = self._term_direct
        self.valuation_bound = self._valuation

    # exact valuations ---------------------------------------------------
    def _step_val(self, n: int, direction: int):
        """Valuation change from index n to n+direction of the running product.

        Returns (delta, zero_flag, pole_flag).
        """
        s = self.s
        if direction == 1:
            m = n
            dv = self.z.exponent + self.quad * (2 * n + 1)
            zero = pole = False
            for a in self.numer:
                fv = _factor_val(a.unit, a.exponent + m * s)
                if fv is None:
                    zero = True
                else:
                    dv += fv
            for b in self.denom:
                fv = _factor_val(b.unit, b.exponent + m * s)
                if fv is None:
                    pole = True
                else:
                    dv -= fv
            return dv, zero, pole
        m = n - 1
        dv = -self.z.exponent - self.quad * (2 * n - 1)
        zero = pole = False
        for b in self.denom:
            fv = _factor_val(b.unit, b.exponent + m * s)
            if fv is None:
                zero = True
            else:
                dv += fv
        for a in self.numer:
            fv = _factor_val(a.unit, a.exponent + m * s)
            if fv is None:
                pole = True
            else:
                dv -= fv
        return dv, zero, pole

    def _running_val(self, n: int):
        vals = self._vals
        if n in vals:
            return vals[n]
        direction = 1 if n > 0 else -1
        k = 0
        while k + direction in vals and (k + direction) * direction <= n * direction:
            k += direction
        v = vals[k]
        while k != n:
            if v == INF:
                vals[k + direction] = INF
            else:
                dv, zero, pole = self._step_val(k, direction)
                if pole:
                    raise PolePochhammer(f"term {k + direction} of the family has a zero denominator factor")
                v = INF if zero else v + dv
                vals[k + direction] = v
            k += direction
        return v

    def _wp_val(self, n: int):
        if self.wp is None:
            return Fraction(0)
        fv = _factor_val(self.wp.unit, self.wp.exponent + 2 * n * self.s)
        return INF if fv is None else fv

    def _valuation(self, n: int):
        if (self.lo is not None and n < self.lo) or (self.hi is not None and n > self.hi):
            return INF
        v = self._running_val(n)
        if v == INF:
            return INF
        return v + self._wp_val(n)

    def regime_start(self, direction: int) -> int:
        """First index from which every factor exponent keeps a fixed sign."""
        s = self.s
        es = [p.exponent for p in self.numer + self.denom]
        if self.wp is not None:
            es.append(self.wp.exponent / 2)
        if direction == 1:
            n = 0
            for e in es:
                # need e + m*s > 0 for all m >= n - 1
                n = max(n, math.floor(-e / s) + 2)
            return n
        n = 0
        for e in es:
            # need e + m*s < 0 for all m <= n
            n = min(n, math.ceil(-e / s) - 2)
        return n

    def validity(self, horizon: int = DEFAULT_HORIZON) -> FormalValidity:
        for direction, label, bound in ((1, "+inf", self.hi), (-1, "-inf", self.lo)):
            if bound is not None:
                continue
            start = self.regime_start(direction)
            try:
                d0 = _delta(self, start, direction)
                d1 = _delta(self, start + direction, direction)
            except PolePochhammer:
                return FormalValidity(False, label, start)
            if d0 == INF or d1 == INF:
                continue  # the family terminates in this direction
            slope = d1 - d0
            if slope < 0 or (slope == 0 and d0 <= 0):
                return FormalValidity(False, label, start)
        return FormalValidity(True, "none", None)

    # terms ---------------------------------------------------------------
    def _term_direct(self, n: int, order) -> TruncatedSeries:
        """Term ``n`` built from scratch (used for cross-checks)."""
        order = as_fraction(order)
        if self._valuation(n) == INF:
            return TruncatedSeries.zero(order)
        s = self.s
        mon = TruncatedSeries.monomial(self.z.unit ** n, self.z.exponent * n + self.quad * n * n)
        vals = [_exact_poch_val(a, s, n) for a in self.numer] + [-_exact_poch_val(b, s, n) for b in self.denom]
        target = order + abs(self._wp_val(n)) + (abs(self.wp.exponent) if self.wp is not None else 0)
        total = sum(vals, Fraction(0)) + mon.valuation
        res = mon
        for a, v in zip(self.numer, vals):
            res = res * poch(a, s, n, target - total + v)
        for b, v in zip(self.denom, vals[len(self.numer):]):
            res = res * poch_inv(b, s, n, target - total + v)
        res = res.truncate(target)
        return self._emit(res, n, order)

    def sum(self, order) -> TruncatedSeries:
        order = as_fraction(order)
        idx = _index_range(self, order)
        if not idx:
            return TruncatedSeries.zero(order)
        vmin = min(self._valuation(n) for n in idx)
        # relative precision order - valuation is preserved by every update
        rho = order - min(Fraction(0), vmin)
        wanted = set(idx)
        total = TruncatedSeries.zero(order)
        for direction, last in ((1, max(idx)), (-1, min(idx))):
            if (last - (0 if direction == 1 else -1)) * direction < 0:
                continue
            run = TruncatedSeries.constant(1, rho)
            n = 0
            if direction == -1:
                run, zero = self._advance(run, 0, -1)
                n = -1
            else:
                zero = False
            while True:
                if zero:
                    break
                if n in wanted:
                    total = total + self._emit(run, n, order)
                if n == last:
                    break
                run, zero = self._advance(run, n, direction)
                n += direction
        return total

    def _advance(self, run: TruncatedSeries, n: int, direction: int):
        s = self.s
        if direction == 1:
            mon_e = self.z.exponent + self.quad * (2 * n + 1)
            run = run.shift(mon_e).scale(self.z.unit)
            for a in self.numer:
                e = a.exponent + n * s
                if e == 0 and a.unit == 1:
                    return run, True
                run = run.mul_binomial(a.unit, e)
            for b in self.denom:
                e = b.exponent + n * s
                if e == 0 and b.unit == 1:
                    raise PolePochhammer(f"term {n + 1} of the family has a zero denominator factor")
                run = run.div_binomial(b.unit, e)
            return run, False
        m = n - 1
        mon_e = -self.z.exponent - self.quad * (2 * n - 1)
        run = run.shift(mon_e).scale(1 / self.z.unit)
        for b in self.denom:
            e = b.exponent + m * s
            if e == 0 and b.unit == 1:
                return run, True
            run = run.mul_binomial(b.unit, e)
        for a in self.numer:
            e = a.exponent + m * s
            if e == 0 and a.unit == 1:
                raise PolePochhammer(f"term {m} of the family has a zero numerator Pochhammer pole")
            run = run.div_binomial(a.unit, e)
        return run, False

    def _emit(self, run: TruncatedSeries, n: int, order) -> TruncatedSeries:
        if self.wp is None:
            return run.truncate(order)
        e = self.wp.exponent + 2 * n * self.s
        if e == 0 and self.wp.unit == 1:
            return TruncatedSeries.zero(order)
        t = run.mul_binomial(self.wp.unit, e)
        if self.wp.exponent == 0:
            t = t.scale(1 / (1 - self.wp.unit))
        else:
            t = t.div_binomial(self.wp.unit, self.wp.exponent)
        return t.truncate(order)


def _exact_poch_val(a: MonomialParam, s: Fraction, n: int):
    if n >= 0:
        return sum((min(Fraction(0), a.exponent + j * s) for j in range(n)), Fraction(0))
    return -sum((min(Fraction(0), a.exponent - j * s) for j in range(1, -n + 1)), Fraction(0))


# ----------------------------------------------------------------------
# products


def _inf_val(a: MonomialParam, s: Fraction):
    v = Fraction(0)
    j = 0
    while a.exponent + j * s < 0:
        v += a.exponent + j * s
        j += 1
    return v


def theta_product(factors: Sequence, order, scalar=1, shift=0) -> TruncatedSeries:
    """``scalar * q^shift * prod (a; q^step)_inf^power`` over ``(a, step, power)``."""
    order = as_fraction(order)
    shift = as_fraction(shift)
    items = []
    for a, step, power in factors:
        a, st = mono(a), as_fraction(step)
        v = _inf_val(a, st)
        items.extend([(a, st, 1 if power > 0 else -1, v if power > 0 else -v)] * abs(int(power)))
    total = sum((it[3] for it in items), Fraction(0)) + shift
    res = TruncatedSeries.monomial(scalar, shift)
    for a, st, sign, v in items:
        need = order - total + v
        res = res * (poch_inf(a, st, need) if sign > 0 else poch_inf_inv(a, st, need))
    return res.truncate(order)


def product_ratio(numer: Sequence, denom: Sequence, order, step=1, scalar=1, shift=0) -> TruncatedSeries:
    """``scalar * q^shift * prod (numer; q^step)_inf / prod (denom; q^step)_inf``."""
    factors = [(a, step, 1) for a in numer] + [(b, step, -1) for b in denom]
    return theta_product(factors, order, scalar, shift)


# ----------------------------------------------------------------------
# named evaluators


def theta_sum(x, order, quad=1) -> TruncatedSeries:
    """``sum_n x^n q^(quad*n^2)``."""
    return HyperFamily(z=x, quad=quad).sum(order)


def two_psi_two(a, b, c, d, z, order) -> TruncatedSeries:
    """``sum_n (a, c; q)_n / (b, d; q)_n z^n``."""
    return HyperFamily([a, c], [b, d], z=z).sum(order)


def two_psi_two_split(a, b, c, d, z, order) -> TruncatedSeries:
    """Unilateral part plus the reflected part with ``(bd/acz)^n``."""
    a, b, c, d, z = map(mono, (a, b, c, d, z))
    q = MonomialParam(1, 1)
    pos = HyperFamily([a, c], [b, d], z=z, lo=0).sum(order)
    w = (b * d) / (a * c * z)
    neg = HyperFamily([q / b, q / d], [q / a, q / c], z=w, lo=1).sum(order)
    return pos + neg


def six_psi_six(a, b, c, d, e, order) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Both sides of the very-well-poised bilateral summation.

    The ratio ``(q sqrt(a), -q sqrt(a); q)_n / (sqrt(a), -sqrt(a); q)_n``
    equals ``(1 - a q^(2n)) / (1 - a)``, which is how it is evaluated.
    """
    a, b, c, d, e = map(mono, (a, b, c, d, e))
    q = MonomialParam(1, 1)
    aq = a * q
    z = q * a * a / (b * c * d * e)
    lhs = HyperFamily([b, c, d, e], [aq / b, aq / c, aq / d, aq / e], z=z, wp=a).sum(order)
    rhs = product_ratio(
        [aq, aq / (b * c), aq / (b * d), aq / (b * e), aq / (c * d), aq / (c * e), aq / (d * e), q, q / a],
        [aq / b, aq / c, aq / d, aq / e, q / b, q / c, q / d, q / e, z],
        order,
    )
    return lhs, rhs


def six_psi_six_special(a, b, c, order) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Both sides of the two-parameter special case with ``(-qa/bc)^n``."""
    a, b, c = map(mono, (a, b, c))
    q = MonomialParam(1, 1)
    aq = a * q
    lhs = HyperFamily([b, c], [aq / b, aq / c], z=-(aq / (b * c))).sum(order)
    rhs = theta_product(
        [(aq / (b * c), 1, 1)]
        + [(p, 2, 1) for p in (aq * q / (b * b), aq * q / (c * c), q * q, aq, q / a)]
        + [(p, 1, -1) for p in (aq / b, aq / c, q / b, q / c, -(aq / (b * c)))],
        order,
    )
    return lhs, rhs


def g3_family(s, t, order) -> TruncatedSeries:
    """``G_3(s,t) = 1 + sum_{n>=1} s^n t^n q^(n^2) / (sq, tq; q)_n``."""
    s, t = mono(s), mono(t)
    return HyperFamily([], [s.qshift(1), t.qshift(1)], z=s * t, quad=1, lo=0).sum(order)


def g3_star(s, t, order) -> TruncatedSeries:
    """Bilateral ``sum_n s^n t^n q^(n^2) / (sq, tq; q)_n``."""
    s, t = mono(s), mono(t)
    return HyperFamily([], [s.qshift(1), t.qshift(1)], z=s * t, quad=1).sum(order)


def g_universal3(x, order, base=1) -> TruncatedSeries:
    """``g_3(x, Q) = sum_n Q^(n^2+n) / (x, Q/x; Q)_{n+1}`` with ``Q = q^base``."""
    x = mono(x)
    b = as_fraction(base)
    Q = MonomialParam(1, b)
    y = Q / x
    for p in (x, y):
        if p.is_unit_one():
            raise PolePochhammer(f"g3 has the zero denominator factor 1 - {p}")
    body = HyperFamily([], [x * Q, y * Q], z=Q, quad=b, step=b, lo=0)
    # dividing by (1 - x)(1 - Q/x) can lower the valuation; ask for more
    lift = -min(Fraction(0), x.exponent) - min(Fraction(0), y.exponent)
    res = body.sum(as_fraction(order) + lift)
    res = res.div_binomial(x.unit, x.exponent).div_binomial(y.unit, y.exponent)
    return res.truncate(order)


def link_check(x, order) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``G_3(x, q/x)`` against ``(1 - x)(1 - q/x) g_3(x, q)``."""
    x = mono(x)
    y = MonomialParam(1, 1) / x
    lhs = g3_family(x, y, order)
    lift = -min(Fraction(0), x.exponent) - min(Fraction(0), y.exponent)
    g = g_universal3(x, as_fraction(order) + lift)
    rhs = g.mul_binomial(x.unit, x.exponent).mul_binomial(y.unit, y.exponent)
    return lhs, rhs.truncate(order)


def g5_star(w, y, order) -> TruncatedSeries:
    """``G_5*(w, y) = sum_n w^n q^(n^2) / (y; q)_n``."""
    return HyperFamily([], [y], z=w, quad=1).sum(order)


def g6(a, b, d, z, order) -> TruncatedSeries:
    """``G_6 = sum_r (a; q^2)_r z^r q^(r^2) / (b, d; q^2)_r``."""
    return HyperFamily([a], [b, d], z=z, quad=1, step=2).sum(order)


def g8(a, b, z, order) -> TruncatedSeries:
    """``G_8 = sum_r (a; q^2)_r z^r q^(r^2) / (b; q^2)_r`` (the d -> 0 case of G_6)."""
    return HyperFamily([a], [b], z=z, quad=1, step=2).sum(order)


def appell_lerch_m(x, z, order, base=1) -> TruncatedSeries:
    """``m(x, Q, z) = j(z; Q)^(-1) sum_r (-1)^r Q^(r(r-1)/2) z^r / (1 - Q^(r-1) x z)``."""
    x, z = mono(x), mono(z)
    b = as_fraction(base)
    xz = x * z
    if xz.unit == 1 and (xz.exponent / b).denominator == 1:
        raise PoleAppellLerch(f"x*z = {xz} makes 1 - Q^(r-1) x z vanish for some r")
    order = as_fraction(order)

    def mono_exp(r):
        return b * r * (r - 1) / 2 + r * z.exponent

    def val(r):
        e = xz.exponent + b * (r - 1)
        return mono_exp(r) - (e if e < 0 else 0)

    def term(r, o):
        e = xz.exponent + b * (r - 1)
        sign = 1 if r % 2 == 0 else -1
        mon = TruncatedSeries.monomial(sign * z.unit ** r, mono_exp(r))
        lift = -e if e < 0 else 0
        one = TruncatedSeries.constant(1, as_fraction(o) - mono_exp(r) - lift)
        return (mon * one.div_binomial(xz.unit, e)).truncate(o)

    fam = BilateralTermFamily(term, val)
    fam.regime_start = lambda direction: _al_regime(xz, b, direction)
    Q = MonomialParam(1, b)
    vj = _inf_val(z, b) + _inf_val(Q / z, b)
    total = fam.sum(order + vj)
    vs = total.valuation if not total.is_zero() else order + vj
    jz = j_block(z, b, order + 2 * vj - vs)
    return (total * jz.invert()).truncate(order)


def _al_regime(xz: MonomialParam, b: Fraction, direction: int) -> int:
    r0 = 1 - xz.exponent / b
    return (math.floor(r0) + 2) if direction == 1 else (math.ceil(r0) - 2)


def g_universal2(x, order, base=1) -> TruncatedSeries:
    """``g_2(x, Q) = sum_n Q^(n(n+1)/2) (-Q; Q)_n / ((x; Q)_{n+1} (Q/x; Q)_{n+1})``."""
    x = mono(x)
    b = as_fraction(base)
    Q = MonomialParam(1, b)
    y = Q / x
    for p in (x, y):
        if p.is_unit_one():
            raise PolePochhammer(f"g2 has the zero denominator factor 1 - {p}")
    body = HyperFamily([-Q], [x * Q, y * Q], z=MonomialParam(1, b / 2), quad=b / 2, step=b, lo=0)
    lift = -min(Fraction(0), x.exponent) - min(Fraction(0), y.exponent)
    res = body.sum(as_fraction(order) + lift)
    res = res.div_binomial(x.unit, x.exponent).div_binomial(y.unit, y.exponent)
    return res.normalized().truncate(order)
