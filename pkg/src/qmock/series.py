"""Exact truncated Laurent series in q over the Gaussian rationals.

A series stores its coefficients densely on the lattice (1/D)Z, starting at
its valuation.  ``order`` is the truncation bound: every coefficient whose
exponent is below it is exact, nothing above it is known.  ``order`` may be
``math.inf`` for series that are known completely (polynomials, monomials).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from gmpy2 import mpq

from .errors import BeyondTruncation, NonIntegralUnitPower, NoStabilization, ZeroSeries
from .gaussian import GaussianRational, as_gaussian

__all__ = [
    "INF",
    "TruncatedSeries",
    "CesaroValue",
    "cesaro_sum",
    "as_fraction",
]

INF = math.inf
_ZERO = mpq(0)
_ONE = mpq(1)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    return Fraction(x)


def _order_value(order):
    if order is None or order == INF:
        return INF
    return as_fraction(order)


def _to_mpq(x: Fraction) -> mpq:
    return mpq(x.numerator, x.denominator)


def _split(c) -> tuple[mpq, mpq]:
    g = as_gaussian(c)
    return _to_mpq(g.re), _to_mpq(g.im)


def _gauss(re, im) -> GaussianRational:
    return GaussianRational(as_fraction(re), as_fraction(im))


def _slot_limit(order, d: int):
    """Exclusive bound on scaled exponents below ``order``."""
    if order == INF:
        return None
    return math.ceil(order * d)


def _spread(vals: list, factor: int) -> list:
    if factor == 1 or not vals:
        return vals
    out = [_ZERO] * ((len(vals) - 1) * factor + 1)
    out[::factor] = vals
    return out


class TruncatedSeries:
    """Immutable truncated Laurent series.

    Build values with the class constructors (``constant``, ``monomial``,
    ``from_terms``, ``zero``) rather than ``__init__``.
    """

    __slots__ = ("_d", "_v", "_re", "_im", "_order")

    def __init__(self, d, v, re, im, order):
        # raw constructor; callers must pass normalized data
        self._d = d
        self._v = v
        self._re = re
        self._im = im
        self._order = order

    def __setattr__(self, name, value):
        if hasattr(self, "_order"):
            raise AttributeError("TruncatedSeries is immutable")
        object.__setattr__(self, name, value)

    def __reduce__(self):
        return (TruncatedSeries, (self._d, self._v, self._re, self._im, self._order))

    # ------------------------------------------------------------------
    # construction
    @classmethod
    def _make(cls, d: int, v: int, re: list, im, order) -> "TruncatedSeries":
        order = _order_value(order)
        lim = _slot_limit(order, d)
        if lim is not None:
            keep = lim - v
            if keep <= 0:
                re, im = [], None
            elif keep < len(re):
                re = re[:keep]
                if im is not None:
                    im = im[:keep]
        if im is not None and len(im) < len(re):
            im = im + [_ZERO] * (len(re) - len(im))
        n = len(re)
        lo = 0
        if im is None:
            while lo < n and not re[lo]:
                lo += 1
            hi = n
            while hi > lo and not re[hi - 1]:
                hi -= 1
        else:
            while lo < n and not re[lo] and not im[lo]:
                lo += 1
            hi = n
            while hi > lo and not re[hi - 1] and not im[hi - 1]:
                hi -= 1
        if lo == hi:
            return cls(d, 0, [], None, order)
        if lo or hi < n:
            re = re[lo:hi]
            if im is not None:
                im = im[lo:hi]
        if im is not None and not any(im):
            im = None
        return cls(d, v + lo, re, im, order)

    @classmethod
    def zero(cls, order=INF) -> "TruncatedSeries":
        return cls(1, 0, [], None, _order_value(order))

    @classmethod
    def constant(cls, c, order=INF) -> "TruncatedSeries":
        return cls.monomial(c, 0, order)

    @classmethod
    def monomial(cls, c, e, order=INF) -> "TruncatedSeries":
        """The series ``c*q^e``."""
        e = as_fraction(e)
        cr, ci = _split(c)
        d = e.denominator
        return cls._make(d, e.numerator, [cr], [ci] if ci else None, order)

    @classmethod
    def q(cls) -> "TruncatedSeries":
        return cls.monomial(1, 1)

    @classmethod
    def from_terms(cls, terms, order=INF) -> "TruncatedSeries":
        """Build from a mapping ``{exponent: coefficient}``."""
        items = [(as_fraction(e), as_gaussian(c)) for e, c in dict(terms).items()]
        items = [(e, c) for e, c in items if c]
        if not items:
            return cls.zero(order)
        d = 1
        for e, _ in items:
            d = math.lcm(d, e.denominator)
        idx = [(int(e * d), c) for e, c in items]
        v = min(k for k, _ in idx)
        hi = max(k for k, _ in idx)
        re = [_ZERO] * (hi - v + 1)
        im = [_ZERO] * (hi - v + 1)
        for k, c in idx:
            re[k - v] = _to_mpq(c.re)
            im[k - v] = _to_mpq(c.im)
        return cls._make(d, v, re, im, order)

    @classmethod
    def from_coefficients(cls, coeffs, order=INF, start=0) -> "TruncatedSeries":
        """Integer-exponent series from a list starting at ``q^start``."""
        re = [mpq(0)] * len(coeffs)
        im = [mpq(0)] * len(coeffs)
        for k, c in enumerate(coeffs):
            re[k], im[k] = _split(c)
        return cls._make(1, int(start), re, im, order)

    # ------------------------------------------------------------------
    # inspection
    @property
    def order(self):
        return self._order

    @property
    def denom_hint(self) -> int:
        return self._d

    def is_exact(self) -> bool:
        return self._order == INF

    def is_zero(self) -> bool:
        """True when no coefficient below the order is nonzero."""
        return not self._re

    def is_real(self) -> bool:
        return self._im is None

    @property
    def valuation(self):
        """Lowest exponent with a nonzero coefficient.

        For a series that vanishes below its order this is the order itself,
        which keeps the pessimistic product rule sound.
        """
        if not self._re:
            return self._order
        return Fraction(self._v, self._d)

    def _val_scaled(self):
        return self._v if self._re else None

    def leading_coefficient(self) -> GaussianRational:
        if not self._re:
            raise ZeroSeries("series has no nonzero coefficient below its order")
        return _gauss(self._re[0], self._im[0] if self._im is not None else 0)

    def is_monomial(self) -> bool:
        return self.is_exact() and len(self._re) == 1

    def degree(self):
        """Highest stored exponent (None for the zero series)."""
        if not self._re:
            return None
        return Fraction(self._v + len(self._re) - 1, self._d)

    def terms(self) -> dict:
        """Nonzero coefficients as ``{Fraction exponent: GaussianRational}``."""
        out = {}
        im = self._im
        for k, r in enumerate(self._re):
            i = im[k] if im is not None else _ZERO
            if r or i:
                out[Fraction(self._v + k, self._d)] = _gauss(r, i)
        return out

    def items(self):
        return sorted(self.terms().items())

    def coefficient(self, e) -> GaussianRational:
        e = as_fraction(e)
        if e >= self._order:
            raise BeyondTruncation(f"exponent {e} is not below the truncation order {self._order}")
        k = e * self._d
        if k.denominator != 1:
            return GaussianRational(0)
        k = int(k) - self._v
        if 0 <= k < len(self._re):
            return _gauss(self._re[k], self._im[k] if self._im is not None else 0)
        return GaussianRational(0)

    def __getitem__(self, e):
        return self.coefficient(e)

    def integer_coefficients(self) -> bool:
        if self._im is not None and any(x.denominator != 1 for x in self._im):
            return False
        return all(x.denominator == 1 for x in self._re)

    # ------------------------------------------------------------------
    # internal helpers
    def _rescaled(self, d: int) -> tuple[int, list, list | None]:
        f = d // self._d
        re = _spread(self._re, f)
        im = _spread(self._im, f) if self._im is not None else None
        return self._v * f, re, im

    def with_denom(self, d: int) -> "TruncatedSeries":
        """Same series on a finer lattice (``d`` must be a multiple)."""
        if d % self._d:
            raise ValueError("denominator hint must be a multiple of the current one")
        v, re, im = self._rescaled(d)
        return TruncatedSeries(d, v, re, im, self._order)

    def normalized(self) -> "TruncatedSeries":
        """Reduce the denominator hint to the smallest lattice that fits."""
        if self._d == 1:
            return self
        g = self._d
        for k, r in enumerate(self._re):
            if r or (self._im is not None and self._im[k]):
                g = math.gcd(g, self._v + k)
                if g == 1:
                    return self
        if not self._re:
            return TruncatedSeries(1, 0, [], None, self._order)
        g = math.gcd(g, self._v)
        if g == 1:
            return self
        return TruncatedSeries(
            self._d // g,
            self._v // g,
            self._re[::g],
            self._im[::g] if self._im is not None else None,
            self._order,
        )

    # ------------------------------------------------------------------
    # ring operations
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _add(self, other, 1)

    def __radd__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _add(other, self, 1)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _add(self, other, -1)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _add(other, self, -1)

    def __neg__(self):
        return TruncatedSeries(
            self._d,
            self._v,
            [-x for x in self._re],
            [-x for x in self._im] if self._im is not None else None,
            self._order,
        )

    def __pos__(self):
        return self

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self, other)

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _mul(other, self)

    def __truediv__(self, other):
        if _is_scalar(other):
            g = as_gaussian(other)
            if not g:
                raise ZeroDivisionError("division of a series by zero")
            return self.scale(1 / g)
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _div(self, other)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _div(other, self)

    def __pow__(self, n):
        if not isinstance(n, int):
            n = as_fraction(n)
            if n.denominator != 1:
                raise ValueError("series powers must be integers")
            n = int(n)
        if n < 0:
            return self.invert() ** (-n)
        if self.is_monomial():
            c = self.leading_coefficient() ** n
            return TruncatedSeries.monomial(c, self.valuation * n)
        result = TruncatedSeries.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c) -> "TruncatedSeries":
        cr, ci = _split(c)
        if not cr and not ci:
            return TruncatedSeries.zero(self._order)
        re, im = self._re, self._im
        if not ci:
            if cr == 1:
                return self
            nre = [x * cr for x in re]
            nim = [x * cr for x in im] if im is not None else None
        elif im is None:
            nre = [x * cr for x in re]
            nim = [x * ci for x in re]
        else:
            nre = [a * cr - b * ci for a, b in zip(re, im)]
            nim = [a * ci + b * cr for a, b in zip(re, im)]
        return TruncatedSeries._make(self._d, self._v, nre, nim, self._order)

    def shift(self, e) -> "TruncatedSeries":
        """Multiply by ``q^e`` exactly."""
        e = as_fraction(e)
        d = math.lcm(self._d, e.denominator)
        v, re, im = self._rescaled(d)
        return TruncatedSeries(d, v + int(e * d), re, im, self._order + e)

    def truncate(self, order) -> "TruncatedSeries":
        order = _order_value(order)
        if order >= self._order:
            return self
        return TruncatedSeries._make(self._d, self._v, self._re, self._im, order)

    def invert(self, order=None) -> "TruncatedSeries":
        """Multiplicative inverse.

        The result is known below ``self.order - 2*valuation``.  Exact inputs
        with more than one term need an explicit ``order``.
        """
        if not self._re:
            raise ZeroSeries("cannot invert a series that vanishes below its order")
        v = self._v
        if self.is_monomial() and order is None:
            c = self.leading_coefficient()
            return TruncatedSeries.monomial(1 / c, Fraction(-v, self._d))
        target = self._order - 2 * Fraction(v, self._d) if self._order != INF else INF
        if order is not None:
            target = min(target, _order_value(order))
        if target == INF:
            raise ValueError("inverse of an exact non-monomial series needs an order")
        lim = _slot_limit(target, self._d) + v  # relative slots needed
        n = max(lim, 0)
        re = self._re
        im = self._im
        if im is None:
            inv0 = 1 / re[0]
            out = [_ZERO] * n
            if n:
                out[0] = inv0
            la = len(re)
            for k in range(1, n):
                s = _ZERO
                for j in range(1, min(k, la - 1) + 1):
                    aj = re[j]
                    if aj:
                        s += aj * out[k - j]
                out[k] = -s * inv0
            return TruncatedSeries._make(self._d, -v, out, None, target)
        nr0 = re[0] * re[0] + im[0] * im[0]
        ir0, ii0 = re[0] / nr0, -im[0] / nr0
        ore = [_ZERO] * n
        oim = [_ZERO] * n
        if n:
            ore[0], oim[0] = ir0, ii0
        la = len(re)
        for k in range(1, n):
            sr = _ZERO
            si = _ZERO
            for j in range(1, min(k, la - 1) + 1):
                ar, ai = re[j], im[j]
                if ar or ai:
                    br, bi = ore[k - j], oim[k - j]
                    sr += ar * br - ai * bi
                    si += ar * bi + ai * br
            ore[k] = -(sr * ir0 - si * ii0)
            oim[k] = -(sr * ii0 + si * ir0)
        return TruncatedSeries._make(self._d, -v, ore, oim, target)

    def mul_binomial(self, c, e) -> "TruncatedSeries":
        """Multiply by ``(1 - c*q^e)`` in linear time."""
        e = as_fraction(e)
        cr, ci = _split(c)
        d = math.lcm(self._d, e.denominator)
        v, re, im = self._rescaled(d)
        s = int(e * d)
        order = self._order + min(e, 0)
        if not re:
            return TruncatedSeries(d, 0, [], None, order)
        n = len(re)
        if s == 0:
            return self.scale(1 - _gauss(cr, ci))
        if s > 0:
            nv = v
            size = n + s
            lim = _slot_limit(order, d)
            if lim is not None:
                size = min(size, lim - nv)
            if size <= 0:
                return TruncatedSeries(d, 0, [], None, order)
            ore = re[:size] + [_ZERO] * max(0, size - n)
            src_off = s  # out[k] -= c*a[k-s]
            oim = None
            if im is not None or ci:
                oim = (im[:size] + [_ZERO] * max(0, size - n)) if im is not None else [_ZERO] * size
            for k in range(src_off, size):
                j = k - src_off
                if j >= n:
                    break
                ar = re[j]
                ai = im[j] if im is not None else _ZERO
                if not ar and not ai:
                    continue
                if oim is None:
                    ore[k] -= cr * ar
                else:
                    ore[k] -= cr * ar - ci * ai
                    oim[k] -= cr * ai + ci * ar
            return TruncatedSeries._make(d, nv, ore, oim, order)
        # negative exponent: the shifted copy sits below the original
        t = -s
        nv = v - t
        size = n + t
        lim = _slot_limit(order, d)
        if lim is not None:
            size = min(size, lim - nv)
        if size <= 0:
            return TruncatedSeries(d, 0, [], None, order)
        ore = [_ZERO] * size
        oim = [_ZERO] * size if (im is not None or ci) else None
        for j in range(min(n, size)):
            ar = re[j]
            ai = im[j] if im is not None else _ZERO
            if not ar and not ai:
                continue
            if oim is None:
                ore[j] -= cr * ar
            else:
                ore[j] -= cr * ar - ci * ai
                oim[j] -= cr * ai + ci * ar
            k = j + t
            if k < size:
                ore[k] += ar
                if oim is not None:
                    oim[k] += ai
        return TruncatedSeries._make(d, nv, ore, oim, order)

    def div_binomial(self, c, e) -> "TruncatedSeries":
        """Divide by ``(1 - c*q^e)`` in linear time.

        A negative exponent is rewritten as
        ``1/(1 - m) = -m^{-1}/(1 - m^{-1})`` so valuations stay finite.
        """
        e = as_fraction(e)
        g = as_gaussian(c)
        if not g:
            return self
        if e == 0:
            if g == 1:
                raise ZeroSeries("division by the zero factor (1 - 1)")
            return self.scale(1 / (1 - g))
        if e < 0:
            inv = 1 / g
            return self.shift(-e).scale(-inv).div_binomial(inv, -e)
        cr, ci = _to_mpq(g.re), _to_mpq(g.im)
        d = math.lcm(self._d, e.denominator)
        v, re, im = self._rescaled(d)
        s = int(e * d)
        order = self._order
        lim = _slot_limit(order, d)
        if not re:
            return TruncatedSeries(d, 0, [], None, order)
        if lim is None:
            raise ValueError("dividing an exact series by a binomial needs a finite order")
        size = lim - v
        if size <= 0:
            return TruncatedSeries(d, 0, [], None, order)
        n = len(re)
        ore = re[:size] + [_ZERO] * max(0, size - n)
        if im is None and not ci:
            for k in range(s, size):
                x = ore[k - s]
                if x:
                    ore[k] += cr * x
            return TruncatedSeries._make(d, v, ore, None, order)
        oim = (im[:size] + [_ZERO] * max(0, size - n)) if im is not None else [_ZERO] * size
        for k in range(s, size):
            xr, xi = ore[k - s], oim[k - s]
            if xr or xi:
                ore[k] += cr * xr - ci * xi
                oim[k] += cr * xi + ci * xr
        return TruncatedSeries._make(d, v, ore, oim, order)

    def substitute(self, u, k) -> "TruncatedSeries":
        """Apply ``q -> u*q^k``.

        ``u^e`` is only taken for integer ``e``; a fractional exponent with
        ``u != 1`` raises NonIntegralUnitPower instead of picking a branch.
        """
        u = as_gaussian(u)
        k = as_fraction(k)
        if k <= 0:
            raise ValueError("substitution exponent must be positive")
        if not u:
            raise ValueError("substitution unit must be nonzero")
        d0 = self._d
        nd = d0 * k.denominator
        f = k.numerator
        re, im = self._re, self._im
        trivial = u == 1
        if not trivial and d0 != 1:
            for j in range(len(re)):
                if (re[j] or (im is not None and im[j])) and (self._v + j) % d0:
                    raise NonIntegralUnitPower(
                        f"u^e undefined for u={u} and exponent {Fraction(self._v + j, d0)}"
                    )
        nre, nim = re, im
        if not trivial:
            order_u = u.root_order()
            powers = {}

            def upow(e):
                key = e % order_u if order_u else e
                p = powers.get(key)
                if p is None:
                    p = powers[key] = u ** key if order_u else u ** e
                return p

            nre = [_ZERO] * len(re)
            nim = [_ZERO] * len(re)
            for j in range(len(re)):
                ar = re[j]
                ai = im[j] if im is not None else _ZERO
                if not ar and not ai:
                    continue
                p = upow((self._v + j) // d0)
                pr, pi = _to_mpq(p.re), _to_mpq(p.im)
                nre[j] = ar * pr - ai * pi
                nim[j] = ar * pi + ai * pr
        nre = _spread(nre, f)
        if nim is not None:
            nim = _spread(nim, f)
        out = TruncatedSeries._make(nd, self._v * f, list(nre), list(nim) if nim is not None else None, self._order * k)
        return out.normalized()

    # ------------------------------------------------------------------
    # comparison
    def first_mismatch(self, other, order=None):
        """Lowest exponent below the common order where the two differ.

        Returns ``(exponent, self_coeff, other_coeff)`` or None.
        """
        other = _coerce(other)
        bound = min(self._order, other._order)
        if order is not None:
            bound = min(bound, _order_value(order))
        diff = (self - other).truncate(bound)
        if diff.is_zero():
            return None
        e = diff.valuation
        return e, self.coefficient(e), other.coefficient(e)

    def agrees_with(self, other, order=None) -> bool:
        return self.first_mismatch(other, order) is None

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = _coerce(other)
            if other is NotImplemented:
                return NotImplemented
        if self._order != other._order:
            return False
        a, b = self.normalized(), other.normalized()
        return (
            a._d == b._d
            and a._v == b._v
            and a._re == b._re
            and (a._im or None) == (b._im or None)
        ) or (a.is_zero() and b.is_zero())

    def __hash__(self):
        a = self.normalized()
        return hash((a._d, a._v, tuple(a._re), tuple(a._im or ()), a._order))

    # ------------------------------------------------------------------
    # numeric evaluation
    def evaluate(self, qval, ctx=None):
        """Value of the stored polynomial part at a complex ``qval`` (mpmath)."""
        import mpmath

        ctx = ctx or mpmath.mp
        if isinstance(qval, (Fraction, GaussianRational)):
            g = as_gaussian(qval)
            z = ctx.mpc(ctx.mpf(int(g.re.numerator)) / int(g.re.denominator),
                        ctx.mpf(int(g.im.numerator)) / int(g.im.denominator))
        else:
            z = ctx.mpc(qval)
        total = ctx.mpc(0)
        if self._d == 1:
            pw = z ** self._v
            im = self._im
            for k, r in enumerate(self._re):
                i = im[k] if im is not None else _ZERO
                if r or i:
                    c = ctx.mpc(ctx.mpf(int(r.numerator)) / int(r.denominator),
                                ctx.mpf(int(i.numerator)) / int(i.denominator))
                    total += c * pw
                pw *= z
            return total
        for e, c in self.terms().items():
            cc = ctx.mpc(ctx.mpf(c.re.numerator) / c.re.denominator,
                         ctx.mpf(c.im.numerator) / c.im.denominator)
            total += cc * ctx.power(z, ctx.mpf(e.numerator) / e.denominator)
        return total

    # ------------------------------------------------------------------
    def __repr__(self):
        return f"TruncatedSeries({self})"

    def __str__(self):
        parts = []
        for e, c in self.items():
            parts.append(_fmt_term(c, e))
        if not parts:
            body = "0"
        else:
            body = parts[0]
            for p in parts[1:]:
                body += " - " + p[1:] if p.startswith("-") else " + " + p
        if self._order != INF:
            o = self._order
            ostr = str(o) if o.denominator == 1 else f"({o})"
            body += f" + O(q^{ostr})"
        return body


def _fmt_term(c: GaussianRational, e: Fraction) -> str:
    if e == 0:
        return str(c)
    es = str(e) if e.denominator == 1 else f"({e})"
    qs = "q" if e == 1 else f"q^{es}"
    if c == 1:
        return qs
    if c == -1:
        return "-" + qs
    if c.im and c.re:
        return f"({c})*{qs}"
    return f"{c}*{qs}"


def _is_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational)) or type(x).__name__ == "mpq"


def _coerce(x):
    if isinstance(x, TruncatedSeries):
        return x
    if _is_scalar(x):
        return TruncatedSeries.constant(x)
    return NotImplemented


def _aligned(a: TruncatedSeries, b: TruncatedSeries):
    d = a._d if a._d == b._d else math.lcm(a._d, b._d)
    return d, a._rescaled(d), b._rescaled(d)


def _add(a: TruncatedSeries, b: TruncatedSeries, sign: int) -> TruncatedSeries:
    order = min(a._order, b._order)
    d, (va, ra, ia), (vb, rb, ib) = _aligned(a, b)
    if not rb:
        return TruncatedSeries._make(d, va, ra, ia, order)
    if not ra:
        if sign == 1:
            return TruncatedSeries._make(d, vb, rb, ib, order)
        return TruncatedSeries._make(d, vb, [-x for x in rb], [-x for x in ib] if ib is not None else None, order)
    v = min(va, vb)
    hi = max(va + len(ra), vb + len(rb))
    lim = _slot_limit(order, d)
    if lim is not None:
        hi = min(hi, lim)
    size = hi - v
    if size <= 0:
        return TruncatedSeries(d, 0, [], None, order)
    re = [_ZERO] * size
    im = [_ZERO] * size if (ia is not None or ib is not None) else None
    oa = va - v
    for k in range(min(len(ra), size - oa)):
        re[oa + k] = ra[k]
    if ia is not None:
        for k in range(min(len(ia), size - oa)):
            im[oa + k] = ia[k]
    ob = vb - v
    if sign == 1:
        for k in range(min(len(rb), size - ob)):
            re[ob + k] += rb[k]
        if ib is not None:
            for k in range(min(len(ib), size - ob)):
                im[ob + k] += ib[k]
    else:
        for k in range(min(len(rb), size - ob)):
            re[ob + k] -= rb[k]
        if ib is not None:
            for k in range(min(len(ib), size - ob)):
                im[ob + k] -= ib[k]
    return TruncatedSeries._make(d, v, re, im, order)


def _mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    order = min(a._order + b.valuation, b._order + a.valuation)
    if not a._re or not b._re:
        return TruncatedSeries.zero(order)
    d, (va, ra, ia), (vb, rb, ib) = _aligned(a, b)
    v = va + vb
    size = len(ra) + len(rb) - 1
    lim = _slot_limit(order, d)
    if lim is not None:
        size = min(size, lim - v)
    if size <= 0:
        return TruncatedSeries(d, 0, [], None, order)
    # iterate over the sparser operand
    if sum(1 for x in ra if x) > sum(1 for x in rb if x):
        ra, ia, rb, ib = rb, ib, ra, ia
    lb = len(rb)
    if ia is None and ib is None:
        re = [_ZERO] * size
        for i, x in enumerate(ra):
            if not x or i >= size:
                continue
            top = min(lb, size - i)
            for j in range(top):
                y = rb[j]
                if y:
                    re[i + j] += x * y
        return TruncatedSeries._make(d, v, re, None, order)
    re = [_ZERO] * size
    im = [_ZERO] * size
    for i in range(min(len(ra), size)):
        xr = ra[i]
        xi = ia[i] if ia is not None else _ZERO
        if not xr and not xi:
            continue
        top = min(lb, size - i)
        for j in range(top):
            yr = rb[j]
            yi = ib[j] if ib is not None else _ZERO
            if not yr and not yi:
                continue
            re[i + j] += xr * yr - xi * yi
            im[i + j] += xr * yi + xi * yr
    return TruncatedSeries._make(d, v, re, im, order)


def _div(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    if b.is_monomial():
        c = b.leading_coefficient()
        return a.scale(1 / c).shift(-b.valuation)
    if not b._re:
        raise ZeroSeries("division by a series that vanishes below its order")
    vb = b.valuation
    if b.is_exact():
        if a.is_exact():
            raise ValueError("quotient of exact series needs a truncation order; truncate first")
        va = a.valuation
        target = a.order - vb
        inv = b.invert(order=target - va if a._re else target)
        return (a * inv).truncate(target)
    return a * b.invert()


# ----------------------------------------------------------------------
# Cesàro summation


@dataclass(frozen=True)
class CesaroValue:
    value: TruncatedSeries
    stabilizedAt: int


def cesaro_sum(
    term_at: Callable[[int], TruncatedSeries],
    order,
    cap: int | None = None,
    window: int = 8,
    start: int = 0,
) -> CesaroValue:
    """Average of the stabilized even- and odd-indexed partial sums.

    Stabilization is detected when ``t_n + t_{n+1}`` vanishes below
    ``order`` for ``window`` consecutive ``n``; from there on the partial
    sums alternate between two fixed truncated values.
    """
    order = as_fraction(order)
    terms: list[TruncatedSeries] = []
    prev_sum = TruncatedSeries.zero(order)  # S_{n-1}
    run = 0
    run_start = None
    s_before = None
    s_at = None
    n = start
    before_last = prev_sum
    while True:
        t = term_at(n).truncate(order)
        if t.order < order:
            raise NoStabilization(f"term {n} is only known below {t.order}, need {order}")
        cur_sum = prev_sum + t
        if terms:
            pair = terms[-1] + t
            if pair.is_zero():
                if run == 0:
                    run_start = n - 1
                    s_before = before_last
                    s_at = prev_sum
                run += 1
                if run >= window:
                    value = (s_before + s_at).scale(Fraction(1, 2))
                    return CesaroValue(value, run_start)
            else:
                run = 0
        d = t.denom_hint
        if cap is None:
            cap = 4 * math.ceil(order * max(d, 1)) + 4 * window + 16
        if n - start > cap:
            raise NoStabilization(f"partial sums did not stabilize below q^{order} within {cap} terms")
        terms = [t]
        before_last = prev_sum
        prev_sum = cur_sum
        n += 1
