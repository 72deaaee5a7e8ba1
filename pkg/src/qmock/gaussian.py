"""Exact Gaussian rationals ``re + im*i`` with ``re, im`` in Q."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["GaussianRational", "I", "as_gaussian"]


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse ``"3/4"``, ``"-i"``, ``"1/2+3/5i"`` and similar forms."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty Gaussian rational")
        if not s.endswith("i"):
            return cls(Fraction(s))
        body = s[:-1]
        # split at the last sign that is not the first character
        cut = max(body.rfind("+", 1), body.rfind("-", 1))
        if cut <= 0:
            re_part, im_part = "0", body
        else:
            re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return cls(Fraction(re_part), Fraction(im_part))

    # ------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def root_order(self) -> int | None:
        """Multiplicative order if this is one of 1, -1, i, -i, else None."""
        if self.im == 0:
            if self.re == 1:
                return 1
            if self.re == -1:
                return 2
        elif self.re == 0 and abs(self.im) == 1:
            return 4
        return None

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    # ------------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        n = other.norm()
        if not n:
            raise ZeroDivisionError("division by zero Gaussian rational")
        c, d = other.re / n, -other.im / n
        a, b = self.re, self.im
        return GaussianRational(a * c - b * d, a * d + b * c)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k):
        if not isinstance(k, int):
            if isinstance(k, Fraction) and k.denominator == 1:
                k = int(k)
            else:
                raise TypeError("Gaussian rationals only take integer powers")
        base = self
        if k < 0:
            base = 1 / base
            k = -k
        result = GaussianRational(1)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"GaussianRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        tail = "i" if mag == 1 else f"{mag}i"
        return f"{self.re}{sign}{tail}"


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Rational)):
        return GaussianRational(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):  # gmpy2.mpq
        return GaussianRational(Fraction(int(x.numerator), int(x.denominator)))
    if isinstance(x, complex) and x.real.is_integer() and x.imag.is_integer():
        return GaussianRational(int(x.real), int(x.imag))
    return NotImplemented


def as_gaussian(x) -> GaussianRational:
    g = _coerce(x)
    if g is NotImplemented:
        raise TypeError(f"cannot interpret {x!r} as a Gaussian rational")
    return g


I = GaussianRational(0, 1)
