"""Builders for the named mock theta functions of orders 3, 5, 6 and 8.

Each builder sums the defining unilateral series up to the first index
whose monomial exponent reaches the truncation order.  ``mu6`` does not
converge coefficientwise and is taken as the Cesàro average of its even
and odd partial sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .qproducts import MonomialParam, poch_finite, poch_inv
from .series import TruncatedSeries, as_fraction, cesaro_sum

__all__ = ["MockThetaId", "MOCK_THETA_IDS", "build", "build_at", "mock_theta"]


def _m(unit, e):
    return MonomialParam(unit, e)


Q = _m(1, 1)
MQ = _m(-1, 1)


@dataclass(frozen=True)
class MockThetaId:
    """A named mock theta function and its defining summand.

    ``exponent(n)`` is the power of q in term n, ``sign(n)`` its sign and
    ``numer(n)`` / ``denom(n)`` list Pochhammer factors ``(a, step, length)``.
    """

    name: str
    order: int
    summability: str
    start: int
    exponent: Callable[[int], Fraction]
    sign: Callable[[int], int]
    numer: Callable[[int], list]
    denom: Callable[[int], list]
    linear: bool = False  # exponent grows linearly in n rather than quadratically

    def term(self, n: int, order) -> TruncatedSeries:
        e = self.exponent(n)
        target = as_fraction(order) - e
        res = TruncatedSeries.monomial(self.sign(n), e, as_fraction(order))
        for a, s, k in self.numer(n):
            res = res * poch_finite(a, s, k, target)
        for b, s, k in self.denom(n):
            res = res * poch_inv(b, s, k, target)
        return res.truncate(order)


def _plus(n):
    return 1


def _alt(n):
    return -1 if n % 2 else 1


def _none(n):
    return []


def _id(name, order, start, exponent, numer=_none, denom=_none, sign=_plus, summability="ordinary", linear=False):
    return MockThetaId(name, order, summability, start, exponent, sign, numer, denom, linear)


_F = Fraction

MOCK_THETA_IDS: dict[str, MockThetaId] = {
    m.name: m
    for m in [
        # third order
        _id("f3", 3, 0, lambda n: _F(n * n), denom=lambda n: [(_m(-1, 1), 1, n), (_m(-1, 1), 1, n)]),
        _id("phi3", 3, 0, lambda n: _F(n * n), denom=lambda n: [(_m(-1, 2), 2, n)]),
        _id(
            "chi3", 3, 0, lambda n: _F(n * n),
            numer=lambda n: [(_m(-1, 1), 1, n)], denom=lambda n: [(_m(-1, 3), 3, n)],
        ),
        _id("psi3", 3, 1, lambda n: _F(n * n), denom=lambda n: [(Q, 2, n)]),
        _id("nu3", 3, 0, lambda n: _F(n * n + n), denom=lambda n: [(MQ, 2, n + 1)]),
        # fifth order
        _id("f0", 5, 0, lambda n: _F(n * n), denom=lambda n: [(MQ, 1, n)]),
        _id("f1", 5, 0, lambda n: _F(n * n + n), denom=lambda n: [(MQ, 1, n)]),
        _id("F0", 5, 0, lambda n: _F(2 * n * n), denom=lambda n: [(Q, 2, n)]),
        _id("F1", 5, 0, lambda n: _F(2 * n * (n + 1)), denom=lambda n: [(Q, 2, n + 1)]),
        _id("phi0", 5, 0, lambda n: _F(n * n), numer=lambda n: [(MQ, 2, n)]),
        _id("phi1", 5, 0, lambda n: _F((n + 1) ** 2), numer=lambda n: [(MQ, 2, n)]),
        _id("psi0", 5, 0, lambda n: _F((n + 1) * (n + 2), 2), numer=lambda n: [(MQ, 1, n)]),
        _id("psi1", 5, 0, lambda n: _F(n * (n + 1), 2), numer=lambda n: [(MQ, 1, n)]),
        _id(
            "chi0", 5, 0, lambda n: _F(n),
            numer=lambda n: [(Q, 1, n)], denom=lambda n: [(Q, 1, 2 * n)], linear=True,
        ),
        _id(
            "chi1", 5, 0, lambda n: _F(n),
            numer=lambda n: [(Q, 1, n)], denom=lambda n: [(Q, 1, 2 * n + 1)], linear=True,
        ),
        # sixth order
        _id(
            "phi6", 6, 0, lambda n: _F(n * n), sign=_alt,
            numer=lambda n: [(Q, 2, n)], denom=lambda n: [(MQ, 1, 2 * n)],
        ),
        _id(
            "psi6", 6, 0, lambda n: _F((n + 1) ** 2), sign=_alt,
            numer=lambda n: [(Q, 2, n)], denom=lambda n: [(MQ, 1, 2 * n + 1)],
        ),
        _id(
            "rho6", 6, 0, lambda n: _F(n * (n + 1), 2),
            numer=lambda n: [(MQ, 1, n)], denom=lambda n: [(Q, 2, n + 1)],
        ),
        _id(
            "sigma6", 6, 0, lambda n: _F((n + 1) * (n + 2), 2),
            numer=lambda n: [(MQ, 1, n)], denom=lambda n: [(Q, 2, n + 1)],
        ),
        _id(
            "lambda6", 6, 0, lambda n: _F(n), sign=_alt,
            numer=lambda n: [(Q, 2, n)], denom=lambda n: [(MQ, 1, n)], linear=True,
        ),
        _id(
            "mu6", 6, 0, lambda n: _F(0), sign=_alt,
            numer=lambda n: [(Q, 2, n)], denom=lambda n: [(MQ, 1, n)], summability="cesaro",
        ),
        _id(
            "phi6minus", 6, 1, lambda n: _F(n),
            numer=lambda n: [(MQ, 1, 2 * n - 1)], denom=lambda n: [(Q, 2, n)], linear=True,
        ),
        _id(
            "psi6minus", 6, 1, lambda n: _F(n),
            numer=lambda n: [(MQ, 1, 2 * n - 2)], denom=lambda n: [(Q, 2, n)], linear=True,
        ),
        # eighth order
        _id(
            "S0", 8, 0, lambda n: _F(n * n),
            numer=lambda n: [(MQ, 2, n)], denom=lambda n: [(_m(-1, 2), 2, n)],
        ),
        _id(
            "S1", 8, 0, lambda n: _F(n * (n + 2)),
            numer=lambda n: [(MQ, 2, n)], denom=lambda n: [(_m(-1, 2), 2, n)],
        ),
        _id(
            "T0", 8, 0, lambda n: _F((n + 1) * (n + 2)),
            numer=lambda n: [(_m(-1, 2), 2, n)], denom=lambda n: [(MQ, 2, n + 1)],
        ),
        _id(
            "T1", 8, 0, lambda n: _F(n * (n + 1)),
            numer=lambda n: [(_m(-1, 2), 2, n)], denom=lambda n: [(MQ, 2, n + 1)],
        ),
    ]
}


def mock_theta(name: str) -> MockThetaId:
    try:
        return MOCK_THETA_IDS[name]
    except KeyError:
        raise KeyError(f"unknown mock theta function {name!r}") from None


def build(name: str, order) -> TruncatedSeries:
    """The defining series of ``name`` truncated at ``order``."""
    mt = mock_theta(name)
    order = as_fraction(order)
    if order <= 0:
        raise ValueError("truncation order must be positive")
    if mt.summability == "cesaro":
        return cesaro_sum(lambda n: mt.term(n, order), order, start=mt.start).value
    total = TruncatedSeries.zero(order)
    n = mt.start
    # every exponent function used here is nondecreasing from the start index
    while mt.exponent(n) < order:
        total = total + mt.term(n, order)
        n += 1
    return total


def build_at(name: str, u, k, order) -> TruncatedSeries:
    """``build(name)`` with ``q -> u*q^k``."""
    k = as_fraction(k)
    if k <= 0:
        raise ValueError("substitution exponent must be positive")
    base = build(name, as_fraction(order) / k)
    return base.substitute(u, k).truncate(order)
