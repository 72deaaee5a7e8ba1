"""Numerical checks of finite-sum equalities observed at odd-order roots of unity.

These are experimental observations, not theorems; every result carries the
label CONJECTURE and agreement only means "consistent with".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath

from ..errors import UnknownIdentity
from .numeric import DEFAULT_BITS, PrimitiveRoot, make_context

__all__ = ["CONJECTURES", "Conjecture", "ConjectureRow", "conjecture_check", "LABEL"]

LABEL = "CONJECTURE"


def _poch(ctx, root, a, b, n):
    """(zeta^a; zeta^b)_n, or with ``a`` a (sign, power) pair for -zeta^power."""
    sign, a = a if isinstance(a, tuple) else (1, a)
    out = ctx.mpc(1)
    for i in range(n):
        out *= 1 - sign * root.value(ctx, a + b * i)
    return out


def _neg(power):
    return (-1, power)


def _z(ctx, root, power):
    return root.value(ctx, power)


def _sixth_q4(ctx, root):
    k = (root.order - 1) // 2
    lhs = sum(
        (
            _z(ctx, root, 6 * r + 3) * _poch(ctx, root, 3, 6, r) ** 2 / (2 * _poch(ctx, root, _neg(6), 6, r))
            for r in range(k + 1)
        ),
        ctx.mpc(0),
    )
    rhs = sum(
        (
            (-1) ** r * _z(ctx, root, 4 * (r + 1) ** 2) * _poch(ctx, root, 4, 8, r) / _poch(ctx, root, _neg(4), 4, 2 * r + 1)
            for r in range(k + 1)
        ),
        ctx.mpc(0),
    )
    return lhs, rhs


def _sixth_lambda(ctx, root):
    k = (root.order - 1) // 2
    lhs = sum(
        (_z(ctx, root, 6 * r + 1) * _poch(ctx, root, 3, 6, r) ** 2 / _poch(ctx, root, _neg(6), 6, r) for r in range(k + 1)),
        ctx.mpc(0),
    )
    rhs = sum(
        (
            (-1) ** r * _z(ctx, root, 2 * r) * _poch(ctx, root, 2, 4, r) / _poch(ctx, root, _neg(2), 2, r)
            for r in range(k + 1)
        ),
        ctx.mpc(0),
    )
    return lhs, rhs


def _eighth_odd(ctx, root):
    k = (root.order - 1) // 2
    lhs = sum(
        (
            (-1) ** n * _z(ctx, root, 2 * n * n) * _poch(ctx, root, 2, 4, n) / _poch(ctx, root, _neg(4), 4, n)
            for n in range(k + 1)
        ),
        ctx.mpc(0),
    )
    rhs = sum(
        (
            _z(ctx, root, 8 * n + 1) * _poch(ctx, root, 1, 8, n) * _poch(ctx, root, 7, 8, n) / _poch(ctx, root, _neg(8), 8, n)
            for n in range(k + 1)
        ),
        ctx.mpc(0),
    )
    return lhs, rhs


@dataclass(frozen=True)
class Conjecture:
    id: str
    ref: str
    sides: Callable


CONJECTURES: dict[str, Conjecture] = {
    c.id: c
    for c in (
        Conjecture(
            "conj-psi-q4",
            "sixth-order psi(q^4) finite sums agree at odd-order roots",
            _sixth_q4,
        ),
        Conjecture(
            "conj-lambda-q2",
            "sixth-order lambda(q^2) finite sums agree at odd-order roots",
            _sixth_lambda,
        ),
        Conjecture(
            "conj-s0-odd",
            "eighth-order S0(-q^2) terminating sums agree at odd-order roots",
            _eighth_odd,
        ),
    )
}


@dataclass(frozen=True)
class ConjectureRow:
    conjecture: str
    order: int
    index: int
    lhs: object
    rhs: object
    residual: object
    agree: bool
    label: str = LABEL


def conjecture_check(ident: str, max_k: int, bits: int = DEFAULT_BITS) -> list[ConjectureRow]:
    """Both sides at every primitive root of odd order 2k+1 <= 2*max_k + 1."""
    if ident not in CONJECTURES:
        raise UnknownIdentity(ident)
    if max_k < 0:
        raise ValueError("max_k must be non-negative")
    conj = CONJECTURES[ident]
    ctx = make_context(bits)
    tol = mpmath.mpf(10) ** (-0.2 * bits)
    rows = []
    for k in range(max_k + 1):
        m = 2 * k + 1
        for j in range(m):
            if math.gcd(j, m) != 1:
                continue
            root = PrimitiveRoot(m, j)
            lhs, rhs = conj.sides(ctx, root)
            res = abs(lhs - rhs)
            rows.append(ConjectureRow(ident, m, root.index, lhs, rhs, res, bool(res < tol)))
    return rows
