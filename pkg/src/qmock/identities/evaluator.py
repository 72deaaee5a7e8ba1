"""Exact evaluation of DSL expressions to truncated series.

Every node gets a valuation lower bound before it is expanded, so products
and quotients request exactly the precision their factors need.  Sums are
summed as bilateral families with certified cutoffs; a divergent half of a
sum falls back to Cesàro averaging only when the evaluator is told to.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..bilateral import (
    BilateralTermFamily,
    appell_lerch_m,
    g_universal2,
    g_universal3,
    _inf_val,
)
from ..errors import DivergentFamily, DSLError, PolePochhammer, UnboundVariable, ZeroSeries
from ..gaussian import GaussianRational, as_gaussian
from ..mocktheta import MOCK_THETA_IDS, build_at
from ..qproducts import J, Jbar, Jm, MonomialParam, j_block, poch, poch_inf, poch_inf_inv, poch_inv
from ..series import INF, TruncatedSeries, as_fraction, cesaro_sum
from .ast import BinOp, Call, Neg, Node, Num, Poch, Pow, QVar, Sum, Var, normalize, walk
from .parser import parse

__all__ = ["Evaluator", "evaluate"]

_EXACT_SEARCH = 96


class _NotMonomial(Exception):
    pass


def _freeze(env: dict) -> tuple:
    return tuple(sorted(env.items(), key=lambda kv: kv[0]))


class Evaluator:
    """Evaluates trees under fixed parameter bindings.

    ``cesaro=True`` lets sums whose terms stop shrinking in one direction be
    regularized by averaging even and odd partial sums in that direction.
    """

    def __init__(self, bindings: dict | None = None, cesaro: bool = False):
        self.bindings = {k: _as_param(v) for k, v in (bindings or {}).items()}
        self.cesaro = cesaro
        self._cache: dict = {}
        self._vcache: dict = {}
        self._normal: dict = {}

    # ------------------------------------------------------------------
    def evaluate(self, node: Node, order) -> TruncatedSeries:
        node = self._normal.setdefault(id(node), (node, normalize(node)))[1]
        return self.series(node, as_fraction(order), {}).truncate(order)

    # scalars and monomials -------------------------------------------------
    def _lookup(self, node: Var, env: dict):
        if node.name in env:
            return env[node.name]
        if node.name in self.bindings:
            return self.bindings[node.name]
        line, col = node.pos
        raise UnboundVariable(f"unbound variable {node.name!r}", line, col)

    def scalar(self, node: Node, env: dict) -> GaussianRational:
        """Value of a q-free expression (exponents, bounds, weights)."""
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            v = self._lookup(node, env)
            if isinstance(v, int):
                return GaussianRational(v)
            if v.exponent == 0:
                return v.unit
            raise DSLError(f"{node.name!r} depends on q where a number is needed")
        if isinstance(node, Neg):
            return -self.scalar(node.arg, env)
        if isinstance(node, BinOp):
            a, b = self.scalar(node.left, env), self.scalar(node.right, env)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if not b:
                raise ZeroSeries("division by zero")
            return a / b
        if isinstance(node, Pow):
            k = self._rational(node.exp, env)
            if k.denominator != 1:
                raise DSLError("fractional power of a number")
            return self.scalar(node.base, env) ** int(k)
        raise DSLError(f"expected a number, found {type(node).__name__}")

    def _rational(self, node: Node, env: dict) -> Fraction:
        v = self.scalar(node, env)
        if v.im:
            raise DSLError("exponents and bounds must be real")
        return v.re

    def _integer(self, node: Node, env: dict) -> int:
        v = self._rational(node, env)
        if v.denominator != 1:
            raise DSLError(f"expected an integer, got {v}")
        return int(v)

    def monomial(self, node: Node, env: dict) -> MonomialParam:
        m = self._mono(node, env)
        if m is None:
            raise DSLError("a monomial u*q^e is required here, got zero")
        return m

    def _mono(self, node: Node, env: dict):
        """MonomialParam, None for the zero value, or raise _NotMonomial."""
        if isinstance(node, Num):
            return MonomialParam(node.value, 0) if node.value else None
        if isinstance(node, QVar):
            return MonomialParam(1, 1)
        if isinstance(node, Var):
            v = self._lookup(node, env)
            if isinstance(v, int):
                return MonomialParam(v, 0) if v else None
            return v
        if isinstance(node, Neg):
            m = self._mono(node.arg, env)
            return None if m is None else -m
        if isinstance(node, BinOp) and node.op in "*/":
            a, b = self._mono(node.left, env), self._mono(node.right, env)
            if node.op == "*":
                return None if a is None or b is None else a * b
            if b is None:
                raise ZeroSeries("division by zero")
            return None if a is None else a / b
        if isinstance(node, Pow):
            base = self._mono(node.base, env)
            k = self._rational(node.exp, env)
            if base is None:
                if k <= 0:
                    raise ZeroSeries("non-positive power of zero")
                return None
            if k.denominator == 1:
                return base ** int(k)
            if base.unit != 1:
                raise DSLError("fractional power of a monomial with unit other than 1")
            return MonomialParam(1, base.exponent * k)
        if isinstance(node, BinOp):
            # sums of monomials are monomial only when one side vanishes or they merge
            a, b = self._mono(node.left, env), self._mono(node.right, env)
            if b is None:
                return a
            if a is None:
                return b if node.op == "+" else -b
            if a.exponent == b.exponent:
                u = a.unit + b.unit if node.op == "+" else a.unit - b.unit
                return MonomialParam(u, a.exponent) if u else None
        raise _NotMonomial

    def _try_mono(self, node: Node, env: dict):
        try:
            return True, self._mono(node, env)
        except _NotMonomial:
            return False, None

    # valuations ----------------------------------------------------------
    def vlb(self, node: Node, env: dict):
        """Lower bound for the valuation (INF for a known zero)."""
        key = (id(node), _freeze(env))
        hit = self._vcache.get(key)
        if hit is not None:
            return hit
        v = self._vlb(node, env)
        self._vcache[key] = v
        return v

    def _vlb(self, node: Node, env: dict):
        ok, m = self._try_mono(node, env)
        if ok:
            return INF if m is None else m.exponent
        if isinstance(node, Neg):
            return self.vlb(node.arg, env)
        if isinstance(node, BinOp):
            if node.op in "+-":
                return min(self.vlb(node.left, env), self.vlb(node.right, env))
            a = self.vlb(node.left, env)
            if node.op == "*":
                b = self.vlb(node.right, env)
                return INF if INF in (a, b) else a + b
            if isinstance(node.right, Poch):
                r = self._poch_val(node.right, env, invert=True)
                return INF if INF in (a, r) else a + r
            return a if a == INF else a - self.vexact(node.right, env)
        if isinstance(node, Pow):
            k = self._integer(node.exp, env)
            if k >= 0:
                b = self.vlb(node.base, env)
                return Fraction(0) if k == 0 else (INF if b == INF else k * b)
            return k * self.vexact(node.base, env)
        if isinstance(node, Poch):
            return self._poch_val(node, env)
        if isinstance(node, Sum):
            return self._sum_vlb(node, env)
        if isinstance(node, Call):
            return self._call_vlb(node, env)
        raise DSLError(f"cannot bound the valuation of {type(node).__name__}")

    def vexact(self, node: Node, env: dict):
        """Exact valuation; raises ZeroSeries for an identically zero divisor."""
        ok, m = self._try_mono(node, env)
        if ok:
            if m is None:
                raise ZeroSeries("division by zero")
            return m.exponent
        if isinstance(node, Neg):
            return self.vexact(node.arg, env)
        if isinstance(node, BinOp) and node.op in "*/":
            a, b = self.vexact(node.left, env), self.vexact(node.right, env)
            return a + b if node.op == "*" else a - b
        if isinstance(node, Pow):
            return self._integer(node.exp, env) * self.vexact(node.base, env)
        if isinstance(node, Poch):
            v = self._poch_val(node, env)
            if v == INF:
                raise ZeroSeries("division by a vanishing Pochhammer product")
            return v
        if isinstance(node, Call) and node.name in ("j", "J", "Jbar", "Jm"):
            return self._call_vlb(node, env)
        lb = self.vlb(node, env)
        if lb == INF:
            raise ZeroSeries("division by zero")
        o = lb + 1
        while o <= lb + _EXACT_SEARCH:
            s = self.series(node, o, env)
            if not s.is_zero():
                return s.valuation
            o += 8
        raise ZeroSeries(f"divisor vanishes below q^{lb + _EXACT_SEARCH}")

    def _poch_parts(self, node: Poch, env: dict):
        args = [self.monomial(a, env) for a in node.args]
        base = self.monomial(node.base, env)
        if base.unit != 1 or base.exponent <= 0:
            raise DSLError("a Pochhammer base must be q^s with s > 0")
        n = None if node.bound is None else self._integer(node.bound, env)
        return args, base.exponent, n

    def _poch_val(self, node: Poch, env: dict, invert: bool = False):
        args, s, n = self._poch_parts(node, env)
        total = Fraction(0)
        for a in args:
            v = _factor_product_val(a, s, n, invert)
            if v == INF:
                return INF
            total += v
        return total

    def _sum_vlb(self, node: Sum, env: dict):
        fam = self._family(node, env)
        best = INF
        for r in _scan_indices(fam):
            v = fam.valuation_bound(r)
            if v < best:
                best = v
        return best

    def _call_vlb(self, node: Call, env: dict):
        name = node.name
        if name in MOCK_THETA_IDS:
            return Fraction(0)
        if name in ("J", "Jbar", "Jm"):
            return Fraction(0)
        if name == "j":
            x, b, _ = self._call_args(node, env)
            Q = MonomialParam(1, b)
            vx, vy = _factor_product_val(x, b, None), _factor_product_val(Q / x, b, None)
            return INF if INF in (vx, vy) else vx + vy
        if name in ("g2", "g3"):
            return Fraction(0)
        if name == "m":
            x, b, z = self._call_args(node, env)
            Q = MonomialParam(1, b)
            vj = _inf_val(z, b) + _inf_val(Q / z, b)
            # terms (-1)^r Q^(r(r-1)/2) z^r / (1 - Q^(r-1) x z): each valuation is at least
            # its monomial exponent, and the smallest of those is attained near r = 1/2 - e_z/b
            c = Fraction(1, 2) - z.exponent / b
            best = min(
                b * r * (r - 1) / 2 + r * z.exponent
                for r in range(math.floor(c) - 1, math.ceil(c) + 2)
            )
            return best - vj
        raise DSLError(f"unknown function {name!r}")

    # expansion -----------------------------------------------------------
    def series(self, node: Node, order, env: dict) -> TruncatedSeries:
        order = as_fraction(order)
        key = (id(node), _freeze(env))
        hit = self._cache.get(key)
        if hit is not None and hit.order >= order:
            return hit
        res = self._series(node, order, env)
        if hit is None or res.order > hit.order:
            self._cache[key] = res
        return res

    def _series(self, node: Node, order: Fraction, env: dict) -> TruncatedSeries:
        ok, m = self._try_mono(node, env)
        if ok:
            return TruncatedSeries.zero() if m is None else m.series()
        if isinstance(node, Neg):
            return -self.series(node.arg, order, env)
        if isinstance(node, BinOp) and node.op == "/" and isinstance(node.right, Poch):
            va = self.vlb(node.left, env)
            vr = self._poch_val(node.right, env, invert=True)
            if INF in (va, vr):
                return TruncatedSeries.zero(order)
            a = self.series(node.left, order - vr, env)
            return (a * self._poch_series(node.right, order - va, env, invert=True)).truncate(order)
        if isinstance(node, BinOp):
            if node.op in "+-":
                a = self.series(node.left, order, env)
                b = self.series(node.right, order, env)
                return (a + b if node.op == "+" else a - b).truncate(order)
            if node.op == "*":
                va, vb = self.vlb(node.left, env), self.vlb(node.right, env)
                if INF in (va, vb):
                    return TruncatedSeries.zero(order)
                a = self.series(node.left, order - vb, env)
                b = self.series(node.right, order - va, env)
                return (a * b).truncate(order)
            vb = self.vexact(node.right, env)
            va = self.vlb(node.left, env)
            if va == INF:
                return TruncatedSeries.zero(order)
            a = self.series(node.left, order + vb, env)
            if a.is_zero():
                return TruncatedSeries.zero(order)
            b = self.series(node.right, order + 2 * vb - a.valuation, env)
            return _divide(a, b, order)
        if isinstance(node, Pow):
            k = self._integer(node.exp, env)
            if k == 0:
                return TruncatedSeries.constant(1)
            if k > 0:
                vb = self.vlb(node.base, env)
                if vb == INF:
                    return TruncatedSeries.zero(order)
                b = self.series(node.base, order - (k - 1) * vb, env)
                return (b ** k).truncate(order)
            k = -k
            vb = self.vexact(node.base, env)
            b = self.series(node.base, order + (k + 1) * vb, env)
            return _divide(TruncatedSeries.constant(1), b ** k, order)
        if isinstance(node, Poch):
            return self._poch_series(node, order, env)
        if isinstance(node, Sum):
            return self._sum_series(node, order, env)
        if isinstance(node, Call):
            return self._call_series(node, order, env)
        raise DSLError(f"cannot evaluate {type(node).__name__}")

    def _poch_series(self, node: Poch, order: Fraction, env: dict, invert: bool = False) -> TruncatedSeries:
        args, s, n = self._poch_parts(node, env)
        vals = [_factor_product_val(a, s, n, invert) for a in args]
        if INF in vals:
            return TruncatedSeries.zero(order)
        total = sum(vals, Fraction(0))
        res = TruncatedSeries.constant(1)
        for a, v in zip(args, vals):
            need = order - total + v
            if not invert:
                part = poch_inf(a, s, need) if n is None else poch(a, s, n, need)
            else:
                part = poch_inf_inv(a, s, need) if n is None else poch_inv(a, s, n, need)
            res = res * part
        return res.truncate(order)

    def _family(self, node: Sum, env: dict) -> "_SumFamily":
        return _SumFamily(self, node, env)

    def _sum_series(self, node: Sum, order: Fraction, env: dict) -> TruncatedSeries:
        total = TruncatedSeries.zero(order)
        lo, hi = node.lo, node.hi
        halves = []
        if hi is None or hi >= 0:
            halves.append((max(lo, 0) if lo is not None else 0, hi, 1))
        if lo is None or lo < 0:
            halves.append((lo, min(hi, -1) if hi is not None else -1, -1))
        for a, b, direction in halves:
            fam = _SumFamily(self, node, env, a, b)
            v = fam.validity()
            if v.ok:
                total = total + fam.sum(order)
                continue
            if not self.cesaro:
                raise DivergentFamily(
                    f"sum over {node.var} diverges towards {v.failingDirection} (witness index {v.witness})"
                )
            first = a if direction == 1 else b
            cv = cesaro_sum(lambda k: fam.term_at(first + direction * k, order), order)
            total = total + cv.value
        return total.truncate(order)

    def _call_args(self, node: Call, env: dict):
        x = self.monomial(node.args[0], env)
        base = self.monomial(node.args[1], env)
        if base.unit != 1 or base.exponent <= 0:
            raise DSLError(f"the base argument of {node.name} must be q^s with s > 0")
        z = self.monomial(node.args[2], env) if len(node.args) > 2 else None
        return x, base.exponent, z

    def _call_series(self, node: Call, order: Fraction, env: dict) -> TruncatedSeries:
        name = node.name
        if name in MOCK_THETA_IDS:
            arg = self.monomial(node.args[0], env)
            if arg.exponent <= 0:
                raise DSLError(f"{name} needs an argument u*q^k with k > 0")
            return build_at(name, arg.unit, arg.exponent, order)
        if name == "J":
            return J(self._rational(node.args[0], env), self._rational(node.args[1], env), order)
        if name == "Jbar":
            return Jbar(self._rational(node.args[0], env), self._rational(node.args[1], env), order)
        if name == "Jm":
            return Jm(self._rational(node.args[0], env), order)
        if name == "j":
            if self.vlb(node, env) == INF:
                return TruncatedSeries.zero(order)
            x, b, _ = self._call_args(node, env)
            return j_block(x, b, order)
        if name == "g2":
            x, b, _ = self._call_args(node, env)
            return g_universal2(x, order, base=b)
        if name == "g3":
            x, b, _ = self._call_args(node, env)
            return g_universal3(x, order, base=b)
        if name == "m":
            x, b, z = self._call_args(node, env)
            return appell_lerch_m(x, z, order, base=b)
        raise DSLError(f"unknown function {name!r}")


class _SumFamily(BilateralTermFamily):
    def __init__(self, ev: Evaluator, node: Sum, env: dict, lo="node", hi="node"):
        self.ev = ev
        self.node = node
        self.env = env
        lo = node.lo if lo == "node" else lo
        hi = node.hi if hi == "node" else hi
        super().__init__(self._term, self._bound, lo, hi)
        self._start = _regime_radius(ev, node, env)

    def _env(self, r: int) -> dict:
        env = dict(self.env)
        env[self.node.var] = r
        return env

    def _term(self, r: int, order) -> TruncatedSeries:
        return self.ev.series(self.node.body, as_fraction(order), self._env(r))

    def _bound(self, r: int):
        if (self.lo is not None and r < self.lo) or (self.hi is not None and r > self.hi):
            return INF
        return self.ev.vlb(self.node.body, self._env(r))

    def regime_start(self, direction: int) -> int:
        return direction * self._start


def _regime_radius(ev: Evaluator, node: Sum, env: dict) -> int:
    """Index radius beyond which no factor in the summand changes sign."""
    radius = 0
    for sub in walk(node.body):
        if isinstance(sub, Num) and sub.value.im == 0:
            radius = max(radius, abs(sub.value.re))
        elif isinstance(sub, Var) and sub.name != node.var:
            v = env.get(sub.name, ev.bindings.get(sub.name))
            if isinstance(v, MonomialParam):
                radius = max(radius, abs(v.exponent))
    return int(math.ceil(radius)) + 2


def _scan_indices(fam: BilateralTermFamily):
    """Indices that can carry the minimum valuation of a valid family."""
    for direction in (1, -1):
        r = 0 if direction == 1 else -1
        if fam.lo is not None:
            r = max(r, fam.lo) if direction == 1 else r
        if (fam.hi is not None and direction == 1 and r > fam.hi) or (
            fam.lo is not None and direction == -1 and r < fam.lo
        ):
            continue
        start = fam.regime_start(direction)
        steps = 0
        while True:
            if (fam.lo is not None and r < fam.lo) or (fam.hi is not None and r > fam.hi):
                break
            yield r
            steps += 1
            if (r - start) * direction >= 0:
                a, b = fam.valuation_bound(r), fam.valuation_bound(r + direction)
                if b == INF or (a != INF and b > a):
                    break
            if steps > 4 * abs(start) + 64:
                break
            r += direction


def _factor_product_val(a: MonomialParam, s: Fraction, n, invert: bool = False):
    """Exact valuation of ``(a; q^s)_n`` (n None for infinity) or of its reciprocal.

    INF marks an identically zero value; a zero that would have to be
    divided by raises PolePochhammer.
    """
    if n is not None and n < 0:
        # (a; q^s)_n = 1 / (a q^{n s}; q^s)_{|n|}
        exps = [a.exponent + j * s for j in range(n, 0)]
        invert = not invert
    elif n is None:
        exps = []
        j = 0
        while a.exponent + j * s <= 0:
            exps.append(a.exponent + j * s)
            j += 1
    else:
        exps = [a.exponent + j * s for j in range(n)]
    if any(e == 0 and a.unit == 1 for e in exps):
        if invert:
            raise PolePochhammer(f"({a}; q^{s})_{n} has a vanishing factor in a denominator")
        return INF
    v = sum((min(e, Fraction(0)) for e in exps), Fraction(0))
    return -v if invert else v


def _divide(a: TruncatedSeries, b: TruncatedSeries, order) -> TruncatedSeries:
    if b.is_monomial():
        return (a / b).truncate(order)
    if b.is_exact():
        b = b.truncate(as_fraction(order) + 2 * b.valuation - (a.valuation if not a.is_zero() else 0))
    if a.is_exact():
        a = a.truncate(as_fraction(order) + b.valuation)
    return (a * b.invert()).truncate(order)


def _as_param(v):
    if isinstance(v, MonomialParam):
        return v
    if isinstance(v, str):
        node = parse(v)
        return Evaluator().monomial(node, {})
    if isinstance(v, int):
        return MonomialParam(v, 0)
    return MonomialParam(as_gaussian(v), 0)


def evaluate(node, order, bindings: dict | None = None, cesaro: bool = False) -> TruncatedSeries:
    """Evaluate a tree (or DSL text) to a series truncated at ``order``."""
    if isinstance(node, str):
        node = parse(node)
    return Evaluator(bindings, cesaro).evaluate(node, order)
