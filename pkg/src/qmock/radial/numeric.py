"""Arbitrary precision complex evaluation of q-series, q-products and DSL trees.

Every evaluation builds its own ``mpmath.MPContext``; nothing touches the
global mpmath precision.

Infinite products near the unit circle are evaluated at radial points
``q = t*zeta`` by splitting each factor ``(c q^a; q^m)_inf`` into residue
classes so that every piece has the real base ``T = t^(m K)``, then summing
the Mellin asymptotic expansion of ``log (w T^alpha; T)_inf``.  The
expansion is exact up to an error of size ``exp(-4 pi^2 beta / h)`` with
``T = e^-h`` and ``beta`` the distance from ``arg(w)/2pi`` to the integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from ..errors import DSLError, OutsideUnitDisk, PrecisionExhausted, ZeroFactor
from ..gaussian import GaussianRational
from ..identities.ast import BinOp, Call, Neg, Node, Num, Poch, Pow, QVar, Sum, Var
from ..identities.evaluator import Evaluator, _NotMonomial
from ..identities.parser import parse
from ..mocktheta import MOCK_THETA_IDS, MockThetaId

__all__ = [
    "DEFAULT_BITS",
    "PrimitiveRoot",
    "make_context",
    "to_complex",
    "eval_series_numeric",
    "eval_product_numeric",
    "eval_expression_numeric",
    "NumericEvaluator",
    "log_qpoch_radial",
]

DEFAULT_BITS = 212
DIRECT_FACTORS = 20_000  # beyond this many factors the radial expansion is preferred
MAX_FACTORS = 400_000
MAX_TERMS = 400_000


@dataclass(frozen=True)
class PrimitiveRoot:
    """``exp(2 pi i index / order)`` with ``gcd(index, order) = 1``."""

    order: int
    index: int = 1

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("root order must be positive")
        j = self.index % self.order
        if math.gcd(j, self.order) != 1:
            raise ValueError(f"index {self.index} is not coprime to order {self.order}")
        object.__setattr__(self, "index", j)

    def turns(self, power=1) -> Fraction:
        """Angle of ``zeta**power`` in turns, reduced to [0, 1)."""
        return Fraction(self.index * power, self.order) % 1

    def value(self, ctx, power=1):
        a = self.turns(power)
        exact = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1), Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1)}
        if a in exact:
            return ctx.mpc(*exact[a])
        return ctx.expjpi(2 * ctx.mpf(a.numerator) / a.denominator)

    def __str__(self):
        return f"exp(2 pi i {self.index}/{self.order})"


def make_context(bits: int):
    ctx = mpmath.MPContext()
    ctx.prec = int(bits)
    return ctx


def to_complex(ctx, x):
    """Exact conversion of Fraction, GaussianRational, strings and numbers."""
    if isinstance(x, GaussianRational):
        return _gauss(ctx, x)
    if isinstance(x, Fraction):
        return ctx.mpc(ctx.mpf(x.numerator) / x.denominator)
    if isinstance(x, str):
        return ctx.mpc(ctx.mpmathify(x.replace(" ", "")))
    return ctx.mpc(x)


def _check_disk(ctx, qval):
    if abs(qval) >= 1:
        raise OutsideUnitDisk(f"|q| = {mpmath.nstr(abs(qval), 8)} is not inside the unit disk")


def _fr(ctx, x):
    x = Fraction(x)
    return ctx.mpf(x.numerator) / x.denominator


def _unit_turns(u: GaussianRational):
    """Angle in turns of a unit among 1, i, -1, -i; None otherwise."""
    table = {(1, 0): Fraction(0), (0, 1): Fraction(1, 4), (-1, 0): Fraction(1, 2), (0, -1): Fraction(3, 4)}
    return table.get((u.re, u.im))


def _frac_dist(x: Fraction) -> Fraction:
    x = x % 1
    return min(x, 1 - x)


# ----------------------------------------------------------------------
# infinite products


def _log_poch_direct(ctx, x, p, rel_eps, max_factors=MAX_FACTORS):
    """log of (x; p)_inf by multiplying factors until the tail bound holds."""
    ap = abs(p)
    if ap >= 1:
        raise OutsideUnitDisk("product base must lie inside the unit disk")
    prod = ctx.mpc(1)
    scale = ctx.mpf(0)
    cur = ctx.mpc(x)
    tiny = ctx.mpf(2) ** (-ctx.prec + 12)
    n = 0
    while True:
        ac = abs(cur)
        if ac < 0.5 and ac / ((1 - ap) * (1 - ac)) < rel_eps:
            break
        f = 1 - cur
        if abs(f) <= tiny:
            raise ZeroFactor(f"factor 1 - x p^{n} vanishes")
        prod *= f
        if n % 64 == 63:
            # keep the running product normalized so huge counts stay cheap
            m = abs(prod)
            scale += ctx.log(m)
            prod /= m
        cur *= p
        n += 1
        if n > max_factors:
            raise PrecisionExhausted(f"product needs more than {max_factors} factors at |p| = {mpmath.nstr(ap, 10)}")
    return scale + ctx.log(prod)


def _log_poch_real_base(ctx, beta: Fraction, alpha: Fraction, h, rel_eps):
    """log (w T^alpha; T)_inf with ``w = exp(2 pi i beta)``, ``T = exp(-h)``."""
    if alpha == 0:
        if beta % 1 == 0:
            raise ZeroFactor("factor (1 - 1) in a radial product")
        w = ctx.expjpi(2 * _fr(ctx, beta))
        return ctx.log(1 - w) + _log_poch_real_base(ctx, beta, Fraction(1), h, rel_eps)
    dist = _frac_dist(beta)
    # error floor of the asymptotic expansion
    floor_nats = 4 * math.pi**2 * float(dist if dist else 1) / float(h)
    need_nats = -float(ctx.log(rel_eps)) + 8
    n_direct = need_nats / float(h) + float(alpha)
    if n_direct <= DIRECT_FACTORS or floor_nats < need_nats:
        if n_direct > MAX_FACTORS:
            raise PrecisionExhausted("radial product is beyond both the direct and the asymptotic range")
        w = ctx.expjpi(2 * _fr(ctx, beta))
        T = ctx.exp(-h)
        return _log_poch_direct(ctx, w * ctx.exp(-_fr(ctx, alpha) * h), T, rel_eps)
    a = _fr(ctx, alpha)
    if dist == 0:
        # Mellin poles of Gamma(s) zeta(s+1) zeta(s, a) h^-s
        s = ctx.pi**2 / (6 * h) + ctx.loggamma(a) - ctx.log(2 * ctx.pi) / 2 - (ctx.mpf(1) / 2 - a) * ctx.log(h)
        coef = lambda n: ctx.zeta(1 - n)
    else:
        w = ctx.expjpi(2 * _fr(ctx, beta))
        s = ctx.polylog(2, w) / h - (ctx.mpf(1) / 2 - a) * ctx.log(1 - w)
        coef = lambda n: ctx.polylog(1 - n, w)
    small, hn, fact = 0, ctx.mpf(1), ctx.mpf(1)
    prev = None
    for n in range(1, 2000):
        hn *= h
        fact *= n
        t = (-1) ** n / fact * coef(n) * (-ctx.bernpoly(n + 1, a) / (n + 1)) * hn
        s += t
        at = abs(t)
        small = small + 1 if at < rel_eps * 2**-8 else 0
        if small >= 3:
            return -s
        if prev is not None and at > prev and at > rel_eps and n > 8:
            break
        if at:
            prev = at
    raise PrecisionExhausted("radial product expansion did not reach the requested accuracy")


def log_qpoch_radial(ctx, unit_turns: Fraction, a: Fraction, m: Fraction, t, root: PrimitiveRoot, rel_eps):
    """log (c q^a; q^m)_inf at ``q = t*zeta`` where ``c = exp(2 pi i unit_turns)``."""
    if a.denominator != 1 or m.denominator != 1 or m <= 0 or a < 0:
        raise ValueError("radial products need integer exponents a >= 0 and m > 0")
    a, m = int(a), int(m)
    N = root.order
    K = N // math.gcd(N, m)
    h = -(m * K) * ctx.log(t)
    total = ctx.mpc(0)
    for r in range(K):
        e = a + m * r
        beta = (unit_turns + Fraction(root.index * e, N)) % 1
        total += _log_poch_real_base(ctx, beta, Fraction(e, m * K), h, rel_eps / K)
    return total


# ----------------------------------------------------------------------
# sums


class _Tail:
    """Block-geometric tail certificate for a stream of term magnitudes."""

    def __init__(self, ctx, eps, block):
        self.ctx = ctx
        self.eps = eps
        self.block = block
        self.count = 0
        self.cur = ctx.mpf(0)
        self.prev = None
        self.bound = None
        self.stalled = 0

    def push(self, mag) -> bool:
        if mag > self.cur:
            self.cur = mag
        self.count += 1
        if self.count % self.block:
            return False
        prev, cur = self.prev, self.cur
        self.prev, self.cur = cur, self.ctx.mpf(0)
        if prev is None:
            return False
        if cur == 0 and prev == 0:
            self.bound = self.ctx.mpf(0)
            return True
        if prev == 0 or cur >= prev:
            self.stalled = self.stalled + 1 if cur >= prev else 0
            if self.stalled > 64:
                raise PrecisionExhausted("terms stopped shrinking: the series does not converge here")
            return False
        self.stalled = 0
        rho = cur / prev
        bound = self.block * cur * rho / (1 - rho)
        if bound < self.eps:
            self.bound = bound
            return True
        return False


def _period_block(qval, root) -> int:
    if root is not None:
        return max(16, 2 * root.order)
    return 32


class _Family:
    """Incremental numeric evaluation of a MockThetaId at ``x``."""

    def __init__(self, ctx, mt: MockThetaId, x):
        self.ctx, self.mt, self.x = ctx, mt, x
        self.slots = {}

    def _poch(self, key, a, s, k):
        """(u x^e; x^s)_k, extended from the cached length."""
        ctx, x = self.ctx, self.x
        slot = self.slots.get(key)
        if slot is None or slot[0] > k:
            cur = _gauss(ctx, a.unit) * _ipow(ctx, x, a.exponent)
            slot = [0, ctx.mpc(1), cur, _ipow(ctx, x, s)]
        n, val, cur, step = slot
        while n < k:
            val *= 1 - cur
            cur *= step
            n += 1
        self.slots[key] = [n, val, cur, step]
        return val

    def term(self, n):
        mt, ctx = self.mt, self.ctx
        val = mt.sign(n) * _ipow(self.ctx, self.x, mt.exponent(n))
        for i, (a, s, k) in enumerate(mt.numer(n)):
            val *= self._poch(("n", i), a, s, k)
        for i, (b, s, k) in enumerate(mt.denom(n)):
            d = self._poch(("d", i), b, s, k)
            if d == 0:
                raise ZeroFactor(f"{mt.name}: denominator vanishes at term {n}")
            val /= d
        return val


def _gauss(ctx, v: GaussianRational):
    return ctx.mpc(ctx.mpf(v.re.numerator) / v.re.denominator, ctx.mpf(v.im.numerator) / v.im.denominator)


def _ipow(ctx, x, e):
    e = Fraction(e)
    if e.denominator != 1:
        raise ValueError(f"non-integral power q^{e} has no single numeric value")
    return ctx.power(x, int(e))


def _sum_stream(ctx, term, start, step, eps, block, cesaro=False, max_terms=MAX_TERMS):
    """Sum ``term(start), term(start+step), ...``; returns (value, bound, terms, biggest)."""
    tail = _Tail(ctx, eps, block)
    total = ctx.mpc(0)
    biggest = ctx.mpf(0)
    n = start
    prev = None
    count = 0
    while True:
        a = term(n)
        total += a
        mag = abs(a)
        if mag > biggest:
            biggest = mag
        count += 1
        if cesaro:
            # even/odd averaging: certify through successive differences
            if prev is not None and tail.bound is None:
                tail.push(abs(a + prev))
            prev = a
            if tail.bound is not None and count % 2 == 0:
                # value = S_even + a_even / 2 with S_even ending one term earlier
                return total - a / 2, 3 * tail.bound / 2 + 0, count, biggest
        elif tail.push(mag):
            return total, tail.bound, count, biggest
        n += step
        if count > max_terms:
            raise PrecisionExhausted(f"series did not settle within {max_terms} terms")


def _series_family(ctx, mt: MockThetaId, x, eps, block):
    fam = _Family(ctx, mt, x)
    if mt.summability == "cesaro":
        return _sum_stream(ctx, fam.term, mt.start, 1, eps, block, cesaro=True)
    return _sum_stream(ctx, fam.term, mt.start, 1, eps, block)


# ----------------------------------------------------------------------
# DSL trees


class NumericEvaluator:
    """Numeric value of a DSL tree at ``q = qval``.

    With ``root`` given, ``qval`` must equal ``|qval| * zeta`` and infinite
    products switch to the radial expansion when direct multiplication would
    need too many factors.
    """

    def __init__(self, ctx, qval, eps, root: PrimitiveRoot | None = None):
        self.ctx = ctx
        self.q = ctx.mpc(qval)
        _check_disk(ctx, self.q)
        self.eps = ctx.mpf(eps)
        self.root = root
        self.t = abs(self.q)
        self.rel = ctx.mpf(2) ** (-ctx.prec + 16)
        self.block = _period_block(qval, root)
        self._exact = Evaluator()
        self.biggest = ctx.mpf(0)
        self._pcache: dict = {}

    def value(self, node: Node, env: dict | None = None):
        return self._val(node, env or {})

    # scalars --------------------------------------------------------------
    def _int(self, node, env) -> Fraction:
        try:
            return self._exact._rational(node, env)
        except Exception as exc:
            raise DSLError(f"expected a rational exponent: {exc}") from None

    def _val(self, node, env):
        ctx = self.ctx
        if isinstance(node, Num):
            return _gauss(ctx, node.value)
        if isinstance(node, QVar):
            return self.q
        if isinstance(node, Var):
            if node.name not in env:
                raise DSLError(f"unbound variable {node.name!r} in numeric evaluation")
            return ctx.mpc(env[node.name])
        if isinstance(node, Neg):
            return -self._val(node.arg, env)
        if isinstance(node, BinOp):
            a = self._val(node.left, env)
            b = self._val(node.right, env)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if b == 0:
                raise ZeroFactor("numeric division by zero")
            return a / b
        if isinstance(node, Pow):
            return _ipow(ctx, self._val(node.base, env), self._int(node.exp, env))
        if isinstance(node, Poch):
            return self._poch(node, env)
        if isinstance(node, Sum):
            return self._sum(node, env)
        if isinstance(node, Call):
            return self._call(node, env)
        raise TypeError(f"not an expression node: {node!r}")

    # products -------------------------------------------------------------
    def _poch(self, node: Poch, env):
        ctx = self.ctx
        base = self._val(node.base, env)
        if node.bound is None:
            return ctx.exp(sum((self._log_poch_inf(a, node.base, env) for a in node.args), ctx.mpc(0)))
        n = self._int(node.bound, env)
        if n.denominator != 1:
            raise DSLError("Pochhammer length must be an integer")
        n = int(n)
        out = ctx.mpc(1)
        for a in node.args:
            x = self._val(a, env)
            if n >= 0:
                out *= self._finite(node, a, x, base, n)
            else:
                d = self._finite(node, a, x * base**n, base, -n)
                if d == 0:
                    raise ZeroFactor("negative-index Pochhammer symbol has a pole")
                out /= d
        return out

    def _finite(self, node, a, x, base, n):
        key = (id(node), id(a), complex(x), complex(base))
        hit = self._pcache.get(key)
        if hit is None or hit[0] > n:
            hit = [0, self.ctx.mpc(1), self.ctx.mpc(x)]
        k, val, cur = hit
        while k < n:
            val *= 1 - cur
            cur *= base
            k += 1
        self._pcache[key] = [k, val, cur]
        return val

    def _log_poch_inf(self, a, base_node, env):
        ctx = self.ctx
        x = self._val(a, env)
        p = self._val(base_node, env)
        if abs(p) >= 1:
            raise OutsideUnitDisk("product base must lie inside the unit disk")
        if self.root is not None:
            try:
                ma = self._exact._mono(a, env)
                mb = self._exact._mono(base_node, env)
            except (_NotMonomial, Exception):
                ma = mb = None
            if ma is not None and mb is not None:
                ua, ub = _unit_turns(ma.unit), _unit_turns(mb.unit)
                ok = ua is not None and ub is not None
                ok = ok and ma.exponent.denominator == 1 and mb.exponent.denominator == 1 and ma.exponent >= 0
                if ok:
                    need = -float(ctx.log(self.rel)) / -float(ctx.log(abs(p)))
                    if need > DIRECT_FACTORS:
                        return self._log_radial(ua, ma.exponent, ub, mb.exponent)
        return _log_poch_direct(ctx, x, p, self.rel)

    def _log_radial(self, ua, ea, ub, eb):
        # (c q^a; u q^m)_inf with u of order d splits into d products of base q^(m d)
        d = Fraction(ub).denominator if ub else 1
        total = self.ctx.mpc(0)
        for r in range(d):
            total += log_qpoch_radial(self.ctx, (ua + r * ub) % 1, ea + r * eb, eb * d, self.t, self.root, self.rel / d)
        return total

    # sums -----------------------------------------------------------------
    def _sum(self, node: Sum, env):
        ctx = self.ctx
        total = ctx.mpc(0)

        def term(n):
            return self._val(node.body, {**env, node.var: n})

        if node.lo is not None and node.hi is not None:
            for n in range(node.lo, node.hi + 1):
                total += term(n)
            return total
        eps = self.eps / 4
        if node.hi is None:
            lo = node.lo if node.lo is not None else 0
            v, _, _, big = _sum_stream(ctx, term, lo, 1, eps, self.block)
            total += v
            self.biggest = max(self.biggest, big)
        if node.lo is None:
            hi = node.hi if node.hi is not None else -1
            if node.hi is None:
                hi = -1
            v, _, _, big = _sum_stream(ctx, term, hi, -1, eps, self.block)
            total += v
            self.biggest = max(self.biggest, big)
        return total

    # named functions ------------------------------------------------------
    def _call(self, node: Call, env):
        name = node.name
        if name in MOCK_THETA_IDS:
            x = self._val(node.args[0], env)
            _check_disk(self.ctx, x)
            v, _, _, big = _series_family(self.ctx, MOCK_THETA_IDS[name], x, self.eps / 4, self.block)
            self.biggest = max(self.biggest, big)
            return v
        prod = _theta_as_poch(node)
        if prod is not None:
            return self._val(prod, env)
        raise DSLError(f"{name} has no numeric evaluation")


def _qpow(k):
    return Pow(QVar(), Num(GaussianRational(k)))


def _theta_as_poch(node: Call):
    """Rewrite j, J, Jbar and Jm as infinite Pochhammer products."""
    name, args = node.name, node.args
    if name == "Jm":
        m = args[0]
        return Poch((Pow(QVar(), m),), Pow(QVar(), m), None)
    if name in ("J", "Jbar"):
        a, m = args
        qa, qm = Pow(QVar(), a), Pow(QVar(), m)
        qma = Pow(QVar(), BinOp("-", m, a))
        if name == "Jbar":
            qa, qma = Neg(qa), Neg(qma)
        return Poch((qa, qma, qm), qm, None)
    if name == "j":
        x, p = args
        return Poch((x, BinOp("/", p, x), p), p, None)
    return None


# ----------------------------------------------------------------------
# public entry points


def _as_node(definition):
    if isinstance(definition, Node):
        return definition
    if isinstance(definition, MockThetaId):
        return Call(definition.name, (QVar(),))
    if isinstance(definition, str):
        if definition in MOCK_THETA_IDS:
            return Call(definition, (QVar(),))
        return parse(definition)
    raise TypeError(f"cannot evaluate {definition!r}")


def _default_eps(bits):
    return mpmath.mpf(2) ** (-int(bits) + 8)


def eval_series_numeric(definition, qval, bits: int = DEFAULT_BITS, eps=None, root: PrimitiveRoot | None = None):
    """Sum a defining series (mock theta name, MockThetaId or DSL tree) at ``qval``.

    The partial sum is accepted once a block-geometric bound on the tail is
    below ``eps``.  Cesàro definitions average the even and odd partial sums.
    """
    ctx = make_context(bits)
    eps = ctx.mpf(eps) if eps is not None else _default_eps(bits)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    q = to_complex(ctx, qval)
    _check_disk(ctx, q)
    node = _as_node(definition)
    if isinstance(node, Call) and node.name in MOCK_THETA_IDS and isinstance(node.args[0], QVar):
        if q == 0:
            mt = MOCK_THETA_IDS[node.name]
            return ctx.mpc(1 if mt.start == 0 and mt.exponent(0) == 0 else 0)
        value, bound, count, big = _series_family(ctx, MOCK_THETA_IDS[node.name], q, eps, _period_block(q, root))
        _check_floor(ctx, value, bound, count, big, eps)
        return value
    ev = NumericEvaluator(ctx, q, eps, root)
    value = ev.value(node)
    _check_floor(ctx, value, ctx.mpf(0), 1, ev.biggest, eps)
    return value


def _check_floor(ctx, value, bound, count, big, eps):
    rounding = (abs(value) + big) * count * ctx.mpf(2) ** (-ctx.prec)
    if bound + rounding > eps:
        raise PrecisionExhausted(
            f"tail bound {mpmath.nstr(bound + rounding, 3)} cannot reach {mpmath.nstr(eps, 3)} at {ctx.prec} bits"
        )


def eval_product_numeric(product, qval, bits: int = DEFAULT_BITS, eps=None, root: PrimitiveRoot | None = None):
    """Evaluate a product expression; truncation is controlled to relative ``eps``."""
    ctx = make_context(bits)
    eps = ctx.mpf(eps) if eps is not None else _default_eps(bits)
    node = _as_node(product)
    ev = NumericEvaluator(ctx, to_complex(ctx, qval), eps, root)
    ev.rel = min(ev.rel, eps / 16)
    return ev.value(node)


def eval_expression_numeric(expr, qval, bits: int = DEFAULT_BITS, eps=None, root: PrimitiveRoot | None = None):
    """Evaluate any DSL expression built from sums, products and named functions."""
    ctx = make_context(bits)
    eps = ctx.mpf(eps) if eps is not None else _default_eps(bits)
    ev = NumericEvaluator(ctx, to_complex(ctx, qval), eps, root)
    return ev.value(_as_node(expr))
