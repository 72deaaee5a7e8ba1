"""Expression trees for the identity DSL."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gaussian import GaussianRational


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: GaussianRational


@dataclass(frozen=True)
class QVar(Node):
    pass


@dataclass(frozen=True)
class Var(Node):
    name: str
    pos: tuple = field(default=(None, None), compare=False, repr=False)


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * /
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: Node  # scalar expression, may mention summation indices


@dataclass(frozen=True)
class Poch(Node):
    """``(a_1, ..., a_k; base)_bound``; ``bound`` None means infinity."""

    args: tuple
    base: Node
    bound: Node | None


@dataclass(frozen=True)
class Sum(Node):
    """Sum over ``lo <= var <= hi``; a None bound is infinite."""

    var: str
    lo: int | None
    hi: int | None
    body: Node


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple
    pos: tuple = field(default=(None, None), compare=False, repr=False)


def walk(node: Node):
    """Yield every node of the tree, parents first."""
    yield node
    if isinstance(node, Neg):
        yield from walk(node.arg)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Pow):
        yield from walk(node.base)
        yield from walk(node.exp)
    elif isinstance(node, Poch):
        for a in node.args:
            yield from walk(a)
        yield from walk(node.base)
        if node.bound is not None:
            yield from walk(node.bound)
    elif isinstance(node, Sum):
        yield from walk(node.body)
    elif isinstance(node, Call):
        for a in node.args:
            yield from walk(a)


def free_vars(node: Node, bound: frozenset = frozenset()) -> set:
    """Names used in ``node`` that no enclosing sum binds."""
    if isinstance(node, Var):
        return set() if node.name in bound else {node.name}
    if isinstance(node, Sum):
        return free_vars(node.body, bound | {node.var})
    out = set()
    if isinstance(node, Neg):
        out |= free_vars(node.arg, bound)
    elif isinstance(node, BinOp):
        out |= free_vars(node.left, bound) | free_vars(node.right, bound)
    elif isinstance(node, Pow):
        out |= free_vars(node.base, bound) | free_vars(node.exp, bound)
    elif isinstance(node, Poch):
        for a in node.args:
            out |= free_vars(a, bound)
        out |= free_vars(node.base, bound)
        if node.bound is not None:
            out |= free_vars(node.bound, bound)
    elif isinstance(node, Call):
        for a in node.args:
            out |= free_vars(a, bound)
    return out


def normalize(node: Node) -> Node:
    """Rewrite ``a / (b * c)`` as ``(a / b) / c`` everywhere.

    Dividing by one factor at a time lets a reciprocal Pochhammer symbol that
    vanishes make its term zero instead of failing as a zero divisor.
    """
    if isinstance(node, BinOp):
        left, right = normalize(node.left), normalize(node.right)
        if node.op == "/" and isinstance(right, BinOp) and right.op == "*":
            return normalize(BinOp("/", BinOp("/", left, right.left), right.right))
        return BinOp(node.op, left, right)
    if isinstance(node, Neg):
        return Neg(normalize(node.arg))
    if isinstance(node, Pow):
        return Pow(normalize(node.base), node.exp)
    if isinstance(node, Poch):
        return Poch(tuple(normalize(a) for a in node.args), node.base, node.bound)
    if isinstance(node, Sum):
        return Sum(node.var, node.lo, node.hi, normalize(node.body))
    if isinstance(node, Call):
        return Call(node.name, tuple(normalize(a) for a in node.args), node.pos)
    return node
