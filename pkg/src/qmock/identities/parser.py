"""Lexer, recursive-descent parser and printer for the identity DSL.

Grammar (``#`` starts a line comment)::

    expr  := term (('+'|'-') term)*
    term  := unary (('*'|'/') unary)*
    unary := '-' unary | pow
    pow   := atom ('^' (snum | var | '(' expr ')'))?
    atom  := rnum | 'i' | 'q' | var | call | '(' expr ')'
    poch  := 'poch' '(' expr (',' expr)* ';' expr ';' bound ')'
    prod  := 'prod' '(' expr (',' expr)* ';' expr ')'
    sum   := 'sum' '(' var '=' lo '..' hi ',' expr ')'
    bound := 'inf' | expr

Named functions: jtp, j, J, Jbar, Jm, m, g2, g3 and every mock theta name.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ArityError, DSLSyntaxError
from ..gaussian import I, GaussianRational
from ..mocktheta import MOCK_THETA_IDS
from .ast import BinOp, Call, Neg, Node, Num, Poch, Pow, QVar, Sum, Var

__all__ = ["parse", "to_text", "tokenize", "ARITY"]

ARITY = {"j": 2, "J": 2, "Jbar": 2, "Jm": 1, "m": 3, "g2": 2, "g3": 2}
ARITY.update({name: 1 for name in MOCK_THETA_IDS})
RESERVED = {"poch", "prod", "sum", "jtp", "inf", "q", "i"}

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\.\.|[-+*/^(),;=]))")


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    out = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos:].strip() == "":
                break
            m = _TOKEN.match(line, pos)
            if m is None:
                col = len(line) - len(line[pos:].lstrip()) + 1
                raise DSLSyntaxError(f"unexpected character {line[col - 1]!r}", lineno, col)
            col = m.start(m.lastindex) + 1
            kind = ("INT", "NAME", "OP")[m.lastindex - 1]
            out.append(Token(kind, m.group(m.lastindex), lineno, col))
            pos = m.end()
    last_line = text.count("\n") + 1
    out.append(Token("EOF", "", last_line, len(text.split("\n")[-1]) + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # helpers -------------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise DSLSyntaxError(msg, tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.tok.kind in ("OP", "NAME") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        tok = self.tok
        if not self.accept(text):
            shown = tok.text or "end of input"
            self.fail(f"expected {text!r} but found {shown!r}", tok)
        return tok

    # grammar -------------------------------------------------------------
    def parse_all(self) -> Node:
        node = self.expr()
        if self.tok.kind != "EOF":
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "OP" and self.tok.text in "+-" and self.tok.text:
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "OP" and self.tok.text in ("*", "/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if not self.accept("^"):
            return base
        tok = self.tok
        if self.accept("("):
            exp = self.expr()
            self.expect(")")
        elif tok.kind == "OP" and tok.text == "-":
            self.i += 1
            if self.tok.kind != "INT":
                self.fail("expected an integer exponent")
            exp = Neg(Num(GaussianRational(int(self.tok.text))))
            self.i += 1
        elif tok.kind == "INT":
            exp = Num(GaussianRational(int(tok.text)))
            self.i += 1
        elif tok.kind == "NAME" and tok.text not in RESERVED:
            exp = Var(tok.text, (tok.line, tok.col))
            self.i += 1
        else:
            self.fail("expected an exponent: signed integer, variable or parenthesized expression")
        return Pow(base, exp)

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "INT":
            self.i += 1
            value = Fraction(int(tok.text))
            # rnum := integer '/' integer binds tighter than division
            if self.tok.text == "/" and self.peek().kind == "INT" and self.peek(2).text != "^":
                self.i += 1
                value /= int(self.tok.text)
                self.i += 1
            return Num(GaussianRational(value))
        if tok.kind == "NAME":
            name = tok.text
            if name == "q":
                self.i += 1
                return QVar()
            if name == "i":
                self.i += 1
                return Num(I)
            if self.peek().text == "(" and self.peek().kind == "OP":
                return self.call()
            if name in RESERVED or name in ARITY:
                self.fail(f"{name!r} cannot be used as a variable")
            self.i += 1
            return Var(name, (tok.line, tok.col))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {tok.text or 'end of input'!r}")

    def sections(self) -> list[list[Node]]:
        """Arguments of a call, grouped by ';'."""
        groups = [[]]
        if self.tok.text == ")":
            self.i += 1
            return [[]]
        while True:
            if self.tok.kind == "NAME" and self.tok.text == "inf" and self.peek().text in (")", ";", ","):
                self.i += 1
                groups[-1].append(None)
            else:
                groups[-1].append(self.expr())
            if self.accept(","):
                continue
            if self.accept(";"):
                groups.append([])
                continue
            self.expect(")")
            return groups

    def call(self) -> Node:
        tok = self.tok
        name = tok.text
        self.i += 2  # name and '('
        if name == "sum":
            return self.sum_tail(tok)
        if name == "jtp":
            return self.jtp_tail(tok)
        groups = self.sections()
        if name == "poch":
            if len(groups) != 3 or not groups[0] or len(groups[1]) != 1 or len(groups[2]) != 1:
                raise ArityError("poch takes (a, ...; base; bound)", tok.line, tok.col)
            if any(a is None for a in groups[0] + groups[1]):
                raise DSLSyntaxError("'inf' is only allowed as a bound", tok.line, tok.col)
            return Poch(tuple(groups[0]), groups[1][0], groups[2][0])
        if name == "prod":
            if len(groups) != 2 or not groups[0] or len(groups[1]) != 1:
                raise ArityError("prod takes (a, ...; base)", tok.line, tok.col)
            if any(a is None for a in groups[0] + groups[1]):
                raise ArityError("prod takes (a, ...; base) and is always infinite", tok.line, tok.col)
            return Poch(tuple(groups[0]), groups[1][0], None)
        if name not in ARITY:
            raise DSLSyntaxError(f"unknown function {name!r}", tok.line, tok.col)
        if len(groups) != 1 or any(a is None for a in groups[0]):
            raise ArityError(f"{name} takes comma-separated arguments", tok.line, tok.col)
        args = groups[0]
        if len(args) != ARITY[name]:
            raise ArityError(
                f"{name} takes {ARITY[name]} argument{'s' if ARITY[name] != 1 else ''}, got {len(args)}",
                tok.line,
                tok.col,
            )
        return Call(name, tuple(args), (tok.line, tok.col))

    def jtp_tail(self, tok) -> Node:
        """``jtp(z=x)`` expands to ``(x q, q/x, q^2; q^2)_inf``."""
        if self.tok.kind == "NAME" and self.tok.text == "z" and self.peek().text == "=":
            self.i += 2
        z = self.expr()
        if self.tok.text != ")":
            raise ArityError("jtp takes exactly one argument z", tok.line, tok.col)
        self.expect(")")
        q2 = Pow(QVar(), Num(GaussianRational(2)))
        return Poch((BinOp("*", z, QVar()), BinOp("/", QVar(), z), q2), q2, None)

    def sum_bound(self):
        if self.accept("inf"):
            return None, 1
        if self.tok.text == "-" and self.peek().text == "inf":
            self.i += 2
            return None, -1
        neg = self.accept("-")
        if self.tok.kind != "INT":
            self.fail("sum bounds are signed integers or +-inf")
        v = int(self.tok.text)
        self.i += 1
        return (-v if neg else v), 0

    def sum_tail(self, tok) -> Node:
        vt = self.tok
        if vt.kind != "NAME" or vt.text in RESERVED or vt.text in ARITY:
            self.fail("expected a summation variable")
        self.i += 1
        self.expect("=")
        lo, lo_inf = self.sum_bound()
        self.expect("..")
        hi, hi_inf = self.sum_bound()
        if lo_inf == 1 or hi_inf == -1:
            self.fail("sum runs from a lower bound up to an upper bound")
        self.expect(",")
        body = self.expr()
        self.expect(")")
        return Sum(vt.text, lo, hi, body)


def parse(text: str) -> Node:
    """Parse DSL text into an expression tree."""
    return _Parser(text).parse_all()


# ----------------------------------------------------------------------
# printing


def _num_text(v: GaussianRational) -> str:
    if v == I:
        return "i"
    if v.im:
        raise ValueError("only real and i literals are printable")
    r = v.re
    if r.denominator == 1 and r >= 0:
        return str(r.numerator)
    return f"({r})" if r.denominator == 1 else f"({r.numerator}/{r.denominator})"


def to_text(node: Node) -> str:
    """Fully parenthesized normal form; ``parse(to_text(t)) == t``."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, QVar):
        return "q"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"-{_wrap(node.arg)}"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"{_wrap(node.base)}^({to_text(node.exp)})"
    if isinstance(node, Poch):
        args = ", ".join(to_text(a) for a in node.args)
        bound = "inf" if node.bound is None else to_text(node.bound)
        return f"poch({args}; {to_text(node.base)}; {bound})"
    if isinstance(node, Sum):
        lo = "-inf" if node.lo is None else str(node.lo)
        hi = "inf" if node.hi is None else str(node.hi)
        return f"sum({node.var}={lo}..{hi}, {to_text(node.body)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def _wrap(node: Node) -> str:
    text = to_text(node)
    if isinstance(node, (Num, QVar, Var, Call, Poch, Sum, BinOp)) and not text.startswith("-"):
        return text
    return f"({text})"
