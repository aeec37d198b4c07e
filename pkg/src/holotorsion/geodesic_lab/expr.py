"""Expressions in ``u`` and ``v``: parser, symbolic derivative, evaluation
and compilation to register bytecode.

Grammar (both ``sin(x)`` and ``Sin[x]`` spellings are accepted)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/' | <juxtaposition>) unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' integer)?
    atom   := number | 'u' | 'v' | 'pi' | func '(' expr ')' | '(' expr ')'

Juxtaposition ``(2+cos(v))cos(u)`` and ``2u`` mean multiplication.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ParseError

__all__ = [
    "Expr", "Num", "Sym", "Add", "Sub", "Mul", "Div", "Neg", "Pow", "Func",
    "parse_expr", "parse_triple", "differentiate", "evaluate", "compile_program",
    "OPCODES", "num", "add", "sub", "mul", "div", "neg", "power", "func",
]


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        return power(self, n)

    def __str__(self):
        return _fmt(self)

    def diff(self, var: str) -> "Expr":
        return differentiate(self, var)

    def __call__(self, u, v):
        return evaluate(self, u, v)


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: Fraction


@dataclass(frozen=True, eq=True)
class Sym(Expr):
    name: str  # 'u', 'v' or 'pi'


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str  # 'sin' or 'cos'
    arg: Expr


# -- constructors with constant folding and 0/1 elimination ----------------

ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def num(x) -> Num:
    return Num(Fraction(x))


def _wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return num(x)
    raise TypeError(f"cannot combine Expr with {type(x).__name__}")


def _is(e: Expr, value) -> bool:
    return isinstance(e, Num) and e.value == value


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(b, Neg):
        return add(a, b.arg)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        raise ZeroDivisionError("division by the constant 0")
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value / b.value)
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise TypeError("exponents must be integers")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Num):
        if a.value == 0 and n < 0:
            raise ZeroDivisionError("0 to a negative power")
        return Num(a.value ** n)
    return Pow(a, n)


def func(name: str, a: Expr) -> Expr:
    if isinstance(a, Num) and a.value == 0:
        return ZERO if name == "sin" else ONE
    return Func(name, a)


# -- derivative -------------------------------------------------------------


def differentiate(e: Expr, var: str) -> Expr:
    if var not in ("u", "v"):
        raise ValueError("can only differentiate with respect to u or v")
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == var else ZERO
    if isinstance(e, Add):
        return add(differentiate(e.left, var), differentiate(e.right, var))
    if isinstance(e, Sub):
        return sub(differentiate(e.left, var), differentiate(e.right, var))
    if isinstance(e, Mul):
        return add(mul(differentiate(e.left, var), e.right), mul(e.left, differentiate(e.right, var)))
    if isinstance(e, Div):
        da, db = differentiate(e.left, var), differentiate(e.right, var)
        if _is(db, 0):
            return div(da, e.right)
        return div(sub(mul(da, e.right), mul(e.left, db)), power(e.right, 2))
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, var))
    if isinstance(e, Pow):
        db = differentiate(e.base, var)
        return mul(mul(num(e.exponent), power(e.base, e.exponent - 1)), db)
    if isinstance(e, Func):
        da = differentiate(e.arg, var)
        outer = func("cos", e.arg) if e.name == "sin" else neg(func("sin", e.arg))
        return mul(outer, da)
    raise TypeError(f"not an expression: {e!r}")


# -- evaluation -------------------------------------------------------------


def evaluate(e: Expr, u, v):
    """Float value at ``(u, v)``; numpy arrays broadcast element-wise."""
    out = _eval(e, u, v)
    if np.ndim(u) or np.ndim(v):
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(u, v).shape).copy()
    return float(out)


def _eval(e: Expr, u, v):
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Sym):
        return u if e.name == "u" else v if e.name == "v" else math.pi
    if isinstance(e, Add):
        return _eval(e.left, u, v) + _eval(e.right, u, v)
    if isinstance(e, Sub):
        return _eval(e.left, u, v) - _eval(e.right, u, v)
    if isinstance(e, Mul):
        return _eval(e.left, u, v) * _eval(e.right, u, v)
    if isinstance(e, Div):
        return _eval(e.left, u, v) / _eval(e.right, u, v)
    if isinstance(e, Neg):
        return -_eval(e.arg, u, v)
    if isinstance(e, Pow):
        return _eval(e.base, u, v) ** e.exponent
    if isinstance(e, Func):
        return (np.sin if e.name == "sin" else np.cos)(_eval(e.arg, u, v))
    raise TypeError(f"not an expression: {e!r}")


# -- bytecode ---------------------------------------------------------------

OPCODES = {"CONST": 0, "U": 1, "V": 2, "ADD": 3, "SUB": 4, "MUL": 5, "DIV": 6,
           "NEG": 7, "POWI": 8, "SIN": 9, "COS": 10}
_BINOPS = {Add: "ADD", Sub: "SUB", Mul: "MUL", Div: "DIV"}


def compile_program(exprs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compile expressions into one register program with shared subexpressions.

    Instruction ``i`` is ``(op, a, b)`` and writes register ``i``; ``a`` and
    ``b`` name earlier registers, except for CONST (``a`` indexes ``consts``)
    and POWI (``b`` is the exponent).  Returns ``(code, consts, outputs)``
    where ``outputs[k]`` is the register holding ``exprs[k]``.
    """
    code: list = []
    consts: list = []
    memo: dict = {}

    def emit(node) -> int:
        reg = memo.get(node)
        if reg is not None:
            return reg
        if isinstance(node, Num) or (isinstance(node, Sym) and node.name == "pi"):
            consts.append(math.pi if isinstance(node, Sym) else float(node.value))
            ins = (OPCODES["CONST"], len(consts) - 1, 0)
        elif isinstance(node, Sym):
            ins = (OPCODES[node.name.upper()], 0, 0)
        elif type(node) in _BINOPS:
            ins = (OPCODES[_BINOPS[type(node)]], emit(node.left), emit(node.right))
        elif isinstance(node, Neg):
            ins = (OPCODES["NEG"], emit(node.arg), 0)
        elif isinstance(node, Pow):
            ins = (OPCODES["POWI"], emit(node.base), node.exponent)
        elif isinstance(node, Func):
            ins = (OPCODES[node.name.upper()], emit(node.arg), 0)
        else:
            raise TypeError(f"not an expression: {node!r}")
        code.append(ins)
        memo[node] = len(code) - 1
        return memo[node]

    outputs = [emit(e) for e in exprs]
    return (
        np.array(code, dtype=np.int32).reshape(-1, 3),
        np.array(consts or [0.0], dtype=np.float64),
        np.array(outputs, dtype=np.int32),
    )


# -- printing ---------------------------------------------------------------


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return 1
    if isinstance(e, (Mul, Div)):
        return 2
    if isinstance(e, Num):
        if e.value < 0:
            return 3
        return 5 if e.value.denominator == 1 else 2
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def _fmt(e: Expr) -> str:
    def wrap(x, min_prec, strict=False):
        s = _fmt(x)
        p = _prec(x)
        return f"({s})" if p < min_prec or (strict and p == min_prec) else s

    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Add):
        return f"{wrap(e.left, 1)}+{wrap(e.right, 1)}"
    if isinstance(e, Sub):
        return f"{wrap(e.left, 1)}-{wrap(e.right, 1, strict=True)}"
    if isinstance(e, Mul):
        return f"{wrap(e.left, 2)}*{wrap(e.right, 2, strict=True)}"
    if isinstance(e, Div):
        return f"{wrap(e.left, 2)}/{wrap(e.right, 2, strict=True)}"
    if isinstance(e, Neg):
        return f"-{wrap(e.arg, 3)}"
    if isinstance(e, Pow):
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{wrap(e.base, 5)}^{exp}"
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg)})"
    raise TypeError(repr(e))


# -- parser -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_]\w*)|(?P<op>[-+*/^(),\[\]{}]))")
_FUNCS = {"sin": "sin", "Sin": "sin", "cos": "cos", "Cos": "cos"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
            start = m.start(m.lastgroup)
            kind = m.lastgroup
            tok = m.group(kind)
            if kind == "num" and m.end() < len(text) and (text[m.end()] == "." or text[m.end()].isdigit()):
                raise ParseError(f"malformed number {text[start:m.end() + 1]!r}", position=start)
            self.tokens.append((kind, tok, start))
            pos = m.end()
        self.i = 0

    # helpers
    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, *ops):
        kind, tok, pos = self.next()
        if kind != "op" or tok not in ops:
            what = "end of input" if kind == "eof" else repr(tok)
            raise ParseError(f"expected {' or '.join(map(repr, ops))}, found {what} at position {pos}", position=pos)
        return tok

    def fail(self, msg):
        kind, tok, pos = self.peek()
        what = "end of input" if kind == "eof" else repr(tok)
        raise ParseError(f"{msg}, found {what} at position {pos}", position=pos)

    # grammar
    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, tok, _ = self.peek()
            if kind == "op" and tok in "+-":
                self.next()
                r = self.term()
                e = add(e, r) if tok == "+" else sub(e, r)
            else:
                return e

    def _starts_atom(self) -> bool:
        kind, tok, _ = self.peek()
        return kind in ("num", "id") or (kind == "op" and tok == "(")

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, tok, _ = self.peek()
            if kind == "op" and tok in "*/":
                self.next()
                r = self.unary()
                e = mul(e, r) if tok == "*" else div(e, r)
            elif self._starts_atom():
                e = mul(e, self.power())
            else:
                return e

    def unary(self) -> Expr:
        kind, tok, _ = self.peek()
        if kind == "op" and tok in "+-":
            self.next()
            e = self.unary()
            return e if tok == "+" else neg(e)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, tok, _ = self.peek()
        if kind == "op" and tok == "^":
            self.next()
            return power(base, self.integer())
        return base

    def integer(self) -> int:
        sign = 1
        kind, tok, pos = self.peek()
        paren = kind == "op" and tok == "("
        if paren:
            self.next()
            kind, tok, pos = self.peek()
        if kind == "op" and tok in "+-":
            self.next()
            sign = -1 if tok == "-" else 1
            kind, tok, pos = self.peek()
        if kind != "num" or not tok.isdigit():
            self.fail("exponent must be an integer")
        self.next()
        if paren:
            self.expect(")")
        return sign * int(tok)

    def atom(self) -> Expr:
        kind, tok, pos = self.next()
        if kind == "num":
            return Num(Fraction(tok))
        if kind == "id":
            if tok in ("u", "v"):
                return Sym(tok)
            if tok in ("pi", "Pi"):
                return Sym("pi")
            if tok in _FUNCS:
                k2, t2, p2 = self.peek()
                if k2 != "op" or t2 not in "([":
                    raise ParseError(f"function {tok!r} needs an argument at position {p2}", position=p2)
                self.next()
                close = ")" if t2 == "(" else "]"
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                if len(args) != 1:
                    raise ParseError(f"{tok} takes 1 argument, got {len(args)}", position=pos)
                self.expect(close)
                return func(_FUNCS[tok], args[0])
            raise ParseError(f"unknown identifier {tok!r} at position {pos}", position=pos)
        if kind == "op" and tok == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "eof" else repr(tok)
        raise ParseError(f"unexpected {what} at position {pos}", position=pos)

    def at_end(self):
        if self.peek()[0] != "eof":
            self.fail("trailing input")


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.at_end()
    return e


def parse_triple(text: str) -> tuple[Expr, Expr, Expr]:
    """``(x, y, z)`` or ``{x, y, z}``."""
    p = _Parser(text)
    opener = p.expect("(", "{")
    close = ")" if opener == "(" else "}"
    parts = [p.expr()]
    for _ in range(2):
        p.expect(",")
        parts.append(p.expr())
    p.expect(close)
    p.at_end()
    return tuple(parts)
