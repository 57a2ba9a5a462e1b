"""A small arithmetic expression language for coefficients, sources and jumps.

Grammar (lowest to highest precedence)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

``x`` and ``y`` are coordinates; every other name is a parameter looked up
at evaluation time. Trees are immutable and can be shared freely.

Evaluation of plain floats goes through :mod:`math`; NumPy arrays are
evaluated elementwise with the matching ufuncs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .exceptions import (
    ExprDomainError,
    ExprSyntaxError,
    UnboundNameError,
    UnknownFunctionError,
)

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Param",
    "Neg",
    "BinOp",
    "Call",
    "FUNCTIONS",
    "parse",
    "unparse",
    "evaluate",
    "as_expr",
]

COORDINATES = ("x", "y")

_SCALAR_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}
_ARRAY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
FUNCTIONS = frozenset(_SCALAR_FUNCS)


class Expr:
    """Base class of all syntax tree nodes."""

    __slots__ = ()

    def __str__(self):
        return unparse(self)

    def evaluate(self, point=None, params=None):
        return evaluate(self, point, params)

    def names(self) -> frozenset:
        """Parameter names referenced by the tree (coordinates excluded)."""
        out = set()
        _collect_names(self, out)
        return frozenset(out)

    def uses(self, coordinate: str) -> bool:
        return _uses(self, coordinate)


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True, repr=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True, repr=True)
class Param(Expr):
    name: str


@dataclass(frozen=True, eq=True, repr=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True, eq=True, repr=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Call(Expr):
    func: str
    arg: Expr


def _collect_names(node, out):
    if isinstance(node, Param):
        out.add(node.name)
    elif isinstance(node, Neg):
        _collect_names(node.operand, out)
    elif isinstance(node, BinOp):
        _collect_names(node.left, out)
        _collect_names(node.right, out)
    elif isinstance(node, Call):
        _collect_names(node.arg, out)


def _uses(node, coordinate):
    if isinstance(node, Var):
        return node.name == coordinate
    if isinstance(node, Neg):
        return _uses(node.operand, coordinate)
    if isinstance(node, BinOp):
        return _uses(node.left, coordinate) or _uses(node.right, coordinate)
    if isinstance(node, Call):
        return _uses(node.arg, coordinate)
    return False


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int  # character index


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", _byte_offset(source, pos), source
            )
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


def _byte_offset(source, pos):
    return len(source[:pos].encode("utf-8"))


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None, cls=ExprSyntaxError):
        tok = tok or self.tok
        return cls(message, _byte_offset(self.source, tok.pos), self.source)

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def at_op(self, *ops):
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            if self.at_op(")"):
                raise self.error("unbalanced parentheses: unexpected ')'")
            raise self.error(f"unexpected token {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.at_op("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error(f"numeric literal {tok.text!r} out of range", tok)
            return Num(value)
        if tok.kind == "name":
            self.advance()
            if self.at_op("("):
                if tok.text not in FUNCTIONS:
                    raise self.error(f"unknown function {tok.text!r}", tok, UnknownFunctionError)
                open_tok = self.advance()
                arg = self.expr()
                if not self.at_op(")"):
                    raise self.error("unbalanced parentheses: missing ')'", open_tok)
                self.advance()
                return Call(tok.text, arg)
            if tok.text in FUNCTIONS:
                raise self.error(f"function {tok.text!r} used without arguments", tok)
            if tok.text in COORDINATES:
                return Var(tok.text)
            return Param(tok.text)
        if self.at_op("("):
            open_tok = self.advance()
            node = self.expr()
            if not self.at_op(")"):
                raise self.error("unbalanced parentheses: missing ')'", open_tok)
            self.advance()
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of expression")
        if self.at_op(")"):
            raise self.error("unbalanced parentheses: unexpected ')'")
        raise self.error(f"unexpected token {tok.text!r}")


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with a byte ``offset``) on malformed
    input, including unbalanced parentheses, and
    :class:`UnknownFunctionError` for calls to unsupported functions.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0, source)
    return _Parser(source).parse()


def as_expr(value) -> Expr:
    """Coerce a string, number or tree to an :class:`Expr`."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(value, bool):
        value = float(value)
        if value < 0:
            return Neg(Num(-value))
        return Num(value)
    raise TypeError(f"cannot interpret {value!r} as an expression")


# ----------------------------------------------------------------- unparser


def unparse(expr: Expr) -> str:
    """Render a tree as source text; binary operations are parenthesized."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, (Var, Param)):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{unparse(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({unparse(expr.left)} {expr.op} {unparse(expr.right)})"
    if isinstance(expr, Call):
        return f"{expr.func}({unparse(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


# ---------------------------------------------------------------- evaluator


def _bind_point(point):
    if point is None:
        return {}
    if isinstance(point, Mapping):
        return dict(point)
    if isinstance(point, (tuple, list)):
        return dict(zip(COORDINATES, point))
    return {"x": point}


def evaluate(expr: Expr, point=None, params: Mapping[str, float] | None = None):
    """Evaluate ``expr`` at ``point``.

    ``point`` may be a scalar (bound to ``x``), a ``(x, y)`` tuple or a
    mapping. Coordinates may be NumPy arrays, in which case the result is
    an array of the broadcast shape.
    """
    env = _bind_point(point)
    params = params or {}
    vectorized = any(isinstance(v, np.ndarray) for v in env.values())
    if vectorized:
        env = {k: np.asarray(v, dtype=float) for k, v in env.items()}
        return _eval_array(expr, env, params)
    env = {k: float(v) for k, v in env.items()}
    return _eval_scalar(expr, env, params)


def _lookup(node, env, params):
    table = env if isinstance(node, Var) else params
    try:
        return table[node.name]
    except KeyError:
        raise UnboundNameError(node.name) from None


def _eval_scalar(node, env, params):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, (Var, Param)):
        return float(_lookup(node, env, params))
    if isinstance(node, Neg):
        return -_eval_scalar(node.operand, env, params)
    if isinstance(node, BinOp):
        a = _eval_scalar(node.left, env, params)
        b = _eval_scalar(node.right, env, params)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise ExprDomainError("division by zero", node)
            return a / b
        try:
            return math.pow(a, b)
        except OverflowError:
            raise ExprDomainError("overflow", node) from None
        except ValueError:
            reason = "division by zero" if a == 0 else "non-integer power of a negative base"
            raise ExprDomainError(reason, node) from None
    if isinstance(node, Call):
        a = _eval_scalar(node.arg, env, params)
        _check_call(node.func, a, node)
        try:
            return float(_SCALAR_FUNCS[node.func](a))
        except OverflowError:
            raise ExprDomainError("overflow", node) from None
        except ValueError:
            raise ExprDomainError(f"{node.func} undefined at {a!r}", node) from None
    raise TypeError(f"not an expression node: {node!r}")


def _check_call(func, a, node):
    if func == "log" and a <= 0:
        raise ExprDomainError("log of a non-positive value", node)
    if func == "sqrt" and a < 0:
        raise ExprDomainError("sqrt of a negative value", node)


def _eval_array(node, env, params):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, (Var, Param)):
        return np.asarray(_lookup(node, env, params), dtype=float)
    if isinstance(node, Neg):
        return -_eval_array(node.operand, env, params)
    if isinstance(node, BinOp):
        a = _eval_array(node.left, env, params)
        b = _eval_array(node.right, env, params)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if np.any(b == 0.0):
                raise ExprDomainError("division by zero", node)
            return a / b
        finite_b = np.isfinite(b)
        if np.any(np.isfinite(a) & (a < 0) & finite_b & (b != np.floor(np.where(finite_b, b, 0)))):
            raise ExprDomainError("non-integer power of a negative base", node)
        if np.any((a == 0) & (b < 0) & finite_b):
            raise ExprDomainError("division by zero", node)
        return _array_call(np.power, node, a, b)
    if isinstance(node, Call):
        a = _eval_array(node.arg, env, params)
        if node.func == "log" and np.any(a <= 0):
            raise ExprDomainError("log of a non-positive value", node)
        if node.func == "sqrt" and np.any(a < 0):
            raise ExprDomainError("sqrt of a negative value", node)
        return _array_call(_ARRAY_FUNCS[node.func], node, a)
    raise TypeError(f"not an expression node: {node!r}")


def _array_call(func, node, *args):
    # mirror the scalar path: overflow is an error, not a silent inf
    try:
        with np.errstate(over="raise", invalid="ignore"):
            return func(*args)
    except FloatingPointError:
        raise ExprDomainError("overflow", node) from None
