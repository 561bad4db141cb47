"""Small arithmetic expression language in ``x`` and ``y``.

Grammar::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Names are ``x``, ``y``, ``pi`` and ``e``; functions are ``exp``, ``log``,
``cos``, ``sin`` and ``sqrt``.  Evaluation broadcasts over numpy arrays and
never calls ``eval``.  Expressions can be differentiated symbolically, which
is how custom metrics obtain the gradient of their conformal factor.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import ExpressionError

VARIABLES = ("x", "y")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "cos": np.cos,
    "sin": np.sin,
    "sqrt": np.sqrt,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError("unexpected character", text, pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ExpressionError(f"expected {value!r}", self.text, pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {val!r}", self.text, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = ("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return ("pow", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", val, arg)
            if val in VARIABLES:
                return ("var", val)
            if val in CONSTANTS:
                return ("num", CONSTANTS[val])
            raise ExpressionError(f"unknown symbol {val!r}", self.text, pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExpressionError("unexpected end of expression", self.text, pos)
        raise ExpressionError(f"unexpected token {val!r}", self.text, pos)


def _num(v):
    return ("num", float(v))


def _is_num(node, value=None):
    return node[0] == "num" and (value is None or node[1] == value)


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return _num(a[1] + b[1])
    return ("add", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if _is_num(a) and _is_num(b):
        return _num(a[1] - b[1])
    return ("sub", a, b)


def _neg(a):
    if _is_num(a):
        return _num(-a[1])
    if a[0] == "neg":
        return a[1]
    return ("neg", a)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return _num(a[1] * b[1])
    return ("mul", a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return _num(0.0)
    if _is_num(b, 1.0):
        return a
    return ("div", a, b)


def _derive(node, var):
    tag = node[0]
    if tag == "num":
        return _num(0.0)
    if tag == "var":
        return _num(1.0 if node[1] == var else 0.0)
    if tag == "neg":
        return _neg(_derive(node[1], var))
    if tag in ("add", "sub"):
        da, db = _derive(node[1], var), _derive(node[2], var)
        return _add(da, db) if tag == "add" else _sub(da, db)
    if tag == "mul":
        a, b = node[1], node[2]
        return _add(_mul(_derive(a, var), b), _mul(a, _derive(b, var)))
    if tag == "div":
        a, b = node[1], node[2]
        num = _sub(_mul(_derive(a, var), b), _mul(a, _derive(b, var)))
        return _div(num, ("pow", b, _num(2.0)))
    if tag == "pow":
        a, b = node[1], node[2]
        da, db = _derive(a, var), _derive(b, var)
        if _is_num(db, 0.0):
            # d(a^k) = k a^(k-1) da
            return _mul(_mul(b, ("pow", a, _sub(b, _num(1.0)))), da)
        # d(a^b) = a^b (db log a + b da / a)
        inner = _add(_mul(db, ("call", "log", a)), _div(_mul(b, da), a))
        return _mul(node, inner)
    if tag == "call":
        name, a = node[1], node[2]
        da = _derive(a, var)
        if _is_num(da, 0.0):
            return _num(0.0)
        if name == "exp":
            outer = node
        elif name == "log":
            outer = _div(_num(1.0), a)
        elif name == "cos":
            outer = _neg(("call", "sin", a))
        elif name == "sin":
            outer = ("call", "cos", a)
        elif name == "sqrt":
            outer = _div(_num(0.5), node)
        else:  # pragma: no cover - parser rejects other names
            raise ExpressionError(f"cannot differentiate {name}")
        return _mul(outer, da)
    raise ExpressionError(f"bad node {tag}")  # pragma: no cover


def _evaluate(node, x, y):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return x if node[1] == "x" else y
    if tag == "neg":
        return -_evaluate(node[1], x, y)
    if tag == "call":
        return FUNCTIONS[node[1]](_evaluate(node[2], x, y))
    a = _evaluate(node[1], x, y)
    b = _evaluate(node[2], x, y)
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div":
        return a / b
    return np.power(a, b)


def _symbols(node, out):
    if node[0] == "var":
        out.add(node[1])
    for child in node[1:]:
        if isinstance(child, tuple):
            _symbols(child, out)
    return out


class Expr:
    """A parsed expression.  Call it with ``x, y`` (scalars or arrays)."""

    __slots__ = ("text", "_node")

    def __init__(self, text, node=None):
        self.text = text
        self._node = node if node is not None else _Parser(text).parse()

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            value = _evaluate(self._node, x, y)
        return np.broadcast_to(np.asarray(value, dtype=float), np.broadcast(x, y).shape).copy()

    def diff(self, var):
        if var not in VARIABLES:
            raise ExpressionError(f"cannot differentiate with respect to {var!r}")
        return Expr(f"d({self.text})/d{var}", _derive(self._node, var))

    @property
    def symbols(self):
        return frozenset(_symbols(self._node, set()))

    def __repr__(self):
        return f"Expr({self.text!r})"


def parse(text):
    """Parse ``text`` into an :class:`Expr`; raises ExpressionError."""
    if not isinstance(text, str):
        raise ExpressionError(f"expression must be a string, got {type(text).__name__}")
    return Expr(text)
