"""Tiny arithmetic expression parser for user-supplied scalar coefficients.

Grammar (recursive descent, ^ is right-associative exponentiation):

    expr    := term (('+'|'-') term)*
    term    := unary (('*'|'/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'

Supported functions: sin, cos, exp, log, sqrt, abs.  The single variable
name is configurable ('t' for coefficients, 'r' for radial sources).
Compiled expressions evaluate vectorized over numpy arrays.
"""

from __future__ import annotations

import numpy as np

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


class ExpressionError(ValueError):
    pass


def _tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "+-*/^()":
            tokens.append(c)
            i += 1
        elif c.isdigit() or c == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in ".eE" or
                                     (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            try:
                tokens.append(float(text[i:j]))
            except ValueError:
                raise ExpressionError(f"bad number near '{text[i:j]}'")
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise ExpressionError(f"unexpected character {c!r}")
    return tokens


class _Parser:
    def __init__(self, tokens, var):
        self.tokens = tokens
        self.pos = 0
        self.var = var

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, tok):
        if self.next() != tok:
            raise ExpressionError(f"expected {tok!r}")

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ExpressionError(f"trailing input near {self.peek()!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.next()
            rhs = self.term()
            node = (np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.next()
            rhs = self.unary()
            node = (np.multiply if op == "*" else np.divide, node, rhs)
        return node

    def unary(self):
        if self.peek() == "-":
            self.next()
            return (np.negative, self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.next()
            return (np.power, base, self.unary())
        return base

    def atom(self):
        tok = self.next()
        if isinstance(tok, float):
            return tok
        if tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        if isinstance(tok, str):
            if tok == self.var:
                return "VAR"
            if tok in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return (_FUNCS[tok], arg)
            raise ExpressionError(f"unknown name {tok!r} (variable is {self.var!r})")
        raise ExpressionError("unexpected end of expression")


def _evaluate(node, x):
    if node == "VAR":
        return x
    if isinstance(node, float):
        return node
    op, *args = node
    return op(*(_evaluate(a, x) for a in args))


def compile_expression(text, var="t"):
    """Compile an expression string into a vectorized callable of one variable."""
    tree = _Parser(_tokenize(text), var).parse()
    # Fail early on syntax-valid but numerically broken expressions.
    with np.errstate(all="ignore"):
        _evaluate(tree, np.asarray([1.0]))

    def func(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _evaluate(tree, x)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy() \
            if np.ndim(out) != np.ndim(x) or np.shape(out) != np.shape(x) else out

    func.expression = text
    return func
