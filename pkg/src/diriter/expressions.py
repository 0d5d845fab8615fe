"""Tiny closed expression grammar for nodal data in experiment configs.

Supported: numeric literals, the coordinates x and y, the constant pi,
sin / cos / exp / abs, |expr|, parentheses, unary minus, and + - * / ^.
Expressions compile to vectorized callables fn(x, y); no Python evaluation
of config text ever happens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()|]))"
)

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
_CONSTS = {"pi": np.pi}


class ExpressionError(ValueError):
    """Raised with a character position when an expression cannot be parsed."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            while pos < len(src) and src[pos].isspace():
                pos += 1
            if pos >= len(src):
                break
            raise ExpressionError(f"unexpected character {src[pos]!r}", pos)
        if m.group("num") is not None:
            tokens.append(_Token("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(_Token("name", m.group("name"), m.start("name")))
        else:
            op = "^" if m.group("op") == "**" else m.group("op")
            tokens.append(_Token("op", op, m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], src_len: int):
        self.tokens = tokens
        self.k = 0
        self.src_len = src_len

    def peek(self) -> _Token | None:
        return self.tokens[self.k] if self.k < len(self.tokens) else None

    def take(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ExpressionError("unexpected end of expression", self.src_len)
        self.k += 1
        return tok

    def expect_op(self, text: str):
        tok = self.take()
        if tok.kind != "op" or tok.text != text:
            raise ExpressionError(f"expected {text!r}", tok.pos)

    def expr(self):
        node = self.term()
        while (tok := self.peek()) and tok.kind == "op" and tok.text in "+-":
            self.take()
            rhs = self.term()
            node = (lambda a, b: lambda x, y: a(x, y) + b(x, y))(node, rhs) if tok.text == "+" else (
                lambda a, b: lambda x, y: a(x, y) - b(x, y)
            )(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while (tok := self.peek()) and tok.kind == "op" and tok.text in "*/":
            self.take()
            rhs = self.factor()
            node = (lambda a, b: lambda x, y: a(x, y) * b(x, y))(node, rhs) if tok.text == "*" else (
                lambda a, b: lambda x, y: a(x, y) / b(x, y)
            )(node, rhs)
        return node

    def factor(self):
        # unary minus binds looser than the power: -2^2 = -(2^2)
        tok = self.peek()
        if tok and tok.kind == "op" and tok.text == "-":
            self.take()
            inner = self.factor()
            return lambda x, y, a=inner: -a(x, y)
        return self.power()

    def power(self):
        base = self.primary()
        tok = self.peek()
        if tok and tok.kind == "op" and tok.text == "^":
            self.take()
            exponent = self.factor()  # right-associative
            return lambda x, y, a=base, b=exponent: a(x, y) ** b(x, y)
        return base

    def primary(self):
        tok = self.take()
        if tok.kind == "num":
            val = float(tok.text)
            return lambda x, y, v=val: v + 0.0 * x
        if tok.kind == "name":
            if tok.text == "x":
                return lambda x, y: x
            if tok.text == "y":
                return lambda x, y: y
            if tok.text in _CONSTS:
                val = _CONSTS[tok.text]
                return lambda x, y, v=val: v + 0.0 * x
            if tok.text in _FUNCS:
                fn = _FUNCS[tok.text]
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return lambda x, y, f=fn, a=inner: f(a(x, y))
            raise ExpressionError(f"unknown name {tok.text!r}", tok.pos)
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind == "op" and tok.text == "|":
            inner = self.expr()
            self.expect_op("|")
            return lambda x, y, a=inner: np.abs(a(x, y))
        raise ExpressionError(f"unexpected token {tok.text!r}", tok.pos)


def compile_expression(src: str):
    """Compile a data expression to a vectorized callable fn(x, y)."""
    tokens = _tokenize(src)
    if not tokens:
        raise ExpressionError("empty expression", 0)
    parser = _Parser(tokens, len(src))
    fn = parser.expr()
    if parser.peek() is not None:
        raise ExpressionError(f"trailing input {parser.peek().text!r}", parser.peek().pos)
    return fn
