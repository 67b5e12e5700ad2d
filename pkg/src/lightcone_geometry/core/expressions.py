"""
Recursive-descent parser for chart expressions.

Grammar (whitespace-insensitive, ``^`` right-associative, function
application binds tighter than ``^``)::

    expression := term (('+' | '-') term)*
    term       := unary (('*' | '/') unary)*
    unary      := '-' unary | power
    power      := operand ('^' unary)?
    operand    := NUMBER | IDENT | IDENT '(' expression ')' | '(' expression ')'

Identifiers are ``u``, ``v``, ``pi`` and declared parameter names.  Parsing
yields an ``Expression`` whose ``evaluate`` accepts floats or ``Jet2`` values
for ``u`` and ``v``.
"""

from __future__ import annotations

import math
import re
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, Optional

from ..errors import ChartSyntaxError, JetDomainError
from . import jets

FUNCTIONS: Dict[str, Callable] = {
    "sin": jets.sin,
    "cos": jets.cos,
    "sinh": jets.sinh,
    "cosh": jets.cosh,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
}
CONSTANTS = {"pi": math.pi}
VARIABLES = ("u", "v")


class TokenType(str, Enum):
    NUMBER = "number"
    IDENT = "identifier"
    OPERATOR = "operator"
    LPAREN = "("
    RPAREN = ")"
    EOF = "end of expression"


class Token:
    __slots__ = ("type", "text", "offset")

    def __init__(self, type_: TokenType, text: str, offset: int):
        self.type = type_
        self.text = text
        self.offset = offset

    def __repr__(self):
        return f"Token({self.type.value}, {self.text!r}, @{self.offset})"


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^])"
    r"|(?P<lparen>\()"
    r"|(?P<rparen>\))"
    r")"
)


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if not m or m.end() == pos or m.lastgroup is None:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise _SourceError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        text = m.group(kind)
        if kind == "number":
            tokens.append(Token(TokenType.NUMBER, text, start))
        elif kind == "ident":
            tokens.append(Token(TokenType.IDENT, text, start))
        elif kind == "op":
            tokens.append(Token(TokenType.OPERATOR, text, start))
        elif kind == "lparen":
            tokens.append(Token(TokenType.LPAREN, text, start))
        else:
            tokens.append(Token(TokenType.RPAREN, text, start))
        pos = m.end()
    tokens.append(Token(TokenType.EOF, "", len(source)))
    return tokens


class _SourceError(Exception):
    """Syntax problem at an offset inside one expression string."""

    def __init__(self, message: str, offset: int):
        self.message = message
        self.offset = offset
        super().__init__(message)


Env = Mapping[str, object]
Node = Callable[[Env], object]


class Expression:
    """A compiled expression over u, v and named parameters."""

    def __init__(self, source: str, node: Node, identifiers: Iterable[str]):
        self.source = source
        self._node = node
        self.identifiers = frozenset(identifiers)

    def evaluate(self, u, v, params: Optional[Mapping[str, float]] = None):
        env = dict(params or {})
        env["u"] = u
        env["v"] = v
        return self._node(env)

    def __call__(self, u, v, params=None):
        return self.evaluate(u, v, params)

    def __repr__(self):
        return f"Expression({self.source!r})"


class _Parser:
    def __init__(self, source: str, names: frozenset):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0
        self.names = names
        self.used: set = set()

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, type_: TokenType) -> Token:
        tok = self.current
        if tok.type is not type_:
            found = tok.type.value if tok.type is TokenType.EOF else repr(tok.text)
            if type_ is TokenType.RPAREN:
                raise _SourceError(f"unbalanced parenthesis: expected ')' but found {found}", tok.offset)
            raise _SourceError(f"expected {type_.value} but found {found}", tok.offset)
        return self.advance()

    def parse(self) -> Node:
        node = self.expression()
        tok = self.current
        if tok.type is not TokenType.EOF:
            if tok.type is TokenType.RPAREN:
                raise _SourceError("unbalanced parenthesis: unexpected ')'", tok.offset)
            raise _SourceError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expression(self) -> Node:
        node = self.term()
        while self.current.type is TokenType.OPERATOR and self.current.text in "+-":
            op = self.advance().text
            rhs = self.term()
            node = _binary(op, node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.type is TokenType.OPERATOR and self.current.text in "*/":
            op = self.advance().text
            rhs = self.unary()
            node = _binary(op, node, rhs)
        return node

    def unary(self) -> Node:
        if self.current.type is TokenType.OPERATOR and self.current.text == "-":
            self.advance()
            operand = self.unary()
            return lambda env: -operand(env)
        if self.current.type is TokenType.OPERATOR and self.current.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.operand()
        if self.current.type is TokenType.OPERATOR and self.current.text == "^":
            self.advance()
            exponent = self.unary()
            return lambda env: _power(base(env), exponent(env))
        return base

    def operand(self) -> Node:
        tok = self.current
        if tok.type is TokenType.NUMBER:
            self.advance()
            value = float(tok.text)
            return lambda env: value
        if tok.type is TokenType.LPAREN:
            self.advance()
            node = self.expression()
            self.expect(TokenType.RPAREN)
            return node
        if tok.type is TokenType.IDENT:
            self.advance()
            name = tok.text
            if name in FUNCTIONS:
                if self.current.type is not TokenType.LPAREN:
                    raise _SourceError(f"function {name!r} needs parentheses", self.current.offset)
                self.advance()
                arg = self.expression()
                self.expect(TokenType.RPAREN)
                fn = FUNCTIONS[name]
                return lambda env: fn(arg(env))
            if name in CONSTANTS:
                value = CONSTANTS[name]
                return lambda env: value
            if name in VARIABLES or name in self.names:
                self.used.add(name)
                return lambda env: env[name]
            raise _SourceError(f"unknown identifier {name!r}", tok.offset)
        found = "end of expression" if tok.type is TokenType.EOF else repr(tok.text)
        raise _SourceError(f"expected a number, identifier or '(' but found {found}", tok.offset)


def _binary(op: str, lhs: Node, rhs: Node) -> Node:
    if op == "+":
        return lambda env: lhs(env) + rhs(env)
    if op == "-":
        return lambda env: lhs(env) - rhs(env)
    if op == "*":
        return lambda env: lhs(env) * rhs(env)
    return lambda env: _divide(lhs(env), rhs(env))


def _divide(a, b):
    if not isinstance(b, jets.Jet2) and b == 0:
        raise JetDomainError("division by zero")
    return a / b


def _power(base, exponent):
    if isinstance(base, jets.Jet2) or isinstance(exponent, jets.Jet2):
        return jets.power(base if isinstance(base, jets.Jet2) else jets.Jet2.constant(base, exponent.order), exponent)
    if base < 0 and not float(exponent).is_integer():
        raise JetDomainError(f"non-integer power of negative value {base:.3g}")
    return base ** exponent


def parse_expression(
    source: str,
    params: Iterable[str] = (),
    config_text: Optional[str] = None,
) -> Expression:
    """Compile ``source``; errors carry line/column inside ``config_text`` when given."""
    names = frozenset(params)
    try:
        parser = _Parser(source, names)
        node = parser.parse()
    except _SourceError as e:
        if config_text is not None:
            from ..config import expression_position
            line, col = expression_position(config_text, source, e.offset)
        else:
            line, col = 1, e.offset + 1
        raise ChartSyntaxError(e.message, line, col) from None
    return Expression(source, node, parser.used)
