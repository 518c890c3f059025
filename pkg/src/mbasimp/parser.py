"""Text to expression tree.

Grammar, loosest binding first::

    expr   := xor ('|' xor)*
    xor    := and ('^' and)*
    and    := sum ('&' sum)*
    sum    := prod (('+' | '-') prod)*
    prod   := unary ('*' unary)*
    unary  := ('~' | '-') unary | atom
    atom   := NUMBER | IDENT | '(' expr ')'

All binary operators are left associative. ``NUMBER`` is decimal or ``0x``
hex. A ``-`` directly followed by a number is read as a single negative
literal and stored as its two's-complement word, so ``x&-1112`` holds the
constant ``2**w - 1112``.
"""

from __future__ import annotations

import re

from .expr import Binary, Const, Expr, Unary, Var, check_width, mask_of

_TOKEN = re.compile(
    r"\s*(?:(?P<num>0[xX][0-9a-fA-F]+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*&|^~()]))"
)

# binary operator -> binding level (higher binds tighter)
_LEVELS = {"|": 1, "^": 2, "&": 3, "+": 4, "-": 4, "*": 5}


class ParseError(ValueError):
    def __init__(self, position: int, message: str):
        super().__init__(f"{message} at offset {position}")
        self.position = position
        self.message = message


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, width: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.mask = mask_of(width)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def binary(self, level: int) -> Expr:
        if level > 5:
            return self.unary()
        left = self.binary(level + 1)
        while True:
            kind, text, _ = self.peek()
            if kind != "op" or _LEVELS.get(text) != level:
                return left
            self.take()
            left = Binary(text, left, self.binary(level + 1))

    def unary(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "op" and text in "~-":
            self.take()
            nxt_kind, nxt_text, nxt_pos = self.peek()
            if text == "-" and nxt_kind == "num" and nxt_pos == pos + 1:
                self.take()
                return Const((-_number(nxt_text)) & self.mask)
            return Unary(text, self.unary())
        return self.atom()

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Const(_number(text) & self.mask)
        if kind == "ident":
            return Var(text)
        if kind == "op" and text == "(":
            inner = self.binary(1)
            kind, text, pos = self.take()
            if text != ")" or kind != "op":
                raise ParseError(pos, "expected ')'")
            return inner
        if kind == "end":
            raise ParseError(pos, "unexpected end of input")
        raise ParseError(pos, f"unexpected token {text!r}")


def _number(text: str) -> int:
    return int(text, 16) if text[:2].lower() == "0x" else int(text)


def parse(text: str, width: int = 64) -> Expr:
    p = _Parser(text, check_width(width))
    e = p.binary(1)
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ParseError(pos, f"trailing input {tok!r}")
    return e
