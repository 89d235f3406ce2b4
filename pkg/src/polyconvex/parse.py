"""Text syntax for polynomials.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') INTEGER)?
    atom   := NUMBER | VARIABLE | '(' expr ')'

Variables are ``x1 .. xN``; a bare ``x`` means ``x1`` when ``nvars == 1``.
Numbers are integers, decimals (``1.5``, ``2e-3``) or ratios written with
``/``.  Division is only allowed by a nonzero constant.  Unary minus binds
looser than ``^`` so ``-x1^2`` is ``-(x1^2)``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .poly import Polynomial

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<var>x\d*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


def _tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, nvars: int, exact: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.nvars = nvars
        self.exact = exact

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", off)

    def parse(self) -> Polynomial:
        p = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", off)
        return p

    def expr(self):
        p = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-" and val:
                self.take()
                q = self.term()
                p = p + q if val == "+" else p - q
            else:
                return p

    def term(self):
        p = self.unary()
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in ("*", "/"):
                self.take()
                q = self.unary()
                if val == "*":
                    p = p * q
                else:
                    if q.degree > 0:
                        raise ParseError("division by a non-constant", off)
                    if q.is_zero():
                        raise ParseError("division by zero", off)
                    p = p / q.constant_term()
            else:
                return p

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if val == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, off = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            kind, val, off = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be a nonnegative integer", off)
            return base ** int(val)
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            if self.exact:
                c = Fraction(val)
            else:
                c = float(val)
            return Polynomial.constant(c, self.nvars, self.exact)
        if kind == "var":
            if val == "x":
                if self.nvars != 1:
                    raise ParseError("bare 'x' is only allowed for univariate input", off)
                idx = 1
            else:
                idx = int(val[1:])
            if not 1 <= idx <= self.nvars:
                raise ParseError(f"variable {val} exceeds nvars={self.nvars}", off)
            return Polynomial.variable(idx - 1, self.nvars, self.exact)
        if kind == "op" and val == "(":
            p = self.expr()
            self.expect_op(")")
            return p
        raise ParseError(f"unexpected {val or 'end of input'!r}", off)


def parse(text: str, nvars: int, exact: bool = True) -> Polynomial:
    """Parse ``text`` into a polynomial in ``nvars`` variables."""
    if nvars < 1:
        raise ValueError("nvars must be positive")
    return _Parser(text, nvars, exact).parse()


def _fmt_coeff(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def _fmt_mono(mono) -> str:
    parts = []
    for i, e in enumerate(mono):
        if e == 1:
            parts.append(f"x{i + 1}")
        elif e > 1:
            parts.append(f"x{i + 1}^{e}")
    return "*".join(parts)


def term_order_key(mono):
    """Graded lexicographic key, largest first when sorted with reverse=True."""
    return (sum(mono), mono)


def format_polynomial(p: Polynomial) -> str:
    """Canonical text: graded-lex order, explicit ``*``, exact ``p/q`` or repr floats."""
    if p.is_zero():
        return "0"
    pieces = []
    for mono in sorted(p._terms, key=term_order_key, reverse=True):
        c = p._terms[mono]
        neg = c < 0
        a = -c if neg else c
        mstr = _fmt_mono(mono)
        if not mstr:
            body = _fmt_coeff(a)
        elif a == 1:
            body = mstr
        else:
            body = f"{_fmt_coeff(a)}*{mstr}"
        if not pieces:
            pieces.append(f"-{body}" if neg else body)
        else:
            pieces.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(pieces)
