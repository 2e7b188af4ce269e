"""Recursive-descent parsers for the field-tower DSL and element literals.

Field grammar (whitespace-insensitive)::

    field  := base suffix*
    base   := 'Q' | 'R' | 'F(' INT ')' | 'Qp(' INT ')'
    suffix := '((' NAME '))' | '(sqrt' elem ')'

Elements are arithmetic expressions over integers, fractions, Laurent
variables and the keyword ``sqrt`` (the generator of the outermost quadratic
extension), e.g. ``-3/2*t^2`` or ``1+sqrt``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .fields import (
    Field,
    FieldError,
    LaurentSeries,
    PAdic,
    QFCError,
    QuadraticExt,
    Rationals,
    RealClosed,
    embed,
    extend_quadratic,
    finite_field,
)

__all__ = ["ParseError", "parse_field", "parse_element", "parse_form_literal", "format_field"]


class ParseError(QFCError):
    pass


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def parse_field(text: str) -> Field:
    s = re.sub(r"\s+", "", text)
    if not s:
        raise ParseError("empty field descriptor")
    pos, field = _parse_base(s)
    while pos < len(s):
        if s.startswith("((", pos):
            m = _NAME.match(s, pos + 2)
            if not m or not s.startswith("))", m.end()):
                raise ParseError(f"malformed Laurent variable at {pos}: {text!r}")
            field = LaurentSeries(field, m.group())
            pos = m.end() + 2
        elif s.startswith("(sqrt", pos):
            end = _matching_paren(s, pos)
            elem = s[pos + 5 : end]
            if not elem:
                raise ParseError("missing radicand")
            a = parse_element(elem, field)
            if field.is_zero(a):
                raise FieldError("radicand zero")
            field = extend_quadratic(field, a)
            pos = end + 1
        else:
            raise ParseError(f"unexpected input at {pos}: {s[pos:]!r}")
    return field


def _parse_base(s: str) -> tuple[int, Field]:
    m = re.match(r"Qp\((\d+)\)", s)
    if m:
        return m.end(), PAdic(int(m.group(1)))
    m = re.match(r"F\((\d+)\)", s)
    if m:
        return m.end(), finite_field(int(m.group(1)))
    if s.startswith("Q"):
        return 1, Rationals()
    if s.startswith("R"):
        return 1, RealClosed()
    raise ParseError(f"unknown base field in {s!r}")


def _matching_paren(s: str, start: int) -> int:
    depth = 0
    for i in range(start, len(s)):
        if s[i] == "(":
            depth += 1
        elif s[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    raise ParseError(f"unbalanced parentheses in {s!r}")


def format_field(field: Field) -> str:
    return str(field)


# ---------------------------------------------------------------------------
# elements

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list[str]:
    out = []
    for num, name, op in _TOKEN.findall(text):
        tok = num or name or op
        if tok.strip():
            out.append(tok)
    return out


class _ElementParser:
    def __init__(self, text: str, field: Field):
        self.toks = _tokenize(text)
        self.i = 0
        self.field = field
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, tok=None):
        t = self.peek()
        if t is None or (tok is not None and t != tok):
            raise ParseError(f"expected {tok or 'token'} in {self.text!r}")
        self.i += 1
        return t

    def parse(self):
        if not self.toks:
            raise ParseError("empty element")
        v = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.peek()!r} in {self.text!r}")
        return v

    def expr(self):
        F = self.field
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            w = self.term()
            v = F.add(v, w) if op == "+" else F.sub(v, w)
        return v

    def term(self):
        F = self.field
        v = self.unary()
        while True:
            t = self.peek()
            if t in ("*", "/"):
                self.take()
                w = self.unary()
                v = F.mul(v, w) if t == "*" else F.div(v, w)
            elif t is not None and (t == "(" or t[0].isalnum() or t[0] == "_"):
                v = F.mul(v, self.power())  # juxtaposition, e.g. 3t
            else:
                return v

    def unary(self):
        if self.peek() == "-":
            self.take()
            return self.field.neg(self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if not tok.isdigit():
                raise ParseError(f"exponent must be an integer in {self.text!r}")
            v = self.field.power(v, sign * int(tok))
        return v

    def atom(self):
        F = self.field
        t = self.take()
        if t.isdigit():
            return F.from_rational(Fraction(int(t)))
        if t == "(":
            v = self.expr()
            self.take(")")
            return v
        if t == "sqrt":
            return _generator(F, None)
        if _NAME.fullmatch(t):
            return _generator(F, t)
        raise ParseError(f"unexpected {t!r} in {self.text!r}")


def _generator(F: Field, var: str | None):
    """The named Laurent variable (or sqrt generator) embedded into F."""
    sub = F
    while True:
        if var is None and isinstance(sub, QuadraticExt):
            return embed(sub.gen(), sub, F)
        if var is not None and isinstance(sub, LaurentSeries) and sub.var == var:
            return embed(sub.gen(), sub, F)
        if isinstance(sub, (LaurentSeries, QuadraticExt)):
            sub = sub.inner
        else:
            break
    what = "sqrt generator" if var is None else f"variable {var!r}"
    raise ParseError(f"{what} does not exist in {F}")


def parse_element(text: str, field: Field):
    return _ElementParser(text, field).parse()


def parse_form_literal(text: str, field: Field) -> tuple:
    """Comma-separated coefficient list, e.g. ``1,t,-t``."""
    text = text.strip()
    if not text:
        return ()
    parts = [p for p in text.split(",")]
    out = []
    for p in parts:
        x = parse_element(p, field)
        if field.is_zero(x):
            raise FieldError(f"zero coefficient {p.strip()!r} (forms are regular)")
        out.append(x)
    return tuple(out)
