"""Exact field backends for quadratic form computations.

Every backend works at square-class resolution: p-adic elements are rational
representatives, Laurent-series elements are monomials ``c*t^n``.  Descriptors
are immutable (frozen dataclasses) and hashable, so they can key caches.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Callable

from . import numtheory as nt

__all__ = [
    "QFCError",
    "FieldError",
    "UnsupportedError",
    "SeriesArithmeticError",
    "Monomial",
    "QuadElement",
    "Ordering",
    "Field",
    "Rationals",
    "RealClosed",
    "FiniteField",
    "PAdic",
    "LaurentSeries",
    "QuadraticExt",
    "arith",
    "is_square",
    "square_class_reps",
    "orderings",
    "level",
    "extend_quadratic",
    "extend_quadratic_map",
    "embed",
    "base_field",
    "is_finite_field",
    "is_complex_closed",
]


class QFCError(Exception):
    """Domain error raised by qfc operations."""


class FieldError(QFCError):
    pass


class UnsupportedError(QFCError):
    """The backend does not implement this operation for these inputs."""


class SeriesArithmeticError(FieldError):
    """Monomial arithmetic that would need a general Laurent series."""


@dataclass(frozen=True)
class Monomial:
    coeff: Any
    exp: int


@dataclass(frozen=True)
class QuadElement:
    x: Any
    y: Any


@dataclass(frozen=True)
class Ordering:
    """A field ordering given as a sign recipe.

    ``recipe`` is ``()`` for uniquely ordered bases, ``(inner, tsign)`` for
    Laurent series and ``(inner, root_sign)`` for real quadratic extensions.
    """

    field: "Field"
    recipe: tuple = ()

    def __str__(self):
        if isinstance(self.field, LaurentSeries):
            inner, s = self.recipe
            head = str(inner) if inner.recipe else ""
            part = f"{self.field.var}{'>' if s > 0 else '<'}0"
            return f"{head},{part}" if head else part
        if isinstance(self.field, QuadraticExt):
            inner, s = self.recipe
            head = str(inner) if inner.recipe else ""
            part = f"sqrt{'>' if s > 0 else '<'}0"
            return f"{head},{part}" if head else part
        return "unique"


class Field:
    """Common interface of all backends."""

    characteristic = 0

    # -- arithmetic -------------------------------------------------------
    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def from_rational(self, x) -> Any:
        raise NotImplementedError

    def add(self, x, y):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def neg(self, x):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def is_zero(self, x) -> bool:
        raise NotImplementedError

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    def power(self, x, n: int):
        if n < 0:
            return self.power(self.inv(x), -n)
        out = self.one()
        for _ in range(n):
            out = self.mul(out, x)
        return out

    # -- square classes ---------------------------------------------------
    def is_square(self, x) -> bool:
        raise NotImplementedError

    def square_classes(self) -> tuple:
        raise UnsupportedError(f"square classes of {self} are not enumerated")

    def canonical(self, x):
        """Canonical square-class representative of a nonzero element."""
        for r in self.square_classes():
            if self.is_square(self.div(x, r)):
                return r
        raise FieldError(f"no representative found for {self.fmt(x)}")

    def same_class(self, x, y) -> bool:
        return self.is_square(self.div(x, y))

    # -- orderings --------------------------------------------------------
    def orderings(self) -> tuple:
        return ()

    @property
    def is_real(self) -> bool:
        return bool(self.orderings())

    def sign(self, x, ordering: Ordering) -> int:
        raise FieldError(f"{self} has no orderings")

    # -- misc -------------------------------------------------------------
    @property
    def degree(self) -> int:
        return 1

    def fmt(self, x) -> str:
        return str(x)

    def sort_key(self, x):
        s = self.fmt(x)
        return (len(s), s)


# ---------------------------------------------------------------------------
# leaf backends


class _RationalArith(Field):
    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def from_rational(self, x):
        return Fraction(x)

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def inv(self, x):
        if x == 0:
            raise FieldError("division by zero")
        return 1 / Fraction(x)

    def is_zero(self, x):
        return x == 0

    def fmt(self, x):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def sort_key(self, x):
        x = Fraction(x)
        return (abs(x.numerator) * x.denominator, x < 0, x)


@dataclass(frozen=True)
class Rationals(_RationalArith):
    def __str__(self):
        return "Q"

    def is_square(self, x):
        _nonzero(self, x)
        return nt.is_rational_square(x)

    def canonical(self, x):
        _nonzero(self, x)
        return Fraction(nt.squarefree_part(x))

    def same_class(self, x, y):
        return nt.squarefree_part(x) == nt.squarefree_part(y)

    def orderings(self):
        return (Ordering(self),)

    def sign(self, x, ordering):
        return 1 if x > 0 else -1


@dataclass(frozen=True)
class RealClosed(_RationalArith):
    """A real closed field; rationals carry the sign."""

    def __str__(self):
        return "R"

    def is_square(self, x):
        _nonzero(self, x)
        return x > 0

    def square_classes(self):
        return (Fraction(1), Fraction(-1))

    def canonical(self, x):
        _nonzero(self, x)
        return Fraction(1) if x > 0 else Fraction(-1)

    def orderings(self):
        return (Ordering(self),)

    def sign(self, x, ordering):
        return 1 if x > 0 else -1


@dataclass(frozen=True)
class PAdic(_RationalArith):
    p: int

    def __post_init__(self):
        if not nt.isprime(self.p):
            raise FieldError(f"Qp needs a prime, got {self.p}")

    def __str__(self):
        return f"Qp({self.p})"

    def is_square(self, x):
        _nonzero(self, x)
        return nt.is_padic_square(x, self.p)

    @cached_property
    def _unit_nonsquare(self) -> int:
        return -1 if self.p % 4 == 3 else nt.least_nonresidue(self.p)

    def square_classes(self):
        p = self.p
        if p == 2:
            return tuple(Fraction(v) for v in (1, -1, 2, -2, 5, -5, 10, -10))
        u = self._unit_nonsquare
        return tuple(Fraction(v) for v in (1, u, p, u * p))

    def canonical(self, x):
        _nonzero(self, x)
        p = self.p
        v = nt.valuation(x, p) % 2
        u = nt.unit_part(x, p)
        w = u.numerator * u.denominator
        if p == 2:
            rep = {1: 1, 3: -5, 5: 5, 7: -1}[w % 8]
        else:
            rep = 1 if nt.legendre(w, p) == 1 else self._unit_nonsquare
        return Fraction(rep * p**v)

    def same_class(self, x, y):
        return self.canonical(x) == self.canonical(y)


@dataclass(frozen=True)
class FiniteField(Field):
    """Prime field F_p, p odd.  F_{p^2} is a QuadraticExt over this."""

    q: int

    def __post_init__(self):
        if self.q % 2 == 0:
            raise FieldError("characteristic 2 is not supported")
        if not nt.isprime(self.q):
            raise FieldError(f"F({self.q}) is not a supported finite field")

    @property
    def characteristic(self):
        return self.q

    @property
    def order(self) -> int:
        return self.q

    def __str__(self):
        return f"F({self.q})"

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_rational(self, x):
        x = Fraction(x)
        if x.denominator % self.q == 0:
            raise FieldError(f"{x} has no image in F({self.q})")
        return x.numerator * pow(x.denominator, -1, self.q) % self.q

    def add(self, x, y):
        return (x + y) % self.q

    def mul(self, x, y):
        return x * y % self.q

    def neg(self, x):
        return -x % self.q

    def inv(self, x):
        if x % self.q == 0:
            raise FieldError("division by zero")
        return pow(x, -1, self.q)

    def is_zero(self, x):
        return x % self.q == 0

    def is_square(self, x):
        _nonzero(self, x)
        return pow(x, (self.q - 1) // 2, self.q) == 1

    def square_classes(self):
        return (1, nt.least_nonresidue(self.q))

    def canonical(self, x):
        return 1 if self.is_square(x) else nt.least_nonresidue(self.q)

    def elements(self):
        return range(1, self.q)

    def sort_key(self, x):
        return (x,)


# ---------------------------------------------------------------------------
# constructors


@dataclass(frozen=True)
class LaurentSeries(Field):
    inner: Field
    var: str

    def __str__(self):
        return f"{self.inner}(({self.var}))"

    @property
    def characteristic(self):
        return self.inner.characteristic

    @property
    def degree(self):
        return self.inner.degree

    def gen(self):
        return Monomial(self.inner.one(), 1)

    def zero(self):
        return Monomial(self.inner.zero(), 0)

    def one(self):
        return Monomial(self.inner.one(), 0)

    def from_rational(self, x):
        return Monomial(self.inner.from_rational(x), 0)

    def is_zero(self, x):
        return self.inner.is_zero(x.coeff)

    def add(self, x, y):
        if self.is_zero(x):
            return y
        if self.is_zero(y):
            return x
        if x.exp != y.exp:
            raise SeriesArithmeticError(
                f"{self.fmt(x)} + {self.fmt(y)} is not a monomial in {self}"
            )
        c = self.inner.add(x.coeff, y.coeff)
        return self.zero() if self.inner.is_zero(c) else Monomial(c, x.exp)

    def mul(self, x, y):
        if self.is_zero(x) or self.is_zero(y):
            return self.zero()
        return Monomial(self.inner.mul(x.coeff, y.coeff), x.exp + y.exp)

    def neg(self, x):
        return Monomial(self.inner.neg(x.coeff), x.exp)

    def inv(self, x):
        if self.is_zero(x):
            raise FieldError("division by zero")
        return Monomial(self.inner.inv(x.coeff), -x.exp)

    def is_square(self, x):
        _nonzero(self, x)
        return x.exp % 2 == 0 and self.inner.is_square(x.coeff)

    def square_classes(self):
        inner = self.inner.square_classes()
        return tuple(Monomial(r, e) for e in (0, 1) for r in inner)

    def canonical(self, x):
        _nonzero(self, x)
        return Monomial(self.inner.canonical(x.coeff), x.exp % 2)

    def same_class(self, x, y):
        return (x.exp - y.exp) % 2 == 0 and self.inner.same_class(x.coeff, y.coeff)

    def orderings(self):
        return tuple(
            Ordering(self, (o, s)) for o in self.inner.orderings() for s in (1, -1)
        )

    def sign(self, x, ordering):
        inner, s = ordering.recipe
        return self.inner.sign(x.coeff, inner) * (s if x.exp % 2 else 1)

    def fmt(self, x):
        if self.is_zero(x):
            return "0"
        c = self.inner.fmt(x.coeff)
        if x.exp == 0:
            return c
        t = self.var if x.exp == 1 else f"{self.var}^{x.exp}"
        if c == "1":
            return t
        if c == "-1":
            return "-" + t
        if any(ch in c for ch in "+*") or "-" in c[1:]:
            c = f"({c})"
        return f"{c}*{t}"

    def sort_key(self, x):
        return (x.exp, self.inner.sort_key(x.coeff))


@dataclass(frozen=True)
class QuadraticExt(Field):
    inner: Field
    radicand: Any

    def __post_init__(self):
        if self.inner.is_zero(self.radicand):
            raise FieldError("radicand zero")

    def __str__(self):
        inner = self.inner
        if isinstance(inner, FiniteField) and self.radicand == nt.least_nonresidue(inner.q):
            return f"F({inner.q ** 2})"
        if isinstance(inner, RealClosed):
            return "R(sqrt -1)"
        return f"{inner}(sqrt {inner.fmt(self.radicand)})"

    @property
    def characteristic(self):
        return self.inner.characteristic

    @property
    def degree(self):
        return 2 * self.inner.degree

    @property
    def order(self) -> int:
        if not is_finite_field(self):
            raise UnsupportedError(f"{self} is not finite")
        return self.inner.order ** 2

    def gen(self):
        return QuadElement(self.inner.zero(), self.inner.one())

    def zero(self):
        return QuadElement(self.inner.zero(), self.inner.zero())

    def one(self):
        return QuadElement(self.inner.one(), self.inner.zero())

    def from_rational(self, x):
        return QuadElement(self.inner.from_rational(x), self.inner.zero())

    def is_zero(self, x):
        return self.inner.is_zero(x.x) and self.inner.is_zero(x.y)

    def add(self, a, b):
        k = self.inner
        return QuadElement(k.add(a.x, b.x), k.add(a.y, b.y))

    def mul(self, a, b):
        k = self.inner
        x = k.add(k.mul(a.x, b.x), k.mul(self.radicand, k.mul(a.y, b.y)))
        y = k.add(k.mul(a.x, b.y), k.mul(a.y, b.x))
        return QuadElement(x, y)

    def neg(self, a):
        return QuadElement(self.inner.neg(a.x), self.inner.neg(a.y))

    def norm(self, a):
        k = self.inner
        return k.sub(k.mul(a.x, a.x), k.mul(self.radicand, k.mul(a.y, a.y)))

    def inv(self, a):
        if self.is_zero(a):
            raise FieldError("division by zero")
        k = self.inner
        n = k.inv(self.norm(a))
        return QuadElement(k.mul(a.x, n), k.neg(k.mul(a.y, n)))

    def is_square(self, a):
        """Norm-equation test: x+y*sqrt(d) is a square iff its norm is a
        square n^2 and (x+n)/2 or (x-n)/2 is a nonzero square."""
        _nonzero(self, a)
        k = self.inner
        norm = self.norm(a)
        if not k.is_square(norm):
            return False
        n = _inner_sqrt(k, norm)
        half = k.inv(k.from_rational(2))
        for s in (n, k.neg(n)):
            cand = k.mul(k.add(a.x, s), half)
            if not k.is_zero(cand) and k.is_square(cand):
                return True
        if k.is_zero(a.y):
            return k.is_square(k.div(a.x, self.radicand))
        return False

    @cached_property
    def _nonsquare(self):
        for x in self.elements():
            if not self.is_square(x):
                return x
        raise FieldError("no non-square found")

    def square_classes(self):
        if is_finite_field(self):
            return (self.one(), self._nonsquare)
        if is_complex_closed(self):
            return (self.one(),)
        raise UnsupportedError(f"square classes of {self} are not enumerated")

    def canonical(self, a):
        if is_complex_closed(self):
            _nonzero(self, a)
            return self.one()
        if is_finite_field(self):
            return self.one() if self.is_square(a) else self._nonsquare
        return super().canonical(a)

    def elements(self):
        if not isinstance(self.inner, FiniteField):
            raise UnsupportedError(f"{self} is not a finite field")
        q = self.inner.q
        for y in range(q):
            for x in range(q):
                if x or y:
                    yield QuadElement(x, y)

    def orderings(self):
        k = self.inner
        inner_ords = k.orderings()
        if not inner_ords:
            return ()
        positive = [o for o in inner_ords if k.sign(self.radicand, o) > 0]
        if not positive:
            return ()
        if not isinstance(k, (Rationals, RealClosed)):
            raise UnsupportedError(f"orderings of {self} are not implemented")
        return tuple(Ordering(self, (o, s)) for o in positive for s in (1, -1))

    def sign(self, a, ordering):
        k = self.inner
        inner, root = ordering.recipe
        sx = 0 if k.is_zero(a.x) else k.sign(a.x, inner)
        sy = 0 if k.is_zero(a.y) else root * k.sign(a.y, inner)
        if sy == 0 or sx == sy:
            return sx
        if sx == 0:
            return sy
        diff = k.sub(k.mul(a.x, a.x), k.mul(self.radicand, k.mul(a.y, a.y)))
        return sx if k.sign(diff, inner) > 0 else sy

    def fmt(self, a):
        k = self.inner
        if k.is_zero(a.y):
            return k.fmt(a.x)
        y = k.fmt(a.y)
        root = "sqrt" if y == "1" else ("-sqrt" if y == "-1" else f"{_paren(y)}*sqrt")
        if k.is_zero(a.x):
            return root
        return f"{k.fmt(a.x)}{'' if root.startswith('-') else '+'}{root}"

    def sort_key(self, a):
        return (self.inner.sort_key(a.y) if not self.inner.is_zero(a.y) else (), self.inner.sort_key(a.x))


def _paren(s: str) -> str:
    return f"({s})" if any(ch in s for ch in "+*") or "-" in s[1:] else s


def _nonzero(field: Field, x) -> None:
    if field.is_zero(x):
        raise FieldError("zero is not in the multiplicative group")


def _inner_sqrt(field: Field, x):
    """An explicit square root, available for the backends used as the inner
    field of a QuadraticExt (finite fields, rationals, reals-as-rationals)."""
    if isinstance(field, FiniteField):
        p = field.q
        for r in range(p):
            if r * r % p == x % p:
                return r
    elif isinstance(field, (Rationals, RealClosed)):
        x = Fraction(x)
        num, den = _isqrt_exact(x.numerator), _isqrt_exact(x.denominator)
        if num is not None and den is not None:
            return Fraction(num, den)
        if isinstance(field, RealClosed):
            raise UnsupportedError("irrational square root in a real closed field")
    elif isinstance(field, QuadraticExt) and is_finite_field(field):
        for r in field.elements():
            if field.mul(r, r) == x:
                return r
    raise UnsupportedError(f"explicit square roots in {field}")


def _isqrt_exact(n: int):
    from math import isqrt

    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None


# ---------------------------------------------------------------------------
# structural helpers


def is_finite_field(F: Field) -> bool:
    return isinstance(F, FiniteField) or (
        isinstance(F, QuadraticExt) and isinstance(F.inner, FiniteField)
    )


def is_complex_closed(F: Field) -> bool:
    return isinstance(F, QuadraticExt) and isinstance(F.inner, RealClosed)


def base_field(F: Field) -> Field:
    """Innermost non-QuadraticExt field of a quadratic tower."""
    while isinstance(F, QuadraticExt) and not is_finite_field(F) and not is_complex_closed(F):
        F = F.inner
    return F


def embed(x, src: Field, dst: Field):
    """Structural embedding of an element of a subfield into ``dst``."""
    if src == dst:
        return x
    if isinstance(dst, QuadraticExt):
        return QuadElement(embed(x, src, dst.inner), dst.inner.zero())
    if isinstance(dst, LaurentSeries):
        return Monomial(embed(x, src, dst.inner), 0)
    raise FieldError(f"{src} is not a subfield of {dst}")


def project(x, src: Field, dst: Field):
    """Inverse of :func:`embed`; raises if ``x`` does not lie in ``dst``."""
    while src != dst:
        if isinstance(src, QuadraticExt):
            if not src.inner.is_zero(x.y):
                raise UnsupportedError(f"{src.fmt(x)} does not lie in {dst}")
            x, src = x.x, src.inner
        elif isinstance(src, LaurentSeries):
            if x.exp != 0:
                raise UnsupportedError(f"{src.fmt(x)} does not lie in {dst}")
            x, src = x.coeff, src.inner
        else:
            raise FieldError(f"{dst} is not a subfield of {src}")
    return x


# ---------------------------------------------------------------------------
# public operations


def arith(op: str, x, y=None, field: Field | None = None):
    """Exact arithmetic ``op`` in {add, mul, neg, inv} over ``field``."""
    if field is None:
        raise FieldError("arith needs a field")
    if op == "add":
        return field.add(x, y)
    if op == "mul":
        return field.mul(x, y)
    if op == "neg":
        return field.neg(x)
    if op == "inv":
        return field.inv(x)
    raise FieldError(f"unknown operation {op!r}")


def is_square(field: Field, x) -> bool:
    return field.is_square(x)


def square_class_reps(field: Field) -> tuple | None:
    """Canonical square-class representatives, or None when unsupported."""
    try:
        return field.square_classes()
    except UnsupportedError:
        return None


def orderings(field: Field) -> tuple:
    """All orderings; the empty tuple means the field is nonreal."""
    return field.orderings()


def level(field: Field, cap: int = 64) -> int | None:
    """Least s with -1 a sum of s squares; None for real fields or s > cap."""
    from .forms import Form, is_isotropic

    if field.is_real:
        return None
    s = 1
    while s <= cap:
        # -1 is a sum of s squares iff (s+1)x<1> is isotropic
        if is_isotropic(Form(field, (field.one(),) * (s + 1))):
            return s
        s *= 2
    return None


def extend_quadratic(field: Field, a) -> Field:
    return extend_quadratic_map(field, a)[0]


def extend_quadratic_map(field: Field, a) -> tuple[Field, Callable]:
    """F(sqrt a) together with the embedding F -> F(sqrt a).

    Square radicands collapse to F.  Over K((t)) the extension is normalised
    back to a Laurent series field: K((t))(sqrt c) = K(sqrt c)((t)) and
    K((t))(sqrt(c t)) = K((u)) with u^2 = c t.
    """
    if field.is_zero(a):
        raise FieldError("radicand zero")
    if field.is_square(a):
        return field, lambda x: x
    if isinstance(field, RealClosed):
        ext = QuadraticExt(field, Fraction(-1))
        return ext, lambda x: QuadElement(Fraction(x), Fraction(0))
    if isinstance(field, LaurentSeries):
        K = field.inner
        c, n = a.coeff, a.exp
        if n % 2 == 0:
            K2, e = extend_quadratic_map(K, c)
            new = LaurentSeries(K2, field.var)
            return new, lambda x: Monomial(e(x.coeff), x.exp)
        new = LaurentSeries(K, field.var + "_r")
        return new, lambda x: Monomial(K.mul(x.coeff, K.power(c, -x.exp)), 2 * x.exp)
    if isinstance(field, QuadraticExt) and is_finite_field(field):
        raise UnsupportedError("finite fields beyond degree 2 are out of scope")
    ext = QuadraticExt(field, a)
    return ext, lambda x: QuadElement(x, field.zero())


@lru_cache(maxsize=None)
def finite_field(q: int) -> Field:
    """F(q) for q = p or p^2 with p an odd prime."""
    if q % 2 == 0:
        raise FieldError("characteristic 2 is not supported")
    if nt.isprime(q):
        return FiniteField(q)
    from math import isqrt

    p = isqrt(q)
    if p * p == q and nt.isprime(p):
        return QuadraticExt(FiniteField(p), nt.least_nonresidue(p))
    raise FieldError(f"F({q}): only prime fields and their quadratic extensions are supported")
