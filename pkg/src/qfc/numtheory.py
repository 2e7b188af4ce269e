"""Rational number theory kernel: valuations, squarefree parts, Hilbert symbols."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from sympy import factorint, isprime

__all__ = [
    "valuation",
    "unit_part",
    "squarefree_part",
    "prime_support",
    "legendre",
    "least_nonresidue",
    "hilbert_symbol",
    "is_padic_square",
    "is_rational_square",
    "isprime",
]


def valuation(x: Fraction | int, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x: Fraction | int, p: int) -> Fraction:
    x = Fraction(x)
    return x / Fraction(p) ** valuation(x, p)


@lru_cache(maxsize=None)
def _squarefree_int(n: int) -> int:
    sign = -1 if n < 0 else 1
    out = 1
    for q, e in factorint(abs(n)).items():
        if e % 2:
            out *= q
    return sign * out


def squarefree_part(x: Fraction | int) -> int:
    """The squarefree integer in the square class of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("squarefree part of zero")
    # a/b ~ a*b modulo squares
    return _squarefree_int(x.numerator * x.denominator)


def prime_support(x: Fraction | int) -> set[int]:
    x = Fraction(x)
    return set(factorint(abs(x.numerator))) | set(factorint(x.denominator))


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@lru_cache(maxsize=None)
def least_nonresidue(p: int) -> int:
    return next(a for a in range(2, p) if legendre(a, p) == -1)


def _odd_int(u: Fraction) -> int:
    # a 2-adic (or p-adic) unit rational is congruent to num*den modulo squares
    return u.numerator * u.denominator


@lru_cache(maxsize=None)
def _hilbert(a: Fraction, b: Fraction, p: int) -> int:
    if p == 0:
        return -1 if (a < 0 and b < 0) else 1
    alpha, beta = valuation(a, p), valuation(b, p)
    u, v = _odd_int(unit_part(a, p)), _odd_int(unit_part(b, p))
    if p == 2:
        eps = lambda w: ((w - 1) // 2) % 2  # noqa: E731
        omega = lambda w: ((w * w - 1) // 8) % 2  # noqa: E731
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * legendre(u, p) ** (beta % 2) * legendre(v, p) ** (alpha % 2)


def hilbert_symbol(a, b, p: int) -> int:
    """Hilbert symbol (a, b)_p of nonzero rationals; p = 0 is the real place."""
    return _hilbert(Fraction(a), Fraction(b), p)


def is_padic_square(x: Fraction | int, p: int) -> bool:
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero is not in the multiplicative group")
    if valuation(x, p) % 2:
        return False
    u = _odd_int(unit_part(x, p))
    if p == 2:
        return u % 8 == 1
    return legendre(u, p) == 1


def is_rational_square(x: Fraction | int) -> bool:
    x = Fraction(x)
    if x <= 0:
        return False
    return squarefree_part(x) == 1
