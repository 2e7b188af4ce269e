"""Diagonal quadratic forms and their per-backend algebra.

Isotropy and isometry are decided from square-class data only:

* finite fields: dimension and discriminant;
* real closed / algebraically closed: signature / dimension;
* Q_p: discriminant and Hasse invariant (Hilbert symbols);
* Q: Hasse-Minkowski over the finite set of relevant places;
* K((t)): Springer's theorem on the two residue forms;
* multiquadratic towers over the above, for forms defined over the base,
  via a place-by-place criterion (see :func:`isotropic_over_tower`).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from typing import Any, Iterable, Sequence

from . import numtheory as nt
from .fields import (
    Field,
    FieldError,
    LaurentSeries,
    Monomial,
    Ordering,
    PAdic,
    QuadraticExt,
    Rationals,
    RealClosed,
    UnsupportedError,
    base_field,
    is_complex_closed,
    is_finite_field,
    project,
)

__all__ = [
    "Form",
    "diagonalize",
    "orth_sum",
    "scale",
    "tensor",
    "n_times",
    "pfister",
    "hyperbolic",
    "signature",
    "total_signature",
    "determinant",
    "signed_discriminant",
    "classical_invariants",
    "is_isotropic",
    "is_hyperbolic",
    "is_split",
    "witt_decompose",
    "represents",
    "isometric",
    "residue_forms",
    "isotropic_over_tower",
    "hyperbolic_over_tower",
    "split_over_tower",
]


@dataclass(frozen=True)
class Form:
    """Diagonal form <a1, ..., an> with nonzero coefficients."""

    field: Field
    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        for a in self.coeffs:
            if self.field.is_zero(a):
                raise FieldError("form coefficients must be nonzero")

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __str__(self):
        return "<" + ", ".join(self.field.fmt(a) for a in self.coeffs) + ">"

    def __neg__(self):
        return scale(self.field.from_rational(-1), self)

    def __add__(self, other: "Form") -> "Form":
        return orth_sum(self, other)

    def sub(self, idx: Iterable[int]) -> "Form":
        return Form(self.field, tuple(self.coeffs[i] for i in idx))

    def sorted(self) -> "Form":
        return Form(self.field, tuple(sorted(self.coeffs, key=self.field.sort_key)))


def _same_field(*forms: Form) -> Field:
    F = forms[0].field
    for f in forms[1:]:
        if f.field != F:
            raise FieldError(f"field mismatch: {F} vs {f.field}")
    return F


# ---------------------------------------------------------------------------
# constructions


def diagonalize(field: Field, gram: Sequence[Sequence[Any]]) -> Form:
    """Symmetric Gaussian elimination of a regular Gram matrix."""
    n = len(gram)
    M = [[field.from_rational(x) if isinstance(x, (int, Fraction)) else x for x in row] for row in gram]
    if any(len(r) != n for r in M):
        raise FieldError("Gram matrix must be square")
    for i in range(n):
        for j in range(n):
            if M[i][j] != M[j][i]:
                raise FieldError("Gram matrix must be symmetric")
    idx = list(range(n))
    out = []
    while idx:
        piv = next((i for i in idx if not field.is_zero(M[i][i])), None)
        if piv is None:
            pair = next(
                ((i, j) for i in idx for j in idx if j != i and not field.is_zero(M[i][j])),
                None,
            )
            if pair is None:
                raise FieldError("singular Gram matrix")
            i, j = pair
            # e_i <- e_i + e_j
            for k in range(n):
                M[i][k] = field.add(M[i][k], M[j][k])
            for k in range(n):
                M[k][i] = field.add(M[k][i], M[k][j])
            piv = i
        a = M[piv][piv]
        idx.remove(piv)
        for k in idx:
            c = field.div(M[k][piv], a)
            if field.is_zero(c):
                continue
            for m in range(n):
                M[k][m] = field.sub(M[k][m], field.mul(c, M[piv][m]))
            for m in range(n):
                M[m][k] = field.sub(M[m][k], field.mul(c, M[m][piv]))
        out.append(a)
    return Form(field, tuple(out))


def orth_sum(phi: Form, psi: Form) -> Form:
    F = _same_field(phi, psi)
    return Form(F, phi.coeffs + psi.coeffs)


def scale(a, phi: Form) -> Form:
    F = phi.field
    if F.is_zero(a):
        raise FieldError("scaling by zero")
    return Form(F, tuple(F.mul(a, x) for x in phi.coeffs))


def tensor(phi: Form, psi: Form) -> Form:
    F = _same_field(phi, psi)
    return Form(F, tuple(F.mul(a, b) for a in phi.coeffs for b in psi.coeffs))


def n_times(n: int, phi: Form) -> Form:
    if n < 0:
        raise ValueError("multiplicity must be nonnegative")
    return Form(phi.field, phi.coeffs * n)


def pfister(field: Field, *slots) -> Form:
    """The n-fold Pfister form <<a1,...,an>> = <1,-a1> x ... x <1,-an>."""
    out = Form(field, (field.one(),))
    for a in slots:
        if field.is_zero(a):
            raise FieldError("Pfister slots must be nonzero")
        out = tensor(out, Form(field, (field.one(), field.neg(a))))
    return out


def hyperbolic(field: Field, m: int = 1) -> Form:
    return Form(field, (field.one(), field.from_rational(-1)) * m)


# ---------------------------------------------------------------------------
# invariants


def signature(phi: Form, ordering: Ordering) -> int:
    if ordering.field != phi.field:
        raise FieldError("ordering/field mismatch")
    return sum(phi.field.sign(a, ordering) for a in phi.coeffs)


def total_signature(phi: Form) -> tuple[int, ...]:
    return tuple(signature(phi, P) for P in phi.field.orderings())


def determinant(phi: Form):
    F = phi.field
    d = F.one()
    for a in phi.coeffs:
        d = F.mul(d, a)
    return d


def signed_discriminant(phi: Form):
    F = phi.field
    n = phi.dim
    d = determinant(phi)
    return F.neg(d) if (n * (n - 1) // 2) % 2 else d


def _canon(F: Field, x):
    try:
        return F.canonical(x)
    except UnsupportedError:
        return x


def _class_counts(phi: Form) -> Counter:
    F = phi.field
    return Counter(F.canonical(a) for a in phi.coeffs)


def _hasse_local(phi: Form, p: int) -> int:
    """Product of (a_i, a_j)_p over i < j; p = 0 is the real place."""
    counts = _class_counts(phi)
    classes = sorted(counts, key=phi.field.sort_key)
    e = 1
    for i, c in enumerate(classes):
        m = counts[c]
        if (m * (m - 1) // 2) % 2:
            e *= nt.hilbert_symbol(c, c, p)
        for c2 in classes[i + 1 :]:
            if (m * counts[c2]) % 2:
                e *= nt.hilbert_symbol(c, c2, p)
    return e


def _relevant_primes(coeffs: Iterable[Fraction]) -> list[int]:
    ps = {2}
    for a in coeffs:
        ps |= nt.prime_support(a)
    return sorted(ps)


def hasse_descriptor(phi: Form):
    F = phi.field
    if is_finite_field(F) or is_complex_closed(F):
        return 1
    if isinstance(F, RealClosed):
        return _hasse_local(phi, 0)
    if isinstance(F, PAdic):
        return _hasse_local(phi, F.p)
    if isinstance(F, Rationals):
        places = [0] + _relevant_primes(phi.coeffs)
        return tuple("inf" if p == 0 else p for p in places if _hasse_local(phi, p) == -1)
    if isinstance(F, LaurentSeries):
        r1, r2 = residue_forms(phi)
        return ("springer", hasse_descriptor(r1), hasse_descriptor(r2))
    return None


@dataclass(frozen=True)
class ClassicalInvariants:
    dim_parity: int
    discriminant: Any
    hasse: Any

    def as_dict(self, field: Field) -> dict:
        return {
            "dim_parity": self.dim_parity,
            "discriminant": field.fmt(self.discriminant),
            "hasse": _hasse_json(self.hasse),
        }


def _hasse_json(h):
    if isinstance(h, tuple):
        return [_hasse_json(x) for x in h]
    return h


def classical_invariants(phi: Form) -> ClassicalInvariants:
    F = phi.field
    return ClassicalInvariants(phi.dim % 2, _canon(F, signed_discriminant(phi)), hasse_descriptor(phi))


# ---------------------------------------------------------------------------
# Springer decomposition


def residue_forms(phi: Form) -> tuple[Form, Form]:
    """(first, second) residue forms of phi = phi1 _|_ t*phi2 over K((t))."""
    F = phi.field
    if not isinstance(F, LaurentSeries):
        raise FieldError("residue forms need a Laurent series field")
    first = tuple(a.coeff for a in phi.coeffs if a.exp % 2 == 0)
    second = tuple(a.coeff for a in phi.coeffs if a.exp % 2)
    return Form(F.inner, first), Form(F.inner, second)


def _from_residues(F: LaurentSeries, first: Form, second: Form) -> Form:
    return Form(
        F,
        tuple(Monomial(c, 0) for c in first.coeffs) + tuple(Monomial(c, 1) for c in second.coeffs),
    )


# ---------------------------------------------------------------------------
# isotropy


def _padic_isotropic(coeffs: Sequence[Fraction], p: int) -> bool:
    n = len(coeffs)
    if n <= 1:
        return False
    if n >= 5:
        return True
    F = PAdic(p)
    phi = Form(F, tuple(coeffs))
    d = determinant(phi)
    if n == 2:
        return nt.is_padic_square(-d, p)
    eps = _hasse_local(phi, p)
    if n == 3:
        return nt.hilbert_symbol(-1, -d, p) == eps
    return (not nt.is_padic_square(d, p)) or eps == nt.hilbert_symbol(-1, -1, p)


def _real_isotropic(signs: Iterable[int]) -> bool:
    s = set(signs)
    return 1 in s and -1 in s


def _rational_isotropic(coeffs: Sequence[Fraction]) -> bool:
    n = len(coeffs)
    if n <= 1:
        return False
    if n == 2:
        return nt.is_rational_square(-coeffs[0] * coeffs[1])
    if not _real_isotropic(1 if a > 0 else -1 for a in coeffs):
        return False
    if n >= 5:
        return True
    sq = [Fraction(nt.squarefree_part(a)) for a in coeffs]
    return all(_padic_isotropic(sq, p) for p in _relevant_primes(sq))


def _finite_isotropic(phi: Form) -> bool:
    if phi.dim <= 1:
        return False
    if phi.dim >= 3:
        return True
    F = phi.field
    return F.is_square(F.neg(F.mul(*phi.coeffs)))


def is_isotropic(phi: Form) -> bool:
    F = phi.field
    if phi.dim <= 1:
        return False
    if is_finite_field(F):
        return _finite_isotropic(phi)
    if is_complex_closed(F):
        return True
    if isinstance(F, RealClosed):
        return _real_isotropic(1 if a > 0 else -1 for a in phi.coeffs)
    if isinstance(F, PAdic):
        return _padic_isotropic(phi.coeffs, F.p)
    if isinstance(F, Rationals):
        return _rational_isotropic(phi.coeffs)
    if isinstance(F, LaurentSeries):
        r1, r2 = residue_forms(phi)
        return is_isotropic(r1) or is_isotropic(r2)
    if isinstance(F, QuadraticExt):
        base, rads, coeffs = _tower_data(phi)
        return isotropic_over_tower(Form(base, coeffs), rads)
    raise UnsupportedError(f"isotropy over {F}")


def _tower_data(phi: Form):
    """(base field, radicands, base coefficients) of a form over a tower."""
    F = phi.field
    base = base_field(F)
    if isinstance(base, LaurentSeries):
        raise UnsupportedError(f"quadratic towers over {base} are normalised to Laurent fields")
    rads = []
    sub = F
    while sub != base:
        rads.append(project(sub.radicand, sub.inner, base))
        sub = sub.inner
    rads.reverse()
    coeffs = tuple(project(a, F, base) for a in phi.coeffs)
    return base, rads, coeffs


# ---------------------------------------------------------------------------
# multiquadratic towers over a base field


def _in_span(F: Field, x, gens: Sequence) -> bool:
    """Is x in the subgroup generated by gens modulo squares of F?"""
    for bits in product((0, 1), repeat=len(gens)):
        y = x
        for b, g in zip(bits, gens):
            if b:
                y = F.mul(y, g)
        if F.is_square(y):
            return True
    return False


def _local_rank_zero(F: Field, rads: Sequence, p: int | None) -> bool:
    """True when every radicand is a square at the place (F itself if p is None)."""
    if p is None:
        return all(F.is_square(b) for b in rads)
    if p == 0:
        return all(b > 0 for b in rads)
    return all(nt.is_padic_square(b, p) for b in rads)


def isotropic_over_tower(phi: Form, radicands: Sequence) -> bool:
    """Isotropy of a base-field form over F(sqrt b1, ..., sqrt bk).

    Over a local (or finite, or real closed) base, a proper multiquadratic
    extension splits every base quaternion algebra, so forms of dimension
    >= 3 become isotropic; binary forms need -det in the radicand span.
    Over Q the same holds place by place (Hasse-Minkowski over the tower).
    """
    F = phi.field
    n = phi.dim
    if n <= 1:
        return False
    if n == 2:
        return _in_span(F, F.neg(determinant(phi)), radicands)
    if is_finite_field(F) or is_complex_closed(F):
        return True
    if isinstance(F, (RealClosed, PAdic)):
        if not _local_rank_zero(F, radicands, None):
            return True
        return is_isotropic(phi)
    if isinstance(F, Rationals):
        signs = [1 if a > 0 else -1 for a in phi.coeffs]
        if _local_rank_zero(F, radicands, 0) and not _real_isotropic(signs):
            return False
        if n >= 5:
            return True
        sq = [Fraction(nt.squarefree_part(a)) for a in phi.coeffs]
        places = sorted(set(_relevant_primes(sq)) | set(_relevant_primes(radicands)))
        return all(
            _padic_isotropic(sq, p) for p in places if _local_rank_zero(F, radicands, p)
        )
    raise UnsupportedError(f"multiquadratic towers over {F}")


def hyperbolic_over_tower(phi: Form, radicands: Sequence) -> bool:
    """Is the base-field form phi hyperbolic over F(sqrt b1, ..., sqrt bk)?"""
    F = phi.field
    if phi.dim % 2:
        return False
    if phi.dim and not _in_span(F, signed_discriminant(phi), radicands):
        return False
    if phi.dim == 0 or is_finite_field(F) or is_complex_closed(F):
        return True
    if isinstance(F, (RealClosed, PAdic)):
        if not _local_rank_zero(F, radicands, None):
            return True
        return is_hyperbolic(phi)
    if isinstance(F, Rationals):
        if _local_rank_zero(F, radicands, 0) and total_signature(phi) != (0,):
            return False
        sq = [Fraction(nt.squarefree_part(a)) for a in phi.coeffs]
        places = sorted(set(_relevant_primes(sq)) | set(_relevant_primes(radicands)))
        for p in places:
            if _local_rank_zero(F, radicands, p) and not is_hyperbolic(Form(PAdic(p), tuple(sq))):
                return False
        return True
    if isinstance(F, LaurentSeries):
        from .fields import extend_quadratic_map

        K, emb = F, (lambda x: x)
        for b in radicands:
            K, e = extend_quadratic_map(K, emb(b))
            emb = (lambda e1, e0: (lambda x: e1(e0(x))))(e, emb)
        return is_hyperbolic(Form(K, tuple(emb(a) for a in phi.coeffs)))
    raise UnsupportedError(f"multiquadratic towers over {F}")


def _odd_completion(phi: Form) -> Form:
    """phi _|_ <-x> with x chosen so the result has trivial discriminant."""
    F = phi.field
    n = phi.dim
    x = determinant(phi)
    if ((n - 1) // 2) % 2:
        x = F.neg(x)
    return Form(F, phi.coeffs + (F.neg(x),))


def split_over_tower(phi: Form, radicands: Sequence) -> bool:
    """Is phi hyperbolic or Witt-equivalent to a 1-dimensional form over the tower?"""
    psi = _odd_completion(phi) if phi.dim % 2 else phi
    return hyperbolic_over_tower(psi, radicands)


# ---------------------------------------------------------------------------
# isometry and Witt decomposition


def _isometry_key(phi: Form):
    F = phi.field
    if is_finite_field(F):
        return (phi.dim, F.canonical(determinant(phi)) if phi.dim else None)
    if is_complex_closed(F):
        return (phi.dim,)
    if isinstance(F, RealClosed):
        return (phi.dim, total_signature(phi))
    if isinstance(F, PAdic):
        if not phi.dim:
            return (0,)
        return (phi.dim, F.canonical(determinant(phi)), _hasse_local(phi, F.p))
    if isinstance(F, Rationals):
        if not phi.dim:
            return (0,)
        return (
            phi.dim,
            nt.squarefree_part(determinant(phi)),
            hasse_descriptor(phi),
            total_signature(phi),
        )
    if isinstance(F, LaurentSeries):
        # same dimension and Witt-equivalent residue forms
        r1, r2 = residue_forms(phi)
        return (phi.dim, _isometry_key(witt_decompose(r1)[0]), _isometry_key(witt_decompose(r2)[0]))
    raise UnsupportedError(f"isometry testing over {F}")


def isometric(phi: Form, psi: Form) -> bool:
    _same_field(phi, psi)
    if phi.dim != psi.dim:
        return False
    return _isometry_key(phi) == _isometry_key(psi)


def is_hyperbolic(phi: Form) -> bool:
    F = phi.field
    if phi.dim % 2:
        return False
    if phi.dim == 0:
        return True
    if isinstance(F, LaurentSeries):
        r1, r2 = residue_forms(phi)
        return is_hyperbolic(r1) and is_hyperbolic(r2)
    if isinstance(F, QuadraticExt) and not (is_finite_field(F) or is_complex_closed(F)):
        base, rads, coeffs = _tower_data(phi)
        return hyperbolic_over_tower(Form(base, coeffs), rads)
    return _isometry_key(phi) == _isometry_key(hyperbolic(F, phi.dim // 2))


def is_split(phi: Form) -> bool:
    """Hyperbolic or Witt-equivalent to a 1-dimensional form."""
    return witt_decompose(phi)[0].dim <= 1


def _finite_aniso(phi: Form) -> Form:
    F = phi.field
    n = phi.dim
    if n == 0:
        return phi
    if n % 2:
        c = determinant(phi)
        if ((n - 1) // 2) % 2:
            c = F.neg(c)
        return Form(F, (F.canonical(c),))
    d = signed_discriminant(phi)
    if F.is_square(d):
        return Form(F, ())
    return Form(F, (F.one(), F.canonical(F.neg(d))))


def _rational_candidates(primes: Sequence[int]) -> list[Fraction]:
    out = []
    for bits in product((0, 1), repeat=len(primes)):
        m = 1
        for b, p in zip(bits, primes):
            if b:
                m *= p
        out += [Fraction(m), Fraction(-m)]
    return sorted(out, key=lambda x: (abs(x), x < 0))


_AUX_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23)


def _complement(S: Form) -> Form:
    """A form T with T _|_ <1,-1> isometric to the isotropic form S."""
    F = S.field
    k = S.dim - 2
    detT = F.neg(determinant(S))
    if k == 0:
        return Form(F, ())
    if k == 1:
        return Form(F, (F.canonical(detT),))
    if isinstance(F, PAdic):
        pools = [list(F.square_classes())]
    else:
        base = _relevant_primes(S.coeffs)
        pools = []
        extra = [p for p in _AUX_PRIMES if p not in base]
        for j in range(0, len(extra) + 1, 2):
            pools.append(_rational_candidates(base + extra[:j]))
    H = hyperbolic(F)
    target = _isometry_key(S)
    for pool in pools:
        for xs in combinations_with_replacement(pool, k - 1):
            last = detT
            for x in xs:
                last = F.div(last, x)
            T = Form(F, tuple(xs) + (F.canonical(last),))
            if _isometry_key(orth_sum(T, H)) == target:
                return T
    raise UnsupportedError(f"no complement found for {S} over {F}")


def _peel(phi: Form) -> tuple[Form, int]:
    """Split off hyperbolic planes one isotropic subform at a time."""
    F = phi.field
    coeffs = [F.canonical(a) for a in phi.coeffs]
    count = 0
    while len(coeffs) >= 2 and is_isotropic(Form(F, tuple(coeffs))):
        n = len(coeffs)
        done = False
        for i, j in combinations(range(n), 2):
            if F.same_class(coeffs[i], F.neg(coeffs[j])):
                coeffs = [c for m, c in enumerate(coeffs) if m not in (i, j)]
                done = True
                break
        size = 3
        while not done and size <= min(n, 5):
            for idx in combinations(range(n), size):
                S = Form(F, tuple(coeffs[m] for m in idx))
                if is_isotropic(S):
                    T = _complement(S)
                    coeffs = [c for m, c in enumerate(coeffs) if m not in idx] + list(T.coeffs)
                    done = True
                    break
            size += 1
        if not done:
            raise UnsupportedError(f"could not locate an isotropic subform of {phi}")
        count += 1
    return Form(F, tuple(coeffs)).sorted(), count


def witt_decompose(phi: Form) -> tuple[Form, int]:
    """(anisotropic part, number of hyperbolic planes)."""
    F = phi.field
    n = phi.dim
    if is_finite_field(F):
        an = _finite_aniso(phi).sorted()
    elif is_complex_closed(F):
        an = Form(F, (F.one(),) * (n % 2))
    elif isinstance(F, RealClosed):
        s = sum(1 if a > 0 else -1 for a in phi.coeffs)
        an = Form(F, (Fraction(1 if s > 0 else -1),) * abs(s)).sorted()
    elif isinstance(F, LaurentSeries):
        r1, r2 = residue_forms(phi)
        an = _from_residues(F, witt_decompose(r1)[0], witt_decompose(r2)[0]).sorted()
    elif isinstance(F, (PAdic, Rationals)):
        an, _ = _peel(phi)
    else:
        raise UnsupportedError(f"Witt decomposition over {F}")
    return an, (n - an.dim) // 2


def represents(phi: Form, a) -> bool:
    if phi.dim == 0:
        return False
    F = phi.field
    return is_isotropic(Form(F, phi.coeffs + (F.neg(a),)))
