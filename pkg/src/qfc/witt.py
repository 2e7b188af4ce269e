"""Witt classes, the fundamental-ideal filtration, torsion and weak isotropy."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from .fields import (
    Field,
    LaurentSeries,
    PAdic,
    QuadraticExt,
    Rationals,
    RealClosed,
    UnsupportedError,
    is_complex_closed,
    is_finite_field,
)
from .forms import (
    Form,
    _relevant_primes,
    is_hyperbolic,
    is_isotropic,
    n_times,
    orth_sum,
    pfister,
    represents,
    residue_forms,
    signed_discriminant,
    total_signature,
    witt_decompose,
)
from . import numtheory as nt

__all__ = [
    "WittClass",
    "witt_class",
    "is_torsion",
    "in_In",
    "in_In_form",
    "in_In_torsion",
    "is_weakly_isotropic",
    "check_torsion_subform",
    "check_divisible_filtration",
    "pfister_generators",
    "lattice_basis",
    "in_lattice",
    "signature_lattice",
    "is_pythagorean",
    "DEFAULT_MULTIPLE_CAP",
]

DEFAULT_MULTIPLE_CAP = 5


@dataclass(frozen=True, eq=False)
class WittClass:
    """Witt class with an anisotropic representative."""

    field: Field
    aniso: Form

    def __eq__(self, other):
        if not isinstance(other, WittClass) or other.field != self.field:
            return NotImplemented
        if self.aniso.dim != other.aniso.dim:
            return False
        return is_hyperbolic(orth_sum(self.aniso, -other.aniso))

    def __hash__(self):
        return hash((self.field, self.aniso.dim))

    def __add__(self, other: "WittClass") -> "WittClass":
        return witt_class(orth_sum(self.aniso, other.aniso))

    def __neg__(self) -> "WittClass":
        return WittClass(self.field, (-self.aniso).sorted())

    def __sub__(self, other: "WittClass") -> "WittClass":
        return self + (-other)

    def __str__(self):
        return f"[{self.aniso}]"

    @property
    def is_zero(self) -> bool:
        return self.aniso.dim == 0

    @property
    def signatures(self) -> tuple[int, ...]:
        return total_signature(self.aniso)


def witt_class(phi: Form) -> WittClass:
    an, _ = witt_decompose(phi)
    return WittClass(phi.field, an.sorted())


def zero_class(F: Field) -> WittClass:
    return WittClass(F, Form(F, ()))


def _as_form(c) -> Form:
    return c.aniso if isinstance(c, WittClass) else c


# ---------------------------------------------------------------------------
# torsion and filtration


def is_torsion(c) -> bool:
    """Signature zero at every ordering (Pfister's local-global principle)."""
    phi = _as_form(c)
    if not phi.field.is_real:
        return True
    return all(s == 0 for s in total_signature(phi))


def _disc_trivial(phi: Form) -> bool:
    return phi.dim == 0 or phi.field.is_square(signed_discriminant(phi))


def in_In_form(phi: Form, n: int) -> bool:
    """Membership of [phi] in I^n F."""
    F = phi.field
    if n <= 0:
        return True
    if phi.dim % 2:
        return False
    if n == 1:
        return True
    if isinstance(F, LaurentSeries):
        # I^n K((t)) = I^n K  +  <<t>> I^(n-1) K
        first, second = residue_forms(phi)
        return in_In_form(orth_sum(first, second), n) and in_In_form(second, n - 1)
    if isinstance(F, QuadraticExt) and not (is_finite_field(F) or is_complex_closed(F)):
        raise UnsupportedError(f"I^n membership over {F} is not decided (not elementary type here)")
    if not _disc_trivial(phi):
        return False
    if n == 2:
        return True
    if is_finite_field(F) or is_complex_closed(F):
        return True
    if isinstance(F, RealClosed):
        return total_signature(phi)[0] % (2**n) == 0
    if isinstance(F, PAdic):
        return is_hyperbolic(phi)
    if isinstance(F, Rationals):
        if total_signature(phi)[0] % (2**n):
            return False
        sq = [nt.squarefree_part(a) for a in phi.coeffs]
        return all(
            is_hyperbolic(Form(PAdic(p), tuple(phi.coeffs))) for p in _relevant_primes(sq)
        )
    raise UnsupportedError(f"I^n membership over {F}")


def in_In(c, n: int) -> bool:
    return in_In_form(_as_form(c), n)


def in_In_torsion(c, n: int) -> bool:
    return in_In(c, n) and is_torsion(c)


# ---------------------------------------------------------------------------
# weak isotropy


def is_weakly_isotropic(phi: Form, cap: int = DEFAULT_MULTIPLE_CAP) -> bool | None:
    """True if some multiple k*phi (k = 1, 2, 4, ..., 2^cap) is isotropic,
    False when no multiple can be, None when undecided up to the cap."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if phi.dim == 0:
        return False
    F = phi.field
    if not F.is_real:
        return True
    for P in F.orderings():
        signs = {F.sign(a, P) for a in phi.coeffs}
        if len(signs) == 1:
            return False  # definite at P, so every multiple is too
    for k in range(cap + 1):
        if is_isotropic(n_times(2**k, phi)):
            return True
    return None


class PreconditionError(ValueError):
    pass


def check_torsion_subform(rho: Form, subset: Sequence[int], cap: int = DEFAULT_MULTIPLE_CAP) -> bool | None:
    """A subform of a torsion form of more than half its dimension is weakly isotropic."""
    if not is_torsion(rho):
        raise PreconditionError(f"{rho} is not a torsion form")
    idx = sorted(set(subset))
    if any(i < 0 or i >= rho.dim for i in idx):
        raise PreconditionError("subform index out of range")
    if 2 * len(idx) <= rho.dim:
        raise PreconditionError("subform must have more than half the dimension")
    verdict = is_weakly_isotropic(rho.sub(idx), cap)
    if verdict is False:
        raise AssertionError(f"subform {rho.sub(idx)} of torsion form {rho} is strongly anisotropic")
    return verdict


# ---------------------------------------------------------------------------
# generators, lattices and group closures


def pfister_generators(F: Field, n: int) -> list[Form]:
    """n-fold Pfister forms on canonical non-square slots (n = 0 gives the
    1-dimensional forms <a>, which generate W F additively)."""
    reps = F.square_classes()
    if n == 0:
        return [Form(F, (r,)) for r in reps]
    slots = [r for r in reps if not F.is_square(r)]
    return [pfister(F, *s) for s in combinations_with_replacement(slots, n)]


def lattice_basis(vectors: Iterable[Sequence[int]]) -> list[list[int]]:
    """Echelon basis of the integer lattice spanned by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    width = len(rows[0])
    basis = []
    for col in range(width):
        if not rows:
            break
        nz = [r for r in rows if r[col]]
        rest = [r for r in rows if not r[col]]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv, keep = nz[0], [nz[0]]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r2 = [a - q * b for a, b in zip(r, piv)]
                (keep if r2[col] else rest).append(r2)
            nz = keep
        if nz:
            piv = nz[0] if nz[0][col] > 0 else [-a for a in nz[0]]
            basis.append(piv)
        rows = [r for r in rest if any(r)]
    return basis


def in_lattice(v: Sequence[int], basis: list[list[int]]) -> bool:
    v = list(v)
    for b in basis:
        col = next(i for i, a in enumerate(b) if a)
        if v[col] % b[col]:
            return False
        q = v[col] // b[col]
        v = [a - q * c for a, c in zip(v, b)]
    return not any(v)


@lru_cache(maxsize=None)
def _signature_lattice(F: Field, n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(r) for r in lattice_basis(total_signature(g) for g in pfister_generators(F, n)))


def signature_lattice(F: Field, n: int) -> list[list[int]]:
    """Basis of the image of I^n F under the total signature."""
    return [list(r) for r in _signature_lattice(F, n)]


@lru_cache(maxsize=None)
def is_pythagorean(F: Field) -> bool:
    """Every sum of two squares is a square (checked on square classes)."""
    one = Form(F, (F.one(), F.one()))
    return all(F.is_square(r) or not represents(one, r) for r in F.square_classes())


@lru_cache(maxsize=None)
def ideal_elements(F: Field, n: int, limit: int = 4096) -> tuple[WittClass, ...]:
    """All classes of I^n F for a field with finite Witt ring (nonreal, finite
    square classes), by closure of the Pfister generators under addition."""
    if F.is_real:
        raise UnsupportedError("Witt ring of a real field is infinite")
    gens = []
    for g in pfister_generators(F, n):
        c = witt_class(g)
        if not c.is_zero and c not in gens:
            gens.append(c)
    elems = [zero_class(F)]
    frontier = list(elems)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = x + g
                if y not in elems and y not in new:
                    new.append(y)
        elems += new
        frontier = new
        if len(elems) > limit:
            raise UnsupportedError("Witt ring larger than the enumeration limit")
    return tuple(elems)


def _in_two_times(c: WittClass, n_minus_1: int) -> bool | None:
    """Is c in 2 x I^(n-1) F?  None when undecidable here."""
    F = c.field
    if not F.is_real:
        doubles = [x + x for x in ideal_elements(F, n_minus_1)]
        return c in doubles
    if is_pythagorean(F):
        sig = c.signatures
        if any(s % 2 for s in sig):
            return False
        return in_lattice([s // 2 for s in sig], signature_lattice(F, n_minus_1))
    return None


def check_divisible_filtration(F: Field, n: int, samples: int = 20, cap: int = DEFAULT_MULTIPLE_CAP, seed: int = 0) -> dict:
    """Check: if I^n F = 2 x I^(n-1) F then I^(n+1)_t F = 0 and anisotropic
    forms with class in I^(2n-1) F are strongly anisotropic."""
    if n < 1:
        raise ValueError("n must be at least 1")
    report = {"field": str(F), "n": n, "hypothesis": None, "samples": [], "failures": [], "multiple_cap": cap}
    try:
        gens = pfister_generators(F, n)
    except UnsupportedError as exc:
        report["hypothesis"] = "inconclusive"
        report["note"] = str(exc)
        return report
    verdicts = [_in_two_times(witt_class(g), n - 1) for g in gens]
    if any(v is None for v in verdicts):
        report["hypothesis"] = "inconclusive"
        return report
    holds = all(verdicts)
    report["hypothesis"] = "holds" if holds else "fails"
    if not holds:
        report["note"] = "hypothesis fails; the statement is vacuously consistent"
        return report
    # I^(n+1)_t F = 0; automatic for real pythagorean fields (W F torsion free)
    if not F.is_real:
        for g in pfister_generators(F, n + 1):
            if not is_hyperbolic(g):
                report["failures"].append({"kind": "torsion in I^(n+1)", "form": str(g)})
    rng = random.Random(seed)
    level_gens = pfister_generators(F, 2 * n - 1)
    for _ in range(samples):
        k = rng.randint(0, 2)
        phi = Form(F, ())
        for _ in range(k):
            phi = orth_sum(phi, rng.choice(level_gens))
        an = witt_class(phi).aniso
        verdict = is_weakly_isotropic(an, cap) if an.dim else False
        entry = {"form": str(an), "weakly_isotropic": _tern(verdict)}
        report["samples"].append(entry)
        if verdict is True:
            report["failures"].append({"kind": "weakly isotropic", "form": str(an)})
    return report


def _tern(v: bool | None) -> str:
    return "unknown-above-cap" if v is None else str(v).lower()
