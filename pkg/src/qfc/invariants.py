"""Desk-scale computation of u, st, the symbol lengths and splitting heights."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from itertools import combinations
from typing import Any, Sequence

from .fields import (
    Field,
    FieldError,
    LaurentSeries,
    PAdic,
    QuadraticExt,
    Rationals,
    RealClosed,
    UnsupportedError,
    base_field,
    extend_quadratic,
    is_complex_closed,
    is_finite_field,
)
from .forms import (
    Form,
    _in_span,
    _rational_candidates,
    _relevant_primes,
    determinant,
    is_hyperbolic,
    is_isotropic,
    orth_sum,
    pfister,
    signed_discriminant,
    split_over_tower,
    total_signature,
    witt_decompose,
)
from .witt import (
    in_In_form,
    in_lattice,
    is_pythagorean,
    is_torsion,
    pfister_generators,
    signature_lattice,
)
from . import numtheory as nt

__all__ = [
    "INF",
    "InvariantValue",
    "SplittingTower",
    "compute_u",
    "compute_st",
    "lambda_n",
    "lambda_of_class",
    "splitting_tower",
    "gamma_form",
    "gamma_field",
    "reduce_mod_In",
    "anisotropic_forms",
    "filtration_vanishes",
    "torsion_filtration_vanishes",
    "imaginary_extension",
    "DEFAULT_DIM_CAP",
    "DEFAULT_BFS_CAP",
]

INF = math.inf
DEFAULT_DIM_CAP = 8
DEFAULT_BFS_CAP = 6

EXACT = "exact"
LOWER = "lower-bound-at-cap"
UPPER = "upper-bound"


def _jsonable(v):
    return "inf" if v == INF else v


@dataclass(frozen=True)
class InvariantValue:
    kind: str
    value: int | float
    exactness: str = EXACT
    witness: str | None = None
    note: str | None = None

    def as_dict(self) -> dict[str, Any]:
        out = {"kind": self.kind, "value": _jsonable(self.value), "exactness": self.exactness}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note is not None:
            out["note"] = self.note
        return out

    def __str__(self):
        s = f"{self.kind} = {_jsonable(self.value)} ({self.exactness})"
        return s + (f" witness {self.witness}" if self.witness else "")


# ---------------------------------------------------------------------------
# anisotropic sweeps


def _reps(F: Field) -> list:
    return sorted(F.square_classes(), key=F.sort_key)


def anisotropic_forms(F: Field, max_dim: int):
    """Yield (dim, list of anisotropic square-class forms of that dim).

    Every subform of an anisotropic form is anisotropic, so each level is
    built by extending the previous one with a representative that sorts
    last."""
    reps = _reps(F)
    level = [()]
    for d in range(1, max_dim + 1):
        nxt = []
        for t in level:
            start = reps.index(t[-1]) if t else 0
            for r in reps[start:]:
                phi = Form(F, t + (r,))
                if not is_isotropic(phi):
                    nxt.append(t + (r,))
        level = nxt
        yield d, [Form(F, t) for t in level]
        if not level:
            return


def _cited(kind, value, why) -> InvariantValue:
    return InvariantValue(kind, value, EXACT, note=f"cited: {why}")


def compute_u(F: Field, dim_cap: int = DEFAULT_DIM_CAP) -> InvariantValue:
    """Largest dimension of an anisotropic torsion form."""
    if isinstance(F, Rationals):
        return _cited("u", 4, "Hasse-Minkowski, every torsion form of dim 5 over Q is isotropic")
    if isinstance(F, QuadraticExt) and isinstance(base_field(F), (Rationals, PAdic)) and not is_finite_field(F):
        return _cited("u", 4, "quadratic extensions of Q and Q_p have u = 4")
    if isinstance(F, RealClosed) or (F.is_real and _has_reps(F) and is_pythagorean(F)):
        return InvariantValue("u", 0, EXACT, note="pythagorean: the Witt ring is torsion free")
    if not _has_reps(F):
        raise UnsupportedError(f"u-invariant of {F}")
    best, witness = 0, None
    for d, forms in anisotropic_forms(F, dim_cap + 1):
        tors = [phi for phi in forms if is_torsion(phi)]
        if tors:
            best, witness = d, tors[0]
        if not forms:
            return InvariantValue("u", best, EXACT, witness=_wstr(witness))
        if d > dim_cap:
            break
    return InvariantValue("u", best, LOWER, witness=_wstr(witness))


def _has_reps(F: Field) -> bool:
    try:
        F.square_classes()
    except UnsupportedError:
        return False
    return True


def _wstr(phi) -> str | None:
    return None if phi is None else str(phi)


# ---------------------------------------------------------------------------
# stability index


def _st_by_lattice(F: Field, limit: int) -> int | None:
    """Least n with sig(I^(n+1)) = 2 sig(I^n); valid for pythagorean F."""
    for n in range(limit + 1):
        upper = signature_lattice(F, n)
        ok = True
        for g in pfister_generators(F, n + 1):
            sig = total_signature(g)
            if any(s % 2 for s in sig) or not in_lattice([s // 2 for s in sig], upper):
                ok = False
                break
        if ok:
            return n
    return None


def compute_st(F: Field) -> InvariantValue:
    if not F.is_real:
        return InvariantValue("st", 0, EXACT, note="nonreal")
    if len(F.orderings()) == 1:
        return InvariantValue("st", 0, EXACT, note="uniquely ordered")
    if isinstance(F, LaurentSeries):
        inner = compute_st(F.inner).value
        value = inner + 1
        if _has_reps(F) and is_pythagorean(F):
            direct = _st_by_lattice(F, value + 1)
            if direct != value:
                raise AssertionError(f"st recursion gives {value} but the definition gives {direct} over {F}")
            return InvariantValue("st", value, EXACT, note="recursion confirmed by signature lattices")
        return InvariantValue("st", value, EXACT, note="recursion st(K((t))) = st(K) + 1")
    if _has_reps(F) and is_pythagorean(F):
        direct = _st_by_lattice(F, 8)
        if direct is not None:
            return InvariantValue("st", direct, EXACT, note="signature lattices")
    raise UnsupportedError(f"stability index of {F}")


# ---------------------------------------------------------------------------
# symbol lengths


@dataclass
class _CosetTable:
    reps: list = dc_field(default_factory=list)  # (form, slot tuples)
    closed: bool = False

    @property
    def depth(self) -> int:
        return max(len(s) for _, s in self.reps)


def _slot_tuples(F: Field, n: int) -> list[tuple]:
    slots = [r for r in _reps(F) if not F.is_square(r)]
    return list(combinations_with_replacement(slots, n))


def _find(table: list, phi: Form, n: int):
    for entry in table:
        if in_In_form(orth_sum(phi, -entry[0]), n + 1):
            return entry
    return None


@lru_cache(maxsize=None)
def _coset_table(F: Field, n: int, cap: int) -> _CosetTable:
    """Representatives of I^n / I^(n+1) by breadth-first search over sums of
    n-fold Pfister forms."""
    zero = Form(F, ())
    gens = []
    for s in _slot_tuples(F, n):
        g = pfister(F, *s)
        if in_In_form(g, n + 1):
            continue
        if _find([(h, ()) for h, _ in gens], g, n) is None:
            gens.append((g, s))
    table = _CosetTable([(zero, ())])
    frontier = list(table.reps)
    depth = 0
    while frontier:
        if depth == cap:
            return table
        depth += 1
        new = []
        for phi, used in frontier:
            for g, s in gens:
                psi = orth_sum(phi, g)
                if _find(table.reps, psi, n) is None and _find(new, psi, n) is None:
                    new.append((psi, used + (s,)))
        table.reps += new
        frontier = new
    table.closed = True
    return table


def lambda_n(F: Field, n: int, cap: int = DEFAULT_BFS_CAP) -> InvariantValue:
    kind = f"lambda^{n}"
    if n == 0:
        return InvariantValue(kind, 1, EXACT, note="W/I has order 2")
    if not _has_reps(F):
        raise UnsupportedError(f"symbol lengths over {F} need finitely many square classes")
    t = _coset_table(F, n, cap)
    deepest = max(t.reps, key=lambda e: len(e[1]))
    return InvariantValue(kind, t.depth, EXACT if t.closed else LOWER, witness=str(deepest[0]) if deepest[1] else None)


def lambda_of_class(c, n: int, cap: int = DEFAULT_BFS_CAP) -> InvariantValue:
    phi = c.aniso if hasattr(c, "aniso") else c
    F = phi.field
    kind = f"lambda^{n}"
    if not in_In_form(phi, n):
        raise FieldError(f"{phi} is not in I^{n}")
    if n == 0:
        return InvariantValue(kind, phi.dim % 2)
    t = _coset_table(F, n, cap)
    hit = _find(t.reps, phi, n)
    if hit is None:
        return InvariantValue(kind, cap + 1, LOWER)
    return InvariantValue(kind, len(hit[1]), witness=" + ".join(f"<<{', '.join(map(F.fmt, s))}>>" for s in hit[1]) or None)


# ---------------------------------------------------------------------------
# splitting towers and heights


@dataclass(frozen=True)
class SplittingTower:
    base: Field
    radicands: tuple

    @property
    def degree(self) -> int:
        return 2 ** len(self.radicands)

    def field(self) -> Field:
        K = self.base
        for b in self.radicands:
            K = extend_quadratic(K, b) if K is self.base else _extend_embedded(K, self.base, b)
        return K

    def as_dict(self) -> dict:
        return {
            "base": str(self.base),
            "radicands": [self.base.fmt(b) for b in self.radicands],
            "degree": self.degree,
        }


def _extend_embedded(K: Field, base: Field, b) -> Field:
    from .fields import embed

    return extend_quadratic(K, embed(b, base, K))


def _collapse(F: Field, bs: Sequence) -> tuple:
    kept = []
    for b in bs:
        if F.is_square(b) or _in_span(F, b, kept):
            continue
        kept.append(b)
    return tuple(kept)


def splitting_tower(phi: Form) -> SplittingTower:
    F = phi.field
    a = phi.coeffs
    bs = [F.neg(F.mul(a[2 * i], a[2 * i + 1])) for i in range(phi.dim // 2)]
    tower = SplittingTower(F, _collapse(F, bs))
    if not split_over_tower(phi, tower.radicands):
        raise AssertionError(f"tower {tower.as_dict()} does not split {phi}")
    return tower


def _split_here(phi: Form) -> bool:
    return split_over_tower(phi, ())


def _candidate_radicands(phi: Form) -> list:
    F = phi.field
    if isinstance(F, Rationals):
        primes = _relevant_primes([nt.squarefree_part(x) for x in phi.coeffs])
        return [x for x in _rational_candidates(primes) if x != 1]
    return [r for r in _reps(F) if not F.is_square(r)]


def gamma_form(phi: Form, exact: bool = False) -> InvariantValue:
    if _split_here(phi):
        return InvariantValue("gamma_form", 1, EXACT)
    tower = splitting_tower(phi)
    ub = tower.degree
    if ub == 2:
        return InvariantValue("gamma_form", 2, EXACT, witness=str(tower.as_dict()["radicands"]))
    if not exact:
        return InvariantValue("gamma_form", ub, UPPER, witness=str(tower.as_dict()["radicands"]))
    F = phi.field
    if not (isinstance(F, Rationals) or _has_reps(F)):
        raise UnsupportedError(f"exact splitting height over {F}")
    cands = _candidate_radicands(phi)
    k = 1
    while 2**k < ub:
        for sub in combinations(cands, k):
            if len(_collapse(F, sub)) < k:
                continue
            if split_over_tower(phi, sub):
                value = 2**k
                # degrees 2 and 4 are forced: odd-degree extensions never split a form not split over F
                exactness = EXACT if value == 2 or (value == 4 and _searched_all_quadratic(phi)) else UPPER
                return InvariantValue("gamma_form", value, exactness, witness=str([F.fmt(b) for b in sub]))
        k += 1
    exactness = EXACT if ub == 4 and _searched_all_quadratic(phi) else UPPER
    return InvariantValue("gamma_form", ub, exactness, witness=str(tower.as_dict()["radicands"]))


def _searched_all_quadratic(phi: Form) -> bool:
    """Did the degree-2 search cover every quadratic extension?"""
    F = phi.field
    if not isinstance(F, Rationals):
        return True
    # an even form with nontrivial discriminant d can only be split by F(sqrt d)
    return phi.dim % 2 == 0 and not F.is_square(signed_discriminant(phi))


def imaginary_extension(F: Field) -> Field:
    return extend_quadratic(F, F.neg(F.one()))


def gamma_field(F: Field, dim_cap: int = DEFAULT_DIM_CAP) -> InvariantValue:
    if not _has_reps(F):
        raise UnsupportedError(f"splitting height of {F} needs finitely many square classes")
    if F.is_real:
        u_i = compute_u(imaginary_extension(F), dim_cap)
        ceiling = 2 ** (u_i.value // 2 + 1) if u_i.exactness == EXACT else INF
        max_dim = dim_cap
    else:
        u = compute_u(F, dim_cap)
        ceiling = 2 ** (u.value // 2) if u.exactness == EXACT else INF
        max_dim = min(dim_cap, u.value) if u.exactness == EXACT else dim_cap
    best = InvariantValue("gamma_field", 1, EXACT)
    all_exact = True
    complete = not F.is_real
    for d, forms in anisotropic_forms(F, max_dim):
        for phi in forms:
            g = gamma_form(phi, exact=True)
            all_exact &= g.exactness == EXACT
            if g.value > best.value:
                best = InvariantValue("gamma_field", g.value, EXACT, witness=str(phi))
            if best.value >= ceiling:
                return InvariantValue("gamma_field", best.value, EXACT, witness=best.witness, note=f"meets the ceiling {ceiling}")
        if not forms:
            complete = True
    if complete and all_exact:
        return best
    exactness = UPPER if complete else LOWER
    return InvariantValue("gamma_field", best.value, exactness, witness=best.witness, note=f"ceiling {_jsonable(ceiling)}")


# ---------------------------------------------------------------------------
# representatives modulo I^(m+1)


def reduce_mod_In(theta: Form, m: int, cap: int = DEFAULT_BFS_CAP) -> Form:
    """A form phi with [theta - phi] in I^(m+1) and small dimension."""
    F = theta.field
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        if theta.dim % 2 == 0:
            return Form(F, ())
        return Form(F, (F.canonical(determinant(theta)),))
    prev = reduce_mod_In(theta, m - 1, cap)
    residual = orth_sum(theta, -prev)
    table = _coset_table(F, m, cap)
    hit = _find(table.reps, residual, m)
    if hit is None:
        raise UnsupportedError(f"BFS cap {cap} exceeded while reducing {theta} modulo I^{m + 1}")
    phi = prev
    for s in hit[1]:
        phi = orth_sum(phi, pfister(F, *s))
    try:
        phi = witt_decompose(phi)[0]
    except UnsupportedError:
        pass
    return phi.sorted()


# ---------------------------------------------------------------------------
# filtration vanishing


_I3_ZERO_CITED = "I^3 of a nonreal number field is zero"


def filtration_vanishes(K: Field, m: int) -> tuple[bool, str]:
    """(I^m K = 0, justification)."""
    if m <= 0:
        return False, "W K is never zero"
    if is_complex_closed(K):
        return True, "quadratically closed"
    if _has_reps(K):
        for s in _slot_tuples(K, m):
            g = pfister(K, *s)
            if not is_hyperbolic(g):
                return False, f"witness {g}"
        return True, "all Pfister generators hyperbolic"
    if isinstance(K, QuadraticExt) and isinstance(K.inner, Rationals) and not K.is_real:
        if m >= 3:
            return True, f"cited: {_I3_ZERO_CITED}"
        w = _nonsplit_pfister(K, m)
        if w is not None:
            return False, f"witness {w}"
    raise UnsupportedError(f"I^{m} vanishing over {K}")


def _nonsplit_pfister(K: QuadraticExt, m: int):
    cands = [x for x in _rational_candidates([2, 3, 5, 7]) if x != 1]
    for s in combinations_with_replacement(cands, m):
        g = pfister(K.inner, *s)
        if not split_over_tower(g, (K.radicand,)):
            return f"<<{', '.join(map(str, s))}>>"
    return None


def torsion_filtration_vanishes(F: Field, m: int) -> tuple[bool, str]:
    """(I^m_t F = 0, justification)."""
    if not F.is_real:
        return filtration_vanishes(F, m)
    if _has_reps(F) and is_pythagorean(F):
        return True, "pythagorean: torsion free"
    if isinstance(F, Rationals):
        if m >= 3:
            return True, "I^3 Q is torsion free (Hasse-Minkowski with signatures)"
        w = pfister(F, Fraction(3), Fraction(-1)) if m == 2 else Form(F, (Fraction(1), Fraction(-3)))
        return False, f"witness {w}"
    raise UnsupportedError(f"torsion filtration over {F}")
