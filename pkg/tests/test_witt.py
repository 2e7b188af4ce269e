from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qfc import forms as fm
from qfc import witt as wt
from qfc.dsl import parse_field, parse_form_literal
from qfc.fields import UnsupportedError


def form(field: str, literal: str) -> fm.Form:
    F = parse_field(field)
    return fm.Form(F, tuple(parse_form_literal(literal, F)))


# --- examples ------------------------------------------------------------------


@pytest.mark.parametrize(
    "field,literal,n,expected",
    [
        ("Q", "1,1,1,1", 2, True),
        ("Q", "1,1,1,1", 3, False),
        ("Qp(2)", "1,1,1,1", 2, True),
        ("Qp(2)", "1,1,1,1", 3, False),
        ("Q", "1,1,1,1,1,1,1,1", 3, True),
        ("Q", "1,1,1,1,1,1,1,1", 4, False),
        ("R((t))", "1,-t,-t,t^2", 2, True),
        ("R((t))", "1,-t,-t,t^2", 3, False),
        ("F(3)", "1,1", 2, False),
        ("F(3)", "1,1,1,1", 5, True),
        ("R", "1,1,1,1", 2, True),
        ("R", "1,1,1,1", 3, False),
        ("Q", "1,2", 2, False),
    ],
)
def test_in_In_examples(field, literal, n, expected):
    assert wt.in_In(form(field, literal), n) is expected


def test_in_In_undecided_over_number_field_extension():
    with pytest.raises(UnsupportedError):
        wt.in_In(form("Q(sqrt -1)", "1,1,1,1"), 3)


def test_witt_class_arithmetic():
    a = wt.witt_class(form("Qp(3)", "1,2,1,-1"))
    b = wt.witt_class(form("Qp(3)", "1,2"))
    assert a == b
    assert (a - b).is_zero
    assert (a + (-a)).is_zero


def test_torsion_and_signatures():
    assert wt.is_torsion(form("Q", "1,-2"))
    assert not wt.is_torsion(form("Q", "1,2"))
    assert wt.is_torsion(form("F(7)", "1,1,1"))
    assert sorted(wt.witt_class(form("R((t))", "1,t")).signatures) == [0, 2]


@pytest.mark.parametrize(
    "field,literal,expected",
    [
        ("Q", "1,1,-3", True),
        ("Q", "1,1", False),
        ("Q", "1,-1", True),
        ("R((t))", "1,-t", False),
        ("R((t))((s))", "1,-t,-s,-t*s", None),
        ("F(3)", "1,1", True),
    ],
)
def test_weak_isotropy(field, literal, expected):
    assert wt.is_weakly_isotropic(form(field, literal)) is expected


def test_weak_isotropy_cap_validation():
    with pytest.raises(ValueError):
        wt.is_weakly_isotropic(form("Q", "1,-1"), cap=0)


def test_torsion_subform_check():
    rho = form("Q", "1,1,-1,-1")
    assert wt.check_torsion_subform(rho, [0, 1, 2]) is True
    with pytest.raises(wt.PreconditionError):
        wt.check_torsion_subform(rho, [0, 1])
    with pytest.raises(wt.PreconditionError):
        wt.check_torsion_subform(form("Q", "1,1,1"), [0, 1])


def test_lattice_helpers():
    basis = wt.lattice_basis([[2, 0], [0, 2], [2, 2]])
    assert wt.in_lattice([4, 2], basis)
    assert not wt.in_lattice([1, 0], basis)
    assert wt.signature_lattice(parse_field("R"), 2) == [[4]]


def test_pythagorean_detection():
    assert wt.is_pythagorean(parse_field("R"))
    assert wt.is_pythagorean(parse_field("R((t))"))
    assert not wt.is_pythagorean(parse_field("Qp(3)"))


# --- divisible filtration check --------------------------------------------------


@pytest.mark.parametrize("field", ["R", "R((t))", "R((t))((s))"])
@pytest.mark.parametrize("n", [1, 2])
def test_divisible_filtration_on_real_fields(field, n):
    r = wt.check_divisible_filtration(parse_field(field), n, samples=10)
    assert r["hypothesis"] in ("holds", "fails")
    assert r["failures"] == []


def test_divisible_filtration_hypothesis_fails_for_laurent_reals_at_level_one():
    r = wt.check_divisible_filtration(parse_field("R((t))"), 1)
    assert r["hypothesis"] == "fails"


def test_divisible_filtration_counterexample_over_nonreal_field():
    # W(F_3) = Z/4: I = 2W holds, yet <1,1> lies in I, is anisotropic and
    # becomes isotropic after doubling, so the conclusion fails for nonreal fields
    r = wt.check_divisible_filtration(parse_field("F(3)"), 1, samples=20)
    assert r["hypothesis"] == "holds"
    assert any(f["kind"] == "weakly isotropic" for f in r["failures"])


def test_divisible_filtration_vacuous_over_f9():
    # W(F_9) has order 4 and 2W = 0, so I = 2W fails and the statement is vacuous
    r = wt.check_divisible_filtration(parse_field("F(9)"), 1)
    assert r["hypothesis"] == "fails" and r["failures"] == []


def test_divisible_filtration_inconclusive_over_q():
    assert wt.check_divisible_filtration(parse_field("Q"), 1)["hypothesis"] == "inconclusive"


# --- properties ------------------------------------------------------------------

DECIDABLE = ["F(5)", "F(9)", "Qp(2)", "Qp(3)", "R", "R((t))", "R((t))((s))", "F(3)((t))"]


@st.composite
def forms(draw, min_dim=0, max_dim=6, field=None):
    F = parse_field(field or draw(st.sampled_from(DECIDABLE)))
    reps = list(F.square_classes())
    coeffs = draw(st.lists(st.sampled_from(reps), min_size=min_dim, max_size=max_dim))
    return fm.Form(F, tuple(coeffs))


@st.composite
def rational_forms(draw, max_dim=6):
    coeffs = draw(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 5, -5, 6, -6]), min_size=0, max_size=max_dim))
    return fm.Form(parse_field("Q"), tuple(Fraction(c) for c in coeffs))


@given(st.one_of(forms(), rational_forms()), st.integers(0, 4))
def test_in_In_monotone(phi, n):
    if wt.in_In(phi, n + 1):
        assert wt.in_In(phi, n)


@given(st.data(), st.integers(1, 3))
def test_in_In_closed_under_sum_and_product(data, n):
    field = data.draw(st.sampled_from(DECIDABLE))
    phi = data.draw(forms(field=field, max_dim=4))
    psi = data.draw(forms(field=field, max_dim=4))
    if wt.in_In(phi, n) and wt.in_In(psi, n):
        assert wt.in_In(fm.orth_sum(phi, psi), n)
    if wt.in_In(phi, n) and wt.in_In(psi, 1):
        assert wt.in_In(fm.tensor(phi, psi), n + 1)


@given(st.one_of(forms(), rational_forms()), st.integers(1, 4))
def test_arason_pfister(phi, n):
    an = wt.witt_class(phi).aniso
    if 0 < an.dim < 2**n:
        assert not wt.in_In(an, n)


@given(st.data(), st.integers(1, 3))
def test_pfister_forms_lie_in_their_power(data, n):
    F = parse_field(data.draw(st.sampled_from(DECIDABLE)))
    slots = data.draw(st.lists(st.sampled_from(list(F.square_classes())), min_size=n, max_size=n))
    assert wt.in_In(fm.pfister(F, *slots), n)


@given(st.one_of(forms(max_dim=5), rational_forms(max_dim=5)))
def test_witt_class_ignores_hyperbolic_planes(phi):
    assert wt.witt_class(phi) == wt.witt_class(fm.orth_sum(phi, fm.hyperbolic(phi.field, 2)))


@given(st.one_of(forms(max_dim=6), rational_forms(max_dim=6)))
def test_torsion_iff_some_two_power_multiple_hyperbolic(phi):
    assume(phi.dim % 2 == 0)
    hyp = any(fm.is_hyperbolic(fm.n_times(2**k, phi)) for k in range(6))
    assert wt.is_torsion(phi) == hyp


@given(rational_forms(max_dim=6))
def test_torsion_subforms_never_strongly_anisotropic(rho):
    assume(rho.dim >= 2 and wt.is_torsion(rho))
    idx = list(range(rho.dim // 2 + 1))
    assert wt.check_torsion_subform(rho, idx) in (True, None)


@given(st.one_of(forms(min_dim=1, max_dim=6), rational_forms(max_dim=6)))
def test_nontrivial_torsion_forms_are_weakly_isotropic(phi):
    assume(phi.dim > 0 and wt.is_torsion(phi))
    assert wt.is_weakly_isotropic(phi) is True
