from __future__ import annotations

import json
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stores import TRUE_VALUES, random_store
from qfc import bounds as bd
from qfc.bounds import FINITE, INF, BoundFact
from qfc.dsl import parse_field
from qfc.fields import QFCError


def facts(*triples):
    return [BoundFact(*t) for t in triples]


# --- formula helpers ---------------------------------------------------------------


def test_schubert_bound_at_small_values():
    # u(R) = 0 and st(R) = 0 must allow u(C) = 1
    assert bd.schubert_bound(0, 0) == 1
    assert isinstance(bd.schubert_bound(254, 1), int)


def test_lambda_formula_upper_bound_for_u():
    # u <= 2^(l + 1) - 2 with l = lambda-dependent exponent; spot value
    store = bd.infer(facts(("lambda(2)", "=", 1), ("lambda(3)", "<=", 1)))
    assert store.upper("u") == 254


# --- worked examples ---------------------------------------------------------------


def test_two_lambda_facts_give_the_full_chain():
    store = bd.infer(facts(("lambda(2)", "=", 1), ("lambda(3)", "<=", 1)))
    assert store.upper("st") == 1
    assert store.upper("u") == 254
    assert store.upper("u_ext_sqrt_minus1") == 384
    assert store.upper("gamma") == 2**193
    status = bd.finiteness_status(store)
    assert all(c["status"] == "derivable-finite" for c in status["conditions"].values())
    assert status["equivalence_realized"]


def test_explain_lists_rules_for_u():
    store = bd.infer(facts(("lambda(2)", "=", 1), ("lambda(3)", "<=", 1)))
    rules = [s["rule"] for s in bd.explain(store, "u")]
    assert rules[-1] == "R9" and "R3" in rules


def test_u_of_imaginary_extension_bounds_gamma():
    store = bd.infer(facts(("u(F(sqrt-1))", "=", 6)))
    assert store.upper("gamma") == 16
    status = bd.finiteness_status(store)
    assert all(c["status"] == "derivable-finite" for c in status["conditions"].values())


def test_empty_store_leaves_everything_open():
    status = bd.finiteness_status(bd.infer([]))
    assert all(c["status"] == "open" for c in status["conditions"].values())


def test_u_zero_alone_does_not_bound_the_extension():
    assert bd.infer(facts(("u", "=", 0))).upper("u_ext_sqrt_minus1") == INF


def test_u_and_st_bound_the_extension():
    assert bd.infer(facts(("u", "=", 254), ("st", "=", 1))).upper("u_ext_sqrt_minus1") == 384


def test_nonreal_forces_st_zero():
    store = bd.infer(facts(("real_flag", "=", False)))
    assert store.upper("st") == 0
    assert store.realness == "nonreal"


def test_contradiction_reports_minimal_subset():
    with pytest.raises(bd.InconsistentStore) as exc:
        bd.infer(facts(("u", "<=", 3), ("st", "=", 0), ("u", ">=", 5)))
    assert sorted(map(str, exc.value.conflict)) == ["u <= 3", "u >= 5"]


def test_is_infinite_propagates_to_status():
    status = bd.finiteness_status(bd.infer(facts(("u", "is-infinite"))))
    assert status["conditions"]["i"]["status"] == "derivable-infinite"


def test_filtration_assertions():
    store = bd.infer(
        [BoundFact("filtration_assertion", "equals-2-multiple", (("level", 2),))]
    )
    assert store.upper("st") == 2
    store = bd.infer([BoundFact("filtration_assertion", "is-zero-ideal", (("ideal", "I_ext"), ("level", 3)))])
    assert store.upper("st") == 2
    assert store.upper("zero(I_t)") == 3
    # vanishing of I^3 alone does not bound u of the extension
    assert bd.finiteness_status(store)["conditions"]["ii"]["status"] == "open"


@pytest.mark.parametrize(
    "bad",
    [
        {"invariant": "nonsense", "relation": "<=", "value": 1},
        {"invariant": "u", "relation": "<", "value": 1},
        {"invariant": "u", "relation": "<=", "value": -1},
        {"invariant": "real_flag", "relation": "<=", "value": 1},
        {"relation": "<="},
    ],
)
def test_malformed_facts_rejected(bad):
    with pytest.raises(QFCError):
        bd.infer(bd.load_facts(json.dumps([bad])))


def test_json_dump_is_byte_stable():
    f = facts(("lambda(2)", "=", 1), ("lambda(3)", "<=", 1))
    assert bd.dump_store(bd.infer(f), ["u"]) == bd.dump_store(bd.infer(list(reversed(f))), ["u"])


# --- engine algebra -----------------------------------------------------------------


def _at_least_as_tight(a: bd.FactStore, b: bd.FactStore) -> bool:
    for key in b.bounds:
        lo_a, up_a = a.get(key)
        lo_b, up_b = b.get(key)
        if bd._rank(up_a) > bd._rank(up_b) or bd._rank(lo_a) < bd._rank(lo_b):
            return False
    return True


@given(st.randoms(use_true_random=False))
def test_infer_is_idempotent_and_replayable(rnd):
    _, fs = random_store(rnd)
    s1 = bd.infer(fs)
    s2 = bd.infer(s1)
    assert s1.as_dict() == s2.as_dict()
    assert bd.replay(s1) == []


@given(st.randoms(use_true_random=False))
def test_infer_is_monotone(rnd):
    _, fs = random_store(rnd)
    sub = [f for f in fs if rnd.random() < 0.5]
    assert _at_least_as_tight(bd.infer(fs), bd.infer(sub))


@given(st.randoms(use_true_random=False))
def test_inferred_bounds_contain_true_values(rnd):
    field, fs = random_store(rnd)
    store = bd.infer(fs)
    for key, v in TRUE_VALUES[field].items():
        if key == "real":
            continue
        lo, up = store.get(key)
        assert bd._rank(lo) <= bd._rank(v) <= bd._rank(up) or up is FINITE, (key, lo, v, up)


# --- cross-validation ---------------------------------------------------------------


@pytest.mark.parametrize("field", ["F(5)", "Qp(3)", "R", "R((t))"])
def test_rules_hold_on_computed_invariants(field):
    r = bd.check_rules_against_field(parse_field(field))
    assert r["violations"] == 0
    assert {e["status"] for e in r["rules"]} <= {"ok", "inconclusive", "not-applicable"}
