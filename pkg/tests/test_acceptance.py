"""Acceptance criteria 1 to 10.  Each test records a PASS/FAIL line that is
printed in the terminal summary under "acceptance criteria"."""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations_with_replacement, product

import pytest

from oracles import finite_isotropic_brute, padic_in_In, sqfree_span_contains
from stores import random_store
from qfc import bounds as bd
from qfc import forms as fm
from qfc import invariants as inv
from qfc import witt as wt
from qfc.dsl import parse_field
from qfc.report import BATTERY, laurent_tower, write_report


# 1 ---------------------------------------------------------------------------


def test_c1_isotropy_matches_exhaustive_search(record):
    t0 = time.perf_counter()
    mismatches, checked = [], 0
    for q in (3, 5, 7, 13):
        F = parse_field(f"F({q})")
        reps = list(F.square_classes())
        ints = [int(F.fmt(r)) % q for r in reps]
        for n in range(1, 6):
            for combo in product(range(len(reps)), repeat=n):
                phi = fm.Form(F, tuple(reps[i] for i in combo))
                checked += 1
                if fm.is_isotropic(phi) != finite_isotropic_brute([ints[i] for i in combo], q):
                    mismatches.append((q, combo))
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 60
    record(1, ok, f"{checked} forms, {len(mismatches)} mismatches, {dt:.1f} s (limit 60 s)")
    assert ok, mismatches[:5]


# 2 ---------------------------------------------------------------------------

C2_EXPECTED = [
    *[(f"F({q})", "u", 2) for q in (3, 5, 7, 9, 13)],
    *[(f"F({q})", "gamma", 2) for q in (3, 5, 7, 9, 13)],
    *[(f"Qp({p})", "u", 4) for p in (2, 3, 5)],
    *[(f"Qp({p})", "lambda2", 1) for p in (2, 3, 5)],
    ("R", "u", 0),
    ("R", "st", 0),
    ("Q", "st", 0),
    ("R((t))", "st", 1),
    ("R((t))((s))", "st", 2),
]


def _invariant(field: str, kind: str) -> inv.InvariantValue:
    F = parse_field(field)
    if kind == "u":
        return inv.compute_u(F)
    if kind == "st":
        return inv.compute_st(F)
    if kind == "lambda2":
        return inv.lambda_n(F, 2)
    return inv.gamma_field(F)


def test_c2_invariant_table(record):
    t0 = time.perf_counter()
    wrong = []
    for field, kind, want in C2_EXPECTED:
        v = _invariant(field, kind)
        if v.value != want or v.exactness != "exact":
            wrong.append(f"{kind}({field}) = {v.value} {v.exactness}, expected {want}")
    dt = time.perf_counter() - t0
    ok = not wrong and dt < 300
    record(2, ok, f"{len(C2_EXPECTED) - len(wrong)}/{len(C2_EXPECTED)} table entries exact in {dt:.1f} s")
    assert ok, wrong


@pytest.mark.xfail(strict=True, reason="gamma(Q_p) is 2: every 4-dim anisotropic form over Q_p is split by any quadratic extension")
def test_c2_gamma_of_padic_fields_is_four(record):
    got = {p: inv.gamma_field(parse_field(f"Qp({p})")) for p in (2, 3, 5)}
    ok = all(g.value == 4 for g in got.values())
    detail = ", ".join(f"gamma(Qp({p})) = {g.value} {g.exactness}" for p, g in got.items())
    record(2, ok, f"{detail}; stated value 4 is unattainable")
    assert ok


# 3 ---------------------------------------------------------------------------

CURATED = [1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7, 10, -10, 15, -15, 30, -30]


def test_c3_tower_soundness(record):
    rng = random.Random(3)
    Q = parse_field("Q")
    failures = []
    for _ in range(200):
        coeffs = [rng.choice(CURATED) for _ in range(rng.randint(1, 6))]
        phi = fm.Form(Q, tuple(Fraction(c) for c in coeffs))
        t = inv.splitting_tower(phi)
        rads = [int(Fraction(b)) if Fraction(b).denominator == 1 else Fraction(b).numerator * Fraction(b).denominator for b in t.radicands]
        # independent check: every paired binary <a, b> has -ab in the radicand span, so it becomes hyperbolic
        pairs_ok = all(sqfree_span_contains(-coeffs[2 * i] * coeffs[2 * i + 1], rads) for i in range(len(coeffs) // 2))
        if not (fm.split_over_tower(phi, t.radicands) and pairs_ok and t.degree <= 2 ** (len(coeffs) // 2)):
            failures.append(coeffs)
    record(3, not failures, f"200 random forms over Q, {len(failures)} failures")
    assert not failures


# 4 ---------------------------------------------------------------------------

LAMBDA_QP = {1: 1, 2: 1, 3: 0}  # one quaternion division algebra, I^3 = 0


def test_c4_reduction_modulo_powers(record):
    rng = random.Random(4)
    failures, count = [], 0
    for p in (2, 3):
        F = parse_field(f"Qp({p})")
        reps = list(F.square_classes())
        for _ in range(50):
            theta = fm.Form(F, tuple(rng.choice(reps) for _ in range(rng.randint(0, 8))))
            m = rng.randint(0, 3)
            phi = inv.reduce_mod_In(theta, m)
            diff = fm.orth_sum(theta, -phi)
            bound = 1 + sum(2**j * LAMBDA_QP[j] for j in range(1, m + 1))
            count += 1
            if not (padic_in_In(list(diff.coeffs), p, m + 1) and wt.in_In(diff, m + 1) and phi.dim <= bound):
                failures.append((p, str(theta), m, str(phi)))
    record(4, not failures, f"{count} classes over Q2 and Q3, {len(failures)} failures")
    assert not failures


# 5 ---------------------------------------------------------------------------


def test_c5_rule_cross_validation(record):
    total, statuses = 0, {}
    for field in BATTERY:
        r = bd.check_rules_against_field(parse_field(field))
        total += r["violations"]
        for e in r["rules"]:
            statuses[e["status"]] = statuses.get(e["status"], 0) + 1
    summary = ", ".join(f"{k} {v}" for k, v in sorted(statuses.items()))
    record(5, total == 0, f"12 fields, {total} violations ({summary})")
    assert total == 0


# 6 ---------------------------------------------------------------------------


def test_c6_filtration_biconditional(record):
    bad, checked = [], 0
    for field in [f for f in BATTERY if parse_field(f).is_real]:
        F = parse_field(field)
        K = inv.imaginary_extension(F)
        st = inv.compute_st(F).value
        for n in range(0, 3):
            lhs = inv.filtration_vanishes(K, n + 1)[0]
            rhs = inv.torsion_filtration_vanishes(F, n + 1)[0] and st <= n
            checked += 1
            if lhs != rhs:
                bad.append((field, n, lhs, rhs))
    record(6, not bad, f"{checked} (field, n) pairs, {len(bad)} counterexamples")
    assert not bad


# 7 ---------------------------------------------------------------------------

C7_FACTS = [
    {"invariant": "lambda(2)", "relation": "=", "value": 1},
    {"invariant": "lambda(3)", "relation": "<=", "value": 1},
]


def test_c7_bound_chain(record, tmp_path):
    store = bd.infer(bd.load_facts(json.dumps(C7_FACTS)))
    want = {"st": (1, "R5"), "u": (254, "R9"), "u_ext_sqrt_minus1": (384, "R4"), "gamma": (2**193, "R7")}
    wrong = []
    for key, (value, rule) in want.items():
        chain = bd.explain(store, key)
        if store.upper(key) != value or chain[-1]["rule"] != rule:
            wrong.append(f"{key} <= {store.upper(key)} by {chain[-1]['rule']}")
    if "R3" not in [s["rule"] for s in bd.explain(store, "u")]:
        wrong.append("u chain lacks R3")
    status = bd.finiteness_status(store)
    if {c["status"] for c in status["conditions"].values()} != {"derivable-finite"}:
        wrong.append("not all five conditions finite")
    facts = tmp_path / "facts.json"
    facts.write_text(json.dumps(C7_FACTS))
    cmd = [sys.executable, "-m", "qfc.cli", "bounds", "--facts", str(facts), "--explain", "u", "--json"]
    outs = {subprocess.run(cmd, capture_output=True, text=True, env={"PYTHONHASHSEED": seed, "PATH": ""}).stdout for seed in ("0", "1", "2")}
    if len(outs) != 1 or not next(iter(outs)):
        wrong.append("JSON output differs across runs")
    record(7, not wrong, "st <= 1, u <= 254, u(F(sqrt -1)) <= 384, gamma <= 2^193, five conditions finite, stable JSON" if not wrong else "; ".join(wrong))
    assert not wrong


# 8 ---------------------------------------------------------------------------


def test_c8_laurent_trend(record, tmp_path):
    bad = []
    for k in range(0, 4):
        F = parse_field(laurent_tower(k))
        u, st = inv.compute_u(F), inv.compute_st(F)
        if (u.value, st.value, u.exactness, st.exactness) != (0, k, "exact", "exact"):
            bad.append((k, u.value, st.value))
    rep = write_report(tmp_path, fields=("R",), kmax=3)
    noted = "infinite tower has u = 0 and st = infinity" in rep["trend_note"]
    noted &= [(r["u"], r["st"]) for r in rep["trend"]] == [(0, k) for k in range(4)]
    ok = not bad and noted
    record(8, ok, f"k = 0..3: u = 0 and st = k; trend noted in report: {noted}")
    assert ok, bad


# 9 ---------------------------------------------------------------------------


def _tighter(a: bd.FactStore, b: bd.FactStore) -> bool:
    for key in b.bounds:
        (la, ua), (lb, ub) = a.get(key), b.get(key)
        if bd._rank(ua) > bd._rank(ub) or bd._rank(la) < bd._rank(lb):
            return False
    return True


def test_c9_engine_algebra(record):
    rng = random.Random(9)
    t0 = time.perf_counter()
    failures = 0
    for _ in range(1000):
        _, facts = random_store(rng)
        s1 = bd.infer(facts)
        if bd.infer(s1).as_dict() != s1.as_dict():
            failures += 1
        sub = [f for f in facts if rng.random() < 0.5]
        if not _tighter(s1, bd.infer(sub)):
            failures += 1
        if bd.replay(s1):
            failures += 1
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 30
    record(9, ok, f"1000 stores, {failures} failures, {dt:.1f} s (limit 30 s)")
    assert ok


# 10 --------------------------------------------------------------------------

Q_CURATED = [1, -1, 2, -2, 3, -3, 5, -5]


def test_c10_pfister_local_global(record):
    disagreements, checked = [], 0
    for field in BATTERY:
        F = parse_field(field)
        reps = [Fraction(c) for c in Q_CURATED] if field == "Q" else list(F.square_classes())
        for n in range(1, 7):
            for combo in combinations_with_replacement(reps, n):
                phi = fm.Form(F, combo)
                hyp = any(fm.is_hyperbolic(fm.n_times(2**k, phi)) for k in range(0, 6))
                checked += 1
                if wt.is_torsion(phi) != hyp:
                    disagreements.append((field, str(phi)))
    record(10, not disagreements, f"{checked} forms on 12 fields, {len(disagreements)} disagreements")
    assert not disagreements
