"""Random consistent fact stores seeded from frozen battery values."""

from __future__ import annotations

import random

from qfc.bounds import BoundFact

# computed once by check_rules_against_field and frozen here
TRUE_VALUES = {
    "F(3)": {"u": 2, "st": 0, "u_ext_sqrt_minus1": 2, "gamma": 2, "real": False, "lambda(1)": 1, "lambda(2)": 0, "lambda(3)": 0},
    "F(13)": {"u": 2, "st": 0, "u_ext_sqrt_minus1": 2, "gamma": 2, "real": False, "lambda(1)": 1, "lambda(2)": 0, "lambda(3)": 0},
    "Qp(2)": {"u": 4, "st": 0, "u_ext_sqrt_minus1": 4, "gamma": 2, "real": False, "lambda(1)": 1, "lambda(2)": 1, "lambda(3)": 0},
    "Qp(5)": {"u": 4, "st": 0, "u_ext_sqrt_minus1": 4, "gamma": 2, "real": False, "lambda(1)": 1, "lambda(2)": 1, "lambda(3)": 0},
    "Q": {"u": 4, "st": 0, "u_ext_sqrt_minus1": 4, "real": True},
    "R": {"u": 0, "st": 0, "u_ext_sqrt_minus1": 1, "gamma": 2, "real": True, "lambda(1)": 1, "lambda(2)": 1, "lambda(3)": 1},
    "R((t))": {"u": 0, "st": 1, "u_ext_sqrt_minus1": 2, "gamma": 4, "real": True, "lambda(1)": 1, "lambda(2)": 1, "lambda(3)": 1},
    "R((t))((s))": {"u": 0, "st": 2, "u_ext_sqrt_minus1": 4, "real": True, "lambda(1)": 1, "lambda(2)": 2, "lambda(3)": 2},
}


def random_store(rng: random.Random, max_facts: int = 5) -> tuple[str, list[BoundFact]]:
    field = rng.choice(sorted(TRUE_VALUES))
    truth = TRUE_VALUES[field]
    keys = rng.sample(sorted(truth), rng.randint(0, min(max_facts, len(truth))))
    facts = []
    for k in keys:
        v = truth[k]
        if k == "real":
            facts.append(BoundFact("real_flag", "=", v))
            continue
        kind = rng.choice(["=", "<=", ">=", "is-finite"])
        slack = rng.randint(0, 3)
        if kind == "=":
            facts.append(BoundFact(k, "=", v))
        elif kind == "<=":
            facts.append(BoundFact(k, "<=", v + slack))
        elif kind == ">=":
            facts.append(BoundFact(k, ">=", max(0, v - slack)))
        else:
            facts.append(BoundFact(k, "is-finite"))
    return field, facts
