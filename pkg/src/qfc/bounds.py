"""Inference engine for bounds on field invariants, with provenance.

Every key carries a lower bound (a natural number or ``INF``) and an upper
bound (a natural number, ``FINITE`` meaning "finite but not evaluated", or
``INF`` meaning "no information").  Rules only ever tighten bounds, so the
closure is the least fixpoint reached by iterating them.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Iterable

from .fields import QFCError

__all__ = [
    "INF",
    "FINITE",
    "BoundFact",
    "FactStore",
    "InconsistentStore",
    "infer",
    "explain",
    "replay",
    "finiteness_status",
    "load_facts",
    "dump_store",
    "lambda_formula",
    "schubert_bound",
    "RULES",
]

INF = math.inf


class _Finite:
    """Upper bound that is known to be finite but has no numeric value."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "FINITE"

    def __deepcopy__(self, memo):
        return self


FINITE = _Finite()


class InconsistentStore(QFCError):
    def __init__(self, conflict: list["BoundFact"], key: str):
        self.conflict = conflict
        self.key = key
        super().__init__(f"contradictory facts on {key}: " + "; ".join(map(str, conflict)))


def _rank(x):
    if x is FINITE:
        return (1, 0)
    if x == INF:
        return (2, 0)
    return (0, x)


def _tighter_upper(a, b):
    return a if _rank(a) <= _rank(b) else b


def _finite(x) -> bool:
    return x is FINITE or x != INF


def _lift(f: Callable, *args):
    """Apply ``f`` to upper bounds: INF absorbs, then FINITE absorbs."""
    if any(a is not FINITE and a == INF for a in args):
        return INF
    if any(a is FINITE for a in args):
        return FINITE
    return f(*args)


def _render(x) -> Any:
    if x is FINITE:
        return "finite"
    if x == INF:
        return "inf"
    return x


def _parse_value(v):
    if v in ("inf", "infinity"):
        return INF
    if v == "finite":
        return FINITE
    return v


# ---------------------------------------------------------------------------
# facts and stores


@dataclass(frozen=True)
class BoundFact:
    invariant: str
    relation: str
    value: Any = None

    def as_dict(self) -> dict:
        d = {"invariant": self.invariant, "relation": self.relation}
        if self.value is not None:
            d["value"] = self.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundFact":
        try:
            inv, rel = d["invariant"], d["relation"]
        except KeyError as exc:
            raise QFCError(f"fact needs invariant and relation: {d}") from exc
        value = d.get("value")
        if isinstance(value, dict):
            value = tuple(sorted(value.items()))
        return cls(inv, rel, value)

    def __str__(self):
        v = dict(self.value) if isinstance(self.value, tuple) else self.value
        return f"{self.invariant} {self.relation} {v}" if v is not None else f"{self.invariant} {self.relation}"


@dataclass
class Step:
    rule: str
    premises: dict  # key -> [lower, upper] at firing time
    key: str
    side: str
    value: Any

    def as_dict(self) -> dict:
        return {
            "rule": self.rule,
            "premises": {k: [_render(lo), _render(up)] for k, (lo, up) in sorted(self.premises.items())},
            "conclusion": _conclusion(self.key, self.side, self.value),
        }


def _conclusion(key, side, value) -> str:
    if side == "upper":
        return f"{key} is finite" if value is FINITE else f"{key} <= {_render(value)}"
    if side == "lower":
        return f"{key} is infinite" if value == INF else f"{key} >= {value}"
    return key


@dataclass
class FactStore:
    facts: list = dc_field(default_factory=list)
    bounds: dict = dc_field(default_factory=dict)  # key -> [lower, upper]
    steps: dict = dc_field(default_factory=dict)  # (key, side) -> Step

    def get(self, key: str):
        lo, up = self.bounds.get(key, (0, INF))
        return lo, up

    def upper(self, key: str):
        return self.get(key)[1]

    def lower(self, key: str):
        return self.get(key)[0]

    @property
    def realness(self) -> str:
        lo, up = self.get("real")
        return "real" if lo == 1 else "nonreal" if up == 0 else "unknown"

    def snapshot(self) -> dict:
        return {k: (lo, _render(up) if up is FINITE else up) for k, (lo, up) in sorted(self.bounds.items())}

    def as_dict(self) -> dict:
        out = {}
        for key in sorted(self.bounds):
            lo, up = self.bounds[key]
            out[key] = {"lower": _render(lo), "upper": _render(up)}
        return {
            "facts": sorted((f.as_dict() for f in self.facts), key=lambda d: json.dumps(d, sort_keys=True, default=str)),
            "realness": self.realness,
            "bounds": out,
        }


_KEY_ALIASES = {"real_flag": "real", "u(F(sqrt-1))": "u_ext_sqrt_minus1"}
_KEY_RE = re.compile(r"^(u|st|gamma|real|u_ext_sqrt_minus1|lambda_all|gamma_ext_all|lambda\(\d+\)|gamma_ext\(\d+\))$")


def _seed(fact: BoundFact) -> list[tuple[str, str, Any]]:
    inv = _KEY_ALIASES.get(fact.invariant, fact.invariant)
    rel, v = fact.relation, _parse_value(fact.value)
    if inv == "filtration_assertion":
        spec = dict(fact.value or ())
        level = spec.get("level")
        if not isinstance(level, int) or level < 0:
            raise QFCError(f"filtration assertion needs a level: {fact}")
        if rel == "is-zero-ideal":
            ideal = spec.get("ideal", "I")
            if ideal not in ("I", "I_t", "I_ext"):
                raise QFCError(f"unknown ideal {ideal!r}")
            return [(f"zero({ideal})", "upper", level)]
        if rel == "equals-2-multiple":
            # I^(n+1) = 2 x I^n + I_t^(n+1) is st <= n
            return [("st", "upper", level)]
        raise QFCError(f"unknown relation {rel!r} for filtration assertions")
    if not _KEY_RE.match(inv):
        raise QFCError(f"unknown invariant {fact.invariant!r}")
    if inv == "real":
        if rel != "=" or not isinstance(fact.value, bool):
            raise QFCError("real_flag takes relation '=' with a boolean value")
        return [("real", "lower", int(fact.value)), ("real", "upper", int(fact.value))]
    if rel in ("<=", "≤"):
        return [(inv, "upper", _check_nat(v, fact))]
    if rel in (">=", "≥"):
        return [(inv, "lower", _check_nat(v, fact))]
    if rel == "=":
        v = _check_nat(v, fact)
        return [(inv, "lower", v), (inv, "upper", v)]
    if rel == "is-finite":
        return [(inv, "upper", FINITE)]
    if rel == "is-infinite":
        return [(inv, "lower", INF)]
    raise QFCError(f"unknown relation {rel!r}")


def _check_nat(v, fact):
    if v is FINITE or (isinstance(v, int) and not isinstance(v, bool) and v >= 0) or v == INF:
        return v
    raise QFCError(f"value must be a natural number or 'inf': {fact}")


# ---------------------------------------------------------------------------
# rules


class _Reader:
    """Bound accessor that logs every key it reads."""

    def __init__(self, bounds: dict):
        self.bounds = bounds
        self.log: dict = {}

    def __call__(self, key: str):
        lo, up = self.bounds.get(key, (0, INF))
        self.log[key] = (lo, up)
        return lo, up

    def peek(self, key: str):
        return self.bounds.get(key, (0, INF))

    def peek_keys(self, prefix: str) -> list[str]:
        return sorted((k for k in self.bounds if k.startswith(prefix)), key=_natural)


def _natural(key: str):
    m = re.search(r"\((\d+)\)$", key)
    return (key.split("(")[0], int(m.group(1)) if m else -1)


def _idx(key: str) -> int:
    return int(re.search(r"\((\d+)\)$", key).group(1))


def _lam(get, n: int):
    """Tightest upper bound on lambda^n; only the winning source is logged."""
    cands = [f"lambda({n})", "lambda_all"] + [k for k in get.peek_keys("lambda_tail(") if _idx(k) <= n]
    best = min(cands, key=lambda k: _rank(get.peek(k)[1]))
    return get(best)[1]


def _nonreal(get) -> bool:
    return get("real")[1] == 0


def _is_real(get) -> bool:
    return get("real")[0] == 1


def lambda_formula(lam: Callable[[int], Any], l2: int):
    """Upper bound on u from the symbol lengths when lambda^2 = l2 > 0."""
    terms = [lam(j) for j in range(1, 2 * l2 + 2)] + [lam(2 * l2 - 1)]

    def f(*vals):
        s = sum(2**j * vals[j - 1] for j in range(1, 2 * l2 + 2))
        return 2 * (1 + s + 2 ** (2 * l2 + 2) * (2 ** (2 * l2 + 1) - 1) * vals[-1])

    return _lift(f, *terms)


def schubert_bound(u, s):
    """Upper bound on u(F(sqrt -1)) from u(F) and st(F)."""
    if s == 0:
        return _lift(lambda a: (3 * a) // 2 + 1, u)
    return _lift(lambda a, b: (3 * a) // 2 + (2 ** (b + 1) - 1) * 2 ** (b - 1), u, s)


def _dim_rep(get, m: int):
    return _lift(lambda *ls: 1 + sum(2**j * x for j, x in enumerate(ls, start=1)), *[_lam(get, j) for j in range(1, m + 1)])


_R9_SCAN = 64
_DIM_REP_MAX = 12


def r3(get):
    return [("lambda(0)", "lower", 1), ("lambda(0)", "upper", 1), ("lambda(1)", "upper", 1)]


def r1(get):
    lo, L = get("lambda(2)")
    out = []
    if not _finite(L):
        return out
    out.append(("zero(I_t)", "upper", _lift(lambda x: 2 * x + 2, L)))
    if _nonreal(get):
        out.append(("zero(I)", "upper", _lift(lambda x: 2 * x + 2, L)))
    if _is_real(get) and lo == L and L is not FINITE and L >= 1:
        out.append((f"I^{2 * L + 2} = 8 x I^{2 * L - 1}", "token", 1))
    return out


def r2(get):
    lo, L = get("lambda(2)")
    if L is FINITE or L == INF:
        return []
    k = 2 * L + 2
    direct = _tighter_upper(get(f"lambda({k})")[1], get("lambda_all")[1])
    out = [(f"lambda_tail({k})", "upper", direct)]
    if _nonreal(get):
        out.append((f"lambda_tail({k})", "upper", 0))
    if lo == L and L > 0:
        out.append((f"lambda_tail({k})", "upper", _lam(get, 2 * L - 1)))
    return out


def a1(get):
    out = []
    if _is_real(get):
        out.append(("lambda(2)", "lower", 1))
    if get("lambda(2)")[1] == 0:
        out.append(("real", "upper", 0))
    return out


def s0(get):
    return [("st", "upper", 0)] if _nonreal(get) else []


def r4(get):
    _, s = get("st")
    _, u = get("u")
    if not (_finite(s) and _finite(u)):
        return []
    return [("u_ext_sqrt_minus1", "upper", schubert_bound(u, s))]


def r5(get):
    L = _lam(get, 2)
    if not _finite(L):
        return []
    return [("st", "upper", _lift(lambda x: max(0, 2 * x - 1), L))]


def r6(get):
    _, u = get("u")
    if not (_nonreal(get) and _finite(u)):
        return []
    return [("gamma", "upper", _lift(lambda x: 2 ** (x // 2), u))]


def r7(get):
    _, v = get("u_ext_sqrt_minus1")
    if not _finite(v):
        return []
    return [("gamma", "upper", _lift(lambda x: 2 ** (x // 2 + 1), v))]


def r8(get):
    _, v = get("u_ext_sqrt_minus1")
    if not _finite(v):
        return []
    out = [(f"gamma_ext({d})", "upper", _lift(lambda x, d=d: 2 ** ((d + 1) * x // 4 + 1), v)) for d in range(1, 5)]
    out.append(("gamma_ext_all", "upper", FINITE))
    return out


def r9(get):
    lo, L = get("lambda(2)")[0], _lam(get, 2)
    if not _finite(L):
        return []
    lam = lambda j: _lam(get, j)  # noqa: E731
    if L is FINITE or L > _R9_SCAN:
        return [("u", "upper", FINITE)] if get("lambda_all")[1] is FINITE else []
    worst = 0
    for c in range(lo, L + 1):
        # c = 0 forces a nonreal field with I^2 = 0, so u <= dim_rep(1)
        b = _lift(lambda x: 1 + 2 * x, lam(1)) if c == 0 else lambda_formula(lam, c)
        if not _finite(b):
            return []
        worst = FINITE if (b is FINITE or worst is FINITE) else max(worst, b)
    return [("u", "upper", worst)]


def r10(get):
    out = []
    _, ze = get("zero(I_ext)")
    if ze is FINITE:
        out += [("zero(I_t)", "upper", FINITE), ("st", "upper", FINITE)]
    elif ze != INF and ze >= 1:
        out += [("zero(I_t)", "upper", ze), ("st", "upper", ze - 1)]
    _, zt = get("zero(I_t)")
    _, s = get("st")
    if _finite(zt) and _finite(s):
        out.append(("zero(I_ext)", "upper", _lift(lambda a, b: max(a, b + 1, 1), zt, s)))
    return out


def r11(get):
    out = []
    # fixed range: a range shrinking with lambda^2 would break monotonicity
    for m in range(0, _DIM_REP_MAX + 1):
        out.append((f"dim_rep({m})", "upper", _dim_rep(get, m)))
    _, z = get("zero(I)")
    if z is not FINITE and z != INF and z >= 1:
        out.append(("u", "upper", _dim_rep(get, z - 1)))
    return out


def r12(get):
    return [("lambda_all", "upper", FINITE)] if _finite(get("gamma_ext_all")[1]) else []


def z0(get):
    _, z = get("zero(I)")
    return [("zero(I_t)", "upper", z)] if _finite(z) else []


def l0(get):
    for k in get.peek_keys("lambda_tail("):
        if _finite(get.peek(k)[1]) and _finite(get(k)[1]) and all(_finite(_lam(get, n)) for n in range(_idx(k))):
            return [("lambda_all", "upper", FINITE)]
    return []


RULES: dict[str, Callable] = {
    "R1": r1,
    "R2": r2,
    "R3": r3,
    "R4": r4,
    "R5": r5,
    "R6": r6,
    "R7": r7,
    "R8": r8,
    "R9": r9,
    "R10": r10,
    "R11": r11,
    "R12": r12,
    "S0": s0,
    "A1": a1,
    "Z0": z0,
    "L0": l0,
}


# ---------------------------------------------------------------------------
# closure


def _apply(bounds: dict, steps: dict, key: str, side: str, value, step: Step) -> bool:
    lo, up = bounds.get(key, (0, INF))
    if side == "upper":
        new = _tighter_upper(up, value)
        if _rank(new) == _rank(up):
            return False
        bounds[key] = (lo, new)
    elif side == "lower":
        if value <= lo:
            return False
        bounds[key] = (value, up)
    else:
        if key in bounds:
            return False
        bounds[key] = (1, 1)
    steps[(key, side)] = step
    return True


def _conflict(bounds: dict) -> str | None:
    for key in sorted(bounds):
        lo, up = bounds[key]
        if up is FINITE:
            if lo == INF:
                return key
        elif lo > up:
            return key
    return None


def _close(bounds: dict, steps: dict, max_rounds: int = 200) -> None:
    for _ in range(max_rounds):
        changed = False
        for name, rule in RULES.items():
            get = _Reader(bounds)
            results = rule(get)
            for key, side, value in results:
                step = Step(name, dict(get.log), key, side, value)
                changed |= _apply(bounds, steps, key, side, value, step)
        if not changed:
            return
    raise QFCError("inference did not reach a fixpoint")


def _closure_of(facts: list[BoundFact]) -> tuple[dict, dict]:
    bounds, steps = {}, {}
    for f in facts:
        for key, side, value in _seed(f):
            _apply(bounds, steps, key, side, value, Step("user", {}, key, side, value))
    _close(bounds, steps)
    return bounds, steps


def infer(store: FactStore | Iterable[BoundFact]) -> FactStore:
    """Least fixpoint of the rule set over the store's facts and bounds."""
    if not isinstance(store, FactStore):
        store = FactStore(list(store))
    if store.bounds:
        bounds, steps = dict(store.bounds), dict(store.steps)
        _close(bounds, steps)
    else:
        bounds, steps = _closure_of(store.facts)
    key = _conflict(bounds)
    if key is not None:
        raise InconsistentStore(_minimal_conflict(store.facts), key)
    return FactStore(list(store.facts), bounds, steps)


def _minimal_conflict(facts: list[BoundFact]) -> list[BoundFact]:
    core = list(facts)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1 :]
        if _conflict(_closure_of(trial)[0]) is not None:
            core = trial
        else:
            i += 1
    return core


# ---------------------------------------------------------------------------
# provenance


def explain(store: FactStore, key: str, side: str = "upper") -> list[dict]:
    """Rule applications leading to the bound on ``key``, premises first."""
    key = _KEY_ALIASES.get(key, key)
    seen, out = set(), []

    def visit(k, sd):
        if (k, sd) in seen or (k, sd) not in store.steps:
            return
        seen.add((k, sd))
        st = store.steps[(k, sd)]
        for pk in sorted(st.premises):
            for psd in ("lower", "upper"):
                visit(pk, psd)
        out.append(st.as_dict())

    visit(key, side)
    return out


def replay(store: FactStore) -> list[str]:
    """Re-evaluate every recorded rule application from its premises; returns
    the mismatches (empty when provenance is sound)."""
    bad = []
    for (key, side), st in sorted(store.steps.items(), key=lambda kv: kv[0]):
        if st.rule == "user":
            continue
        get = _Reader(dict(st.premises))
        results = RULES[st.rule](get)
        if not any(k == key and s == side and _same(v, st.value) for k, s, v in results):
            bad.append(_conclusion(key, side, st.value))
    return bad


def _same(a, b) -> bool:
    return _rank(a) == _rank(b)


# ---------------------------------------------------------------------------
# equivalence report


_CONDITIONS = {
    "i": "u(F) < inf and st(F) < inf",
    "ii": "u(F(sqrt -1)) < inf",
    "iii": "lambda^n(F) < inf for all n",
    "iv": "lambda^n(F) < inf for 2 <= n <= 2 lambda^2(F) + 1",
    "v": "gamma of finite extensions bounded in terms of the degree",
}


def finiteness_status(store: FactStore | Iterable[BoundFact]) -> dict:
    if not isinstance(store, FactStore) or not store.bounds:
        store = infer(store)
    get = _Reader(store.bounds)

    def lam_finite_range():
        if _finite(get("lambda_all")[1]):
            return True
        _, L = get("lambda(2)")
        if L is FINITE or L == INF:
            return False
        return all(_finite(_lam(get, n)) for n in range(2, 2 * L + 2))

    finite = {
        "i": _finite(store.upper("u")) and _finite(store.upper("st")),
        "ii": _finite(store.upper("u_ext_sqrt_minus1")),
        "iii": _finite(store.upper("lambda_all")),
        "iv": lam_finite_range(),
        "v": _finite(store.upper("gamma_ext_all")),
    }
    infinite = {
        "i": store.lower("u") == INF or store.lower("st") == INF,
        "ii": store.lower("u_ext_sqrt_minus1") == INF,
        "iii": store.lower("lambda_all") == INF,
        "iv": False,
        "v": store.lower("gamma_ext_all") == INF,
    }
    status = {}
    for c, text in _CONDITIONS.items():
        s = "derivable-finite" if finite[c] else "derivable-infinite" if infinite[c] else "open"
        status[c] = {"condition": text, "status": s}
    n_fin = sum(finite.values())
    return {"conditions": status, "equivalence_realized": n_fin in (0, len(finite))}


# ---------------------------------------------------------------------------
# JSON


def load_facts(text: str) -> list[BoundFact]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("facts", [])
    if not isinstance(data, list):
        raise QFCError("fact file must hold a list of facts")
    return [BoundFact.from_dict(d) for d in data]


def dump_store(store: FactStore, explain_keys: Iterable[str] = ()) -> str:
    d = store.as_dict()
    if explain_keys:
        d["explain"] = {k: explain(store, k) for k in explain_keys}
    return json.dumps(d, sort_keys=True, indent=2, default=str)


# ---------------------------------------------------------------------------
# cross-validation against computed invariants


def _entry(rule, lhs, rhs, holds, note=None):
    e = {"rule": rule, "lhs": _render(lhs), "rhs": _render(rhs)}
    if isinstance(lhs, int) and isinstance(rhs, int):
        e["margin"] = rhs - lhs
    e["status"] = "ok" if holds else "violated"
    if note:
        e["note"] = note
    return e


def _inconclusive(rule, why):
    return {"rule": rule, "status": "inconclusive", "note": why}


def _skip(rule, why):
    return {"rule": rule, "status": "not-applicable", "note": why}


def _attempt(fn, *args, **kw):
    try:
        return fn(*args, **kw), None
    except QFCError as exc:
        return None, str(exc)


def _lattice_equal(a: list, b: list) -> bool:
    from .witt import in_lattice

    return all(in_lattice(v, b) for v in a) and all(in_lattice(v, a) for v in b)


def check_rules_against_field(
    F,
    dim_cap: int | None = None,
    bfs_cap: int | None = None,
    lambda_max: int = 5,
) -> dict:
    """Evaluate R1-R9 with invariants computed over ``F``; reports each rule
    with (lhs, rhs, margin) and counts violations."""
    from . import invariants as inv
    from .fields import extend_quadratic
    from .witt import signature_lattice

    dim_cap = inv.DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    bfs_cap = inv.DEFAULT_BFS_CAP if bfs_cap is None else bfs_cap
    values: dict = {}
    u, err_u = _attempt(inv.compute_u, F, dim_cap)
    st, err_st = _attempt(inv.compute_st, F)
    K, err_k = _attempt(inv.imaginary_extension, F)
    u_ext, err_ue = (None, err_k) if K is None else _attempt(inv.compute_u, K, dim_cap)
    gam, err_g = _attempt(inv.gamma_field, F, dim_cap)

    lam: dict[int, int] = {}
    err_l = None
    for n in range(1, lambda_max + 1):
        v, err_l = _attempt(inv.lambda_n, F, n, bfs_cap)
        if v is None or v.exactness != inv.EXACT:
            err_l = err_l or f"lambda^{n} not exact within the cap"
            break
        lam[n] = v.value
    L = lam.get(2)
    # extend the sweep to the indices the rules need
    if L is not None:
        for n in range(lambda_max + 1, 2 * L + 3):
            v, e = _attempt(inv.lambda_n, F, n, bfs_cap)
            if v is None or v.exactness != inv.EXACT:
                break
            lam[n] = v.value

    def num(x):
        return None if x is None or x.exactness != inv.EXACT else x.value

    uu, ss, ue, gg = num(u), num(st), num(u_ext), num(gam)
    values.update({"u": uu, "st": ss, "u_ext_sqrt_minus1": ue, "gamma": gg, "real": F.is_real})
    values.update({f"lambda({n})": v for n, v in sorted(lam.items())})
    rules = []

    # R1
    if L is None:
        rules.append(_inconclusive("R1", err_l or "lambda^2 unavailable"))
    else:
        m = 2 * L + 2
        ok, why = _attempt(inv.torsion_filtration_vanishes, F, m)
        if ok is None:
            rules.append(_inconclusive("R1", why))
        else:
            rules.append(_entry("R1", f"I_t^{m}", "0", ok[0], ok[1]))
        if not F.is_real:
            ok, why = _attempt(inv.filtration_vanishes, F, m)
            rules.append(_inconclusive("R1", why) if ok is None else _entry("R1", f"I^{m}", "0", ok[0], ok[1]))
        elif L >= 1:
            a, b = signature_lattice(F, m), signature_lattice(F, 2 * L - 1)
            rules.append(_entry("R1", f"sig I^{m}", f"8 x sig I^{2 * L - 1}", _lattice_equal(a, [[8 * x for x in r] for r in b]), "signature lattices"))
    # R2
    if L is None:
        rules.append(_inconclusive("R2", err_l or "lambda^2 unavailable"))
    else:
        m = 2 * L + 2
        tail = [n for n in sorted(lam) if n >= m]
        if tail:
            for n in tail:
                rules.append(_entry("R2", lam[n], lam[m], lam[n] == lam[m], f"lambda^{n} = lambda^{m}"))
        else:
            rules.append(_inconclusive("R2", f"lambda^{m} beyond the computed range"))
        if L > 0 and m in lam and (2 * L - 1) in lam:
            rules.append(_entry("R2", lam[m], lam[2 * L - 1], lam[m] <= lam[2 * L - 1]))
    # R3
    if 1 in lam:
        rules.append(_entry("R3", lam[1], 1, lam[1] <= 1))
    else:
        rules.append(_inconclusive("R3", err_l or "lambda^1 unavailable"))
    # R4
    if uu is None or ss is None or ue is None:
        rules.append(_inconclusive("R4", err_u or err_st or err_ue or "u, st or u(F(sqrt -1)) not exact"))
    else:
        rhs = schubert_bound(uu, ss)
        rules.append(_entry("R4", ue, rhs, ue <= rhs))
    # R5
    if L is None or ss is None:
        rules.append(_inconclusive("R5", err_l or err_st or "st or lambda^2 unavailable"))
    else:
        rhs = max(0, 2 * L - 1)
        note = "clamped at 0: the raw bound 2*0-1 is negative" if L == 0 else None
        rules.append(_entry("R5", ss, rhs, ss <= rhs, note))
    # R6
    if F.is_real:
        rules.append(_skip("R6", "real field"))
    elif uu is None or gg is None:
        rules.append(_inconclusive("R6", err_u or err_g or "u or gamma not exact"))
    else:
        rhs = 2 ** (uu // 2)
        rules.append(_entry("R6", gg, rhs, gg <= rhs))
    # R7
    if ue is None or gg is None:
        rules.append(_inconclusive("R7", err_ue or err_g or "u(F(sqrt -1)) or gamma not exact"))
    else:
        rhs = 2 ** (ue // 2 + 1)
        rules.append(_entry("R7", gg, rhs, gg <= rhs))
    # R8, degree 2 extensions
    rules += _check_r8(F, ue, err_ue, dim_cap, inv, extend_quadratic)
    # R9
    if L is None or L == 0:
        rules.append(_skip("R9", "needs 0 < lambda^2") if L == 0 else _inconclusive("R9", err_l or "lambda^2 unavailable"))
    elif uu is None:
        rules.append(_inconclusive("R9", err_u or "u not exact"))
    elif any(j not in lam for j in range(1, 2 * L + 2)):
        rules.append(_inconclusive("R9", f"lambda^j for j <= {2 * L + 1} not all computed"))
    else:
        rhs = lambda_formula(lambda j: lam[j], L)
        rules.append(_entry("R9", uu, rhs, uu <= rhs))

    violations = sum(r["status"] == "violated" for r in rules)
    return {
        "field": str(F),
        "caps": {"dim_cap": dim_cap, "bfs_cap": bfs_cap, "lambda_max": lambda_max},
        "values": {k: _render(v) if v is not None else None for k, v in values.items()},
        "rules": rules,
        "violations": violations,
    }


def _check_r8(F, ue, err_ue, dim_cap, inv, extend_quadratic) -> list:
    if ue is None:
        return [_inconclusive("R8", err_ue or "u(F(sqrt -1)) not exact")]
    try:
        reps = [r for r in F.square_classes() if not F.is_square(r)]
    except QFCError as exc:
        return [_inconclusive("R8", str(exc))]
    out = []
    for a in sorted(reps, key=F.sort_key):
        label = f"F(sqrt {F.fmt(a)})"
        Fp, err = _attempt(extend_quadratic, F, a)
        if Fp is None:
            out.append(_inconclusive("R8", f"{label}: {err}"))
            continue
        Kp, err = _attempt(inv.imaginary_extension, Fp)
        up = None if Kp is None else _attempt(inv.compute_u, Kp, dim_cap)[0]
        if up is not None and up.exactness == inv.EXACT:
            out.append(_entry("R8", 2 * up.value, 3 * ue, 2 * up.value <= 3 * ue, f"{label}: 2 u(F'(sqrt -1)) <= (d+1) u(F(sqrt -1))"))
        g, err = _attempt(inv.gamma_field, Fp, dim_cap)
        if g is None or g.exactness != inv.EXACT:
            out.append(_inconclusive("R8", f"{label}: gamma {err or 'not exact'}"))
            continue
        rhs = 2 ** ((3 * ue) // 4 + 1)
        out.append(_entry("R8", g.value, rhs, g.value <= rhs, label))
    return out or [_skip("R8", "no proper quadratic extension")]
