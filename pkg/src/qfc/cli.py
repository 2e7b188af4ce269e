"""Command-line front end: ``qfc <verb> [options]``.

Exit status is 0 on success (including inconclusive verdicts), 1 on domain
errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bounds as bd
from . import forms as fm
from . import invariants as inv
from . import witt as wt
from .dsl import parse_element, parse_field, parse_form_literal
from .fields import QFCError

CAP_KEYS = ("dim_cap", "bfs_cap", "multiple_cap")
BUILTIN_CAPS = {"dim_cap": inv.DEFAULT_DIM_CAP, "bfs_cap": inv.DEFAULT_BFS_CAP, "multiple_cap": wt.DEFAULT_MULTIPLE_CAP}


def default_caps(environ=os.environ) -> dict:
    """Built-in caps overridden by QFC_DEFAULT_CAPS, e.g. ``dim_cap=6,bfs_cap=4``."""
    caps = dict(BUILTIN_CAPS)
    raw = environ.get("QFC_DEFAULT_CAPS", "").strip()
    if not raw:
        return caps
    if raw.startswith("{"):
        items = json.loads(raw).items()
    else:
        items = (part.split("=", 1) for part in raw.split(",") if part.strip())
    for k, v in items:
        k = k.strip().replace("-", "_")
        if k not in CAP_KEYS:
            raise QFCError(f"unknown cap {k!r} in QFC_DEFAULT_CAPS")
        caps[k] = int(v)
    return caps


# ---------------------------------------------------------------------------
# verbs


def _form(args) -> fm.Form:
    F = parse_field(args.field)
    return fm.Form(F, parse_form_literal(args.form, F))


def cmd_isotropy(args, caps):
    phi = _form(args)
    iso = fm.is_isotropic(phi)
    return {"field": str(phi.field), "form": str(phi), "isotropic": iso}, "isotropic" if iso else "anisotropic"


def cmd_witt(args, caps):
    phi = _form(args)
    an, h = fm.witt_decompose(phi)
    inv_ = fm.classical_invariants(phi).as_dict(phi.field)
    out = {"field": str(phi.field), "form": str(phi), "anisotropic": str(an), "hyperbolic_planes": h, "invariants": inv_}
    return out, f"{phi} = {an} + {h} x <1,-1>"


def cmd_pfister(args, caps):
    F = parse_field(args.field)
    slots = [parse_element(s, F) for s in args.slots.split(",") if s.strip()]
    phi = fm.pfister(F, *slots)
    return {"field": str(F), "pfister": str(phi), "hyperbolic": fm.is_hyperbolic(phi)}, str(phi)


def cmd_torsion(args, caps):
    phi = _form(args)
    t = wt.is_torsion(phi)
    weak = wt.is_weakly_isotropic(phi, caps["multiple_cap"])
    out = {"field": str(phi.field), "form": str(phi), "torsion": t, "weakly_isotropic": wt._tern(weak)}
    return out, f"torsion: {str(t).lower()}; weakly isotropic: {wt._tern(weak)}"


def cmd_in_ideal(args, caps):
    phi = _form(args)
    member = wt.in_In(phi, args.n)
    tors = member and wt.is_torsion(phi)
    out = {"field": str(phi.field), "form": str(phi), "n": args.n, "in_In": member, "in_In_torsion": tors}
    return out, f"[{phi}] {'in' if member else 'not in'} I^{args.n}"


def cmd_invariant(args, caps):
    F = parse_field(args.field)
    kind = args.kind
    if kind == "u":
        v = inv.compute_u(F, caps["dim_cap"])
    elif kind == "st":
        v = inv.compute_st(F)
    elif kind == "lambda":
        v = inv.lambda_n(F, args.n, caps["bfs_cap"])
    else:
        v = inv.gamma_field(F, caps["dim_cap"])
    out = {"field": str(F), **v.as_dict()}
    if v.exactness != "exact":
        out["status"] = "inconclusive"
    return out, str(v)


def cmd_gamma(args, caps):
    phi = _form(args)
    v = inv.gamma_form(phi, exact=args.exact)
    return {"field": str(phi.field), "form": str(phi), **v.as_dict()}, str(v)


def cmd_tower(args, caps):
    phi = _form(args)
    t = inv.splitting_tower(phi)
    d = t.as_dict()
    return {"form": str(phi), **d}, f"tower {d['radicands']}, degree {d['degree']}"


def cmd_reduce(args, caps):
    phi = _form(args)
    out_form = inv.reduce_mod_In(phi, args.m, caps["bfs_cap"])
    diff_ok = wt.in_In(fm.orth_sum(phi, -out_form), args.m + 1)
    out = {"field": str(phi.field), "form": str(phi), "m": args.m, "representative": str(out_form), "difference_in_I^(m+1)": diff_ok}
    return out, str(out_form)


def _load(path: str) -> list:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise QFCError(f"cannot read fact file: {exc}") from exc
    try:
        return bd.load_facts(text)
    except json.JSONDecodeError as exc:
        raise QFCError(f"fact file is not valid JSON: {exc}") from exc


def cmd_bounds(args, caps):
    store = bd.infer(_load(args.facts))
    out = store.as_dict()
    if args.explain:
        out["explain"] = {args.explain: bd.explain(store, args.explain)}
    lines = [f"{k}: [{v['lower']}, {v['upper']}]" for k, v in out["bounds"].items()]
    if args.explain:
        chain = out["explain"][args.explain]
        lines.append(f"explain {args.explain}: " + " -> ".join(f"{s['rule']}: {s['conclusion']}" for s in chain))
        lines.append("rules: " + ",".join(dict.fromkeys(s["rule"] for s in chain if s["rule"] != "user")))
    return out, "\n".join(lines)


def cmd_check(args, caps):
    F = parse_field(args.field)
    r = bd.check_rules_against_field(F, caps["dim_cap"], caps["bfs_cap"])
    lines = [f"{e['rule']}: {e['status']}" + (f" ({e['lhs']} vs {e['rhs']})" if "lhs" in e else "") for e in r["rules"]]
    lines.append(f"violations: {r['violations']}")
    return r, "\n".join(lines)


def cmd_main_status(args, caps):
    r = bd.finiteness_status(bd.infer(_load(args.facts)))
    lines = [f"({k}) {v['condition']}: {v['status']}" for k, v in r["conditions"].items()]
    lines.append(f"equivalence realized: {str(r['equivalence_realized']).lower()}")
    return r, "\n".join(lines)


def cmd_report(args, caps):
    from .report import BATTERY, write_report

    fields = tuple(args.fields) if args.fields else BATTERY
    r = write_report(args.out, fields, caps["dim_cap"], caps["bfs_cap"], args.kmax)
    return r, f"wrote {', '.join(r['files'])} to {r['out_dir']} ({r['violations']} violations)"


# ---------------------------------------------------------------------------
# parser


def build_parser(caps: dict) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured output")
    common.add_argument("--dim-cap", type=int, default=caps["dim_cap"])
    common.add_argument("--bfs-cap", type=int, default=caps["bfs_cap"])
    common.add_argument("--multiple-cap", type=int, default=caps["multiple_cap"])

    p = argparse.ArgumentParser(prog="qfc", description="Exact quadratic form workbench")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_, form=True, field=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if field:
            sp.add_argument("--field", required=True, help='field descriptor, e.g. "Qp(2)" or "R((t))"')
        if form:
            sp.add_argument("--form", required=True, help='coefficients, e.g. "1,1,-3"')
        sp.set_defaults(fn=fn)
        return sp

    verb("isotropy", cmd_isotropy, "isotropy of a diagonal form")
    verb("witt", cmd_witt, "Witt decomposition and classical invariants")
    verb("pfister", cmd_pfister, "build a Pfister form", form=False).add_argument("--slots", required=True)
    verb("torsion", cmd_torsion, "torsion and weak isotropy")
    verb("in-ideal", cmd_in_ideal, "membership in I^n").add_argument("--n", type=int, required=True)
    sp = verb("invariant", cmd_invariant, "u, st, lambda^n or gamma of a field", form=False)
    sp.add_argument("--kind", choices=("u", "st", "lambda", "gamma"), required=True)
    sp.add_argument("--n", type=int, default=2)
    verb("gamma", cmd_gamma, "splitting height of a form").add_argument("--exact", action="store_true")
    verb("tower", cmd_tower, "multiquadratic splitting tower")
    verb("reduce", cmd_reduce, "small representative modulo I^(m+1)").add_argument("--m", type=int, required=True)
    sp = verb("bounds", cmd_bounds, "infer bounds from a fact file", form=False, field=False)
    sp.add_argument("--facts", required=True)
    sp.add_argument("--explain", metavar="INVARIANT")
    verb("check", cmd_check, "cross-check the rules against computed invariants", form=False)
    verb("main-status", cmd_main_status, "equivalence status of the five finiteness conditions", form=False, field=False).add_argument("--facts", required=True)
    sp = verb("report", cmd_report, "CSV tables and PNG figures for a field battery", form=False, field=False)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--fields", nargs="*", help="field descriptors (default: built-in battery)")
    sp.add_argument("--kmax", type=int, default=3, help="Laurent tower depth for the trend")
    return p


def main(argv=None) -> int:
    try:
        caps = default_caps()
    except (QFCError, ValueError) as exc:
        print(f"qfc: {exc}", file=sys.stderr)
        return 2
    parser = build_parser(caps)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    caps = {"dim_cap": args.dim_cap, "bfs_cap": args.bfs_cap, "multiple_cap": args.multiple_cap}
    try:
        payload, text = args.fn(args, caps)
    except (QFCError, ValueError, AssertionError) as exc:
        if args.json:
            print(json.dumps({"error": str(exc), "caps": caps}, sort_keys=True))
        else:
            print(f"qfc: error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps({**payload, "caps": caps}, sort_keys=True, indent=2, default=str))
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
