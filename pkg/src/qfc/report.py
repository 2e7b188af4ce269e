"""Batch report: invariant table, rule margins and the iterated Laurent trend,
written as CSV files with matching PNG figures."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bounds import check_rules_against_field  # noqa: E402
from .dsl import parse_field  # noqa: E402
from .invariants import compute_st, compute_u  # noqa: E402

BATTERY = (
    "F(3)", "F(5)", "F(7)", "F(9)", "F(13)",
    "Qp(2)", "Qp(3)", "Qp(5)", "Q", "R", "R((t))", "R((t))((s))",
)


def laurent_tower(k: int) -> str:
    return "R" + "".join(f"((t{i}))" for i in range(1, k + 1))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _log2p(x) -> float:
    return math.log2(x + 1) if isinstance(x, int) else float("nan")


def battery_report(out: Path, fields=BATTERY, dim_cap=None, bfs_cap=None) -> list[dict]:
    results = [check_rules_against_field(parse_field(f), dim_cap, bfs_cap) for f in fields]
    keys = ["u", "st", "u_ext_sqrt_minus1", "gamma", "lambda(1)", "lambda(2)", "lambda(3)"]
    _write_csv(
        out / "invariants.csv",
        ["field", *keys, "violations"],
        [[r["field"], *[r["values"].get(k, "") for k in keys], r["violations"]] for r in results],
    )
    rows = []
    for r in results:
        for e in r["rules"]:
            rows.append([r["field"], e["rule"], e.get("lhs", ""), e.get("rhs", ""), e.get("margin", ""), e["status"], e.get("note", "")])
    _write_csv(out / "rule_margins.csv", ["field", "rule", "lhs", "rhs", "margin", "status", "note"], rows)

    numeric = [x for x in rows if isinstance(x[2], int) and isinstance(x[3], int)]
    fig, ax = plt.subplots(figsize=(9, 4.5))
    labels = sorted({x[1] for x in numeric}, key=lambda s: int(s[1:]))
    for i, rule in enumerate(labels):
        pts = [x for x in numeric if x[1] == rule]
        ax.scatter([_log2p(x[2]) for x in pts], [_log2p(x[3]) for x in pts], label=rule, s=18, color=plt.cm.tab10(i % 10))
    hi = max([_log2p(x[3]) for x in numeric] + [1.0])
    ax.plot([0, hi], [0, hi], color="grey", lw=0.8, ls="--")
    ax.set_xlabel("log2(1 + computed value)")
    ax.set_ylabel("log2(1 + rule bound)")
    ax.set_title("Computed invariants against rule bounds (on or above the diagonal = rule holds)")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(out / "rule_margins.png", dpi=120)
    plt.close(fig)
    return results


def laurent_trend(out: Path, kmax: int = 3, dim_cap=None) -> list[list]:
    rows = []
    for k in range(0, kmax + 1):
        F = parse_field(laurent_tower(k))
        u = compute_u(F) if dim_cap is None else compute_u(F, dim_cap)
        st = compute_st(F)
        rows.append([k, str(F), u.value, u.exactness, st.value, st.exactness])
    _write_csv(out / "laurent_trend.csv", ["k", "field", "u", "u_exactness", "st", "st_exactness"], rows)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ks = [r[0] for r in rows]
    ax.plot(ks, [r[4] for r in rows], marker="o", label="st")
    ax.plot(ks, [r[2] for r in rows], marker="s", label="u")
    ax.set_xlabel("number of Laurent variables k")
    ax.set_xticks(ks)
    ax.set_title("R((t1))...((tk)): u stays 0 while st grows with k")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "laurent_trend.png", dpi=120)
    plt.close(fig)
    return rows


def write_report(out_dir: str | Path, fields=BATTERY, dim_cap=None, bfs_cap=None, kmax: int = 3) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = battery_report(out, fields, dim_cap, bfs_cap)
    trend = laurent_trend(out, kmax, dim_cap)
    return {
        "out_dir": str(out),
        "files": sorted(p.name for p in out.iterdir()),
        "violations": sum(r["violations"] for r in results),
        "trend": [{"k": r[0], "u": r[2], "st": r[4]} for r in trend],
        "trend_note": "st grows by one per Laurent variable while u stays 0, so the infinite tower has u = 0 and st = infinity",
    }
