"""Delimited files, text tables and figures for strategy comparisons."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

from .harness import ComparisonReport, ComparisonRow

ABSENCE_FIELDS = ["automaton", "feature", "n", "brute_total", "simulator_cost"]
DETECTION_FIELDS = ["id", "pair", "automaton", "feature", "b", "n", "hit_probability", "min", "q1",
                    "median", "q3", "max", "mean", "exact", "simulator_cost"]
SINGLE_FIELDS = ["cost", "orderings", "share", "simulator_cost"]


def _pair(row: ComparisonRow) -> str:
    return "+".join(row.interaction.features) if row.interaction else ""


def absence_records(report: ComparisonReport) -> list:
    return [{"automaton": r.automaton, "feature": r.feature, "n": r.n,
             "brute_total": r.brute_total, "simulator_cost": r.simulator_cost} for r in report.absence]


def detection_records(report: ComparisonReport) -> list:
    out = []
    for r in report.detection:
        s = r.stats
        out.append({"id": r.interaction.id if r.interaction else "", "pair": _pair(r),
                    "automaton": r.automaton, "feature": r.feature, "b": r.b, "n": r.n,
                    "hit_probability": f"{r.b}/{r.n}", "min": s.minimum, "q1": s.q1,
                    "median": s.median, "q3": s.q3, "max": s.maximum, "mean": s.mean,
                    "exact": s.exact, "simulator_cost": r.simulator_cost})
    return out


def single_records(row: Optional[ComparisonRow]) -> list:
    if row is None or row.stats is None:
        return []
    total = sum(c for _, c in row.stats.distribution)
    return [{"cost": v, "orderings": c, "share": c / total, "simulator_cost": row.simulator_cost}
            for v, c in row.stats.distribution]


def write_csv(report: ComparisonReport, out_dir, single: Optional[str] = None) -> list:
    """Write absence.csv, detection.csv and single.csv; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, fields, rows in (("absence", ABSENCE_FIELDS, absence_records(report)),
                               ("detection", DETECTION_FIELDS, detection_records(report)),
                               ("single", SINGLE_FIELDS, single_records(report.single(single)))):
        p = out / f"{name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(rows)
        paths.append(p)
    return paths


def _num(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _table(headers: list, rows: list) -> str:
    cells = [[_num(x) for x in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*r) for r in cells]
    return "\n".join(lines)


def format_report(report: ComparisonReport) -> str:
    unit = "states" if report.cost == "states" else "seconds"
    parts = [f"Absence proofs (cost in {unit}): sum over candidates vs simulator"]
    rows = [[r.automaton, r.feature, r.n, r.brute_total, r.simulator_cost,
             f"{r.simulator_cost / r.brute_total:.2f}" if r.brute_total else "-"] for r in report.absence]
    parts.append(_table(["automaton", "feature", "n", "brute-sum", "simulator", "ratio"], rows)
                 if rows else "(none)")
    parts.append("")
    parts.append(f"Detection (cost in {unit}): first-violation cost over all orderings vs simulator")
    rows = []
    for r in report.detection:
        s = r.stats
        rows.append([r.interaction.id if r.interaction else "?", _pair(r), r.automaton, f"{r.b}/{r.n}",
                     s.minimum, s.median, s.maximum, s.mean, r.simulator_cost])
    parts.append(_table(["id", "pair", "automaton", "b/n", "min", "median", "max", "mean", "simulator"],
                        rows) if rows else "(none)")
    return "\n".join(parts)


def plot_report(report: ComparisonReport, out_dir, single: Optional[str] = None,
                fmt: str = "png") -> list:
    """Render absence, detection and single-interaction figures; returns the paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    unit = "states explored" if report.cost == "states" else "seconds"
    paths = []

    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(report.absence) + 2), 4))
    rows = report.absence
    xs = range(len(rows))
    ax.bar([x - 0.2 for x in xs], [r.brute_total for r in rows], 0.4, color="0.75", label="brute force")
    ax.bar([x + 0.2 for x in xs], [r.simulator_cost for r in rows], 0.4, color="0.3", label="simulator")
    ax.set_xticks(list(xs), [r.automaton for r in rows], rotation=30, ha="right")
    ax.set_ylabel(unit)
    ax.set_title("Absence proofs")
    ax.legend()
    fig.tight_layout()
    paths.append(out / f"absence.{fmt}")
    fig.savefig(paths[-1])
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(max(4, 0.9 * len(report.detection) + 2), 4))
    rows = report.detection
    if rows:
        ax.bxp([r.stats.box(r.label) for r in rows], showfliers=False, patch_artist=True,
               boxprops={"facecolor": "0.85"})
        ax.plot(range(1, len(rows) + 1), [r.simulator_cost for r in rows], "kx", markersize=9,
                label="simulator")
        ax.set_yscale("log")
        ax.legend()
    ax.set_ylabel(unit)
    ax.set_title("Detection: brute force over all orderings vs simulator")
    fig.tight_layout()
    paths.append(out / f"detection.{fmt}")
    fig.savefig(paths[-1])
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    row = report.single(single)
    if row is not None and row.stats is not None:
        recs = single_records(row)
        ax.hist([r["cost"] for r in recs], bins=min(40, len(recs)), weights=[r["share"] for r in recs],
                color="0.75", label="brute force")
        ax.axvline(row.simulator_cost, color="0.2", linestyle="--",
                   label=f"simulator ({_num(row.simulator_cost)})")
        ax.set_xlabel(f"cost to first violation ({unit})")
        ax.set_ylabel("share of orderings")
        ax.set_title(f"{row.label} {_pair(row)}  b/n = {row.b}/{row.n}")
        ax.legend()
    fig.tight_layout()
    paths.append(out / f"single.{fmt}")
    fig.savefig(paths[-1])
    plt.close(fig)
    return paths
