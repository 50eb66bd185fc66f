"""Render box-plot figures and a cross-method summary from metric CSVs."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiment import quartiles

MEASURES = ("E", "VI", "VD", "VDn", "VIn", "seconds")


def read_metrics_csv(path) -> list[dict]:
    """Parse one metrics CSV into row dicts; failed replicates (nan metrics)
    are dropped."""
    rows = []
    with open(path) as fh:
        reader = csv.DictReader(fh)
        needed = {"method", "replicate", *MEASURES}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ValueError(f"{path}: missing columns, need {sorted(needed)}")
        for rec in reader:
            try:
                values = {m: float(rec[m]) for m in MEASURES}
            except ValueError:
                continue
            if any(v != v for v in values.values()):  # NaN -> failed replicate
                continue
            rows.append({"method": rec["method"],
                         "replicate": int(rec["replicate"]), **values})
    return rows


def _by_method(rows: list[dict]) -> dict[str, list[dict]]:
    grouped: dict[str, list[dict]] = {}
    for row in rows:
        grouped.setdefault(row["method"], []).append(row)
    return grouped


def render_report(metric_files, out_dir) -> list[Path]:
    """One box-plot figure per measure plus a recomputed quartile summary,
    written alongside the input CSVs' data in ``out_dir``."""
    rows = []
    for path in metric_files:
        rows.extend(read_metrics_csv(path))
    if not rows:
        raise ValueError("no scored replicates found in the metric files")
    grouped = _by_method(rows)
    methods = sorted(grouped)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for measure in MEASURES:
        data = [[r[measure] for r in grouped[m]] for m in methods]
        fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(methods), 4.0))
        ax.boxplot(data, tick_labels=methods)
        ax.set_ylabel(measure)
        ax.set_title(f"{measure} over replicates")
        ax.tick_params(axis="x", rotation=30)
        ax.grid(True, axis="y", alpha=0.3)
        fig.tight_layout()
        target = out / f"report_{measure}.png"
        fig.savefig(target, dpi=150)
        plt.close(fig)
        written.append(target)

    summary = out / "report_summary.csv"
    with open(summary, "w") as fh:
        fh.write("method,measure,count,min,q1,median,q3,max\n")
        for method in methods:
            for measure in MEASURES:
                vals = [r[measure] for r in grouped[method]]
                q = quartiles(vals)
                fh.write(",".join(
                    [method, measure, str(len(vals))]
                    + ["%.12g" % q[s] for s in ("min", "q1", "median", "q3", "max")]
                ) + "\n")
    written.append(summary)
    return written
