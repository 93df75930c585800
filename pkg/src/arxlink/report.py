"""Render the fraction series as SVG line charts, one file per scope.

Each chart carries up to three lines (referenced, matched, projected
fractions over publication years) tagged with stable SVG group ids so the
output is machine-checkable.  Charts are written next to the fractions.csv
they were derived from.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context
from matplotlib.figure import Figure

SERIES = (
    ("referenced", "referenced_fraction", "tab:red"),
    ("matched", "matched_fraction", "tab:blue"),
    ("projected", "projected_fraction", "tab:green"),
)

# Vertex-exact paths and a fixed hash salt keep the SVG output deterministic
# and parseable.
_RC = {
    "path.simplify": False,
    "svg.hashsalt": "arxlink",
    "svg.fonttype": "none",
}


class ReportError(ValueError):
    pass


def read_fractions(path: str | Path) -> dict[str, list[dict]]:
    """Group fractions.csv rows by scope ("all" or a subject area)."""
    path = Path(path)
    if not path.exists():
        raise ReportError(f"fractions file not found: {path}")
    by_scope: dict[str, list[dict]] = defaultdict(list)
    with path.open(encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            by_scope[row["area"]].append(row)
    if not by_scope:
        raise ReportError(f"fractions file is empty: {path}")
    for rows in by_scope.values():
        rows.sort(key=lambda r: int(r["year"]))
    return dict(by_scope)


def _safe_name(scope: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in scope)


def render_fraction_chart(scope: str, rows: list[dict], out_path: Path) -> Path:
    years = [int(r["year"]) for r in rows]
    with rc_context(_RC):
        fig = Figure(figsize=(8, 5))
        ax = fig.add_subplot(111)
        for name, column, color in SERIES:
            values = [float(r[column]) for r in rows]
            (line,) = ax.plot(years, values, marker="o", markersize=3, color=color, label=name)
            line.set_gid(f"series_{name}")
        ax.set_xlabel("year")
        ax.set_ylabel("fraction of journal articles")
        ax.set_ylim(0.0, 1.1)
        ax.set_title(f"preprint coverage: {scope}")
        ax.legend(loc="best")
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    return out_path


def render_fraction_charts(fractions_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """One SVG per scope found in fractions.csv; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_scope = read_fractions(fractions_csv)
    written = []
    for scope in sorted(by_scope, key=lambda s: (s != "all", s)):
        out_path = out / f"fractions_{_safe_name(scope)}.svg"
        written.append(render_fraction_chart(scope, by_scope[scope], out_path))
    return written
