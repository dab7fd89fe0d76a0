"""Turn powersense CSV outputs into figures.

Each figure kind maps 1:1 to a CSV schema produced by the powersense CLI;
no probabilities are recomputed here. Rendering is a pure file transform:
the same CSV yields the same series and axis ranges, and input files are
never touched.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("thresholds", "matrix_bars", "sweep_lines", "offset_lines", "k_sweep")

_REQUIRED_COLUMNS = {
    "thresholds": {"strategy", "level", "lower", "upper", "masked", "onoff_threshold"},
    "matrix_bars": {"true_level", "decided_level", "analytic", "empirical", "std_err"},
    "sweep_lines": {"axis_value", "strategy", "p_fa", "p_d", "p_dis1", "p_dis2"},
    "offset_lines": {"axis_value", "rule", "error_delta_1"},
    "k_sweep": {"axis_value", "rule", "p_d", "p_dis1"},
}


class SchemaError(ValueError):
    """The CSV does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    output_path: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    metric: str = "p_d"  # sweep_lines only


@dataclass(frozen=True)
class RenderReport:
    output_path: str
    series: int
    xlim: tuple[float, float]
    ylim: tuple[float, float]


def _load(spec: FigureSpec) -> list[dict]:
    if spec.kind not in KINDS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}; expected one of {KINDS}")
    with open(spec.input_csv, newline="") as f:
        reader = csv.DictReader(f)
        header = set(reader.fieldnames or ())
        missing = _REQUIRED_COLUMNS[spec.kind] - header
        if missing:
            raise SchemaError(
                f"{spec.input_csv}: kind {spec.kind!r} needs columns {sorted(missing)} "
                f"not present in {sorted(header)}"
            )
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{spec.input_csv}: empty data section")
    return rows


def _groups(rows: list[dict], key: str) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row[key] not in seen:
            seen.append(row[key])
    return seen


def _finish(spec: FigureSpec, ax, fig, series: int, xlabel: str, ylabel: str) -> RenderReport:
    ax.set_xlabel(spec.xlabel or xlabel)
    ax.set_ylabel(spec.ylabel or ylabel)
    if spec.title:
        ax.set_title(spec.title)
    if series > 1 or ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=120)
    report = RenderReport(
        output_path=spec.output_path, series=series, xlim=ax.get_xlim(), ylim=ax.get_ylim()
    )
    plt.close(fig)
    return report


def _render_thresholds(spec: FigureSpec, rows: list[dict]) -> RenderReport:
    fig, ax = plt.subplots(figsize=(7, 2.2 + 0.8 * len(_groups(rows, "strategy"))))
    strategies = _groups(rows, "strategy")
    finite_upper = [float(r["upper"]) for r in rows if math.isfinite(float(r["upper"]))]
    hi = 1.1 * max(finite_upper) if finite_upper else 1.0
    for band, strat in enumerate(strategies):
        sub = [r for r in rows if r["strategy"] == strat]
        for r in sub:
            lo = float(r["lower"])
            up = min(float(r["upper"]), hi)
            if up <= lo:
                continue
            ax.broken_barh(
                [(lo, up - lo)], (band + 0.1, 0.8),
                facecolors=f"C{int(r['level']) % 10}", alpha=0.7,
            )
            ax.text(0.5 * (lo + up), band + 0.5, r["level"], ha="center", va="center", fontsize=8)
        onoff = float(sub[0]["onoff_threshold"])
        ax.axvline(onoff, color="k", linestyle="--", linewidth=0.8)
        ax.plot([], [], label=f"strategy {strat}")
    ax.set_yticks([b + 0.5 for b in range(len(strategies))])
    ax.set_yticklabels([f"strategy {s}" for s in strategies])
    return _finish(spec, ax, fig, len(strategies), "energy", "")


def _render_matrix_bars(spec: FigureSpec, rows: list[dict]) -> RenderReport:
    fig, ax = plt.subplots(figsize=(max(7, 0.35 * len(rows)), 4))
    x = range(len(rows))
    analytic = [float(r["analytic"]) for r in rows]
    empirical = [float(r["empirical"]) for r in rows]
    err = [4.0 * float(r["std_err"]) for r in rows]
    ax.bar([i - 0.2 for i in x], analytic, width=0.4, label="analytic")
    ax.bar([i + 0.2 for i in x], empirical, width=0.4, yerr=err, capsize=2, label="empirical")
    ax.set_xticks(list(x))
    ax.set_xticklabels([f"{r['true_level']}→{r['decided_level']}" for r in rows], fontsize=7)
    return _finish(spec, ax, fig, 2, "true → decided level", "decision probability")


def _render_sweep_lines(spec: FigureSpec, rows: list[dict]) -> RenderReport:
    if spec.metric not in rows[0]:
        raise SchemaError(f"{spec.input_csv}: no column {spec.metric!r} to plot")
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    strategies = _groups(rows, "strategy")
    for strat in strategies:
        sub = [r for r in rows if r["strategy"] == strat]
        ax.plot(
            [float(r["axis_value"]) for r in sub],
            [float(r[spec.metric]) for r in sub],
            marker="o", label=f"strategy {strat}",
        )
    return _finish(spec, ax, fig, len(strategies), "axis value", spec.metric)


def _render_offset_lines(spec: FigureSpec, rows: list[dict]) -> RenderReport:
    deltas = sorted(
        (c for c in rows[0] if c.startswith("error_delta_")), key=lambda c: int(c.rsplit("_", 1)[1])
    )
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    rules = _groups(rows, "rule")
    series = 0
    for rule in rules:
        sub = [r for r in rows if r["rule"] == rule]
        for col in deltas:
            ax.semilogy(
                [float(r["axis_value"]) for r in sub],
                [max(float(r[col]), 1e-16) for r in sub],
                marker="o", label=f"{rule}, offset {col.rsplit('_', 1)[1]}",
            )
            series += 1
    return _finish(spec, ax, fig, series, "axis value", "error probability")


def _render_k_sweep(spec: FigureSpec, rows: list[dict]) -> RenderReport:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    rules = _groups(rows, "rule")
    series = 0
    for rule in rules:
        sub = [r for r in rows if r["rule"] == rule]
        k = [float(r["axis_value"]) for r in sub]
        ax.plot(k, [float(r["p_d"]) for r in sub], marker="o", label=f"{rule}: detection")
        ax.plot(
            k, [float(r["p_dis1"]) for r in sub],
            marker="s", linestyle="--", label=f"{rule}: discrimination",
        )
        series += 2
    return _finish(spec, ax, fig, series, "cooperating sensors", "probability")


_RENDERERS = {
    "thresholds": _render_thresholds,
    "matrix_bars": _render_matrix_bars,
    "sweep_lines": _render_sweep_lines,
    "offset_lines": _render_offset_lines,
    "k_sweep": _render_k_sweep,
}


def render(spec: FigureSpec) -> RenderReport:
    """Render the CSV named by the spec into a raster image.

    Raises SchemaError (and writes nothing) when the CSV does not match the
    kind's schema or carries no data rows.
    """
    rows = _load(spec)
    return _RENDERERS[spec.kind](spec, rows)
