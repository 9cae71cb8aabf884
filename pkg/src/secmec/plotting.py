"""Render sweep CSVs as deterministic SVG figures.

Figures are built on matplotlib's object-oriented Figure API (no pyplot
state) and written with a fixed hash salt and no embedded timestamps, so
re-plotting the same CSV yields byte-identical output.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("svg")
matplotlib.rcParams["svg.hashsalt"] = "secmec"

from matplotlib.backends.backend_svg import FigureCanvasSVG  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .experiments import read_sweep_csv  # noqa: E402

PLOT_KINDS = ("fig3", "fig4", "fig6", "fig7", "fig9")

_VARIABLE_LABELS = {
    "p_beta_dbm": "edge vehicle transmit power (dBm)",
    "d_alpha_beta_m": "vehicle separation (m)",
    "rs": "secrecy rate target (bit/s/Hz)",
    "zeta": "outage tolerance",
}

# kind -> (metrics with line style, y label, log y axis)
_KIND_LAYOUTS = {
    "fig3": ((("sops", "-"),), "system secrecy outage probability", True),
    "fig4": (
        (("sop_alpha", "--"), ("sop_beta", "-")),
        "secrecy outage probability",
        True,
    ),
    "fig6": ((("d_beta", "-"), ("d_alpha", "--")), "task completion delay (s)", False),
    "fig7": ((("lambda_star", "-"),), "optimized power allocation factor", False),
    "fig9": ((("offloaded_tasks", "-"),), "offloaded tasks", False),
}

_MARKERS = ("o", "s", "^", "v", "d", "x", "+", "*")


def _collect_series(rows, metric):
    """Per-scheme (values, means) arrays in first-seen scheme order."""
    series: dict[str, tuple[list[float], list[float]]] = {}
    for row in rows:
        mean = float(row[f"{metric}_mean"])
        if math.isnan(mean):
            continue
        xs, ys = series.setdefault(row["scheme"], ([], []))
        xs.append(float(row["value"]))
        ys.append(mean)
    return {name: pair for name, pair in series.items() if pair[0]}


def render_plot(csv_path: str | Path, kind: str, out_path: str | Path) -> Path:
    """Plot one figure kind from a sweep CSV and write it as SVG.

    Raises ValueError (before creating any output file) if the kind is
    unknown, the CSV holds no data rows, or no scheme has finite values
    for the requested metrics.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}, got {kind!r}")
    meta, rows = read_sweep_csv(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows to plot")
    metrics, ylabel, log_y = _KIND_LAYOUTS[kind]
    per_metric = {m: _collect_series(rows, m) for m, _ in metrics}
    if not any(per_metric.values()):
        raise ValueError(f"{csv_path}: all values for {kind} metrics are missing")

    fig = Figure(figsize=(6.0, 4.2))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(111)
    scheme_order: list[str] = []
    for series in per_metric.values():
        for name in series:
            if name not in scheme_order:
                scheme_order.append(name)
    for metric, style in metrics:
        suffix = f" ({metric})" if len(metrics) > 1 else ""
        for name, (xs, ys) in per_metric[metric].items():
            marker = _MARKERS[scheme_order.index(name) % len(_MARKERS)]
            ax.plot(xs, ys, style, marker=marker, markersize=4, label=name.upper() + suffix)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(_VARIABLE_LABELS.get(meta.get("variable", ""), meta.get("variable", "value")))
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, format="svg", metadata={"Date": None})
    return out
