"""Chart construction from experiment CSVs.

Three single-chart kinds plus a composite: estimation error against
the doped-magic count, error against the measurement budget, protocol
spread against the doped-magic count, and a three-panel figure that
lays those out side by side.  Inputs may be summary files (one row
per grid point) or raw trial files, which are aggregated here with
plain mean and sample standard deviation.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg", force=False)

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .csvio import MissingColumnError, read_table, require_columns  # noqa: E402

KINDS = ("error-vs-magic", "error-vs-shots", "stddev-compare", "panels")

_STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotkit-0.1",
}


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple
    kind: str
    out: str
    log_y: bool = False
    labels: tuple = ()
    title: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "out", str(self.out))
        if not self.inputs:
            raise ValueError("need at least one input CSV")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.labels and len(self.labels) != len(self.inputs):
            raise ValueError("labels, when given, must match inputs one to one")


def summarize(table):
    """Rows with (protocol, t, n2, mean_abs_error, stddev_estimate).

    Summary files pass through; trial files are grouped by grid point
    and aggregated.
    """
    if "mean_abs_error" in table.columns:
        require_columns(table, ("protocol", "t", "n2", "mean_abs_error",
                                "stddev_estimate"))
        return [
            {
                "protocol": row["protocol"],
                "t": int(row["t"]),
                "n2": int(row["n2"]),
                "mean_abs_error": float(row["mean_abs_error"]),
                "stddev_estimate": float(row["stddev_estimate"]),
            }
            for row in table.rows
        ]
    require_columns(table, ("protocol", "t", "n2", "estimate", "abs_error"))
    groups = {}
    for row in table.rows:
        key = (row["protocol"], int(row["t"]), int(row["n2"]))
        groups.setdefault(key, []).append(
            (float(row["estimate"]), float(row["abs_error"]))
        )
    out = []
    for (protocol, t, n2), vals in sorted(groups.items()):
        estimates = [v[0] for v in vals]
        spread = statistics.stdev(estimates) if len(estimates) > 1 else 0.0
        out.append({
            "protocol": protocol,
            "t": t,
            "n2": n2,
            "mean_abs_error": statistics.mean(v[1] for v in vals),
            "stddev_estimate": spread,
        })
    return out


def _series(rows, x_key, y_key, group_keys, prefix):
    groups = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in group_keys), []).append(
            (row[x_key], row[y_key])
        )
    for key in sorted(groups):
        pts = sorted(groups[key])
        tag = " ".join(f"{k}={v}" for k, v in zip(group_keys, key))
        label = f"{prefix} {tag}".strip()
        yield label, [p[0] for p in pts], [p[1] for p in pts]


def _load_tagged(spec):
    labels = spec.labels or [""] * len(spec.inputs)
    if len(spec.inputs) > 1 and not spec.labels:
        labels = [f"input{i + 1}" for i in range(len(spec.inputs))]
    return [(label, summarize(read_table(path)))
            for label, path in zip(labels, spec.inputs)]


def _draw(ax, tagged, x_key, y_key, group_keys, only_protocols=None):
    for prefix, rows in tagged:
        kept = [r for r in rows
                if only_protocols is None or r["protocol"] in only_protocols]
        for label, xs, ys in _series(kept, x_key, y_key, group_keys, prefix):
            ax.plot(xs, ys, marker="o", markersize=3.5, label=label)
    ax.legend(fontsize=7)


def _panel_error_vs_magic(ax, tagged, log_y, only_protocols=None):
    _draw(ax, tagged, "t", "mean_abs_error", ("protocol", "n2"), only_protocols)
    ax.set_xlabel("doped magic qubits t")
    ax.set_ylabel("mean absolute error")
    if log_y:
        ax.set_yscale("log")


def _panel_error_vs_shots(ax, tagged, log_y, only_protocols=None):
    _draw(ax, tagged, "n2", "mean_abs_error", ("protocol", "t"), only_protocols)
    ax.set_xscale("log")
    ax.set_xlabel("per-label measurement budget")
    ax.set_ylabel("mean absolute error")
    if log_y:
        ax.set_yscale("log")


def _panel_stddev_compare(ax, tagged, log_y, only_protocols=None):
    _draw(ax, tagged, "t", "stddev_estimate", ("protocol", "n2"), only_protocols)
    ax.set_xlabel("doped magic qubits t")
    ax.set_ylabel("estimate standard deviation")
    if log_y:
        ax.set_yscale("log")


def render_figure(spec: PlotSpec):
    """Build the matplotlib figure for a spec without saving it."""
    tagged = _load_tagged(spec)
    with plt.rc_context(_STYLE):
        if spec.kind == "panels":
            fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
            _panel_error_vs_magic(axes[0], tagged, spec.log_y, ("symmetric",))
            axes[0].set_title("(a) error vs magic, symmetric")
            _panel_error_vs_shots(axes[1], tagged, spec.log_y, ("symmetric",))
            axes[1].set_title("(b) error vs budget, symmetric")
            _panel_stddev_compare(axes[2], tagged, spec.log_y)
            axes[2].set_title("(c) spread, both protocols")
        else:
            fig, ax = plt.subplots(figsize=(5.2, 3.8))
            panel = {
                "error-vs-magic": _panel_error_vs_magic,
                "error-vs-shots": _panel_error_vs_shots,
                "stddev-compare": _panel_stddev_compare,
            }[spec.kind]
            panel(ax, tagged, spec.log_y)
        if spec.title:
            fig.suptitle(spec.title)
        fig.tight_layout()
    return fig


def render(spec: PlotSpec):
    """Render and save; returns the output path."""
    fig = render_figure(spec)
    try:
        metadata = {"Date": None} if spec.out.endswith(".svg") else None
        with plt.rc_context(_STYLE):
            fig.savefig(spec.out, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.out
