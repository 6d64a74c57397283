"""Figure rendering for sweep results: every report written to disk gets a
matplotlib rendering saved next to the delimited file.

Import of the matplotlib backend is deferred and forced to Agg so the CLI
never needs a display.
"""

from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

from .sweeps import SweepResult

_LOG_METRICS = {"outage", "outage_perfect", "p_err"}

_AXIS_LABELS = {
    "p_db": "input SNR p [dB]",
    "n": "receive antennas N",
    "m": "transmitted streams M",
    "rate": "coding rate [npcu]",
    "blocklength": "data blocklength L",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_sweep_figure(result: SweepResult, path: str | Path) -> Path:
    """Line plot of every (series, metric) curve in the result; probability
    metrics go on a log axis.  Returns the written path."""
    plt = _pyplot()
    path = Path(path)

    curves: "OrderedDict[tuple[str, str], list[tuple[float, float]]]" = OrderedDict()
    point_marks: list[tuple[str, float, float]] = []
    for series, pval, metric, val in result.rows:
        if metric == "m_star":
            point_marks.append((series, pval, val))
            continue
        curves.setdefault((series, metric), []).append((pval, val))

    log_axis = bool(curves) and all(m in _LOG_METRICS for (_, m) in curves)
    fig, ax = plt.subplots(figsize=(7.2, 5.0))
    for (series, metric), pts in curves.items():
        xs = [p for p, _ in pts]
        ys = [v for _, v in pts]
        label = f"{series} {metric}".strip()
        style = "--" if metric.endswith(("_perfect", "_lb")) else "-"
        if log_axis:
            safe = [(x, y) for x, y in zip(xs, ys) if y > 0.0]
            if not safe:
                continue
            ax.semilogy([x for x, _ in safe], [y for _, y in safe], style, label=label)
        else:
            ax.plot(xs, ys, style, label=label)
    for series, _, mstar in point_marks:
        ax.axvline(mstar, color="gray", alpha=0.4, linewidth=0.8)
        ax.annotate(
            f"M*={int(mstar)} ({series})",
            xy=(mstar, ax.get_ylim()[1]),
            fontsize=7,
            rotation=90,
            va="top",
        )
    ax.set_xlabel(_AXIS_LABELS.get(result.spec.param, result.spec.param))
    ax.set_ylabel("value")
    ax.grid(True, which="both", alpha=0.3)
    if curves:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def figure_path_for(out_path: str | Path) -> Path:
    """PNG sibling of a delimited output file."""
    out_path = Path(out_path)
    return out_path.with_suffix(".png")
