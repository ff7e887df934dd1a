# core/services/plots.py
import logging
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from core.exceptions import NoDataError  # noqa: E402
from core.services.harness import METRICS, SweepResult  # noqa: E402

logger = logging.getLogger(__name__)

SCHEME_STYLE = {
    "cec": ("#1f77b4", "o"),
    "mlcec": ("#ff7f0e", "s"),
    "bicec": ("#2ca02c", "^"),
}
Y_LABELS = {
    "computation_time": "computation time (s)",
    "decoding_time": "decoding time (s)",
    "finishing_time": "finishing time (s)",
    "transition_waste": "transition waste (subtasks)",
}


def emit_plots(result: SweepResult, out_dir: Union[str, Path]) -> list:
    """One SVG per metric, one mean-vs-N polyline per scheme (gid `series-<scheme>`)."""
    if result.is_empty:
        raise NoDataError("sweep produced no successful trials to plot")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in METRICS:
        series = result.series(metric)
        fig, ax = plt.subplots(figsize=(7.2, 4.6))
        for scheme, (xs, ys) in series.items():
            pts = sorted(zip(xs, ys))
            color, marker = SCHEME_STYLE.get(scheme.value, ("#555555", "o"))
            (line,) = ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                color=color,
                marker=marker,
                linewidth=1.4,
                label=scheme.value.upper(),
            )
            line.set_gid(f"series-{scheme.value}")

        ax.set_xlabel("N (active workers)")
        ax.set_ylabel(Y_LABELS[metric])
        ax.set_title(f"mean {metric.replace('_', ' ')} vs N (seed {result.seed})")
        ax.grid(True, linestyle="--", linewidth=0.5)
        ax.legend(loc="best", fontsize=8)

        fig.tight_layout()
        path = out_dir / f"{metric}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)

    logger.info("wrote %d plots to %s", len(written), out_dir)
    return written
