"""SVG rate plots rendered purely from a sweep CSV."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import ALGOS, read_csv  # noqa: E402

_STYLE = {
    "ao": dict(color="tab:red", linestyle="-", marker="o"),
    "baseline_x0": dict(color="tab:blue", linestyle="--", marker="s"),
    "baseline_xL4": dict(color="tab:blue", linestyle="-.", marker="^"),
    "baseline_xL2": dict(color="tab:blue", linestyle=":", marker="v"),
}


def plot_csv(csv_path, svg_path, xlabel: str = "sweep value") -> None:
    rows = read_csv(csv_path)
    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for r in rows:
        series.setdefault((r["curve_id"], r["algo"]), []).append((float(r["sweep_value"]), float(r["rate_bps"])))

    plt.rcParams["svg.hashsalt"] = "pinchcovert"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (curve, algo), pts in series.items():
        if algo not in ALGOS:
            continue
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=f"{curve} {algo}", markersize=3, linewidth=1.2, **_STYLE[algo])
    ax.set_xlabel(xlabel)
    ax.set_ylabel("covert uplink rate (bits/s)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
