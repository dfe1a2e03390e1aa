"""Figure rendering for CLI reports (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_trace(trace, path: str) -> None:
    """Center coordinate along an orbit trace, one marker per step."""
    steps = range(len(trace))
    ys = [p.y for p in trace]
    charts = [p.chart for p in trace]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(steps, ys, "-", color="0.6", zorder=1)
    for chart, color in (("P", "tab:blue"), ("Q", "tab:orange")):
        xs = [i for i, c in zip(steps, charts) if c == chart]
        vals = [y for y, c in zip(ys, charts) if c == chart]
        ax.scatter(xs, vals, color=color, label=f"chart {chart}", zorder=2)
    ax.set_xlabel("step")
    ax.set_ylabel("center coordinate y")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_covering(cert, path: str) -> None:
    """The center interval and the two branch images as horizontal bars."""
    fig, ax = plt.subplots(figsize=(6, 2.5))
    lo, hi = cert.interval
    ax.hlines(0.0, lo, hi, color="black", linewidth=4, label="I_c")
    for i, (a, b) in enumerate(cert.images_outer, start=1):
        ax.hlines(float(i), a, b, linewidth=4, label=f"R{i}(I_c)")
    if cert.gap is not None:
        ax.axvspan(cert.gap[0], cert.gap[1], color="red", alpha=0.2, label="gap")
    ax.set_yticks([0, 1, 2])
    ax.set_yticklabels(["I_c", "R1", "R2"])
    ax.set_xlabel("center coordinate y")
    title = "covered" if cert.covered else "not covered"
    ax.set_title(f"{title}, margin {cert.margin:.6g}")
    ax.legend(loc="center left", bbox_to_anchor=(1.0, 0.5), fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
