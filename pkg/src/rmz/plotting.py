"""Figure rendering for the experiment suites.

Figures are written straight to files with the Agg backend; nothing here
opens a window.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_energy", "plot_coefficients"]

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.4,
    "figure.figsize": (5.5, 3.8),
}


def _finish(fig, ax, path):
    ax.grid(True, which="both", alpha=0.3, lw=0.5)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_energy(curves, path, title="", logy=True, markers=None):
    """Resolved energy against time.

    ``curves`` maps a legend label to ``(t, energy)``.  Labels listed in
    ``markers`` are drawn as points (used for the exact reference).
    """
    markers = set(markers or ())
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, (t, e) in curves.items():
            t = np.asarray(t, dtype=float)
            e = np.asarray(e, dtype=float)
            if logy:
                keep = e > 0
                t, e = t[keep], e[keep]
            if label in markers:
                ax.plot(t, e, "ko", ms=2.5, label=label)
            else:
                ax.plot(t, e, label=label)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("resolved energy")
        if title:
            ax.set_title(title)
        return _finish(fig, ax, path)


def plot_coefficients(series, path, slope=None, title=""):
    """First-order coefficient against scale ratio.

    ``series`` maps a label to ``(ratio, coefficient)``; ``slope`` adds the
    fitted line through the origin.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for (label, (r, a)), m in zip(series.items(), "os^dv"):
            ax.plot(r, a, m, ms=6, mfc="none", label=label)
        if slope is not None:
            rmax = max(max(r, default=0.0) for r, _ in series.values()) or 1.0
            x = np.linspace(0.0, 1.05 * rmax, 50)
            ax.plot(x, slope * x, "k--", lw=1, label=f"fit, slope {slope:.3f}")
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
        ax.set_xlabel("scale ratio")
        ax.set_ylabel("first-order coefficient")
        if title:
            ax.set_title(title)
        return _finish(fig, ax, path)
