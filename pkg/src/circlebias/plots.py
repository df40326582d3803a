"""Figure rendering for sweep outputs.

Sweep commands emit CSV as the primary machine-readable artifact; with
--plot a PNG rendering of the same curve is written next to it.  The Agg
backend keeps this headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_curve"]


def _as_float(ys):
    return np.array([np.nan if y is None else float(y) for y in ys])


def save_curve(path, xs, ys, xlabel, ylabel, title=None, ys2=None, labels=None):
    """Line plot of one or two series against xs, saved to `path`."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    l1 = labels[0] if labels else None
    ax.plot(np.asarray(xs, dtype=float), _as_float(ys), lw=1.2, label=l1)
    if ys2 is not None:
        ax.plot(np.asarray(xs, dtype=float), _as_float(ys2), lw=1.2, ls="--",
                label=labels[1] if labels and len(labels) > 1 else None)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if labels:
        ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
