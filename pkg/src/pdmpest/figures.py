"""Figure rendering for density estimates.

Uses the object-oriented matplotlib API directly so no global pyplot state
is touched; safe to call from headless processes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .estimate import DensityEstimate


def render_estimate_figure(estimate: DensityEstimate, path: str | Path,
                           truth: np.ndarray | None = None,
                           title: str | None = None) -> None:
    """Plot the estimate (solid) and, when given, the exact density (dashed)."""
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot(1, 1, 1)
    meta = estimate.meta
    ax.plot(estimate.grid, estimate.values, color="C0",
            label=f"estimate (n={meta.n_transitions})")
    if truth is not None:
        ax.plot(estimate.grid, np.asarray(truth, dtype=float), color="C1",
                linestyle="--", label="exact")
    ax.set_xlabel("sojourn time")
    ax.set_ylabel("conditional density")
    if title is None:
        title = f"inter-jump time density from {meta.source_label}"
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.savefig(Path(path), dpi=150, bbox_inches="tight")
