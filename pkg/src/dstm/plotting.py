"""BLER-vs-SNR figures rendered next to the CSV results."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .montecarlo import BlerPoint  # noqa: E402

_MARKERS = "osd^v<>ph*"

RC = {
    "font.size": 10,
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.alpha": 0.6,
    "legend.frameon": False,
    "lines.linewidth": 1.4,
    "lines.markersize": 5,
    "savefig.dpi": 150,
}


def plot_bler(curves: Sequence[tuple[str, Sequence[BlerPoint]]], path, title: str | None = None,
              target: float | None = None):
    """Overlay BLER curves on a log axis and save to ``path``.

    Points with zero errors are dropped (they have no place on a log
    axis).  Error bars are the 95% binomial half-widths.
    """
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        for i, (label, pts) in enumerate(curves):
            pts = [p for p in sorted(pts, key=lambda p: p.snr_db) if p.errors > 0]
            if not pts:
                continue
            x = [p.snr_db for p in pts]
            y = [p.bler for p in pts]
            lo = [min(p.ci95, p.bler * 0.999) for p in pts]
            hi = [p.ci95 for p in pts]
            ax.errorbar(x, y, yerr=[lo, hi], marker=_MARKERS[i % len(_MARKERS)],
                        capsize=2, label=label)
        if target is not None:
            ax.axhline(target, color="0.5", lw=0.8, ls="--")
        ax.set_yscale("log")
        ax.set_xlabel("SNR per receive antenna (dB)")
        ax.set_ylabel("block error rate")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
