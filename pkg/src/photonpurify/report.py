"""Figure rendering for scan and sweep results.

Kept separate from the computation modules so matplotlib is only
imported when figures are actually requested.  All renderers write PNG
files and return the written path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import FidelityEstimate, SinusoidFit
from .scans import FringeScan, HOMScan


def render_fringe(scan: FringeScan, path, fit: SinusoidFit | None = None) -> Path:
    """Counts vs. phase, with regime shading and an optional fit curve."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for flag, color, label in ((0, "tab:gray", "noise off"), (1, "tab:blue", "noise on")):
        mask = scan.regime_flags == flag
        if mask.any():
            ax.plot(scan.phases[mask], scan.counts[mask], ".", ms=4, color=color, label=label)
    if np.any(scan.accidentals > 0):
        ax.plot(scan.phases, scan.accidentals, "--", lw=1, color="tab:red", label="accidental floor")
    if fit is not None:
        grid = np.linspace(scan.phases[0], scan.phases[-1], 600)
        ax.plot(grid, fit.model(grid), "-", lw=1, color="black",
                label=f"fit V={fit.visibility:.3f}")
    ax.set_xlabel("applied phase (rad)")
    ax.set_ylabel("counts per point")
    ax.set_title(scan.meta.get("kind", "fringe scan"))
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_hom(scan: HOMScan, path) -> Path:
    """Coincidences vs. mode overlap with the expected-dip curve."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(scan.overlaps, scan.counts, "o", ms=4, color="tab:blue", label="sampled")
    ax.plot(scan.overlaps, scan.expected, "-", lw=1, color="black", label="expected")
    if scan.visibility is not None:
        ax.annotate(f"dip visibility {scan.visibility:.4f}",
                    xy=(0.05, 0.1), xycoords="axes fraction", fontsize=9)
    ax.set_xlabel("mode overlap")
    ax.set_ylabel("coincidences per point")
    ax.set_title("two-photon interference dip")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep(transmittances, fidelities, success_probabilities, path) -> Path:
    """Output fidelity and success probability across coupler transmittance."""
    path = Path(path)
    transmittances = np.asarray(transmittances, dtype=float)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(transmittances, fidelities, "-", color="tab:blue", label="fidelity")
    ax.set_xlabel("coupler transmittance")
    ax.set_ylabel("output fidelity", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(transmittances, success_probabilities, "--", color="tab:orange", label="success probability")
    ax2.set_ylabel("success probability", color="tab:orange")
    best = int(np.argmax(fidelities))
    ax.axvline(transmittances[best], color="tab:gray", lw=0.8)
    ax.set_title("transmittance sweep")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_fidelity_distribution(estimate: FidelityEstimate, path, n_bins: int = 12) -> Path:
    """Histogram of per-window fidelity fits with median and 95% interval."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.hist(estimate.fidelities, bins=n_bins, color="tab:blue", alpha=0.75)
    lo, hi = estimate.interval_95
    ax.axvline(estimate.median, color="black", lw=1.2, label=f"median {estimate.median:.4f}")
    ax.axvline(lo, color="tab:gray", lw=0.8, ls="--", label="95% interval")
    ax.axvline(hi, color="tab:gray", lw=0.8, ls="--")
    ax.set_xlabel("fidelity per window")
    ax.set_ylabel("windows")
    ax.set_title(f"{estimate.n_windows} windows, {estimate.n_discarded} discarded")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
