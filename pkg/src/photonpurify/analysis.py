"""Fringe fitting and fidelity estimation.

The analysis chain is deliberately dumb about where the counts came
from: it takes scan records, optionally removes the accidental floor,
fits sinusoids with Poisson weights, and converts visibilities into
fidelities.  Statistical spread is characterized by refitting many
overlapping windows of the scan and reporting the distribution of the
per-window results.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitFailureError, InsufficientDataError
from .scans import FringeScan

MAX_REDUCED_CHISQ = 5.0
WINDOW_PERIODS = 2.0
STEP_FRACTION = 0.25
MIN_WINDOW_POINTS = 12
MIN_VALID_WINDOWS = 5


def subtract_accidentals(scan: FringeScan, rate: float | np.ndarray | None = None) -> FringeScan:
    """Remove the expected accidental floor from a scan's counts.

    rate is the expected accidental count per point (scalar or
    per-point array); by default the scan's own accidentals column is
    used.  Counts are floored at zero, the accidentals column is
    preserved so Poisson weights can still be reconstructed from raw
    totals, and the metadata records that subtraction happened.
    """
    if rate is None:
        if scan.meta.get("accidentals_subtracted"):
            return scan
        expected = scan.accidentals
    else:
        expected = np.broadcast_to(np.asarray(rate, dtype=float), scan.counts.shape)
    return FringeScan(
        phases=scan.phases.copy(),
        counts=np.maximum(scan.counts - expected, 0.0),
        accidentals=scan.accidentals.copy(),
        regime_flags=scan.regime_flags.copy(),
        meta=dict(scan.meta, accidentals_subtracted=True),
    )


def _count_sigma(counts: np.ndarray, accidentals: np.ndarray, subtracted: bool) -> np.ndarray:
    raw = counts + accidentals if subtracted else counts
    return np.sqrt(np.maximum(raw, 1.0))


@dataclass(frozen=True)
class SinusoidFit:
    """Least-squares fringe parameters: counts = offset*(1 + V*cos(2*pi*x/period + phase))."""

    offset: float
    visibility: float
    period: float
    phase: float
    reduced_chisq: float
    rms_residual: float
    n_points: int

    @property
    def amplitude(self) -> float:
        """Absolute fringe amplitude, offset * visibility."""
        return self.offset * self.visibility

    def model(self, phases: np.ndarray) -> np.ndarray:
        phases = np.asarray(phases, dtype=float)
        return self.offset * (
            1.0 + self.visibility * np.cos(2.0 * math.pi * phases / self.period + self.phase)
        )


def _fft_initial_guess(phases: np.ndarray, counts: np.ndarray) -> tuple[float, float]:
    """(period, phase) estimate from the dominant FFT bin, if the grid is uniform."""
    diffs = np.diff(phases)
    if diffs.size == 0 or not np.allclose(diffs, diffs[0], rtol=1e-6, atol=1e-12):
        return 2.0 * math.pi, 0.0
    spacing = float(diffs[0])
    if spacing <= 0.0:
        return 2.0 * math.pi, 0.0
    spectrum = np.fft.rfft(counts - counts.mean())
    if spectrum.size < 2:
        return 2.0 * math.pi, 0.0
    k = 1 + int(np.argmax(np.abs(spectrum[1:])))
    freq = k / (counts.size * spacing)
    period = 1.0 / freq
    phase = float(np.angle(spectrum[k])) - 2.0 * math.pi * freq * float(phases[0])
    phase = (phase + math.pi) % (2.0 * math.pi) - math.pi
    return period, phase


def fit_sinusoid(
    phases: np.ndarray,
    counts: np.ndarray,
    sigma: np.ndarray | None = None,
    period: float | None = None,
) -> SinusoidFit:
    """Weighted sinusoid fit of a fringe segment.

    With period=None the period is a free parameter seeded from the
    count spectrum; passing a period pins it.  A perfectly flat segment
    fits successfully with zero visibility.  Raises FitFailureError when
    the optimizer fails or the reduced chi-square exceeds
    MAX_REDUCED_CHISQ.
    """
    phases = np.asarray(phases, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if phases.shape != counts.shape or phases.ndim != 1:
        raise FitFailureError("phases and counts must be matching 1-d arrays")
    free_period = period is None
    n_params = 4 if free_period else 3
    if phases.size <= n_params + 1:
        raise FitFailureError(f"{phases.size} points cannot constrain {n_params} parameters")
    if period is not None and period <= 0.0:
        raise FitFailureError(f"period must be positive, got {period}")
    if np.ptp(counts) == 0.0:
        # A flat segment carries no fringe: amplitude zero, offset at
        # the common level, period meaningless but kept well defined.
        return SinusoidFit(
            offset=float(counts[0]),
            visibility=0.0,
            period=float(period) if period is not None else 2.0 * math.pi,
            phase=0.0,
            reduced_chisq=0.0,
            rms_residual=0.0,
            n_points=int(phases.size),
        )
    if sigma is None:
        sigma = np.sqrt(np.maximum(counts, 1.0))

    offset0 = max(float(counts.mean()), 1e-9)
    amp0 = 0.5 * float(np.ptp(counts))
    vis0 = min(max(amp0 / offset0, 1e-3), 1.0)
    period0, phase0 = _fft_initial_guess(phases, counts)
    span = float(phases[-1] - phases[0]) if phases[-1] > phases[0] else 2.0 * math.pi

    if free_period:
        p0 = [offset0, vis0, period0, phase0]
        lower = [1e-12, 0.0, span * 1e-3, -2.0 * math.pi]
        upper = [np.inf, 1.0, span * 4.0, 2.0 * math.pi]

        def model(x, offset, vis, per, ph):
            return offset * (1.0 + vis * np.cos(2.0 * math.pi * x / per + ph))

    else:
        fixed = float(period)
        p0 = [offset0, vis0, phase0]
        lower = [1e-12, 0.0, -2.0 * math.pi]
        upper = [np.inf, 1.0, 2.0 * math.pi]

        def model(x, offset, vis, ph):
            return offset * (1.0 + vis * np.cos(2.0 * math.pi * x / fixed + ph))

    p0 = np.clip(p0, lower, upper)
    try:
        popt, _ = curve_fit(
            model,
            phases,
            counts,
            p0=p0,
            sigma=sigma,
            absolute_sigma=True,
            bounds=(lower, upper),
            method="trf",
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitFailureError(f"sinusoid fit did not converge: {exc}") from exc

    predicted = model(phases, *popt)
    residuals = (predicted - counts) / sigma
    dof = phases.size - n_params
    reduced = float(residuals @ residuals) / dof
    if reduced > MAX_REDUCED_CHISQ:
        raise FitFailureError(
            f"reduced chi-square {reduced:.2f} exceeds {MAX_REDUCED_CHISQ}"
        )
    if free_period:
        offset, vis, per, ph = popt
    else:
        offset, vis, ph = popt
        per = float(period)
    return SinusoidFit(
        offset=float(offset),
        visibility=float(vis),
        period=float(per),
        phase=float(ph),
        reduced_chisq=reduced,
        rms_residual=float(np.sqrt(np.mean((predicted - counts) ** 2))),
        n_points=int(phases.size),
    )


def fidelity_from_visibility(visibility: float) -> float:
    """Map interference visibility to state fidelity, F = (1 + V) / 2."""
    if not -1.0 <= visibility <= 1.0:
        raise FitFailureError(f"visibility must be in [-1, 1], got {visibility}")
    return 0.5 * (1.0 + visibility)


@dataclass(frozen=True)
class FidelityEstimate:
    """Distribution of per-window fidelity fits over one scan."""

    fidelities: np.ndarray
    visibilities: np.ndarray
    window_starts: np.ndarray
    period: float
    n_windows: int
    n_discarded: int

    @property
    def median(self) -> float:
        return float(np.median(self.fidelities))

    @property
    def mean(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def sigma(self) -> float:
        """Sample standard deviation of the per-window fidelities."""
        if self.fidelities.size < 2:
            return 0.0
        return float(np.std(self.fidelities, ddof=1))

    @property
    def gaussian_overlay(self) -> tuple[float, float]:
        """(mean, sigma) of the normal curve matching the sample moments."""
        return self.mean, self.sigma

    @property
    def interval_95(self) -> tuple[float, float]:
        lo, hi = np.percentile(self.fidelities, [2.5, 97.5])
        return float(lo), float(hi)

    def histogram(self, n_bins: int = 12) -> list[tuple[float, int]]:
        """(bin center, count) rows over the fitted fidelities."""
        hist, edges = np.histogram(self.fidelities, bins=n_bins)
        centers = 0.5 * (edges[:-1] + edges[1:])
        return [(float(c), int(h)) for c, h in zip(centers, hist)]

    def to_dict(self) -> dict:
        """JSON-ready summary of the distribution."""
        return {
            "mean": self.mean,
            "sigma": self.sigma,
            "median": self.median,
            "interval_95": list(self.interval_95),
            "period": self.period,
            "n_windows": self.n_windows,
            "n_discarded": self.n_discarded,
            "gaussian_overlay": {"mean": self.mean, "sigma": self.sigma},
            "fidelities": [float(f) for f in self.fidelities],
            "visibilities": [float(v) for v in self.visibilities],
        }


def write_histogram_csv(estimate: FidelityEstimate, path, n_bins: int = 12) -> Path:
    """Write a plot-ready fidelity histogram with its Gaussian overlay.

    Columns: bin_center, count, gaussian, where gaussian is the normal
    curve with the sample mean and sigma scaled to the histogram area.
    """
    path = Path(path)
    hist, edges = np.histogram(estimate.fidelities, bins=n_bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = float(edges[1] - edges[0]) if edges.size > 1 else 1.0
    mean, sigma = estimate.gaussian_overlay
    if sigma > 0.0:
        overlay = (
            estimate.fidelities.size
            * width
            / (sigma * math.sqrt(2.0 * math.pi))
            * np.exp(-0.5 * ((centers - mean) / sigma) ** 2)
        )
    else:
        overlay = np.zeros_like(centers)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_center", "count", "gaussian"])
        for c, h, g in zip(centers, hist, overlay):
            writer.writerow([repr(float(c)), int(h), repr(float(g))])
    return path


def sliding_fidelity_distribution(
    scan: FringeScan,
    window_periods: float = WINDOW_PERIODS,
    step_fraction: float = STEP_FRACTION,
    min_points: int = MIN_WINDOW_POINTS,
    min_windows: int = MIN_VALID_WINDOWS,
    subtract: bool = True,
) -> FidelityEstimate:
    """Fidelity distribution from overlapping free-period window fits.

    A global free-period fit sets the window geometry; windows of
    window_periods periods then slide across the scan in steps of
    step_fraction of a period, each refit with the period left free so
    slow drifts show up in the spread.  Windows with too few points or
    failing fits are discarded; fewer than min_windows survivors raises
    InsufficientDataError.
    """
    if subtract:
        scan = subtract_accidentals(scan)
        sigma_all = _count_sigma(scan.counts, scan.accidentals, subtracted=True)
    else:
        sigma_all = _count_sigma(scan.counts, scan.accidentals, subtracted=False)
    try:
        global_fit = fit_sinusoid(scan.phases, scan.counts, sigma=sigma_all)
    except FitFailureError as exc:
        raise InsufficientDataError(f"global fringe fit failed: {exc}") from exc
    period = global_fit.period

    width = window_periods * period
    step = step_fraction * period
    start = float(scan.phases[0])
    stop = float(scan.phases[-1])
    if stop - start < width:
        raise InsufficientDataError(
            f"scan spans {(stop - start) / period:.2f} periods; "
            f"need at least {window_periods}"
        )

    visibilities = []
    starts = []
    n_discarded = 0
    left = start
    while left + width <= stop + 1e-9:
        mask = (scan.phases >= left - 1e-12) & (scan.phases <= left + width + 1e-12)
        left += step
        if int(mask.sum()) < min_points:
            n_discarded += 1
            continue
        try:
            fit = fit_sinusoid(
                scan.phases[mask],
                scan.counts[mask],
                sigma=sigma_all[mask],
            )
        except FitFailureError:
            n_discarded += 1
            continue
        visibilities.append(fit.visibility)
        starts.append(left - step)

    if len(visibilities) < min_windows:
        raise InsufficientDataError(
            f"only {len(visibilities)} valid windows (need {min_windows}); "
            f"{n_discarded} discarded"
        )
    visibilities = np.array(visibilities)
    fidelities = 0.5 * (1.0 + visibilities)
    return FidelityEstimate(
        fidelities=fidelities,
        visibilities=visibilities,
        window_starts=np.array(starts),
        period=period,
        n_windows=int(visibilities.size),
        n_discarded=n_discarded,
    )
