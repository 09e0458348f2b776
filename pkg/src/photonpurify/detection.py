"""Detector models, click POVMs, conditional states and coincidences.

Detectors are parameterized by a per-window quantum efficiency, a
per-window dark-count probability and a flag for number resolution.
Dead time and gate rate are carried as metadata for rate bookkeeping
but do not enter the POVMs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ConfigurationError, DegenerateOutcomeError
from .fock import DensityOperator, make_basis, partial_trace

CLICK = "click"
NO_CLICK = "no_click"


@dataclass(frozen=True)
class DetectorModel:
    """Threshold (or number-resolving) single-photon detector."""

    efficiency: float = 1.0
    dark_prob_per_window: float = 0.0
    number_resolving: bool = False
    dead_time_s: float = 0.0
    gate_rate_hz: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ConfigurationError(f"efficiency {self.efficiency} outside [0, 1]")
        if not 0.0 <= self.dark_prob_per_window <= 1.0:
            raise ConfigurationError(
                f"dark_prob_per_window {self.dark_prob_per_window} outside [0, 1]"
            )
        if self.dead_time_s < 0 or self.gate_rate_hz < 0:
            raise ConfigurationError("dead time and gate rate must be >= 0")

    @classmethod
    def ideal(cls) -> "DetectorModel":
        """Unit efficiency, no dark counts, number resolving."""
        return cls(efficiency=1.0, dark_prob_per_window=0.0, number_resolving=True)

    def no_click_probability(self, n_photons: int) -> float:
        """Probability that ``n_photons`` present produce no click:
        every photon is missed and no dark count fires."""
        return (1.0 - self.dark_prob_per_window) * (1.0 - self.efficiency) ** n_photons

    def click_probability(self, n_photons: int) -> float:
        return 1.0 - self.no_click_probability(n_photons)

    def count_probability(self, registered: int, n_photons: int) -> float:
        """Probability of registering exactly ``registered`` counts from
        ``n_photons`` present (number-resolving detectors only).

        Detection is binomial at the quantum efficiency; at most one
        dark count per window adds to the register.
        """
        if not self.number_resolving:
            raise ConfigurationError(
                "exact-count outcomes require a number-resolving detector"
            )

        def binom(k: int) -> float:
            if k < 0 or k > n_photons:
                return 0.0
            return (
                comb(n_photons, k)
                * self.efficiency**k
                * (1.0 - self.efficiency) ** (n_photons - k)
            )

        d = self.dark_prob_per_window
        return (1.0 - d) * binom(registered) + d * binom(registered - 1)


def click_povm(detector: DetectorModel, max_photons: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal POVM elements (click, no-click) over photon numbers
    0..max_photons for a single mode.  The two vectors sum to one
    exactly."""
    n = np.arange(max_photons + 1)
    no_click = (1.0 - detector.dark_prob_per_window) * (1.0 - detector.efficiency) ** n
    return 1.0 - no_click, no_click


def number_resolving_povm(detector: DetectorModel, max_photons: int) -> list[np.ndarray]:
    """Diagonal POVM family {register k counts} for k = 0..max_photons+1.

    The last element absorbs the dark count on top of a full register so
    that the family is complete.
    """
    elements = []
    for k in range(max_photons + 2):
        elements.append(
            np.array(
                [detector.count_probability(k, n) for n in range(max_photons + 1)]
            )
        )
    return elements


def _outcome_weights(
    basis_levels: int, outcome, detector: DetectorModel
) -> np.ndarray:
    """Per-occupation probability vector for one detector outcome."""
    if outcome == CLICK:
        click, _ = click_povm(detector, basis_levels - 1)
        return click
    if outcome == NO_CLICK:
        _, no_click = click_povm(detector, basis_levels - 1)
        return no_click
    if isinstance(outcome, (int, np.integer)):
        if outcome < 0:
            raise ConfigurationError(f"negative count outcome {outcome}")
        return np.array(
            [
                detector.count_probability(int(outcome), n)
                for n in range(basis_levels)
            ]
        )
    raise ConfigurationError(
        f"outcome must be {CLICK!r}, {NO_CLICK!r} or an integer count, got {outcome!r}"
    )


@dataclass(frozen=True)
class ClickPattern:
    """Assignment of outcomes to a subset of modes.

    Outcomes are either the strings ``"click"`` / ``"no_click"`` or an
    integer for an exact registered count (number-resolving detectors).
    """

    outcomes: tuple[tuple[int, object], ...]

    def __init__(self, outcomes):
        if isinstance(outcomes, dict):
            items = tuple(sorted(outcomes.items()))
        else:
            items = tuple(sorted(tuple(outcomes)))
        object.__setattr__(self, "outcomes", items)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(mode for mode, _ in self.outcomes)

    def items(self):
        return self.outcomes


def pattern_probability(
    rho: DensityOperator,
    pattern: ClickPattern | dict,
    detectors: dict[int, DetectorModel] | None = None,
) -> float:
    """Probability of observing ``pattern`` on ``rho``."""
    weights = _pattern_weight_vector(rho.basis, pattern, detectors)
    return float(np.clip((rho.diagonal * weights).sum(), 0.0, 1.0))


def _pattern_weight_vector(basis, pattern, detectors) -> np.ndarray:
    if not isinstance(pattern, ClickPattern):
        pattern = ClickPattern(pattern)
    if not pattern.outcomes:
        raise ConfigurationError("pattern must assign at least one outcome")
    weights = np.ones(basis.dimension)
    for mode, outcome in pattern.items():
        basis._check_mode(mode)
        detector = DetectorModel.ideal() if detectors is None else detectors.get(mode)
        if detector is None:
            raise ConfigurationError(f"no detector model supplied for mode {mode}")
        per_level = _outcome_weights(basis.levels, outcome, detector)
        weights *= per_level[basis.mode_occupation(mode)]
    return weights


def condition_on_pattern(
    rho: DensityOperator,
    pattern: ClickPattern | dict,
    detectors: dict[int, DetectorModel] | None = None,
    min_probability: float = 1e-14,
) -> tuple[DensityOperator, float]:
    """Condition on a detection pattern and trace out the measured modes.

    Returns the normalized conditional state on the unmeasured modes
    (ascending original order) together with the pattern probability.
    Raises DegenerateOutcomeError when the pattern probability is below
    ``min_probability``, rather than returning a NaN-laden state.
    With ``detectors=None`` every measured mode uses an ideal
    number-resolving detector, which makes integer outcomes exact
    photon-number projections.
    """
    if not isinstance(pattern, ClickPattern):
        pattern = ClickPattern(pattern)
    basis = rho.basis
    measured = set(pattern.modes)
    keep = [m for m in range(basis.n_modes) if m not in measured]
    weights = _pattern_weight_vector(basis, pattern, detectors)
    probability = float((rho.diagonal * weights).sum())
    if probability < min_probability:
        raise DegenerateOutcomeError(
            f"pattern {tuple(pattern.items())} has probability "
            f"{probability:.3e} < {min_probability:.0e}"
        )
    if not keep:
        raise ConfigurationError(
            "pattern measures every mode; use pattern_probability instead"
        )
    root = np.sqrt(weights)
    conditioned = rho.matrix * np.outer(root, root)
    q = basis.levels
    M = basis.n_modes
    # Trace out measured modes of the (unnormalized) conditioned matrix,
    # then normalize.  Reuses the partial-trace contraction on a scaled
    # copy so DensityOperator validation sees a unit trace.
    scaled = DensityOperator(basis, conditioned / probability)
    reduced = partial_trace(scaled, keep_modes=keep)
    return reduced, probability


def coincidence_probability(
    rho: DensityOperator,
    modes: tuple[int, int],
    detectors: dict[int, DetectorModel] | None = None,
) -> float:
    """Probability that the detectors on both listed modes click."""
    i, j = modes
    pattern = ClickPattern({i: CLICK, j: CLICK})
    return pattern_probability(rho, pattern, detectors)


@dataclass(frozen=True)
class CoincidenceWindow:
    """Coincidence window used for accidental-rate bookkeeping."""

    tau_s: float = 800e-12

    def __post_init__(self):
        if self.tau_s <= 0:
            raise ConfigurationError("coincidence window must be positive")


def accidental_rate(singles_1_hz: float, singles_2_hz: float, window: CoincidenceWindow | float) -> float:
    """First-order accidental coincidence rate s1 * s2 * tau.

    ``window`` may be a CoincidenceWindow or a plain duration in seconds.
    """
    tau = window.tau_s if isinstance(window, CoincidenceWindow) else float(window)
    if singles_1_hz < 0 or singles_2_hz < 0 or tau < 0:
        raise ConfigurationError("rates and window must be >= 0")
    return singles_1_hz * singles_2_hz * tau
