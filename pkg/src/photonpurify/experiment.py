"""Monte Carlo model of the purification bench.

The experiment layer turns the exact density-operator machinery into
counted events: interference fringes measured point by point against an
applied phase, two-photon dip scans against a tunable mode overlap, and
the bookkeeping (accidental estimates, imperfection budget) needed to
interpret the counts.

Counting statistics are Poissonian per scan point, with an independent,
reproducible random stream per (scan, point) pair so that adding or
reordering scans never perturbs previously sampled values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detection import ClickPattern, CoincidenceWindow, DetectorModel, pattern_probability
from .errors import ConfigurationError
from .fock import make_basis, split_photon_state
from .optics import apply_circuit, BeamSplitter, gaussian_dephase, apply_phase
from .protocol import PurificationSetup, heralded_pair_state, single_photon_sector_fidelity
from .scans import FringeScan, HOMScan

# Dephasing width at which a pure split-photon state is degraded to
# fidelity 3/4: the off-diagonal term picks up exp(-sigma^2/2) = 1/2.
SIGMA_HALF_COHERENCE = math.sqrt(2.0 * math.log(2.0))

# Stream tags keeping every scan's per-point randomness disjoint.
SCAN_TAGS = {"pair1": 1, "pair2": 2, "purified": 3, "hom": 4}


def point_rng(seed: int, scan_tag: int, point_index: int) -> np.random.Generator:
    """Independent generator for one scan point.

    Streams are derived from (seed, scan tag, point index), so any point
    can be resampled in isolation and scans can run in any order.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(scan_tag, point_index))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class SourceModel:
    """Photon-pair source parameters.

    emission_prob is the probability per generation window that the
    resource needed by a scan (one pair, or one pair from each source
    for the purified scan) is present.  pair_rate_hz is the delivered
    pair rate used to convert dwell times into window counts.
    """

    emission_prob: float = 1e-3
    internal_overlap: float = 0.995
    pair_rate_hz: float = 1.3e6

    def __post_init__(self):
        if not 0.0 < self.emission_prob <= 1.0:
            raise ConfigurationError(f"emission_prob must be in (0, 1], got {self.emission_prob}")
        if not 0.0 <= self.internal_overlap <= 1.0:
            raise ConfigurationError(f"internal_overlap must be in [0, 1], got {self.internal_overlap}")
        if self.pair_rate_hz <= 0.0:
            raise ConfigurationError(f"pair_rate_hz must be positive, got {self.pair_rate_hz}")

    @property
    def window_rate_hz(self) -> float:
        """Generation windows per second implied by rate and emission probability."""
        return self.pair_rate_hz / self.emission_prob


def double_pair_penalty(emission_prob: float) -> float:
    """Dip-visibility penalty from double-pair emission.

    Accidental two-pair events contribute a coincidence floor
    p/(1+p) per accepted window, which caps the visibility of an
    otherwise perfect dip at 1/(1 + 2p/(1+p)); the penalty is
    2p/(1+3p).
    """
    if not 0.0 <= emission_prob < 1.0:
        raise ConfigurationError(f"emission_prob must be in [0, 1), got {emission_prob}")
    return 2.0 * emission_prob / (1.0 + 3.0 * emission_prob)


def overlap_for_visibility(target_visibility: float, emission_prob: float) -> float:
    """Mode overlap needed to hit a target dip visibility.

    Inverts V = overlap^2 / (1 + 2 p/(1+p)).  Raises if the target is
    out of reach even at unit overlap.
    """
    if not 0.0 < target_visibility <= 1.0:
        raise ConfigurationError(f"target_visibility must be in (0, 1], got {target_visibility}")
    floor = emission_prob / (1.0 + emission_prob)
    needed = target_visibility * (1.0 + 2.0 * floor)
    if needed > 1.0:
        raise ConfigurationError(
            f"visibility {target_visibility} unreachable at emission_prob {emission_prob}: "
            f"requires squared overlap {needed:.6f} > 1"
        )
    return math.sqrt(needed)


@dataclass(frozen=True)
class ImperfectionBudget:
    """Additive fidelity-cost ledger for the purified state.

    Each entry is the fidelity reduction attributed to one mechanism.
    The systematic coupler-ratio entry is sign-indefinite and is
    reported but not added to the applied total.
    """

    mode_overlap: float = 0.0025
    double_pair: float = 0.0005
    herald_dark: float = 0.0005
    phase_drift: float = 0.008
    coupler_ratio_systematic: float = 0.006

    def __post_init__(self):
        for name in ("mode_overlap", "double_pair", "herald_dark", "phase_drift"):
            value = getattr(self, name)
            if not 0.0 <= value < 0.5:
                raise ConfigurationError(f"budget entry {name} must be in [0, 0.5), got {value}")

    @property
    def total_fidelity_reduction(self) -> float:
        return self.mode_overlap + self.double_pair + self.herald_dark + self.phase_drift

    def sensitivity_table(self) -> list[tuple[str, float, bool]]:
        """Rows of (mechanism, fidelity cost, included in applied total)."""
        return [
            ("mode_overlap", self.mode_overlap, True),
            ("double_pair", self.double_pair, True),
            ("herald_dark", self.herald_dark, True),
            ("phase_drift", self.phase_drift, True),
            ("coupler_ratio_systematic", self.coupler_ratio_systematic, False),
        ]


def _default_phases() -> np.ndarray:
    return np.linspace(0.0, 8.0 * 2.0 * math.pi, 129)


@dataclass
class ExperimentConfig:
    """Everything needed to run the simulated bench end to end.

    Exposure per point comes from shots_per_point when set, otherwise
    from dwell_s at the source's generation-window rate.  The two noise
    generators act on the b-side mode of pair 1 and pair 2; points
    before noise_switch_index run with both generators off.
    """

    seed: int = 42
    shots_per_point: int | None = None
    dwell_s: float | None = 1.0
    scan_phases: np.ndarray = field(default_factory=_default_phases)
    noise_sigma_1: float = SIGMA_HALF_COHERENCE
    noise_sigma_2: float = SIGMA_HALF_COHERENCE
    noise_switch_index: int = 64
    subtract_accidentals: bool = True
    source: SourceModel = field(default_factory=SourceModel)
    budget: ImperfectionBudget | None = field(default_factory=ImperfectionBudget)
    setup: PurificationSetup = field(default_factory=PurificationSetup)
    herald_detector: DetectorModel | None = None
    scan_detector: DetectorModel = field(
        default_factory=lambda: DetectorModel(efficiency=1.0, dark_prob_per_window=0.0)
    )
    window: CoincidenceWindow = field(default_factory=CoincidenceWindow)
    hom_overlaps: np.ndarray | None = None

    def __post_init__(self):
        self.scan_phases = np.asarray(self.scan_phases, dtype=float)
        if self.scan_phases.ndim != 1 or self.scan_phases.size < 2:
            raise ConfigurationError("scan_phases must be a 1-d grid with at least 2 points")
        if self.shots_per_point is None and self.dwell_s is None:
            raise ConfigurationError("set shots_per_point or dwell_s")
        if self.shots_per_point is not None and self.shots_per_point < 1:
            raise ConfigurationError(f"shots_per_point must be >= 1, got {self.shots_per_point}")
        if self.dwell_s is not None and self.dwell_s <= 0.0:
            raise ConfigurationError(f"dwell_s must be positive, got {self.dwell_s}")
        for name in ("noise_sigma_1", "noise_sigma_2"):
            if getattr(self, name) < 0.0:
                raise ConfigurationError(f"{name} must be non-negative, got {getattr(self, name)}")
        if not 0 <= self.noise_switch_index <= self.scan_phases.size:
            raise ConfigurationError(
                f"noise_switch_index {self.noise_switch_index} outside [0, {self.scan_phases.size}]"
            )

    @property
    def resolved_shots(self) -> int:
        """Windows per scan point; an explicit shot count wins over dwell time."""
        if self.shots_per_point is not None:
            return int(self.shots_per_point)
        return max(1, round(self.dwell_s * self.source.window_rate_hz))


_FRINGE_KINDS = ("pair1", "pair2", "purified")


def _pair_state(sigma: float):
    """Split single photon on two modes, dephased on the second."""
    basis = make_basis(2, max_photons=2)
    rho = split_photon_state(basis, (0, 1)).density()
    if sigma > 0.0:
        rho = gaussian_dephase(rho, 1, sigma)
    return rho


def _purified_state(config: ExperimentConfig, sigma_1: float, sigma_2: float):
    """Heralded two-mode state and herald probability at given noise levels."""
    rho1 = _pair_state(sigma_1)
    rho2 = _pair_state(sigma_2)
    herald_detectors = None
    if config.herald_detector is not None:
        herald_detectors = {"alice": config.herald_detector, "bob": config.herald_detector}
    kept, p_herald = heralded_pair_state(rho1, rho2, config.setup, herald_detectors=herald_detectors)
    if config.budget is not None:
        kept = _apply_budget(kept, config.budget)
    return kept, p_herald


def _apply_budget(rho, budget: ImperfectionBudget):
    """Damp coherences so the sector fidelity drops by the budget total.

    The budget total dF maps to a coherence factor kappa = 1 - 2 dF / V
    where V is the current single-photon interference visibility; the
    damping is realized as an extra dephasing channel on one kept mode.
    """
    df = budget.total_fidelity_reduction
    if df <= 0.0:
        return rho
    fid, _ = single_photon_sector_fidelity(rho)
    visibility = 2.0 * fid - 1.0
    if visibility <= 2.0 * df:
        sigma = math.inf
    else:
        kappa = 1.0 - 2.0 * df / visibility
        sigma = math.sqrt(-2.0 * math.log(kappa))
    return gaussian_dephase(rho, 0, sigma)


def _click_probability(rho, phase: float, detector: DetectorModel, coupler) -> float:
    """Single-detector fringe probability after phase + 50/50 recombination."""
    shifted = apply_phase(rho, 0, phase)
    out = apply_circuit(shifted, [coupler])
    return pattern_probability(out, ClickPattern({0: "click"}), {0: detector})


def _regime_quantities(config: ExperimentConfig, kind: str, noise_on: bool) -> dict:
    """State and per-window probabilities for one scan at one noise setting."""
    sigma_1 = config.noise_sigma_1 if noise_on else 0.0
    sigma_2 = config.noise_sigma_2 if noise_on else 0.0
    if kind == "purified":
        state, herald_factor = _purified_state(config, sigma_1, sigma_2)
    else:
        state = _pair_state(sigma_1 if kind == "pair1" else sigma_2)
        if config.herald_detector is None:
            herald_factor = 1.0
        else:
            herald_factor = config.herald_detector.click_probability(1)
    coupler = BeamSplitter(modes=(0, 1), transmittance=0.5)

    p_emit = config.source.emission_prob
    det = config.scan_detector
    # Phase-averaged click probability: kill the phase-bearing coherences.
    averaged = gaussian_dephase(state, 0, math.inf)
    p_click_avg = pattern_probability(averaged, ClickPattern({0: "click"}), {0: det})

    # Herald-arm and scan-arm singles probabilities per window, used for
    # the accidental-coincidence floor mu_acc = shots * q_h * q_s.
    if config.herald_detector is None:
        q_dark_h = 0.0
    elif kind == "purified":
        d = config.herald_detector
        q_dark_h = d.click_probability(0) * d.no_click_probability(0)
    else:
        q_dark_h = config.herald_detector.click_probability(0)
    q_herald = p_emit * herald_factor + (1.0 - p_emit) * q_dark_h
    if kind == "purified":
        q_scan = p_emit * herald_factor * p_click_avg
    else:
        q_scan = p_emit * p_click_avg
    q_scan += (1.0 - p_emit) * det.click_probability(0)

    return {
        "state": state,
        "herald_factor": herald_factor,
        "coupler": coupler,
        "q_herald": q_herald,
        "q_scan": q_scan,
    }


def fringe_scan(kind: str, config: ExperimentConfig) -> FringeScan:
    """Sample one interference fringe, point by point.

    kind selects the scanned state: "pair1" and "pair2" scan the two
    source pairs individually, "purified" scans the heralded output.
    Points before noise_switch_index run with the phase-noise
    generators off (regime flag 0), the rest with them on (flag 1).
    Expected counts per point are shots * emission probability * herald
    factor * fringe click probability, plus the accidental floor.
    """
    if kind not in _FRINGE_KINDS:
        raise ConfigurationError(f"unknown fringe scan kind {kind!r}; expected one of {_FRINGE_KINDS}")
    shots = config.resolved_shots
    tag = SCAN_TAGS[kind]
    p_emit = config.source.emission_prob

    flags = np.zeros(config.scan_phases.size, dtype=int)
    flags[config.noise_switch_index :] = 1
    regimes = {
        int(flag): _regime_quantities(config, kind, noise_on=bool(flag))
        for flag in np.unique(flags)
    }

    counts = np.zeros(config.scan_phases.size)
    accidentals = np.zeros(config.scan_phases.size)
    for i, phase in enumerate(config.scan_phases):
        reg = regimes[int(flags[i])]
        p_click = _click_probability(reg["state"], phase, config.scan_detector, reg["coupler"])
        mu_signal = shots * p_emit * reg["herald_factor"] * p_click
        mu_acc = shots * reg["q_herald"] * reg["q_scan"]
        counts[i] = point_rng(config.seed, tag, i).poisson(mu_signal + mu_acc)
        accidentals[i] = mu_acc

    meta = {
        "kind": kind,
        "seed": config.seed,
        "shots_per_point": shots,
        "emission_prob": p_emit,
        "noise_sigma_1": config.noise_sigma_1,
        "noise_sigma_2": config.noise_sigma_2,
        "noise_switch_index": config.noise_switch_index,
        "herald_factor_on": regimes[max(regimes)]["herald_factor"],
        "budget_applied": kind == "purified" and config.budget is not None,
    }
    return FringeScan(
        phases=config.scan_phases.copy(),
        counts=counts,
        accidentals=accidentals,
        regime_flags=flags,
        meta=meta,
    )


def hom_scan(
    source: SourceModel | ExperimentConfig,
    overlaps: np.ndarray | None = None,
    shots: int | None = None,
    seed: int | None = None,
) -> HOMScan:
    """Sample a two-photon interference dip against mode overlap.

    Accepts either a SourceModel (with explicit shots/seed) or a full
    ExperimentConfig supplying them.  The per-window coincidence
    probability is (1 - overlap^2)/2 plus a double-pair floor p/(1+p);
    the dip visibility is estimated from the two extreme grid points
    and flagged when the reference statistics are too small to trust.
    """
    if isinstance(source, ExperimentConfig):
        config = source
        source = config.source
        if overlaps is None:
            overlaps = config.hom_overlaps
        if shots is None:
            shots = config.resolved_shots
        if seed is None:
            seed = config.seed
    if shots is None:
        shots = 1_000_000
    if seed is None:
        seed = 42
    if shots < 1:
        raise ConfigurationError(f"shots must be >= 1, got {shots}")
    if overlaps is None:
        overlaps = np.linspace(0.0, 1.0, 41)
    overlaps = np.asarray(overlaps, dtype=float)
    if overlaps.ndim != 1 or overlaps.size < 2:
        raise ConfigurationError("overlap grid must be 1-d with at least 2 points")
    if np.any(overlaps < 0.0) or np.any(overlaps > 1.0):
        raise ConfigurationError("overlaps must lie in [0, 1]")

    p = source.emission_prob
    floor = p / (1.0 + p)
    window_prob = (1.0 - overlaps**2) / 2.0 + floor
    expected = shots * p * window_prob
    counts = np.array(
        [point_rng(seed, SCAN_TAGS["hom"], i).poisson(mu) for i, mu in enumerate(expected)],
        dtype=float,
    )

    i_max = int(np.argmin(overlaps))
    i_min = int(np.argmax(overlaps))
    c_max = float(counts[i_max])
    c_min = float(counts[i_min])
    visibility = None if c_max <= 0.0 else (c_max - c_min) / c_max
    low_statistics = expected[i_max] < 100.0

    meta = {
        "kind": "hom",
        "seed": seed,
        "shots_per_point": shots,
        "emission_prob": p,
        "double_pair_floor": floor,
        "model_visibility": float(overlaps[i_min] ** 2 / (1.0 + 2.0 * floor)),
    }
    return HOMScan(
        overlaps=overlaps.copy(),
        counts=counts,
        expected=expected,
        max_counts=c_max,
        min_counts=c_min,
        visibility=visibility,
        low_statistics=low_statistics,
        meta=meta,
    )


@dataclass
class ExperimentDataset:
    """Output bundle of a full simulated run.

    estimates holds the noise-on fidelity distributions per scan;
    baseline_estimates the noise-off ones (None for a scan without a
    noise-off segment).
    """

    fringes: dict
    hom: HOMScan
    estimates: dict
    baseline_estimates: dict
    summary: dict


def full_experiment(config: ExperimentConfig | None = None) -> ExperimentDataset:
    """Run the complete measurement sequence and analyze it.

    Scans both source pairs and the heralded output (noise generators
    off until the configured switch point, on afterwards), runs a dip
    scan, and pushes each fringe regime through the sliding-window
    fidelity analysis.
    """
    from . import analysis

    if config is None:
        config = ExperimentConfig()
    fringes = {kind: fringe_scan(kind, config) for kind in _FRINGE_KINDS}
    hom = hom_scan(config)

    estimates = {}
    baselines = {}
    for kind, scan in fringes.items():
        on = scan if scan.transition_index is None else scan.regime_slice(1)
        estimates[kind] = analysis.sliding_fidelity_distribution(
            on, subtract=config.subtract_accidentals
        )
        if scan.transition_index is None:
            baselines[kind] = None
        else:
            baselines[kind] = analysis.sliding_fidelity_distribution(
                scan.regime_slice(0), subtract=config.subtract_accidentals
            )

    _, p_herald = _purified_state(config, config.noise_sigma_1, config.noise_sigma_2)
    summary = {
        "seed": config.seed,
        "shots_per_point": config.resolved_shots,
        "herald_probability": p_herald,
        "hom_visibility": hom.visibility,
        "budget": None if config.budget is None else config.budget.sensitivity_table(),
        "fidelity_means": {k: est.mean for k, est in estimates.items()},
        "fidelity_sigmas": {k: est.sigma for k, est in estimates.items()},
        "fidelity_medians": {k: est.median for k, est in estimates.items()},
        "baseline_means": {
            k: (None if est is None else est.mean) for k, est in baselines.items()
        },
    }
    return ExperimentDataset(
        fringes=fringes,
        hom=hom,
        estimates=estimates,
        baseline_estimates=baselines,
        summary=summary,
    )
