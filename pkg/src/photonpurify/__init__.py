"""photonpurify: simulate and analyze heralded purification of
single-photon path entanglement with linear optics.

The package is organized in layers:

* :mod:`photonpurify.fock` - truncated Fock-space linear algebra
* :mod:`photonpurify.optics` - beam splitters, phase shifters, dephasing, loss
* :mod:`photonpurify.detection` - threshold / number-resolving detector models
* :mod:`photonpurify.protocol` - the purification protocol and repeater maps
* :mod:`photonpurify.experiment` - Monte Carlo fringe and dip campaigns
* :mod:`photonpurify.analysis` - fringe fitting and fidelity statistics
* :mod:`photonpurify.scans` - scan records and their CSV round trip
* :mod:`photonpurify.config` - versioned JSON run configuration
* :mod:`photonpurify.report` - figure rendering for scan records
* :mod:`photonpurify.cli` - command-line entry point
"""

from .errors import (
    BasisSizeError,
    ConfigurationError,
    DegenerateOutcomeError,
    FitFailureError,
    InsufficientDataError,
    PhotonPurifyError,
    TruncationOverflowError,
)
from .fock import (
    DensityOperator,
    FockBasis,
    FockUnitary,
    PureState,
    annihilation_operator,
    fock_state,
    lift_mode_unitary,
    make_basis,
    overlap_fidelity,
    partial_trace,
    split_photon_state,
    tensor,
    vacuum_state,
)
from .optics import (
    BeamSplitter,
    GaussianDephaser,
    LossChannel,
    OpticalCircuit,
    PhaseShifter,
    apply_circuit,
    apply_phase,
    bs_matrix,
    circuit_from_config,
    circuit_to_config,
    gaussian_dephase,
    loss,
)
from .detection import (
    ClickPattern,
    CoincidenceWindow,
    DetectorModel,
    accidental_rate,
    click_povm,
    coincidence_probability,
    condition_on_pattern,
    number_resolving_povm,
    pattern_probability,
)
from .protocol import (
    PROTOCOL_TRANSMITTANCE,
    EntangledPairSpec,
    PurificationOutcome,
    PurificationSetup,
    RepeaterScenario,
    RepeaterTrajectory,
    TransmittanceSweep,
    heralded_pair_state,
    iterate_purification,
    make_entangled_pair,
    purified_fidelity,
    repeater_trajectory,
    simulate_purification,
    single_photon_sector_fidelity,
    success_probability,
    sweep_transmittance,
)
from .scans import FringeScan, HOMScan
from .experiment import (
    SCAN_TAGS,
    SIGMA_HALF_COHERENCE,
    ExperimentConfig,
    ExperimentDataset,
    ImperfectionBudget,
    SourceModel,
    double_pair_penalty,
    fringe_scan,
    full_experiment,
    hom_scan,
    overlap_for_visibility,
    point_rng,
)
from .analysis import (
    FidelityEstimate,
    SinusoidFit,
    fidelity_from_visibility,
    fit_sinusoid,
    sliding_fidelity_distribution,
    subtract_accidentals,
    write_histogram_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSizeError",
    "BeamSplitter",
    "ClickPattern",
    "CoincidenceWindow",
    "ConfigurationError",
    "DegenerateOutcomeError",
    "DensityOperator",
    "DetectorModel",
    "EntangledPairSpec",
    "ExperimentConfig",
    "ExperimentDataset",
    "FidelityEstimate",
    "FitFailureError",
    "FockBasis",
    "FockUnitary",
    "FringeScan",
    "GaussianDephaser",
    "HOMScan",
    "ImperfectionBudget",
    "InsufficientDataError",
    "LossChannel",
    "OpticalCircuit",
    "PROTOCOL_TRANSMITTANCE",
    "PhaseShifter",
    "PhotonPurifyError",
    "PureState",
    "PurificationOutcome",
    "PurificationSetup",
    "RepeaterScenario",
    "RepeaterTrajectory",
    "SCAN_TAGS",
    "SIGMA_HALF_COHERENCE",
    "SinusoidFit",
    "SourceModel",
    "TransmittanceSweep",
    "TruncationOverflowError",
    "accidental_rate",
    "annihilation_operator",
    "apply_circuit",
    "apply_phase",
    "bs_matrix",
    "circuit_from_config",
    "circuit_to_config",
    "click_povm",
    "coincidence_probability",
    "condition_on_pattern",
    "loss",
    "double_pair_penalty",
    "fidelity_from_visibility",
    "fit_sinusoid",
    "fock_state",
    "fringe_scan",
    "full_experiment",
    "gaussian_dephase",
    "heralded_pair_state",
    "hom_scan",
    "iterate_purification",
    "lift_mode_unitary",
    "make_basis",
    "make_entangled_pair",
    "number_resolving_povm",
    "overlap_fidelity",
    "overlap_for_visibility",
    "partial_trace",
    "pattern_probability",
    "point_rng",
    "purified_fidelity",
    "repeater_trajectory",
    "simulate_purification",
    "single_photon_sector_fidelity",
    "sliding_fidelity_distribution",
    "split_photon_state",
    "subtract_accidentals",
    "success_probability",
    "sweep_transmittance",
    "tensor",
    "vacuum_state",
    "write_histogram_csv",
    "__version__",
]
