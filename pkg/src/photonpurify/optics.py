"""Linear-optical elements and channels on the truncated Fock register.

Beam splitter convention (used everywhere in this package): the 2x2 mode
matrix of a splitter with intensity transmittance T is symmetric,

    [[sqrt(T),        i*sqrt(1-T)],
     [i*sqrt(1-T),    sqrt(T)    ]]

i.e. transmitted amplitudes are real and both reflections pick up +i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .fock import (
    DensityOperator,
    FockBasis,
    fock_state,
    lift_mode_unitary,
    make_basis,
    partial_trace,
    tensor,
)


def bs_matrix(transmittance: float) -> np.ndarray:
    """2x2 mode matrix of a beam splitter with the given intensity
    transmittance, in the package-wide symmetric convention."""
    if not 0.0 <= transmittance <= 1.0:
        raise ConfigurationError(f"transmittance {transmittance} outside [0, 1]")
    t = np.sqrt(transmittance)
    r = np.sqrt(1.0 - transmittance)
    return np.array([[t, 1j * r], [1j * r, t]], dtype=complex)


@dataclass(frozen=True)
class BeamSplitter:
    """Two-mode coupler with intensity transmittance ``transmittance``."""

    modes: tuple[int, int]
    transmittance: float

    def __post_init__(self):
        if not 0.0 <= self.transmittance <= 1.0:
            raise ConfigurationError(
                f"transmittance {self.transmittance} outside [0, 1]"
            )
        if self.modes[0] == self.modes[1]:
            raise ConfigurationError("beam splitter modes must be distinct")


@dataclass(frozen=True)
class PhaseShifter:
    """Single-mode phase: |n> -> exp(i*n*phase) |n>."""

    mode: int
    phase: float


@dataclass(frozen=True)
class GaussianDephaser:
    """Gaussian phase noise of width ``sigma`` (radians) on one mode.

    Averaging exp(i*phi*n) over phi ~ N(0, sigma^2) multiplies the
    (n, m) coherence by exp(-sigma^2 * (n-m)^2 / 2); the channel is
    applied in that exact analytic form.
    """

    mode: int
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigurationError("sigma must be >= 0")


@dataclass(frozen=True)
class LossChannel:
    """Photon survival probability ``survival`` on one mode, realized as
    a virtual beam splitter into an ancilla vacuum mode that is then
    traced out."""

    mode: int
    survival: float

    def __post_init__(self):
        if not 0.0 <= self.survival <= 1.0:
            raise ConfigurationError(f"survival {self.survival} outside [0, 1]")


Element = BeamSplitter | PhaseShifter | GaussianDephaser | LossChannel


@dataclass(frozen=True)
class OpticalCircuit:
    """Ordered sequence of optical elements."""

    elements: tuple[Element, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))


def apply_phase(rho: DensityOperator, mode: int, phase: float) -> DensityOperator:
    occ = rho.basis.mode_occupation(mode)
    d = np.exp(1j * phase * occ)
    return DensityOperator(rho.basis, rho.matrix * np.outer(d, d.conj()))


def gaussian_dephase(rho: DensityOperator, mode: int, sigma: float) -> DensityOperator:
    """Exact Gaussian dephasing channel on ``mode``.

    Handles sigma = inf (complete dephasing of that mode's coherences)
    by zeroing every off-diagonal in mode occupation.
    """
    if sigma < 0:
        raise ConfigurationError("sigma must be >= 0")
    occ = rho.basis.mode_occupation(mode)
    diff = occ[:, None] - occ[None, :]
    if np.isinf(sigma):
        damp = np.where(diff == 0, 1.0, 0.0)
    else:
        damp = np.exp(-(sigma**2) * diff.astype(float) ** 2 / 2.0)
    return DensityOperator(rho.basis, rho.matrix * damp)


def loss(rho: DensityOperator, mode: int, survival: float) -> DensityOperator:
    """Loss channel: couple ``mode`` to an ancilla vacuum mode through a
    beam splitter of transmittance ``survival`` and trace the ancilla."""
    if not 0.0 <= survival <= 1.0:
        raise ConfigurationError(f"survival {survival} outside [0, 1]")
    basis = rho.basis
    basis._check_mode(mode)
    ancilla_basis = make_basis(1, basis.max_photons)
    vac = fock_state(ancilla_basis, (0,)).density()
    extended = tensor(rho, vac)
    ancilla = basis.n_modes  # index of the appended mode
    coupler = lift_mode_unitary(bs_matrix(survival), extended.basis, (mode, ancilla))
    mixed = coupler.apply(extended)
    return partial_trace(mixed, keep_modes=range(basis.n_modes))


def apply_circuit(rho: DensityOperator, circuit: OpticalCircuit | list) -> DensityOperator:
    """Apply elements in order.  Unitary elements raise
    TruncationOverflowError when the state has support on occupation
    sectors that would scatter out of the truncation."""
    elements = circuit.elements if isinstance(circuit, OpticalCircuit) else tuple(circuit)
    out = rho
    for element in elements:
        if isinstance(element, BeamSplitter):
            lifted = lift_mode_unitary(
                bs_matrix(element.transmittance), out.basis, element.modes
            )
            out = lifted.apply(out)
        elif isinstance(element, PhaseShifter):
            out = apply_phase(out, element.mode, element.phase)
        elif isinstance(element, GaussianDephaser):
            out = gaussian_dephase(out, element.mode, element.sigma)
        elif isinstance(element, LossChannel):
            out = loss(out, element.mode, element.survival)
        else:
            raise ConfigurationError(f"unknown circuit element {element!r}")
    return out


_ELEMENT_SCHEMAS = {
    "beam_splitter": {"modes", "transmittance"},
    "phase_shifter": {"mode", "phase"},
    "gaussian_dephaser": {"mode", "sigma"},
    "loss": {"mode", "survival"},
}


def circuit_from_config(entries: list[dict]) -> OpticalCircuit:
    """Build a circuit from a JSON-style element list.

    Each entry is a dict with a ``type`` key naming the element and the
    element's own parameters; unknown types or keys are errors.
    """
    elements: list[Element] = []
    for pos, entry in enumerate(entries):
        if not isinstance(entry, dict) or "type" not in entry:
            raise ConfigurationError(f"circuit entry {pos} missing 'type'")
        kind = entry["type"]
        if kind not in _ELEMENT_SCHEMAS:
            raise ConfigurationError(
                f"circuit entry {pos}: unknown element type {kind!r}"
            )
        params = {k: v for k, v in entry.items() if k != "type"}
        unknown = set(params) - _ELEMENT_SCHEMAS[kind]
        if unknown:
            raise ConfigurationError(
                f"circuit entry {pos} ({kind}): unknown keys {sorted(unknown)}"
            )
        missing = _ELEMENT_SCHEMAS[kind] - set(params)
        if missing:
            raise ConfigurationError(
                f"circuit entry {pos} ({kind}): missing keys {sorted(missing)}"
            )
        if kind == "beam_splitter":
            elements.append(
                BeamSplitter(
                    modes=(int(params["modes"][0]), int(params["modes"][1])),
                    transmittance=float(params["transmittance"]),
                )
            )
        elif kind == "phase_shifter":
            elements.append(
                PhaseShifter(mode=int(params["mode"]), phase=float(params["phase"]))
            )
        elif kind == "gaussian_dephaser":
            elements.append(
                GaussianDephaser(mode=int(params["mode"]), sigma=float(params["sigma"]))
            )
        else:
            elements.append(
                LossChannel(mode=int(params["mode"]), survival=float(params["survival"]))
            )
    return OpticalCircuit(tuple(elements))


def circuit_to_config(circuit: OpticalCircuit) -> list[dict]:
    entries = []
    for element in circuit.elements:
        if isinstance(element, BeamSplitter):
            entries.append(
                {
                    "type": "beam_splitter",
                    "modes": list(element.modes),
                    "transmittance": element.transmittance,
                }
            )
        elif isinstance(element, PhaseShifter):
            entries.append(
                {"type": "phase_shifter", "mode": element.mode, "phase": element.phase}
            )
        elif isinstance(element, GaussianDephaser):
            entries.append(
                {"type": "gaussian_dephaser", "mode": element.mode, "sigma": element.sigma}
            )
        elif isinstance(element, LossChannel):
            entries.append(
                {"type": "loss", "mode": element.mode, "survival": element.survival}
            )
    return entries
