"""Tests for beam splitters, phase channels, dephasing, and loss."""

import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import comb

from photonpurify import (
    BeamSplitter,
    ConfigurationError,
    DensityOperator,
    GaussianDephaser,
    LossChannel,
    OpticalCircuit,
    PhaseShifter,
    TruncationOverflowError,
    annihilation_operator,
    apply_circuit,
    apply_phase,
    bs_matrix,
    circuit_from_config,
    circuit_to_config,
    fock_state,
    gaussian_dephase,
    lift_mode_unitary,
    loss,
    make_basis,
    overlap_fidelity,
    split_photon_state,
)


def test_bs_matrix_extremes():
    assert np.allclose(bs_matrix(1.0), np.eye(2), atol=1e-15)
    u = bs_matrix(0.85)
    assert abs(abs(u[0, 0]) ** 2 - 0.85) < 1e-12
    assert abs(abs(u[1, 0]) ** 2 - 0.15) < 1e-12
    with pytest.raises(ConfigurationError):
        bs_matrix(1.2)
    with pytest.raises(ConfigurationError):
        bs_matrix(-0.1)


def test_bs_matrix_unitary_on_dense_grid():
    for t in np.linspace(0.0, 1.0, 101):
        u = bs_matrix(float(t))
        assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12


def test_balanced_splitter_halves_single_photon():
    basis = make_basis(2, 2)
    rho = fock_state(basis, (1, 0)).density()
    out = apply_circuit(rho, [BeamSplitter(modes=(0, 1), transmittance=0.5)])
    p0 = float(out.diagonal[basis.index_of((1, 0))])
    p1 = float(out.diagonal[basis.index_of((0, 1))])
    assert abs(p0 - 0.5) < 1e-12
    assert abs(p1 - 0.5) < 1e-12
    # the output is a coherent superposition, not a mixture
    coherence = out.matrix[basis.index_of((1, 0)), basis.index_of((0, 1))]
    assert abs(abs(coherence) - 0.5) < 1e-12


def test_lifted_splitter_matches_exponentiated_generator():
    """Oracle: the closed-form lift must equal expm of i*theta*(a†b + b†a)
    wherever the truncation is faithful (total occupation <= max_photons,
    where the number-conserving generator acts on complete sectors)."""
    basis = make_basis(2, 3)
    a = annihilation_operator(basis, 0)
    b = annihilation_operator(basis, 1)
    generator = a.conj().T @ b + b.conj().T @ a
    safe = basis.total_occupation() <= basis.max_photons
    idx = np.nonzero(safe)[0]
    for t in (0.0, 0.15, 0.5, 0.85, 1.0):
        theta = math.atan2(math.sqrt(1.0 - t), math.sqrt(t))
        exact = expm(1j * theta * generator)
        lifted = lift_mode_unitary(bs_matrix(t), basis, (0, 1)).matrix
        dev = np.abs(lifted[np.ix_(idx, idx)] - exact[np.ix_(idx, idx)]).max()
        assert dev < 1e-12


def test_phase_shifter_acts_per_photon():
    basis = make_basis(1, 2)
    plus = np.zeros(3, dtype=complex)
    plus[0] = plus[2] = 1.0 / math.sqrt(2.0)
    rho = DensityOperator(basis, np.outer(plus, plus.conj()))
    out = apply_phase(rho, 0, 0.3)
    # coherence between n=0 and n=2 rotates by exp(-2i*phase)
    expected = 0.5 * np.exp(-2j * 0.3)
    assert abs(out.matrix[0, 2] - expected) < 1e-12
    assert abs(out.matrix[0, 0] - 0.5) < 1e-12


def test_dephase_sigma_zero_is_identity():
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    out = gaussian_dephase(rho, 0, 0.0)
    assert np.allclose(out.matrix, rho.matrix, atol=1e-15)


def test_dephase_half_coherence_point():
    sigma = math.sqrt(2.0 * math.log(2.0))
    basis = make_basis(2, 2)
    target = split_photon_state(basis, (0, 1))
    rho = gaussian_dephase(target.density(), 1, sigma)
    assert overlap_fidelity(rho, target) == pytest.approx(0.75, abs=1e-12)


def test_dephase_infinite_sigma_erases_phase_information():
    basis = make_basis(2, 2)
    target = split_photon_state(basis, (0, 1))
    rho = gaussian_dephase(target.density(), 0, math.inf)
    assert overlap_fidelity(rho, target) == pytest.approx(0.5, abs=1e-12)
    idx10 = basis.index_of((1, 0))
    idx01 = basis.index_of((0, 1))
    assert abs(rho.matrix[idx10, idx01]) < 1e-15


def test_dephase_matches_monte_carlo_phase_average():
    """Oracle: the analytic channel equals brute-force averaging of
    random phase kicks within Monte Carlo error."""
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    sigma = 0.9
    n_samples = 20000
    rng = np.random.default_rng(11)
    acc = np.zeros_like(rho.matrix)
    for phi in rng.normal(0.0, sigma, size=n_samples):
        acc += apply_phase(rho, 0, float(phi)).matrix
    acc /= n_samples
    idx10 = basis.index_of((1, 0))
    idx01 = basis.index_of((0, 1))
    analytic = gaussian_dephase(rho, 0, sigma).matrix[idx10, idx01]
    sampled = acc[idx10, idx01]
    # the sampled coherence is a mean of unit-modulus phases: SE ~ 1/sqrt(N)
    se = 3.0 / math.sqrt(n_samples)
    assert abs(sampled - analytic) < se * abs(rho.matrix[idx10, idx01])


def test_dephasers_compose_in_quadrature():
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    s1, s2 = 0.7, 1.1
    twice = gaussian_dephase(gaussian_dephase(rho, 0, s1), 0, s2)
    once = gaussian_dephase(rho, 0, math.sqrt(s1**2 + s2**2))
    assert np.allclose(twice.matrix, once.matrix, atol=1e-14)


def test_loss_extremes():
    basis = make_basis(1, 2)
    one = fock_state(basis, (1,)).density()
    assert np.allclose(loss(one, 0, 1.0).matrix, one.matrix, atol=1e-12)
    gone = loss(one, 0, 0.0)
    assert abs(gone.matrix[0, 0] - 1.0) < 1e-12
    half = loss(one, 0, 0.5)
    assert np.allclose(half.diagonal, [0.5, 0.5, 0.0], atol=1e-12)


def test_loss_matches_binomial_survival():
    """Oracle: n photons through survival eta land on k survivors with
    binomial weight C(n,k) eta^k (1-eta)^(n-k)."""
    basis = make_basis(1, 2)
    two = fock_state(basis, (2,)).density()
    for eta in (0.2, 0.5, 0.8):
        out = loss(two, 0, eta)
        expected = [comb(2, k) * eta**k * (1 - eta) ** (2 - k) for k in range(3)]
        assert np.allclose(out.diagonal, expected, atol=1e-12)


def test_loss_damps_coherence_as_sqrt_survival():
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    eta = 0.6
    out = loss(rho, 0, eta)
    idx10 = rho.basis.index_of((1, 0))
    idx01 = rho.basis.index_of((0, 1))
    # |1,0><0,1| keeps the photon in the lossy mode on one side only
    assert abs(out.matrix[idx10, idx01] - 0.5 * math.sqrt(eta)) < 1e-12


def test_channel_chain_preserves_trace():
    rng = np.random.default_rng(23)
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    for step in range(100):
        kind = step % 4
        if kind == 0:
            rho = apply_circuit(
                rho, [BeamSplitter(modes=(0, 1), transmittance=float(rng.uniform()))]
            )
        elif kind == 1:
            rho = apply_phase(rho, int(rng.integers(2)), float(rng.uniform(0, 7)))
        elif kind == 2:
            rho = gaussian_dephase(rho, int(rng.integers(2)), float(rng.uniform(0, 2)))
        else:
            rho = loss(rho, int(rng.integers(2)), float(rng.uniform(0.5, 1.0)))
        assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
    rho.validate_positive()


def test_empty_circuit_is_identity():
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    out = apply_circuit(rho, OpticalCircuit(()))
    assert np.allclose(out.matrix, rho.matrix, atol=1e-15)


def test_circuit_applies_elements_in_order():
    basis = make_basis(2, 2)
    rho = fock_state(basis, (1, 0)).density()
    circuit = [
        BeamSplitter(modes=(0, 1), transmittance=0.5),
        PhaseShifter(mode=1, phase=math.pi),
        BeamSplitter(modes=(0, 1), transmittance=0.5),
    ]
    out = apply_circuit(rho, circuit)
    manual = apply_circuit(rho, [circuit[0]])
    manual = apply_phase(manual, 1, math.pi)
    manual = apply_circuit(manual, [circuit[2]])
    assert np.allclose(out.matrix, manual.matrix, atol=1e-13)


def test_circuit_overflow_raises():
    basis = make_basis(2, 2)
    rho = fock_state(basis, (2, 1)).density()
    with pytest.raises(TruncationOverflowError):
        apply_circuit(rho, [BeamSplitter(modes=(0, 1), transmittance=0.5)])


def test_circuit_config_round_trip():
    circuit = OpticalCircuit(
        (
            BeamSplitter(modes=(0, 2), transmittance=0.85),
            PhaseShifter(mode=1, phase=1.25),
            GaussianDephaser(mode=0, sigma=0.4),
            LossChannel(mode=2, survival=0.9),
        )
    )
    entries = circuit_to_config(circuit)
    rebuilt = circuit_from_config(entries)
    assert rebuilt == circuit


def test_circuit_config_rejects_junk():
    with pytest.raises(ConfigurationError):
        circuit_from_config([{"type": "prism", "mode": 0}])
    with pytest.raises(ConfigurationError):
        circuit_from_config([{"type": "phase_shifter", "mode": 0}])  # missing phase
    with pytest.raises(ConfigurationError):
        circuit_from_config(
            [{"type": "phase_shifter", "mode": 0, "phase": 1.0, "extra": 2}]
        )


def test_element_validation():
    with pytest.raises(ConfigurationError):
        BeamSplitter(modes=(1, 1), transmittance=0.5)
    with pytest.raises(ConfigurationError):
        GaussianDephaser(mode=0, sigma=-1.0)
    with pytest.raises(ConfigurationError):
        LossChannel(mode=0, survival=1.3)
