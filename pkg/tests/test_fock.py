"""Tests for the truncated Fock-space core."""

import math

import numpy as np
import pytest

from photonpurify import (
    BasisSizeError,
    ConfigurationError,
    DensityOperator,
    EntangledPairSpec,
    TruncationOverflowError,
    annihilation_operator,
    bs_matrix,
    fock_state,
    lift_mode_unitary,
    make_basis,
    make_entangled_pair,
    overlap_fidelity,
    partial_trace,
    split_photon_state,
    tensor,
    vacuum_state,
)


def test_basis_dimensions():
    assert make_basis(1, 1).dimension == 2
    assert make_basis(2, 2).dimension == 9
    assert make_basis(8, 2).dimension == 6561


def test_basis_ordering_mode_zero_most_significant():
    basis = make_basis(2, 2)
    # index = 3*n0 + n1 for three levels per mode
    assert basis.index_of((0, 0)) == 0
    assert basis.index_of((0, 1)) == 1
    assert basis.index_of((1, 0)) == 3
    assert basis.index_of((2, 2)) == 8


def test_basis_roundtrip_every_index():
    basis = make_basis(3, 2)
    for idx in range(basis.dimension):
        occ = basis.occupation_of(idx)
        assert basis.index_of(occ) == idx


def test_basis_cap_rejects_oversize():
    with pytest.raises(BasisSizeError) as err:
        make_basis(13, 2)
    # 3**13 = 1594323: the message should name the offending product
    assert "1594323" in str(err.value)


def test_basis_argument_validation():
    with pytest.raises(ConfigurationError):
        make_basis(0, 2)
    with pytest.raises(ConfigurationError):
        make_basis(2, 0)
    basis = make_basis(2, 2)
    with pytest.raises(ConfigurationError):
        basis.index_of((0, 3))
    with pytest.raises(ConfigurationError):
        basis.index_of((0, 0, 0))
    with pytest.raises(ConfigurationError):
        basis.occupation_of(9)


def test_fock_and_vacuum_states():
    basis = make_basis(2, 2)
    psi = fock_state(basis, (1, 2))
    assert psi.amplitudes[basis.index_of((1, 2))] == 1.0
    assert np.count_nonzero(psi.amplitudes) == 1
    vac = vacuum_state(basis)
    assert vac.amplitudes[0] == 1.0


def test_split_photon_state_amplitudes_and_phase():
    basis = make_basis(2, 2)
    sym = split_photon_state(basis, (0, 1), 0.0)
    anti = split_photon_state(basis, (0, 1), math.pi)
    amp = 1.0 / math.sqrt(2.0)
    assert abs(sym.amplitudes[basis.index_of((1, 0))] - amp) < 1e-15
    assert abs(sym.amplitudes[basis.index_of((0, 1))] - amp) < 1e-15
    # symmetric and antisymmetric combinations are orthogonal
    assert overlap_fidelity(anti.density(), sym) < 1e-15
    assert abs(overlap_fidelity(sym.density(), sym) - 1.0) < 1e-15


def test_density_operator_validation():
    basis = make_basis(1, 2)
    with pytest.raises(ConfigurationError):
        DensityOperator(basis, np.eye(3) * 0.5)  # trace 1.5
    bad = np.diag([1.0, 0.0, 0.0]).astype(complex)
    bad[0, 1] = 0.3
    with pytest.raises(ConfigurationError):
        DensityOperator(basis, bad)  # not Hermitian
    with pytest.raises(ConfigurationError):
        DensityOperator(basis, np.eye(2))  # wrong shape


def test_mix_is_convex_combination():
    basis = make_basis(1, 2)
    zero = fock_state(basis, (0,)).density()
    one = fock_state(basis, (1,)).density()
    mixed = zero.mix(one, 0.25)
    assert np.allclose(mixed.diagonal, [0.25, 0.75, 0.0])
    with pytest.raises(ConfigurationError):
        zero.mix(one, 1.5)


def test_tensor_vacuum_and_pure_pairs():
    basis = make_basis(2, 2)
    vac = vacuum_state(basis).density()
    prod = tensor(vac, vac)
    assert prod.basis.n_modes == 4
    assert abs(prod.matrix[0, 0] - 1.0) < 1e-15
    assert abs(np.trace(prod.matrix) - 1.0) < 1e-12

    psi = split_photon_state(basis, (0, 1)).density()
    both = tensor(psi, psi)
    assert abs(np.trace(both.matrix) - 1.0) < 1e-12
    # rank 1: trace of the square equals 1 for a pure state
    assert abs(np.trace(both.matrix @ both.matrix).real - 1.0) < 1e-12


def test_tensor_noisy_pairs_dimension_and_trace():
    rho = make_entangled_pair(EntangledPairSpec(0.75))
    prod = tensor(rho, rho)
    assert prod.matrix.shape == (81, 81)
    assert abs(np.trace(prod.matrix) - 1.0) < 1e-12


def test_tensor_rejects_mismatched_truncation():
    a = vacuum_state(make_basis(1, 1)).density()
    b = vacuum_state(make_basis(1, 2)).density()
    with pytest.raises(ConfigurationError):
        tensor(a, b)


def test_partial_trace_half_of_split_photon_is_maximally_mixed():
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    reduced = partial_trace(rho, keep_modes=(0,))
    assert np.allclose(reduced.diagonal, [0.5, 0.5, 0.0], atol=1e-12)
    # coherence cannot survive tracing out the partner mode
    off = reduced.matrix - np.diag(reduced.diagonal)
    assert np.abs(off).max() < 1e-12


def test_partial_trace_of_product_recovers_factor():
    basis = make_basis(2, 2)
    rho = split_photon_state(basis, (0, 1)).density()
    vac = vacuum_state(basis).density()
    prod = tensor(rho, vac)
    back = partial_trace(prod, keep_modes=(0, 1))
    assert np.allclose(back.matrix, rho.matrix, atol=1e-12)
    only = partial_trace(tensor(vac, vac), keep_modes=(2,))
    assert abs(only.matrix[0, 0] - 1.0) < 1e-12


def test_partial_trace_rejects_bad_keep_sets():
    basis = make_basis(2, 2)
    rho = vacuum_state(basis).density()
    with pytest.raises(ConfigurationError):
        partial_trace(rho, keep_modes=())
    with pytest.raises(ConfigurationError):
        partial_trace(rho, keep_modes=(5,))


def test_overlap_fidelity_extremes_and_mixture():
    basis = make_basis(2, 2)
    sym = split_photon_state(basis, (0, 1), 0.0)
    anti = split_photon_state(basis, (0, 1), math.pi)
    assert overlap_fidelity(sym.density(), sym) == pytest.approx(1.0, abs=1e-14)
    assert overlap_fidelity(anti.density(), sym) == pytest.approx(0.0, abs=1e-14)
    rho = make_entangled_pair(EntangledPairSpec(0.75))
    target = split_photon_state(rho.basis, (0, 1))
    assert overlap_fidelity(rho, target) == pytest.approx(0.75, abs=1e-12)


def test_annihilation_operator_matrix_elements():
    basis = make_basis(1, 2)
    a = annihilation_operator(basis, 0)
    assert abs(a[0, 1] - 1.0) < 1e-15
    assert abs(a[1, 2] - math.sqrt(2.0)) < 1e-15
    # number operator from a†a matches the occupation ladder
    n = a.conj().T @ a
    assert np.allclose(np.diag(n).real, [0.0, 1.0, 2.0], atol=1e-12)


def test_lift_identity_is_identity():
    basis = make_basis(2, 2)
    u = lift_mode_unitary(np.eye(2), basis, (0, 1))
    assert np.allclose(u.matrix, np.eye(basis.dimension), atol=1e-12)
    assert not u.overflow.any()


def test_lift_balanced_splitter_cancels_double_detection():
    basis = make_basis(2, 2)
    u = lift_mode_unitary(bs_matrix(0.5), basis, (0, 1))
    psi = fock_state(basis, (1, 1))
    out = u.matrix @ psi.amplitudes
    assert abs(out[basis.index_of((1, 1))]) < 1e-12
    # both photons bunch: equal weight on |2,0> and |0,2>
    assert abs(abs(out[basis.index_of((2, 0))]) ** 2 - 0.5) < 1e-12
    assert abs(abs(out[basis.index_of((0, 2))]) ** 2 - 0.5) < 1e-12


def test_lift_single_photon_splitter_amplitudes():
    basis = make_basis(2, 2)
    u = lift_mode_unitary(bs_matrix(0.85), basis, (0, 1))
    psi = fock_state(basis, (1, 0))
    out = u.matrix @ psi.amplitudes
    assert abs(out[basis.index_of((1, 0))] - math.sqrt(0.85)) < 1e-12
    assert abs(out[basis.index_of((0, 1))] - 1j * math.sqrt(0.15)) < 1e-12


def test_lift_rejects_non_unitary():
    basis = make_basis(2, 2)
    with pytest.raises(ConfigurationError):
        lift_mode_unitary(np.array([[1.0, 0.0], [0.0, 2.0]]), basis, (0, 1))


def test_lift_is_unitary_outside_overflow():
    rng = np.random.default_rng(7)
    basis = make_basis(2, 2)
    for _ in range(10):
        t = rng.uniform(0.0, 1.0)
        u = lift_mode_unitary(bs_matrix(t), basis, (0, 1))
        keep = ~u.overflow
        block = u.matrix[np.ix_(keep, keep)]
        assert np.allclose(block.conj().T @ block, np.eye(keep.sum()), atol=1e-12)


def test_overflow_sector_is_flagged_and_rejected():
    basis = make_basis(2, 2)
    u = lift_mode_unitary(bs_matrix(0.5), basis, (0, 1))
    # total occupation 3 and 4 cannot scatter faithfully at max_photons=2
    overflow_totals = basis.total_occupation()[u.overflow]
    assert overflow_totals.min() > 2
    rho = fock_state(basis, (2, 2)).density()
    with pytest.raises(TruncationOverflowError):
        u.apply(rho)


def test_apply_preserves_safe_states():
    basis = make_basis(2, 2)
    u = lift_mode_unitary(bs_matrix(0.3), basis, (0, 1))
    rho = split_photon_state(basis, (0, 1)).density()
    out = u.apply(rho)
    assert abs(np.trace(out.matrix) - 1.0) < 1e-12
    out.validate_positive()
