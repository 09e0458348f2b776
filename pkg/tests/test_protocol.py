"""Tests for the purification protocol, sweeps, iteration, and repeater maps."""

import math

import numpy as np
import pytest

from photonpurify import (
    PROTOCOL_TRANSMITTANCE,
    ConfigurationError,
    DegenerateOutcomeError,
    DetectorModel,
    EntangledPairSpec,
    PurificationSetup,
    RepeaterScenario,
    heralded_pair_state,
    iterate_purification,
    make_entangled_pair,
    purified_fidelity,
    repeater_trajectory,
    simulate_purification,
    single_photon_sector_fidelity,
    split_photon_state,
    success_probability,
    sweep_transmittance,
)

# Frozen oracle for the nominal operating point, computed once by direct
# evaluation of (F1 F2 + F1/2 + F2/2) / (1 + F1 F2 + (1-F1)(1-F2)).
FID_751_750 = 0.8082128575822823


def test_protocol_transmittance_value():
    assert PROTOCOL_TRANSMITTANCE == pytest.approx(0.5 + 0.5 / math.sqrt(2.0), abs=0.0)
    assert 0.85 < PROTOCOL_TRANSMITTANCE < 0.86


def test_purified_fidelity_fixed_points():
    assert purified_fidelity(1.0, 1.0) == 1.0
    assert purified_fidelity(0.5, 0.5) == 0.5


def test_purified_fidelity_operating_point():
    fid = purified_fidelity(0.751, 0.750)
    assert fid == pytest.approx(FID_751_750, abs=1e-15)
    assert fid == pytest.approx(0.8082, abs=1e-4)
    assert fid - 0.751 == pytest.approx(0.0572, abs=1e-4)


def test_purified_fidelity_near_unity_halves_error():
    assert purified_fidelity(0.98, 0.98) == pytest.approx(0.9896, abs=5e-5)
    # exact residual error: eps (1 + eps) / (2 (1 - eps + eps^2))
    for eps in (0.01, 0.02, 0.05, 0.1):
        expected = 1.0 - eps * (1.0 + eps) / (2.0 * (1.0 - eps + eps * eps))
        assert purified_fidelity(1.0 - eps, 1.0 - eps) == pytest.approx(
            expected, abs=1e-14
        )


def test_purified_fidelity_symmetric_and_improving():
    rng = np.random.default_rng(3)
    for _ in range(50):
        f1, f2 = rng.uniform(0.5, 1.0, size=2)
        assert purified_fidelity(f1, f2) == pytest.approx(
            purified_fidelity(f2, f1), abs=1e-14
        )
    for f in np.linspace(0.51, 0.99, 25):
        assert purified_fidelity(f, f) > f


def test_success_probability_values():
    assert success_probability(1.0, 1.0) == 0.5
    assert success_probability(0.5, 0.5) == 0.375
    assert success_probability(0.75, 0.75) == 0.40625


def test_argument_validation():
    with pytest.raises(ConfigurationError):
        purified_fidelity(1.2, 0.5)
    with pytest.raises(ConfigurationError):
        success_probability(0.5, -0.1)
    with pytest.raises(ConfigurationError):
        PurificationSetup(t_alice=1.3)
    with pytest.raises(ConfigurationError):
        PurificationSetup(herald_mode="carol")
    with pytest.raises(ConfigurationError):
        EntangledPairSpec(0.8, vacuum_weight=0.7, double_photon_weight=0.5)


def test_make_entangled_pair_pure_limit():
    rho = make_entangled_pair(EntangledPairSpec(1.0))
    target = split_photon_state(rho.basis, (0, 1))
    assert abs(np.trace(rho.matrix @ rho.matrix).real - 1.0) < 1e-12
    assert float((target.amplitudes.conj() @ rho.matrix @ target.amplitudes).real) == (
        pytest.approx(1.0, abs=1e-12)
    )


def test_make_entangled_pair_dephased_limit_has_no_coherence():
    rho = make_entangled_pair(EntangledPairSpec(0.5))
    idx10 = rho.basis.index_of((1, 0))
    idx01 = rho.basis.index_of((0, 1))
    assert abs(rho.matrix[idx10, idx01]) < 1e-15
    assert rho.diagonal[idx10] == pytest.approx(0.5, abs=1e-12)
    assert rho.diagonal[idx01] == pytest.approx(0.5, abs=1e-12)


def test_make_entangled_pair_eigenvalues():
    rho = make_entangled_pair(EntangledPairSpec(0.75))
    eig = np.sort(np.linalg.eigvalsh(rho.matrix))
    assert eig[-1] == pytest.approx(0.75, abs=1e-12)
    assert eig[-2] == pytest.approx(0.25, abs=1e-12)
    assert np.all(eig[:-2] < 1e-12)


def test_make_entangled_pair_admixtures():
    spec = EntangledPairSpec(0.8, vacuum_weight=0.1, double_photon_weight=0.05)
    rho = make_entangled_pair(spec)
    assert rho.diagonal[rho.basis.index_of((0, 0))] == pytest.approx(0.1, abs=1e-12)
    assert rho.diagonal[rho.basis.index_of((1, 1))] == pytest.approx(0.05, abs=1e-12)
    target = split_photon_state(rho.basis, (0, 1))
    overlap = float((target.amplitudes.conj() @ rho.matrix @ target.amplitudes).real)
    assert overlap == pytest.approx(0.85 * 0.8, abs=1e-12)


def test_simulation_matches_closed_form_at_default_setup():
    for f1, f2 in ((1.0, 1.0), (0.75, 0.75), (0.751, 0.750), (0.6, 0.9)):
        out = simulate_purification(f1, f2)
        assert out.fidelity == pytest.approx(purified_fidelity(f1, f2), abs=1e-10)
        assert out.success_probability == pytest.approx(
            success_probability(f1, f2), abs=1e-10
        )
    assert simulate_purification(1.0, 1.0).success_probability == pytest.approx(
        0.5, abs=1e-10
    )


def test_each_herald_carries_half_the_success():
    for f1, f2 in ((0.75, 0.75), (0.8, 0.6)):
        either = simulate_purification(f1, f2)
        alice = simulate_purification(f1, f2, PurificationSetup(herald_mode="alice"))
        bob = simulate_purification(f1, f2, PurificationSetup(herald_mode="bob"))
        assert alice.success_probability == pytest.approx(
            either.success_probability / 2.0, abs=1e-12
        )
        assert bob.success_probability == pytest.approx(
            either.success_probability / 2.0, abs=1e-12
        )
        assert alice.fidelity == pytest.approx(either.fidelity, abs=1e-10)
        assert bob.fidelity == pytest.approx(either.fidelity, abs=1e-10)


def test_role_swap_mirrors_success_probability_for_any_couplers():
    """Swapping the two couplers while swapping which side heralds leaves
    the herald probability invariant, even away from the mirrored
    operating family."""
    rng = np.random.default_rng(17)
    for _ in range(6):
        x, y = rng.uniform(0.1, 0.9, size=2)
        f1, f2 = rng.uniform(0.55, 0.95, size=2)
        p_alice = simulate_purification(
            f1, f2, PurificationSetup(x, y, "alice")
        ).success_probability
        p_bob = simulate_purification(
            f1, f2, PurificationSetup(y, x, "bob")
        ).success_probability
        assert p_alice == pytest.approx(p_bob, abs=1e-12)


def test_role_swap_on_mirrored_family_preserves_fidelity():
    """On the mirrored coupler family (t, 1-t) the protocol is fully
    symmetric under exchanging the roles."""
    for t in (0.6, 0.75, PROTOCOL_TRANSMITTANCE, 0.9):
        for f1, f2 in ((0.75, 0.75), (0.7, 0.85)):
            a = simulate_purification(
                f1, f2, PurificationSetup(t, 1.0 - t, "alice")
            )
            b = simulate_purification(
                f1, f2, PurificationSetup(1.0 - t, t, "bob")
            )
            assert a.fidelity == pytest.approx(b.fidelity, abs=1e-10)
            assert a.success_probability == pytest.approx(
                b.success_probability, abs=1e-12
            )


def test_vacuum_admixture_leaves_fidelity_unchanged():
    base = simulate_purification(0.75, 0.75)
    for w in (0.2, 0.5):
        out = simulate_purification(
            EntangledPairSpec(0.75, vacuum_weight=w), 0.75
        )
        assert abs(out.fidelity - base.fidelity) < 1e-10
        assert out.single_photon_weight < base.single_photon_weight + 1e-12


def test_double_emission_leaves_sector_fidelity_unchanged():
    base = simulate_purification(0.75, 0.75)
    out = simulate_purification(
        EntangledPairSpec(0.75, double_photon_weight=0.3), 0.75
    )
    assert abs(out.fidelity - base.fidelity) < 1e-10
    assert out.single_photon_weight < 1.0


def test_threshold_monitors_keep_fidelity_but_accept_more():
    base = simulate_purification(0.75, 0.75)
    det = DetectorModel(efficiency=1.0, dark_prob_per_window=0.0)
    thr = simulate_purification(
        0.75, 0.75, herald_detectors={"alice": det, "bob": det}
    )
    assert abs(thr.fidelity - base.fidelity) < 1e-10
    # threshold monitors also accept the both-photons-at-one-monitor events
    assert thr.success_probability > base.success_probability


def test_heralded_pair_state_basic_contract():
    rho = make_entangled_pair(EntangledPairSpec(0.75))
    kept, prob = heralded_pair_state(rho, rho)
    assert kept.basis.n_modes == 2
    assert abs(np.trace(kept.matrix) - 1.0) < 1e-12
    assert prob == pytest.approx(0.40625, abs=1e-10)
    fid, weight = single_photon_sector_fidelity(kept)
    assert fid == pytest.approx(purified_fidelity(0.75, 0.75), abs=1e-10)
    assert weight == pytest.approx(1.0, abs=1e-10)


def test_all_vacuum_inputs_cannot_herald():
    spec = EntangledPairSpec(0.75, vacuum_weight=1.0)
    with pytest.raises(DegenerateOutcomeError):
        simulate_purification(spec, spec)


def test_sweep_perfect_inputs_flat():
    sweep = sweep_transmittance(1.0, 1.0, np.linspace(0.2, 0.8, 7))
    assert all(abs(f - 1.0) < 1e-10 for f in sweep.fidelities)


def test_sweep_prefers_strong_coupler_over_balanced():
    sweep = sweep_transmittance(0.75, 0.75, [0.5, 0.85])
    by_t = dict(zip(sweep.transmittances, sweep.fidelities))
    assert by_t[0.85] >= by_t[0.5]


def test_sweep_reports_empirical_argmax():
    grid = np.linspace(0.5, 1.0, 26)
    sweep = sweep_transmittance(0.76, 0.76, grid)
    k = int(np.argmax(sweep.fidelities))
    assert sweep.argmax_transmittance == sweep.transmittances[k]
    assert sweep.max_fidelity == sweep.fidelities[k]
    rows = list(sweep.rows())
    assert len(rows) == 26
    assert rows[0][0] == pytest.approx(0.5, abs=0.0)


def test_iterate_purification_trajectories():
    assert all(f == 1.0 for f, _ in iterate_purification(1.0, 4))
    assert all(f == 0.5 for f, _ in iterate_purification(0.5, 4))
    path = iterate_purification(0.75, 3)
    assert len(path) == 4
    fids = [f for f, _ in path]
    assert all(b > a for a, b in zip(fids, fids[1:]))
    assert fids[-1] < 1.0
    # each round's success probability is evaluated at its input fidelity
    assert path[1][1] == pytest.approx(success_probability(0.75, 0.75), abs=1e-14)
    with pytest.raises(ConfigurationError):
        iterate_purification(0.75, -1)


def test_repeater_unpurified_doubles_per_level():
    traj = repeater_trajectory(RepeaterScenario(0.05, 2))
    assert traj.errors == (0.05, 0.1, 0.2)
    assert not traj.saturated


def test_repeater_zero_error_stays_zero():
    traj = repeater_trajectory(RepeaterScenario(0.0, 5, (True, False, True, False, True)))
    assert traj.errors == (0.0,) * 6


def test_repeater_purification_composes_both_maps():
    traj = repeater_trajectory(RepeaterScenario(0.05, 3, (True, True, True)))
    eps = 0.05
    for level in range(1, 4):
        eps = 1.0 - purified_fidelity(1.0 - 2.0 * eps, 1.0 - 2.0 * eps)
        assert traj.errors[level] == pytest.approx(eps, abs=0.0)
    assert traj.errors[1] == pytest.approx(
        1.0 - purified_fidelity(0.9, 0.9), abs=0.0
    )


def test_repeater_saturates_at_half():
    traj = repeater_trajectory(RepeaterScenario(0.2, 3))
    assert traj.errors == (0.2, 0.4, 0.5, 0.5)
    assert traj.saturated


def test_repeater_validation():
    with pytest.raises(ConfigurationError):
        RepeaterScenario(0.7, 2)
    with pytest.raises(ConfigurationError):
        RepeaterScenario(0.05, 2, (True,))
