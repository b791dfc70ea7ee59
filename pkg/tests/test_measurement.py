import math

import numpy as np
import pytest

from accdm.measurement import (
    CountRecord,
    WaveplateSetting,
    measurement_span_rank,
    outcome_probabilities,
    outcome_two_m,
    poisson_draw,
    povm_elements,
    simulate_counts,
    waveplate_unitary,
)
from accdm.schur import occurring_two_j, schur_basis, sector_rotation, su2_multiplicity
from accdm.states import AccessibleDensityMatrix, accessible_projection

from conftest import (
    TWELVE_SETTINGS,
    brute_force_twirl,
    noon_state,
    random_accessible_state,
)


def assemble_full(blocks, n):
    basis = schur_basis(n)
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for two_j, block in blocks.items():
        for mu in range(1, su2_multiplicity(n, two_j) + 1):
            rows = basis.sector_rows(two_j, mu)
            out[np.ix_(rows, rows)] = block
    u = basis.matrix
    return u.conj().T @ out @ u


def pure_string_state(n, bits):
    """|s><s| for a computational string, as an accessible density matrix."""
    dim = 2 ** n
    rho = np.zeros((dim, dim), dtype=complex)
    idx = int(bits, 2)
    rho[idx, idx] = 1.0
    return accessible_projection(rho)


# ---------------------------------------------------------------------------
# Waveplate unitaries
# ---------------------------------------------------------------------------

def test_zero_angles_leave_measurement_basis_diagonal():
    u = waveplate_unitary(WaveplateSetting(0.0, 0.0))
    assert abs(u[0, 1]) < 1e-14 and abs(u[1, 0]) < 1e-14
    assert abs(u[0, 0] - 1.0) < 1e-14
    assert abs(abs(u[1, 1]) - 1.0) < 1e-14


def test_hwp_at_22_5_rotates_h_to_diagonal():
    u = waveplate_unitary(WaveplateSetting(0.0, 22.5))
    out = u @ np.array([1.0, 0.0])
    target = np.array([1.0, 1.0]) / math.sqrt(2)
    assert abs(abs(np.vdot(target, out)) - 1.0) < 1e-12


def test_qwp_at_45_maps_circular_to_measurement_basis():
    u = waveplate_unitary(WaveplateSetting(45.0, 0.0))
    left = np.array([1.0, 1.0j]) / math.sqrt(2)
    right = np.array([1.0, -1.0j]) / math.sqrt(2)
    outs = [np.abs(u @ v) for v in (left, right)]
    # each circular state lands on one counter, no mixing
    assert sorted(np.round(out, 10).tolist() for out in outs) == [[0, 1], [1, 0]]


def test_waveplate_unitarity_and_period():
    rng = np.random.default_rng(0)
    for _ in range(20):
        q, h = rng.uniform(-360, 360, size=2)
        u = waveplate_unitary(WaveplateSetting(q, h))
        assert np.abs(u @ u.conj().T - np.eye(2)).max() < 1e-14
        u_shift = waveplate_unitary(WaveplateSetting(q + 180.0, h - 180.0))
        assert np.abs(u - u_shift).max() < 1e-12


# ---------------------------------------------------------------------------
# POVM elements
# ---------------------------------------------------------------------------

def test_straight_through_all_h_outcome_is_top_weight_projector():
    elements = povm_elements(WaveplateSetting(0.0, 0.0), 3)
    top = elements[0]
    assert (top.n_h, top.n_v) == (3, 0)
    np.testing.assert_allclose(top.blocks[3], np.diag([1, 0, 0, 0]), atol=1e-12)
    np.testing.assert_allclose(top.blocks[1], np.zeros((2, 2)), atol=1e-12)


def test_straight_through_two_one_outcome_blocks():
    element = povm_elements(WaveplateSetting(0.0, 0.0), 3)[1]
    assert (element.n_h, element.n_v) == (2, 1)
    np.testing.assert_allclose(element.blocks[3], np.diag([0, 1, 0, 0]), atol=1e-12)
    np.testing.assert_allclose(element.blocks[1], np.diag([1, 0]), atol=1e-12)


def test_two_one_outcome_equals_projector_onto_single_v_strings():
    # |HHV><HHV| + |HVH><HVH| + |VHH><VHH| commutes with permutations, so its
    # accessible form is exact: compare full matrices entrywise.
    element = povm_elements(WaveplateSetting(0.0, 0.0), 3)[1]
    proj = np.zeros((8, 8), dtype=complex)
    for idx in (0b001, 0b010, 0b100):
        proj[idx, idx] = 1.0
    np.testing.assert_allclose(assemble_full(element.blocks, 3), proj, atol=1e-12)
    np.testing.assert_allclose(brute_force_twirl(proj, 3), proj, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_povm_completeness_and_positivity_random_settings(n):
    rng = np.random.default_rng(n)
    for _ in range(40):
        setting = WaveplateSetting(rng.uniform(0, 180), rng.uniform(0, 180))
        elements = povm_elements(setting, n)
        for two_j in occurring_two_j(n):
            total = sum(e.blocks[two_j] for e in elements)
            np.testing.assert_allclose(total, np.eye(two_j + 1), atol=1e-10)
            for e in elements:
                eigs = np.linalg.eigvalsh(e.blocks[two_j])
                assert eigs.min() > -1e-10 and eigs.max() < 1 + 1e-10


def test_povm_blocks_invariant_under_global_phase():
    u = waveplate_unitary(WaveplateSetting(33.0, 71.0))
    for phase in (1j, np.exp(0.7j)):
        for two_j in occurring_two_j(3):
            w = sector_rotation(u, 3, two_j)
            w_phased = sector_rotation(phase * u, 3, two_j)
            for k in range(two_j + 1):
                pi_plain = np.outer(w[k].conj(), w[k])
                pi_phased = np.outer(w_phased[k].conj(), w_phased[k])
                np.testing.assert_allclose(pi_plain, pi_phased, atol=1e-12)


# ---------------------------------------------------------------------------
# Outcome probabilities
# ---------------------------------------------------------------------------

def test_all_h_input_counts_all_h(golden_state):
    rho = pure_string_state(3, "000")
    p = outcome_probabilities(rho, WaveplateSetting(0.0, 0.0))
    np.testing.assert_allclose(p, [1, 0, 0, 0], atol=1e-12)


def test_half_overlap_probabilities_straight_through(golden_state):
    p = outcome_probabilities(golden_state, WaveplateSetting(0.0, 0.0))
    np.testing.assert_allclose(p, [0.3636, 0.1364, 0.1364, 0.3636], atol=5e-5)
    np.testing.assert_allclose(p, [4 / 11, 3 / 22, 3 / 22, 4 / 11], atol=1e-12)


def test_maximally_mixed_probabilities_count_strings():
    rho = AccessibleDensityMatrix.maximally_mixed(3)
    rng = np.random.default_rng(9)
    for _ in range(5):
        setting = WaveplateSetting(rng.uniform(0, 180), rng.uniform(0, 180))
        p = outcome_probabilities(rho, setting)
        np.testing.assert_allclose(p, [1 / 8, 3 / 8, 3 / 8, 1 / 8], atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_block_pairing_matches_full_space_brute_force(n):
    rng = np.random.default_rng(n + 40)
    for _ in range(4):
        rho = random_accessible_state(n, rng)
        setting = WaveplateSetting(rng.uniform(0, 180), rng.uniform(0, 180))
        p = outcome_probabilities(rho, setting)

        u = waveplate_unitary(setting)
        u_full = np.array([[1.0]])
        for _ in range(n):
            u_full = np.kron(u_full, u)
        rho_full = rho.full_matrix()
        for k in range(n + 1):
            proj = np.zeros((2 ** n, 2 ** n), dtype=complex)
            for idx in range(2 ** n):
                if bin(idx).count("1") == k:
                    proj[idx, idx] = 1.0
            expected = np.trace(
                rho_full @ u_full.conj().T @ proj @ u_full).real
            assert abs(p[k] - expected) < 1e-10


def test_top_outcome_reads_top_block_entry():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4):
        rho = random_accessible_state(n, rng)
        p = outcome_probabilities(rho, WaveplateSetting(0.0, 0.0))
        assert abs(p[0] - rho.blocks[n][0, 0].real) < 1e-12


def test_collective_rotation_covariance():
    # twirl(u rho u^dag) has blocks W_j B_j W_j^dag for waveplate rotations u
    rng = np.random.default_rng(14)
    for n in (2, 3, 4):
        rho = random_accessible_state(n, rng)
        setting = WaveplateSetting(rng.uniform(0, 180), rng.uniform(0, 180))
        u = waveplate_unitary(setting)
        u_full = np.array([[1.0]])
        for _ in range(n):
            u_full = np.kron(u_full, u)
        rotated = accessible_projection(u_full @ rho.full_matrix() @ u_full.conj().T)
        for two_j, block in rho.blocks.items():
            w = sector_rotation(u, n, two_j)
            np.testing.assert_allclose(rotated.blocks[two_j], w @ block @ w.conj().T,
                                       atol=1e-9)


def test_outcome_count_follows_photon_number():
    for n in (1, 2, 4):
        rho = AccessibleDensityMatrix.maximally_mixed(n)
        p = outcome_probabilities(rho, WaveplateSetting(0, 0))
        assert p.shape == (n + 1,)


# ---------------------------------------------------------------------------
# Poisson sampling and count simulation
# ---------------------------------------------------------------------------

def test_poisson_draw_moments():
    rng = np.random.default_rng(100)
    for mean in (0.5, 5.0, 29.9, 100.0, 3600.0):
        draws = np.array([poisson_draw(rng, mean) for _ in range(20000)])
        se = math.sqrt(mean / draws.size)
        assert abs(draws.mean() - mean) < 5 * se
        assert abs(draws.var() / mean - 1.0) < 0.08


def test_poisson_zero_mean():
    rng = np.random.default_rng(0)
    assert poisson_draw(rng, 0.0) == 0


def test_simulate_counts_deterministic(golden_state):
    a = simulate_counts(golden_state, TWELVE_SETTINGS, 1e4, seed=42)
    b = simulate_counts(golden_state, TWELVE_SETTINGS, 1e4, seed=42)
    assert a == b
    c = simulate_counts(golden_state, TWELVE_SETTINGS, 1e4, seed=43)
    assert a != c


def test_simulate_counts_zero_shots(golden_state):
    records = simulate_counts(golden_state, TWELVE_SETTINGS, 0.0, seed=1)
    assert all(r.count == 0 for r in records)
    assert len(records) == 48


def test_simulate_counts_sample_means(golden_state):
    # per-outcome mean over many seeds within 3 standard errors of shots * p
    n_seeds = 1000
    shots = 1e4
    totals = np.zeros((len(TWELVE_SETTINGS), 4))
    for seed in range(n_seeds):
        for r in simulate_counts(golden_state, TWELVE_SETTINGS, shots, seed=seed):
            si = TWELVE_SETTINGS.index(r.setting)
            totals[si, r.n_v] += r.count
    means = totals / n_seeds
    for si, setting in enumerate(TWELVE_SETTINGS):
        p = outcome_probabilities(golden_state, setting)
        for k in range(4):
            expected = shots * p[k]
            se = math.sqrt(max(expected, 1e-9) / n_seeds)
            assert abs(means[si, k] - expected) <= 3 * se + 1e-9, (
                f"setting {setting}, outcome {k}: mean {means[si, k]}, "
                f"expected {expected} +- {se}")


def test_simulate_rejects_negative_shots_and_seed(golden_state):
    with pytest.raises(ValueError):
        simulate_counts(golden_state, TWELVE_SETTINGS, -1.0, seed=0)
    with pytest.raises(ValueError):
        simulate_counts(golden_state, TWELVE_SETTINGS, 1.0, seed=-3)


# ---------------------------------------------------------------------------
# Measurement span
# ---------------------------------------------------------------------------

def test_twelve_settings_span_twenty_dimensions():
    assert measurement_span_rank(TWELVE_SETTINGS, 3) == 20


def test_single_setting_spans_four_dimensions():
    assert measurement_span_rank([WaveplateSetting(0.0, 0.0)], 3) == 4


def test_duplicate_settings_do_not_change_rank():
    doubled = TWELVE_SETTINGS + TWELVE_SETTINGS
    assert measurement_span_rank(doubled, 3) == 20
    assert measurement_span_rank([TWELVE_SETTINGS[0]] * 5, 3) == 4


def test_span_rank_requires_settings():
    with pytest.raises(ValueError):
        measurement_span_rank([], 3)


def test_outcome_two_m_ordering():
    assert [outcome_two_m(3, k) for k in range(4)] == [3, 1, -1, -3]
