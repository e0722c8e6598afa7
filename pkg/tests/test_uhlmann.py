import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import mixedtopo as mt
from conftest import random_unitary


def thermal_path(model, beta, ky, m=64, direction="x"):
    return mt.bz_loop_path(model, beta, 0.0, direction, ky, m)


def test_thermal_density_infinite_temperature_limit(qwz):
    rho = mt.thermal_density_k(qwz, 1e-9, 0.0, 0.4, -0.8)
    assert np.abs(rho - np.eye(2) / 2).max() < 1e-8


def test_thermal_density_sigma_z():
    model = mt.atomic_model((0.0, 0.0, 1.0))
    beta = 1.7
    rho = mt.thermal_density_k(model, beta, 0.0, 0.0, 0.0)
    z = 2 * np.cosh(beta)
    assert np.allclose(rho, np.diag([np.exp(-beta), np.exp(beta)]) / z, atol=1e-15)


@given(kx=st.floats(-np.pi, np.pi), ky=st.floats(-np.pi, np.pi), beta=st.floats(0.01, 30.0))
def test_thermal_density_unit_trace(kx, ky, beta, qwz):
    rho = mt.thermal_density_k(qwz, beta, 0.0, kx, ky)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12  # positive within assembly noise


def test_thermal_density_rejects_pure(qwz):
    with pytest.raises(mt.RankDeficiencyError):
        mt.thermal_density_k(qwz, math.inf, 0.0, 0.0, 0.0)


def test_link_identity_for_equal_states(qwz):
    rho = mt.thermal_density_k(qwz, 2.0, 0.0, 0.3, 0.3)
    v = mt.uhlmann_link(rho, rho)
    assert np.abs(v - np.eye(2)).max() <= 1e-12


def test_link_identity_for_commuting_pair():
    rho_a = np.diag([0.7, 0.3]).astype(complex)
    rho_b = np.diag([0.2, 0.8]).astype(complex)
    v = mt.uhlmann_link(rho_a, rho_b)
    assert np.abs(v - np.eye(2)).max() <= 1e-12


def test_link_unitary_and_polar_optimal(qwz):
    rng = np.random.default_rng(2)
    rho_a = mt.thermal_density_k(qwz, 1.5, 0.0, 0.3, -0.2)
    rho_b = mt.thermal_density_k(qwz, 1.5, 0.0, 0.9, 1.4)
    v = mt.uhlmann_link(rho_a, rho_b)
    assert np.abs(v.conj().T @ v - np.eye(2)).max() <= 1e-12
    w, vecs = np.linalg.eigh(rho_a)
    sq_a = (vecs * np.sqrt(w)) @ vecs.conj().T
    w, vecs = np.linalg.eigh(rho_b)
    sq_b = (vecs * np.sqrt(w)) @ vecs.conj().T
    target = sq_b @ sq_a
    best = np.trace(v.conj().T @ target).real
    for _ in range(10_000):
        u = random_unitary(rng, 2)
        assert np.trace(u.conj().T @ target).real <= best + 1e-12


def test_link_rejects_rank_deficiency():
    pure = np.diag([1.0, 0.0]).astype(complex)
    mixed = np.diag([0.6, 0.4]).astype(complex)
    with pytest.raises(mt.RankDeficiencyError):
        mt.uhlmann_link(pure, mixed)


def test_path_validation():
    good = np.tile(np.diag([0.6, 0.4]).astype(complex), (4, 1, 1))
    mt.DensityMatrixPath(np.arange(4.0), good)
    with pytest.raises(ValueError):
        mt.DensityMatrixPath(np.arange(4.0), 2 * good)  # trace 2
    bad = good.copy()
    bad[1] = np.array([[0.6, 0.4], [0.1, 0.4]])
    with pytest.raises(ValueError):
        mt.DensityMatrixPath(np.arange(4.0), bad)  # not Hermitian


def test_holonomy_rejects_projector_path():
    rhos = np.tile(np.diag([1.0, 0.0]).astype(complex), (8, 1, 1))
    path = mt.DensityMatrixPath(np.arange(8.0), rhos)
    with pytest.raises(mt.RankDeficiencyError):
        mt.uhlmann_phase(path)


def test_phase_constant_path(qwz):
    rho = mt.thermal_density_k(qwz, 1.0, 0.0, 0.5, 0.5)
    path = mt.DensityMatrixPath(np.arange(6.0), np.tile(rho, (6, 1, 1)))
    assert mt.uhlmann_phase(path) == pytest.approx(0.0, abs=1e-12)


def test_phase_maximally_mixed_is_trivial(qwz):
    phase, _ = mt.uhlmann_phase_bz(qwz, 1e-4, 0.0, "x", 0.9, 128, refine=False)
    assert abs(phase) < 1e-6


def test_holonomy_unitary(qwz):
    path = thermal_path(qwz, 2.0, np.pi / 3, m=128)
    hol = mt.uhlmann_holonomy(path)
    assert np.abs(hol.matrix.conj().T @ hol.matrix - np.eye(2)).max() <= 1e-10


def test_phase_path_object_matches_profile_machinery(qwz):
    path = thermal_path(qwz, 2.0, np.pi / 3, m=512)
    phase_path = mt.uhlmann_phase(path)
    phase_prof, _ = mt.uhlmann_phase_bz(qwz, 2.0, 0.0, "x", np.pi / 3, 512, refine=False)
    assert abs(mt.principal_branch(phase_path - phase_prof)) <= 1e-12


def test_cauchy_criterion_512_to_1024(qwz):
    for beta in (10.0, 0.5):
        a, _ = mt.uhlmann_phase_bz(qwz, beta, 0.0, "x", np.pi / 3, 512, refine=False)
        b, _ = mt.uhlmann_phase_bz(qwz, beta, 0.0, "x", np.pi / 3, 1024, refine=False)
        assert abs(mt.principal_branch(b - a)) < 1e-4


def test_refinement_reports_points_used(qwz):
    _, m_used = mt.uhlmann_phase_bz(qwz, 2.0, 0.0, "x", 0.7, 512)
    assert 512 < m_used <= 8192


def test_under_resolved_coarse_path(qwz):
    with pytest.raises(mt.UnderResolvedError):
        mt.uhlmann_phase_bz(qwz, 20.0, 0.0, "y", np.pi / 2, 4, refine=False, n_cap=4)


def test_cold_phase_matches_fictitious_band_zak(qwz, qwz_gap):
    beta = 20.0 / qwz_gap
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, qwz)
    phase, _ = mt.uhlmann_phase_bz(qwz, beta, 0.0, "x", np.pi / 3, 512)
    states = mt.states_on_line(lambda k: mt.fictitious_hamiltonian(spec, k, np.pi / 3),
                               mt.momentum_line(512), 1)
    assert abs(mt.principal_branch(phase - mt.zak_phase_wilson(states))) < 0.02


def test_amplitude_gauge_freedom(qwz):
    """w -> w U right gauges drop out of the transport construction."""
    rng = np.random.default_rng(9)
    path = thermal_path(qwz, 2.0, 1.1, m=48)
    reference = mt.uhlmann_phase(path)

    eig, vec = np.linalg.eigh(path.rhos)
    sqrts = np.einsum("tij,tj,tkj->tik", vec, np.sqrt(np.clip(eig, 0, None)), vec.conj())
    gauges = np.stack([random_unitary(rng, 2) for _ in range(len(path))])
    amplitudes = sqrts @ gauges

    product = np.eye(2, dtype=complex)
    for i in range(len(path)):
        pair = amplitudes[(i + 1) % len(path)].conj().T @ amplitudes[i]
        w, _, zh = np.linalg.svd(pair)
        product = (w @ zh) @ product
    holonomy = gauges[0] @ product @ gauges[0].conj().T
    phase = np.angle(np.trace(path.rhos[0] @ holonomy))
    assert abs(mt.principal_branch(phase - reference)) <= 1e-10


def test_windings_cold_and_hot(qwz, qwz_gap):
    grid = mt.MomentumGrid(16, 16)
    assert mt.uhlmann_windings(qwz, 20.0 / qwz_gap, 0.0, grid, 256) == (1, 1)
    assert mt.uhlmann_windings(qwz, 0.01 / qwz_gap, 0.0, grid, 256) == (0, 0)


def test_windings_asymmetric_window_exists(qwz, qwz_gap):
    """Scanning around T ~ 0.5 gap finds directionally split Uhlmann windings."""
    grid = mt.MomentumGrid(24, 24)
    seen_asymmetric = False
    for t_over_gap in (0.45, 0.55):
        beta = 1.0 / (t_over_gap * qwz_gap)
        cx, cy = mt.uhlmann_windings(qwz, beta, 0.0, grid, 256)
        if cx != cy:
            seen_asymmetric = True
    assert seen_asymmetric


def test_ground_state_chern(qwz):
    assert mt.ground_state_chern(qwz, 0.0, mt.MomentumGrid(24, 24)) == 1


def test_temperature_scan_structure(qwz, qwz_gap):
    grid = mt.MomentumGrid(12, 12)
    temps = np.array([0.05, 0.5, 5.0]) * qwz_gap
    reports = mt.uhlmann_temperature_scan(qwz, 0.0, temps, grid, n_points=128, n_cells=6)
    assert len(reports) == 3
    for r in reports:
        assert r.c_ground == 1
        assert r.status == "ok"
        assert r.cx_egp == r.cy_egp == 1
        assert r.beta == pytest.approx(1.0 / r.temperature)
    assert reports[0].cx_uhlmann == reports[0].cy_uhlmann == 1
    assert reports[-1].cx_uhlmann == reports[-1].cy_uhlmann == 0
