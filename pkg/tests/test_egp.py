import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import mixedtopo as mt
from conftest import random_hermitian
from fock_oracle import covariance_from_g, fock_trace


@given(n=st.floats(0.0, 1.0), theta=st.floats(-np.pi, np.pi))
def test_trace_single_mode_closed_form(n, theta):
    got = mt.gaussian_trace_diagonal_unitary(np.array([[n]]), np.array([theta]))
    expected = 1 + n * (np.exp(1j * theta) - 1)
    assert abs(got.value - expected) <= 1e-12


def test_trace_zero_angles_is_unity():
    rng = np.random.default_rng(5)
    h = random_hermitian(rng, 6)
    w, v = np.linalg.eigh(h)
    corr = (v * np.clip(np.abs(np.sin(w)), 0, 1)) @ v.conj().T
    got = mt.gaussian_trace_diagonal_unitary(corr, np.zeros(6))
    assert got.phase == pytest.approx(0.0, abs=1e-12)
    assert got.log_magnitude == pytest.approx(0.0, abs=1e-12)


def test_trace_matches_fock_oracle_qwz_chain(qwz):
    """L = 6 thermal chain state against the 2^6 Fock-space enumeration."""
    beta, n_cells = 1.0, 3
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, qwz)
    corr = mt.chain_correlation_matrix(spec, "x", 0.7, n_cells)
    thetas = mt.momentum_shift_angles(n_cells, 2)
    got = mt.gaussian_trace_diagonal_unitary(corr, thetas).value

    # oracle: assemble the chain's real-space quadratic form and trace in Fock space
    ks = mt.momentum_line(n_cells)
    g_diag = np.zeros((6, 6), dtype=complex)
    for i, k in enumerate(ks):
        g_diag[i * 2:(i + 1) * 2, i * 2:(i + 1) * 2] = beta * qwz.matrix(k, 0.7)
    f = np.exp(1j * np.outer(np.arange(n_cells), ks)) / np.sqrt(n_cells)
    u = np.kron(f, np.eye(2))
    g_chain = u @ g_diag @ u.conj().T
    expected = fock_trace(g_chain, thetas)
    assert abs(got - expected) <= 1e-10


def _atomic_closed_form(occupations, n_cells):
    """prod_lambda [(1 - n)^N - (-n)^N] via the roots-of-unity product."""
    z = 1.0
    for n in occupations:
        z *= (1 - n) ** n_cells - (-n) ** n_cells
    return z


@pytest.mark.parametrize("n_cells,expected_phase", [(4, np.pi), (6, np.pi), (5, 0.0), (7, 0.0)])
def test_egp_atomic_limit_parity(atomic, n_cells, expected_phase):
    beta = 1.3
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, atomic)
    r = mt.egp_component(spec, "x", 0.7, n_cells)
    assert r.phase == pytest.approx(expected_phase, abs=1e-12)
    occ = [1 / (np.exp(beta) + 1), 1 / (np.exp(-beta) + 1)]
    expected = _atomic_closed_form(occ, n_cells)
    assert r.magnitude * np.exp(1j * r.phase) == pytest.approx(expected, abs=1e-12)


def _fict_filled_zak(spec, direction, transverse_k, m):
    def matrix_fn(k):
        kx, ky = (k, transverse_k) if direction == "x" else (transverse_k, k)
        return mt.fictitious_hamiltonian(spec, kx, ky)

    states = mt.states_on_line(matrix_fn, mt.momentum_line(m), 1)  # occupation > 1/2 band
    return mt.zak_phase_wilson(states)


def test_egp_pure_equals_fictitious_zak_odd_n(qwz):
    spec = mt.GaussianStateSpec.thermal(math.inf, 0.0, qwz)
    for tk in (0.3, np.pi / 3, -1.8):
        r = mt.egp_component(spec, "x", tk, 11)
        zak = _fict_filled_zak(spec, "x", tk, 11)
        assert abs(mt.principal_branch(r.phase - zak)) <= 1e-10


def test_egp_pure_even_n_carries_parity_pi(qwz):
    """The N-fermion momentum shift contributes exactly (-1)^(N-1)."""
    spec = mt.GaussianStateSpec.thermal(math.inf, 0.0, qwz)
    r = mt.egp_component(spec, "x", 0.3, 10)
    zak = _fict_filled_zak(spec, "x", 0.3, 10)
    assert abs(mt.principal_branch(r.phase - zak - np.pi)) <= 1e-10


def test_egp_profile_pure_matches_zak_profile(qwz):
    spec = mt.GaussianStateSpec.thermal(math.inf, 0.0, qwz)
    profile = mt.egp_profile(spec, "x", 11, 16)
    for tk, phase in zip(profile.parameters, profile.phases):
        assert abs(mt.principal_branch(phase - _fict_filled_zak(spec, "x", tk, 11))) <= 1e-10


def test_egp_profile_high_temperature_approaches_pure(qwz, qwz_gap):
    beta = 1.0 / (20.0 * qwz_gap)
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, qwz)
    pure = spec.pure_limit()
    devs = {}
    for n in (10, 100):
        thermal_prof = mt.egp_profile(spec, "x", n, 16)
        pure_prof = mt.egp_profile(pure, "x", n, 16)
        devs[n] = np.abs(mt.principal_branch(thermal_prof.phases - pure_prof.phases)).max()
    assert devs[100] < devs[10]
    # near ky = pi/3 the approach is already tight at N = 100
    r_t = mt.egp_component(spec, "x", np.pi / 3, 100)
    r_p = mt.egp_component(pure, "x", np.pi / 3, 100)
    assert abs(mt.principal_branch(r_t.phase - r_p.phase)) < 0.05


@pytest.mark.parametrize("beta", [5.0, 0.5])
def test_egp_windings_thermal(qwz, beta):
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, qwz)
    assert mt.egp_windings(spec, 10, 32) == (1, 1)


def test_egp_windings_pure_equals_ground_chern(qwz):
    spec = mt.GaussianStateSpec.thermal(math.inf, 0.0, qwz)
    cx, cy = mt.egp_windings(spec, 11, 32)
    assert (cx, cy) == (1, 1)
    assert cx == mt.ground_state_chern(qwz, 0.0, mt.MomentumGrid(32, 32))


def test_egp_windings_atomic(atomic):
    spec = mt.GaussianStateSpec.thermal(1.0, 0.0, atomic)
    assert mt.egp_windings(spec, 10, 16) == (0, 0)


def test_egp_windings_independent_of_chain_length(qwz):
    spec = mt.GaussianStateSpec.thermal(0.5, 0.0, qwz)
    results = {n: mt.egp_windings(spec, n, 24) for n in (6, 10, 20)}
    assert set(results.values()) == {(1, 1)}


def test_egp_amplitude_bound_random_states():
    rng = np.random.default_rng(17)
    for _ in range(20):
        l_modes = rng.integers(2, 9)
        u = np.linalg.qr(rng.normal(size=(l_modes, l_modes))
                         + 1j * rng.normal(size=(l_modes, l_modes)))[0]
        corr = (u * rng.uniform(0, 1, size=l_modes)) @ u.conj().T
        thetas = rng.uniform(-np.pi, np.pi, size=l_modes)
        got = mt.gaussian_trace_diagonal_unitary(corr, thetas)
        assert got.log_magnitude <= 1e-10


def test_egp_translation_leaves_modulus_invariant(qwz):
    spec = mt.GaussianStateSpec.thermal(1.0, 0.0, qwz)
    n_cells, p = 6, 2
    corr = mt.chain_correlation_matrix(spec, "x", 0.4, n_cells)
    thetas = mt.momentum_shift_angles(n_cells, p)
    shifted = np.roll(thetas, p)  # cyclic relabeling j -> j + 1
    a = mt.gaussian_trace_diagonal_unitary(corr, thetas)
    b = mt.gaussian_trace_diagonal_unitary(corr, shifted)
    assert abs(a.log_magnitude - b.log_magnitude) <= 1e-12


def test_zero_amplitude_error_arm():
    from mixedtopo.egp import _require_amplitude
    dead = mt.GaussianTrace(phase=0.0, log_magnitude=-math.inf)
    assert dead.magnitude == 0.0
    with pytest.raises(mt.AmplitudeZeroError):
        _require_amplitude(dead, "in test")


def test_near_half_occupation_amplitude_is_tiny_but_defined():
    """Occupations at 1/2 put the state on the generalized-gap edge: the
    amplitude collapses with N but the phase remains computable."""
    model = mt.atomic_model((0.0, 0.0, 0.0))
    spec = mt.GaussianStateSpec.thermal(1.0, 0.0, model)
    r = mt.egp_component(spec, "x", 0.1, 4)
    assert r.magnitude < 1e-15


def test_gauge_reduction_pure_reference_is_exact(qwz):
    spec = mt.GaussianStateSpec.thermal(math.inf, 0.0, qwz)
    devs = mt.gauge_reduction_deviation(spec, "x", np.pi / 3, [6, 10, 11])
    assert all(d < 1e-10 for _, d in devs)


def test_gauge_reduction_monotone(qwz, qwz_gap):
    beta = 1.0 / (20.0 * qwz_gap)
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, qwz)
    devs = mt.gauge_reduction_deviation(spec, "x", np.pi / 3, [10, 30])
    assert devs[0][1] > devs[1][1] > 0
    assert mt.gauge_reduction_exponent(devs) < 0


def test_gauge_reduction_requires_ascending():
    spec = mt.GaussianStateSpec.thermal(1.0, 0.0, mt.qwz_model())
    with pytest.raises(ValueError):
        mt.gauge_reduction_deviation(spec, "x", 0.0, [10, 6])


def test_pump_reduces_to_egp_winding(qwz):
    beta = 0.5

    def family(t):
        return mt.ChainGaussianSpec(beta, 0.0, mt.restrict_model(qwz, "x", t))

    winding = mt.pump_winding(family, 10, mt.momentum_line(24))
    spec = mt.GaussianStateSpec.thermal(beta, 0.0, qwz)
    cx, _ = mt.egp_windings(spec, 10, 24)
    assert winding == cx == 1


def test_pump_constant_family_is_trivial(qwz):
    chain = mt.restrict_model(qwz, "x", 0.3)

    def family(t):
        return mt.ChainGaussianSpec(1.0, 0.0, chain)

    assert mt.pump_winding(family, 8, np.linspace(0, 1, 12, endpoint=False)) == 0


def rice_mele_matrix(k, t):
    hop_sum = 1.0 + 0.6 * np.cos(2 * np.pi * t) + np.cos(k)
    stagger = 0.9 * np.sin(2 * np.pi * t)
    return mt.bloch_matrix_from_d((hop_sum, np.sin(k), stagger))


def test_pump_rice_mele_thermal_matches_pure_oracle():
    t_grid = np.linspace(0, 1, 24, endpoint=False)

    # oracle: plaquette Chern number of the pure lower band on the (k, t) torus
    frame = mt.states_on_grid(lambda k, t: rice_mele_matrix(k, t),
                              mt.momentum_line(32), t_grid, 0)
    expected = mt.chern_number(mt.berry_curvature_plaquette(frame))

    def family(t):
        return mt.ChainGaussianSpec(2.0, 0.0, mt.BlochModel1D(
            p=2, evaluator=lambda k, t=t: rice_mele_matrix(k, t), name="rice-mele"))

    assert mt.pump_winding(family, 12, t_grid) == expected
    assert expected != 0


def test_trace_determinant_transpose_insensitive():
    rng = np.random.default_rng(23)
    h = random_hermitian(rng, 5)
    w, v = np.linalg.eigh(h)
    corr = (v * (1 / (np.exp(w) + 1))) @ v.conj().T
    thetas = rng.uniform(-np.pi, np.pi, size=5)
    a = mt.gaussian_trace_diagonal_unitary(corr, thetas)
    b = mt.gaussian_trace_diagonal_unitary(corr.T, thetas)
    assert abs(a.value - b.value) <= 1e-12


def test_oracle_covariance_matches_fermi_transpose():
    """Cross-check the Fock oracle itself: <c^dag c> = [fermi(g)]^T."""
    rng = np.random.default_rng(31)
    g = random_hermitian(rng, 4)
    w, v = np.linalg.eigh(g)
    fermi = (v * (1 / (np.exp(w) + 1))) @ v.conj().T
    assert np.abs(covariance_from_g(g) - fermi.T).max() <= 1e-12
