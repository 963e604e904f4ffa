"""
Unit tests for the exact density-matrix solver.

Tests state construction, the Liouvillian (split against literal double sum),
correlation functions and full trajectories against the collective rate law.
"""

import logging
import math

import numpy as np
import pytest

from tests.conftest import random_density_matrix, validate_density_matrix
from fibersuperradiance import errors
from fibersuperradiance.core.exact import (
    DensityMatrix,
    build_density_matrix,
    correlation_matrix,
    evolve_exact,
    lindblad_derivative,
    lindblad_derivative_naive,
)
from fibersuperradiance.core.integrator import IntegratorConfig, integrate_sampled
from fibersuperradiance.core.model import (
    InitialStateSpec,
    ideal_string_matrix,
    load_coupling_matrix,
    trajectory_energies,
    trajectory_peak,
)

RATE_LAW_CONFIG = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-13, sample_count=81)


def random_coupling(n, seed=1):
    """Random PSD coupling matrix with a guided part."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    guided = 0.3 * np.outer(np.ones(n), np.ones(n))
    return load_coupling_matrix(a @ a.T / n + guided, guided)


class TestBuildDensityMatrix:
    """Test initial density matrices."""

    def test_symmetric_two_atoms(self):
        """Test (|01> + |10>)/sqrt(2)."""
        rho = build_density_matrix(InitialStateSpec.symmetric(), 2).entries
        expected = np.zeros((4, 4))
        expected[np.ix_([1, 2], [1, 2])] = 0.5
        np.testing.assert_allclose(rho, expected, atol=1e-15)

    def test_full_excitation(self):
        """Test that theta = 0 gives |111><111|."""
        rho = build_density_matrix(InitialStateSpec.product(0.0), 3).entries
        assert rho[7, 7] == pytest.approx(1.0)
        assert np.sum(np.abs(rho)) == pytest.approx(1.0)

    def test_single_atom_superposition(self):
        """Test theta = pi/2 for one atom."""
        rho = build_density_matrix(InitialStateSpec.product(math.pi / 2), 1).entries
        np.testing.assert_allclose(rho, 0.5 * np.ones((2, 2)), atol=1e-15)

    @pytest.mark.parametrize("theta,phi", [(0.4, 0.0), (math.pi / 2, 1.3), (2.5, 4.0)])
    def test_valid_density_matrix(self, theta, phi):
        """Test Hermiticity, trace and positivity of product states."""
        rho = build_density_matrix(InitialStateSpec.product(theta, phi), 4).entries
        assert validate_density_matrix(rho)

    def test_atom_cap(self):
        """Test the refusal above the cap and its memory estimate."""
        with pytest.raises(errors.AtomCountExceedsCap) as info:
            build_density_matrix(InitialStateSpec.symmetric(), 11)
        assert info.value.memory_bytes == 16 * 4**11
        assert "MiB" in str(info.value)

    def test_lower_cap(self):
        """Test that an explicit cap below n refuses the run."""
        with pytest.raises(errors.AtomCountExceedsCap):
            build_density_matrix(InitialStateSpec.symmetric(), 3, atom_cap=2)

    def test_raised_cap_logs_memory(self, caplog):
        """Test that runs above the default cap log their memory estimate."""
        with caplog.at_level(logging.INFO, logger="fibersuperradiance.core.exact"):
            rho = build_density_matrix(InitialStateSpec.product(0.0), 11, atom_cap=11)
        assert rho.n_atoms == 11
        assert "64.0 MiB" in caplog.text

    def test_default_cap_is_quiet(self, caplog):
        """Test that small runs log no memory estimate."""
        with caplog.at_level(logging.INFO, logger="fibersuperradiance.core.exact"):
            build_density_matrix(InitialStateSpec.product(0.0), 3)
        assert "MiB" not in caplog.text

    def test_dimension_mismatch(self):
        """Test that a matrix of the wrong size is rejected."""
        with pytest.raises(errors.DimensionMismatch):
            DensityMatrix(2, np.eye(3))


class TestLindbladDerivative:
    """Test the master-equation right-hand side."""

    def test_single_atom_decay(self):
        """Test the excited state of one atom with gamma = 1."""
        coupling = load_coupling_matrix([[1.0]])
        rho = np.diag([0.0, 1.0]).astype(complex)
        derivative = lindblad_derivative(rho, coupling)
        np.testing.assert_allclose(derivative, np.diag([1.0, -1.0]), atol=1e-15)

    def test_ground_state_stationary(self):
        """Test that the ground state is a fixed point."""
        coupling = load_coupling_matrix([[1.0]])
        rho = np.diag([1.0, 0.0]).astype(complex)
        np.testing.assert_allclose(lindblad_derivative(rho, coupling), 0.0, atol=1e-15)

    def test_collective_rate_two_atoms(self, anchor_rates):
        """Test that the symmetric state decays at gamma_rad + 2 gamma_guided."""
        state = build_density_matrix(InitialStateSpec.symmetric(), 2)
        derivative = lindblad_derivative(state, ideal_string_matrix(2, anchor_rates))
        rate = np.trace(state.entries @ derivative).real
        assert rate == pytest.approx(-1.58)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_split_matches_naive(self, n, anchor_rates):
        """Test the ideal-string split against the literal double sum."""
        coupling = ideal_string_matrix(n, anchor_rates)
        rho = random_density_matrix(2**n, seed=n)
        np.testing.assert_allclose(
            lindblad_derivative(rho, coupling),
            lindblad_derivative_naive(rho, coupling),
            rtol=0,
            atol=1e-12,
        )

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_general_coupling_matches_naive(self, n):
        """Test the eigen-decomposed evaluation for a random coupling."""
        coupling = random_coupling(n, seed=n)
        rho = random_density_matrix(2**n, seed=10 + n)
        np.testing.assert_allclose(
            lindblad_derivative(rho, coupling),
            lindblad_derivative_naive(rho, coupling),
            rtol=0,
            atol=1e-12,
        )

    def test_trace_preserving(self, anchor_rates):
        """Test that the derivative is traceless and Hermitian."""
        rho = random_density_matrix(8, seed=3)
        derivative = lindblad_derivative(rho, ideal_string_matrix(3, anchor_rates))
        assert abs(np.trace(derivative)) < 1e-13
        np.testing.assert_allclose(derivative, derivative.conj().T, atol=1e-13)

    def test_dimension_mismatch(self, anchor_rates):
        """Test that a state of the wrong size is rejected."""
        with pytest.raises(errors.DimensionMismatch):
            lindblad_derivative(np.eye(4) / 4, ideal_string_matrix(3, anchor_rates))


class TestCorrelationMatrix:
    """Test <sigma_i^dagger sigma_j>."""

    def test_product_state(self):
        """Test populations and pair correlations of a half-excited product state."""
        rho = build_density_matrix(InitialStateSpec.product(math.pi / 2), 3)
        corr = correlation_matrix(rho, 3)
        np.testing.assert_allclose(np.diag(corr), 0.5, atol=1e-14)
        np.testing.assert_allclose(corr[~np.eye(3, dtype=bool)], 0.25, atol=1e-14)

    def test_symmetric_state(self):
        """Test that every entry equals 1/N for the symmetric state."""
        rho = build_density_matrix(InitialStateSpec.symmetric(), 4)
        np.testing.assert_allclose(correlation_matrix(rho, 4), 0.25, atol=1e-14)

    def test_hermitian(self):
        """Test Hermiticity for a random state."""
        corr = correlation_matrix(random_density_matrix(8, seed=5), 3)
        np.testing.assert_allclose(corr, corr.conj().T, atol=1e-14)


class TestEvolveExact:
    """Test exact trajectories."""

    def test_single_atom(self, anchor_rates):
        """Test single-atom exponential decay."""
        traj = evolve_exact(
            ideal_string_matrix(1, anchor_rates), InitialStateSpec.product(0.0), RATE_LAW_CONFIG
        )
        np.testing.assert_allclose(traj.population, np.exp(-1.32 * traj.times), rtol=1e-6)
        assert traj.solver == "exact"

    @pytest.mark.parametrize("n", range(1, 9))
    def test_collective_rate_law(self, n, anchor_rates):
        """Test P(t) = exp(-(gamma_rad + n gamma_guided) t) for the symmetric state."""
        traj = evolve_exact(
            ideal_string_matrix(n, anchor_rates), InitialStateSpec.symmetric(), RATE_LAW_CONFIG
        )
        expected = np.exp(-(1.06 + n * 0.26) * traj.times)
        np.testing.assert_allclose(traj.population, expected, rtol=1e-6)

    @pytest.mark.parametrize("spec", [InitialStateSpec.symmetric(), InitialStateSpec.product(0.0),
                                      InitialStateSpec.product(math.pi / 2, 0.7)])
    def test_trajectory_properties(self, spec, anchor_rates):
        """Test monotone population, energy budget and rate equations."""
        traj = evolve_exact(ideal_string_matrix(4, anchor_rates), spec)
        assert np.all(np.diff(traj.population) <= 1e-9)
        assert np.all(traj.jpjm >= -1e-9)
        energies = trajectory_energies(traj)
        assert abs(energies.budget_residual) < 1e-4
        assert 0.0 <= energies.f_guided <= 1.0

        slope = np.gradient(traj.population, traj.times, edge_order=2)
        scale = np.max(np.abs(slope))
        np.testing.assert_allclose(slope, -traj.i_total, atol=1e-3 * scale)
        rate_equation = -1.32 * traj.population - 0.26 * (traj.jpjm - traj.population)
        np.testing.assert_allclose(slope, rate_equation, atol=1e-3 * scale)

    @pytest.mark.parametrize("spec", [InitialStateSpec.symmetric(), InitialStateSpec.product(0.0),
                                      InitialStateSpec.product(1.1, 0.4)])
    def test_state_stays_physical(self, spec, anchor_rates):
        """Test trace, Hermiticity and positivity of rho(t) on every sample."""
        coupling = ideal_string_matrix(4, anchor_rates)
        rho0 = build_density_matrix(spec, 4).entries
        dim = rho0.shape[0]
        config = IntegratorConfig(t_final=2.0, sample_count=41)

        def rhs(t, y):
            return lindblad_derivative(y.reshape(dim, dim), coupling).ravel()

        def observe(index, t, y):
            rho = y.reshape(dim, dim)
            return (
                abs(np.trace(rho) - 1),
                np.max(np.abs(rho - rho.conj().T)),
                np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0],
            )

        times = config.sample_times(1.0)
        samples = np.array(integrate_sampled(rhs, rho0.ravel(), times, observe, config))
        assert samples.shape == (41, 3)
        assert np.all(samples[:, 0] < 1e-8)
        assert np.all(samples[:, 1] < 1e-10)
        assert np.all(samples[:, 2] > -1e-6)

    def test_general_coupling(self):
        """Test a loaded coupling with a guided split."""
        coupling = random_coupling(3)
        traj = evolve_exact(coupling, InitialStateSpec.product(0.0))
        assert traj.i_guided[0] > 0
        assert abs(trajectory_energies(traj).budget_residual) < 1e-4

    def test_refuses_large_n(self, anchor_rates):
        """Test that n = 20 is refused before any allocation."""
        with pytest.raises(errors.AtomCountExceedsCap):
            evolve_exact(ideal_string_matrix(20, anchor_rates), InitialStateSpec.symmetric())

    @pytest.mark.slow
    def test_ten_atoms_full_excitation(self, anchor_rates):
        """Test the burst of ten fully excited atoms."""
        config = IntegratorConfig(t_final=4.0, sample_count=801, positivity_checks=2)
        traj = evolve_exact(ideal_string_matrix(10, anchor_rates), InitialStateSpec.product(0.0), config)
        assert traj.i_guided[0] / 10 == pytest.approx(0.26, abs=1e-6)
        peak = trajectory_peak(traj)
        assert peak is not None
        t_max, i_max = peak
        assert t_max > 0
        assert i_max > traj.i_guided[0]
        assert abs(trajectory_energies(traj).budget_residual) < 1e-4
