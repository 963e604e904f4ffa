"""
Unit tests for the model module.

Tests decay rates, coupling matrices, initial-state specifications, the rate
table reader and trajectory post-processing.
"""

import math

import numpy as np
import pytest

from fibersuperradiance import errors
from fibersuperradiance.core.model import (
    DEFAULT_RATE_TABLE,
    GeometryMetadata,
    InitialStateSpec,
    StateKind,
    Trajectory,
    channel_fractions,
    cooperativity_length,
    guided_intensity_from_population,
    ideal_string_matrix,
    load_coupling_matrix,
    load_rate_table,
    make_rates,
    product_state_moments,
    trajectory_energies,
    trajectory_peak,
)


def exponential_trajectory(n, rates, decay_rate, t_final=20.0, samples=4001):
    """Trajectory of an exponential decay with the given channel rates."""
    times = np.linspace(0.0, t_final, samples)
    population = np.exp(-decay_rate * times)
    return Trajectory(
        times=times,
        population=population,
        jpjm=n * population,
        i_guided=n * rates.gamma_guided * population,
        i_rad=rates.gamma_rad * population,
        n_atoms=n,
        solver="analytic",
    )


class TestDecayRates:
    """Test DecayRates construction."""

    def test_anchor_rates(self, anchor_rates):
        """Test derived quantities of the 100 nm anchor."""
        assert anchor_rates.gamma_total == pytest.approx(1.32)
        assert anchor_rates.eta == pytest.approx(0.2453, abs=1e-4)

    def test_zero_guided_rate(self):
        """Test that a vanishing guided rate is allowed."""
        rates = make_rates(0.0, 1.0)
        assert rates.gamma_total == 1.0
        assert rates.eta == 0.0

    def test_negative_rate_rejected(self):
        """Test that negative rates are rejected."""
        with pytest.raises(errors.NegativeRate):
            make_rates(-0.1, 1.0)
        with pytest.raises(errors.NegativeRate):
            make_rates(0.1, -1.0)

    def test_zero_radiation_rate_rejected(self):
        """Test that gamma_rad = 0 is rejected."""
        with pytest.raises(errors.ZeroRadiationRate):
            make_rates(0.5, 0.0)

    def test_non_finite_rejected(self):
        """Test that non-finite rates are rejected as ValueError."""
        with pytest.raises(ValueError):
            make_rates(np.nan, 1.0)


class TestCouplingMatrix:
    """Test coupling matrix construction and validation."""

    def test_single_atom(self, anchor_rates):
        """Test the 1x1 ideal string."""
        coupling = ideal_string_matrix(1, anchor_rates)
        np.testing.assert_allclose(coupling.entries, [[1.32]])
        assert coupling.ideal_string

    def test_three_atoms(self, anchor_rates):
        """Test diagonal and off-diagonal entries of the ideal string."""
        entries = ideal_string_matrix(3, anchor_rates).entries
        np.testing.assert_allclose(np.diag(entries), 1.32)
        np.testing.assert_allclose(entries[~np.eye(3, dtype=bool)], 0.26)

    def test_two_atom_eigenvalues(self):
        """Test the eigenvalues of a 2x2 ideal string."""
        coupling = ideal_string_matrix(2, make_rates(0.5, 0.5))
        np.testing.assert_allclose(np.linalg.eigvalsh(coupling.entries), [0.5, 1.5])

    @pytest.mark.parametrize("n", range(1, 9))
    def test_ideal_string_spectrum(self, n, anchor_rates):
        """Test that the ideal string is PSD with the collective eigenvalue on top."""
        eigenvalues = np.linalg.eigvalsh(ideal_string_matrix(n, anchor_rates).entries)
        expected = [1.06] * (n - 1) + [1.06 + n * 0.26]
        np.testing.assert_allclose(eigenvalues, expected, atol=1e-12)

    def test_invalid_atom_count(self, anchor_rates):
        """Test that n < 1 is rejected."""
        with pytest.raises(errors.InvalidAtomCount):
            ideal_string_matrix(0, anchor_rates)

    def test_identity_accepted(self):
        """Test that two independent atoms are accepted."""
        coupling = load_coupling_matrix(np.eye(2))
        assert coupling.n == 2
        assert not coupling.ideal_string

    def test_not_psd(self):
        """Test that an indefinite matrix reports its smallest eigenvalue."""
        with pytest.raises(errors.NotPositiveSemidefinite) as info:
            load_coupling_matrix([[1.0, 2.0], [2.0, 1.0]])
        assert info.value.smallest_eigenvalue == pytest.approx(-1.0)

    def test_not_symmetric(self):
        """Test that an asymmetric matrix is rejected."""
        with pytest.raises(errors.NotSymmetric):
            load_coupling_matrix([[1.0, 0.2], [0.1, 1.0]])

    def test_round_trip_drops_flag(self, anchor_rates):
        """Test that reloading an ideal string clears the ideal-string flag."""
        ideal = ideal_string_matrix(3, anchor_rates)
        loaded = load_coupling_matrix(ideal.entries)
        np.testing.assert_array_equal(loaded.entries, ideal.entries)
        assert not loaded.ideal_string

    def test_entries_read_only(self, anchor_rates):
        """Test that the stored matrix cannot be modified."""
        coupling = ideal_string_matrix(2, anchor_rates)
        with pytest.raises(ValueError):
            coupling.entries[0, 0] = 5.0

    def test_guided_part(self, anchor_rates):
        """Test the guided split of the ideal string and of a loaded matrix."""
        np.testing.assert_allclose(ideal_string_matrix(2, anchor_rates).guided_part, 0.26)
        np.testing.assert_array_equal(load_coupling_matrix(np.eye(2)).guided_part, 0.0)


class TestInitialStateSpec:
    """Test initial-state specifications."""

    def test_symmetric(self):
        """Test the symmetric one-excitation spec."""
        spec = InitialStateSpec.symmetric()
        assert spec.kind is StateKind.SYMMETRIC_ONE_EXCITATION
        assert spec.initial_population(7) == 1.0

    @pytest.mark.parametrize("theta", [-0.1, math.pi + 0.1])
    def test_theta_range(self, theta):
        """Test that theta outside [0, pi] is rejected."""
        with pytest.raises(ValueError):
            InitialStateSpec.product(theta)

    def test_phi_range(self):
        """Test that phi outside [0, 2pi) is rejected."""
        with pytest.raises(ValueError):
            InitialStateSpec.product(0.5, 2 * math.pi)

    def test_kind_from_string(self):
        """Test that the kind may be given by value."""
        assert InitialStateSpec("product", 0.3).kind is StateKind.PRODUCT


class TestProductStateMoments:
    """Test population and pair correlation of product states."""

    def test_full_excitation(self):
        """Test theta = 0."""
        assert product_state_moments(InitialStateSpec.product(0.0), 10) == (10.0, 0.0)

    def test_half_excitation(self):
        """Test theta = pi/2."""
        p0, c0 = product_state_moments(InitialStateSpec.product(math.pi / 2), 10)
        assert p0 == pytest.approx(5.0)
        assert c0 == pytest.approx(0.25)
        assert 10 * 9 * c0 == pytest.approx(22.5)

    def test_ground_state(self):
        """Test theta = pi."""
        p0, c0 = product_state_moments(InitialStateSpec.product(math.pi), 4)
        assert p0 == pytest.approx(0.0, abs=1e-15)
        assert c0 == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("theta", np.linspace(0.0, math.pi, 13))
    def test_mean_field_identity(self, theta):
        """Test C0 = P0 (n - P0) / n^2 over a theta grid."""
        n = 7
        p0, c0 = product_state_moments(InitialStateSpec.product(theta), n)
        assert c0 == pytest.approx(p0 * (n - p0) / n**2, abs=1e-15)

    def test_wrong_kind(self):
        """Test that the symmetric spec is rejected."""
        with pytest.raises(errors.WrongKind):
            product_state_moments(InitialStateSpec.symmetric(), 3)


class TestGeometryMetadata:
    """Test geometry provenance validation."""

    def test_defaults(self):
        """Test the default geometry and its echo."""
        geometry = GeometryMetadata(spacing_multiples=(1, 2, 3))
        echo = geometry.to_dict()
        assert echo["fiber_radius_nm"] == 200.0
        assert echo["wavelength_nm"] == 852.0
        assert echo["spacing_multiples"] == [1, 2, 3]

    def test_invalid_spacing(self):
        """Test that non-positive spacing multiples are rejected."""
        with pytest.raises(ValueError):
            GeometryMetadata(spacing_multiples=(1, 0))

    def test_atoms_on_surface(self):
        """Test that r - a = 0 is accepted and negative distances are not."""
        echo = GeometryMetadata(atom_surface_distance_nm=0.0).to_dict()
        assert echo["atom_surface_distance_nm"] == 0.0
        with pytest.raises(errors.ParameterError):
            GeometryMetadata(atom_surface_distance_nm=-1.0)

    @pytest.mark.parametrize("name", ["fiber_radius_nm", "wavelength_nm"])
    def test_lengths_positive(self, name):
        """Test that fiber radius and wavelength must be > 0."""
        with pytest.raises(errors.ParameterError):
            GeometryMetadata(**{name: 0.0})

    def test_index_order(self):
        """Test that the core index must exceed the cladding index."""
        with pytest.raises(ValueError):
            GeometryMetadata(core_index=1.0, clad_index=1.45)


class TestRateTable:
    """Test the shipped rate table and the reader's validation."""

    def test_shipped_anchor(self):
        """Test the 100 nm anchor of the shipped table."""
        table = load_rate_table(DEFAULT_RATE_TABLE)
        rates = table.lookup(100.0)
        assert rates.gamma_guided == pytest.approx(0.26)
        assert rates.gamma_rad == pytest.approx(1.06)

    def test_no_extrapolation(self):
        """Test that lookups outside the table fail."""
        table = load_rate_table()
        assert not table.covers(200.0)
        with pytest.raises(errors.RateTableError):
            table.lookup(200.0)

    def test_linear_interpolation(self, tmp_path):
        """Test interpolation between two rows."""
        path = tmp_path / "rates.csv"
        path.write_text("distance_nm,gamma_guided,gamma_rad\n0,0.5,1.5\n100,0.3,1.1\n")
        rates = load_rate_table(path).lookup(50.0)
        assert rates.gamma_guided == pytest.approx(0.4)
        assert rates.gamma_rad == pytest.approx(1.3)

    def test_bad_header(self, tmp_path):
        """Test that a wrong header is rejected."""
        path = tmp_path / "rates.csv"
        path.write_text("d,g,r\n100,0.26,1.06\n")
        with pytest.raises(errors.RateTableError):
            load_rate_table(path)

    def test_unsorted_rows(self, tmp_path):
        """Test that unsorted distances are rejected."""
        path = tmp_path / "rates.csv"
        path.write_text("distance_nm,gamma_guided,gamma_rad\n100,0.26,1.06\n50,0.3,1.1\n")
        with pytest.raises(errors.RateTableError):
            load_rate_table(path)


class TestTrajectory:
    """Test trajectory validation and post-processing."""

    def test_total_intensity(self, anchor_rates):
        """Test that i_total is the pointwise sum of the channels."""
        traj = exponential_trajectory(1, anchor_rates, 1.32, samples=11)
        np.testing.assert_array_equal(traj.i_total, traj.i_guided + traj.i_rad)
        assert len(list(traj.to_rows())) == 11

    def test_empty(self):
        """Test that an empty trajectory is rejected."""
        with pytest.raises(errors.EmptyTrajectory):
            Trajectory([], [], [], [], [], n_atoms=1)

    def test_non_monotonic_times(self):
        """Test that repeated sample times are rejected."""
        with pytest.raises(errors.NonMonotonicTimes):
            Trajectory([0.0, 1.0, 1.0], [1, 0.5, 0.2], [1, 0.5, 0.2], [0, 0, 0], [0, 0, 0], 1)

    def test_population_bounds(self):
        """Test that a population above N is flagged."""
        with pytest.raises(errors.PositivityViolation):
            Trajectory([0.0, 1.0], [1.0, 2.5], [1.0, 1.0], [0, 0], [0, 0], n_atoms=2)

    def test_single_atom_fraction(self, anchor_rates):
        """Test the single-atom guided fraction 0.26/1.32."""
        energies = trajectory_energies(exponential_trajectory(1, anchor_rates, 1.32))
        assert energies.f_guided == pytest.approx(0.26 / 1.32, abs=1e-3)
        assert abs(energies.budget_residual) < 1e-4

    def test_symmetric_fraction(self, anchor_rates):
        """Test the N = 100 symmetric-state guided fraction."""
        traj = exponential_trajectory(100, anchor_rates, 27.06, t_final=1.0, samples=20001)
        energies = trajectory_energies(traj)
        assert energies.f_guided == pytest.approx(0.9608, abs=1e-3)
        assert energies.truncation_bound == pytest.approx(math.exp(-27.06))

    def test_zero_guided(self):
        """Test that no guided intensity gives f_guided = 0."""
        rates = make_rates(0.0, 1.0)
        energies = trajectory_energies(exponential_trajectory(1, rates, 1.0))
        assert energies.f_guided == 0.0

    def test_energy_properties(self, anchor_rates):
        """Test fraction bounds and the energy budget."""
        traj = exponential_trajectory(1, anchor_rates, 1.32, t_final=5.0)
        u_guided, u_rad, f_guided, bound, residual = trajectory_energies(traj)
        assert 0.0 <= f_guided <= 1.0
        assert u_guided + u_rad <= traj.population[0]
        assert bound == pytest.approx(traj.population[-1])
        assert abs(residual) < 1e-5

    def test_channel_fractions_no_energy(self):
        """Test the zero-energy convention."""
        assert channel_fractions(0.0, 0.0) == (0.0, 0.0)
        assert channel_fractions(1.0, 3.0) == pytest.approx((0.25, 0.75))

    def test_guided_intensity_reconstruction(self, anchor_rates):
        """Test -(dP/dt + gamma_rad P) against the stored guided intensity."""
        traj = exponential_trajectory(4, anchor_rates, 1.06 + 4 * 0.26, t_final=3.0)
        reconstructed = guided_intensity_from_population(traj, anchor_rates)
        np.testing.assert_allclose(reconstructed, traj.i_guided, atol=1e-4)

    def test_peak_detection(self):
        """Test interior peak detection and its absence for monotonic decay."""
        times = np.linspace(0.0, 4.0, 401)
        bump = 1.0 + times * np.exp(-2.0 * times)
        traj = Trajectory(times, bump / 2, bump, bump, np.zeros_like(times), n_atoms=2)
        t_max, i_max = trajectory_peak(traj)
        assert t_max == pytest.approx(0.5, abs=0.01)
        assert i_max == pytest.approx(1.0 + 0.5 * math.exp(-1.0), abs=1e-4)
        rates = make_rates(0.26, 1.06)
        assert trajectory_peak(exponential_trajectory(1, rates, 1.32)) is None


class TestCooperativityLength:
    """Test the cooperativity length."""

    def test_hundred_atoms(self, anchor_rates):
        """Test L0 for N = 100 and a 5.3 MHz linewidth."""
        assert cooperativity_length(100, anchor_rates, 5.3) == pytest.approx(0.33, abs=0.01)

    def test_unit_identity(self):
        """Test Gamma = gamma0 and gamma0/2pi = 1/(2pi) MHz gives c/1e6."""
        length = cooperativity_length(1, make_rates(0.0, 1.0), 1.0 / (2 * math.pi))
        assert length == pytest.approx(299.792458)

    def test_ten_atoms(self, anchor_rates):
        """Test L0 for N = 10."""
        assert cooperativity_length(10, anchor_rates, 5.3) == pytest.approx(2.46, abs=0.01)

    def test_decreasing_in_n(self, anchor_rates):
        """Test that L0 strictly decreases with N."""
        lengths = [cooperativity_length(n, anchor_rates, 5.3) for n in range(1, 50)]
        assert np.all(np.diff(lengths) < 0)

    @pytest.mark.parametrize("linewidth", [0.0, -1.0, np.inf])
    def test_invalid_linewidth(self, anchor_rates, linewidth):
        """Test that non-positive linewidths are rejected."""
        with pytest.raises(errors.InvalidLinewidth):
            cooperativity_length(10, anchor_rates, linewidth)
