"""
Pytest configuration and shared fixtures for FiberSuperradiance tests.
"""

from itertools import permutations

import numpy as np
import pytest

from fibersuperradiance import IntegratorConfig, make_rates

# Rates for r - a = 100 nm (gamma0 units)
GAMMA_GUIDED = 0.26
GAMMA_RAD = 1.06


@pytest.fixture
def anchor_rates():
    """Provide the guided and radiative rates of the 100 nm anchor."""
    return make_rates(GAMMA_GUIDED, GAMMA_RAD)


@pytest.fixture
def tight_integrator():
    """Provide an integrator config tight enough for solver comparisons."""
    return IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, t_final=3.0, sample_count=61)


@pytest.fixture
def tolerance():
    """Provide numerical tolerance for comparisons."""
    return {
        "atol": 1e-10,  # Absolute tolerance
        "rtol": 1e-8,  # Relative tolerance
    }


def random_density_matrix(dim, seed=0):
    """Random full-rank density matrix of dimension ``dim``."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def permutation_average(rho, n):
    """Symmetrize a density matrix over all atom permutations."""
    dim = 2**n
    total = np.zeros_like(rho)
    count = 0
    for perm in permutations(range(n)):
        index = np.zeros(dim, dtype=int)
        for state in range(dim):
            image = 0
            for atom in range(n):
                if (state >> atom) & 1:
                    image |= 1 << perm[atom]
            index[state] = image
        total += rho[np.ix_(index, index)]
        count += 1
    return total / count


def validate_density_matrix(rho, tol=1e-10):
    """
    Validate that a matrix is a proper density matrix.

    Parameters
    ----------
    rho : np.ndarray
        Matrix to validate
    tol : float
        Numerical tolerance

    Returns
    -------
    bool
        True if valid, raises AssertionError otherwise
    """
    # Check hermiticity
    assert np.allclose(rho, rho.conj().T, atol=tol), "Density matrix not Hermitian"

    # Check trace = 1
    trace = np.trace(rho)
    assert np.isclose(trace, 1.0, atol=tol), f"Trace = {trace}, expected 1.0"

    # Check positive semidefinite
    eigenvalues = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    assert np.all(eigenvalues >= -tol), f"Negative eigenvalues: {eigenvalues}"

    return True


@pytest.fixture
def validation_functions():
    """Provide validation helper functions."""
    return {
        "density_matrix": validate_density_matrix,
        "random_density_matrix": random_density_matrix,
        "permutation_average": permutation_average,
    }
