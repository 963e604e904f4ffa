"""
FiberSuperradiance - Cooperative Emission of Atoms Near a Nanofiber

A package for simulating the collective spontaneous emission of N two-level
atoms arrayed along an optical nanofiber, and the share of the emitted energy
that is channeled into the guided modes.

This package includes:
- An exact density-matrix solver of the master equation for small N
- A permutation-invariant Dicke-basis solver for the ideal string up to N ~ 100
- Closed-form results for the symmetric state and the mean-field theory
- A command-line front end writing CSV/JSON data

Quick Start
-----------
>>> import fibersuperradiance as fs
>>> rates = fs.make_rates(0.26, 1.06)
>>> fs.symmetric_fraction(100, rates)  # ~0.9608
>>> fs.evolve_dicke(rates, fs.InitialStateSpec.product(0.0), 10)

CLI Commands (after installation)
----------------------------------
fibersuperradiance analytic  - Closed-form summaries and time series
fibersuperradiance evolve    - Exact or Dicke-basis trajectories
fibersuperradiance sweep     - Guided fraction versus atom number
fibersuperradiance length    - Cooperativity length
fibersuperradiance figure    - Preset data sets
fibersuperradiance-validate  - Check the installed dependencies
"""

__version__ = "1.0.0"
__author__ = "Sylvain Bertaina"
__email__ = "sylvain.bertaina@cnrs.fr"

from . import errors
from .core import (
    CouplingMatrix,
    DecayRates,
    DickeSpace,
    DickeState,
    GeometryMetadata,
    InitialStateSpec,
    IntegratorConfig,
    MeanFieldParams,
    MeanFieldPeak,
    MonotonicDecrease,
    MultiplicityConvention,
    StateKind,
    Trajectory,
    collective_rate,
    cooperativity_length,
    encode_initial,
    enumerate_blocks,
    evolve_dicke,
    evolve_exact,
    ideal_string_matrix,
    load_coupling_matrix,
    load_rate_table,
    make_rates,
    meanfield_fraction,
    meanfield_params,
    meanfield_peak,
    symmetric_fraction,
    symmetric_solution,
    trajectory_energies,
)

__all__ = [
    # Version info
    "__version__",
    "__author__",
    "__email__",
    "errors",
    # Model
    "DecayRates",
    "make_rates",
    "CouplingMatrix",
    "ideal_string_matrix",
    "load_coupling_matrix",
    "StateKind",
    "InitialStateSpec",
    "GeometryMetadata",
    "load_rate_table",
    "Trajectory",
    "trajectory_energies",
    "cooperativity_length",
    "IntegratorConfig",
    # Solvers
    "evolve_exact",
    "MultiplicityConvention",
    "DickeSpace",
    "DickeState",
    "enumerate_blocks",
    "encode_initial",
    "evolve_dicke",
    # Analytics
    "collective_rate",
    "symmetric_solution",
    "symmetric_fraction",
    "MeanFieldParams",
    "MeanFieldPeak",
    "MonotonicDecrease",
    "meanfield_params",
    "meanfield_peak",
    "meanfield_fraction",
]


def get_version():
    """Return the version of FiberSuperradiance."""
    return __version__


def validate_installation():
    """
    Validate that all required dependencies are installed.

    Returns
    -------
    bool
        True if all dependencies are available

    Raises
    ------
    ImportError
        If a required dependency is missing
    """
    required = ["numpy", "scipy", "joblib"]
    missing = []

    for package in required:
        try:
            __import__(package)
        except ImportError:
            missing.append(package)

    if missing:
        raise ImportError(
            f"Missing required packages: {', '.join(missing)}\n"
            f"Install with: pip install {' '.join(missing)}"
        )

    print("✓ All required dependencies are installed")
    print(f"✓ FiberSuperradiance version {__version__}")
    return True
