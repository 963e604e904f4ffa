"""
Core simulation modules for FiberSuperradiance.

This module provides the model definitions, the exact and permutation-invariant
master-equation solvers and the closed-form emission results.
"""

from .analytics import (
    MeanFieldParams,
    MeanFieldPeak,
    MonotonicDecrease,
    collective_rate,
    meanfield_fraction,
    meanfield_fraction_full,
    meanfield_guided_energy,
    meanfield_initial_intensity,
    meanfield_intensity,
    meanfield_ode,
    meanfield_params,
    meanfield_peak,
    meanfield_population,
    meanfield_summary,
    meanfield_validity,
    success_probability,
    symmetric_fraction,
    symmetric_solution,
)
from .dicke import (
    DickeSpace,
    DickeState,
    MultiplicityConvention,
    dicke_basis,
    dicke_derivative,
    dicke_observables,
    encode_initial,
    enumerate_blocks,
    evolve_dicke,
    from_full_density_matrix,
    propagate_dicke,
    to_full_density_matrix,
)
from .exact import (
    DensityMatrix,
    build_density_matrix,
    correlation_matrix,
    evolve_exact,
    lindblad_derivative,
    lindblad_derivative_naive,
)
from .integrator import IntegratorConfig
from .model import (
    CouplingMatrix,
    DecayRates,
    GeometryMetadata,
    InitialStateSpec,
    RateTable,
    StateKind,
    Trajectory,
    TrajectoryEnergies,
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

__all__ = [
    # model exports
    "DecayRates",
    "make_rates",
    "CouplingMatrix",
    "ideal_string_matrix",
    "load_coupling_matrix",
    "StateKind",
    "InitialStateSpec",
    "product_state_moments",
    "GeometryMetadata",
    "RateTable",
    "load_rate_table",
    "Trajectory",
    "TrajectoryEnergies",
    "trajectory_energies",
    "channel_fractions",
    "guided_intensity_from_population",
    "trajectory_peak",
    "cooperativity_length",
    "IntegratorConfig",
    # exact solver exports
    "DensityMatrix",
    "build_density_matrix",
    "lindblad_derivative",
    "lindblad_derivative_naive",
    "correlation_matrix",
    "evolve_exact",
    # dicke solver exports
    "MultiplicityConvention",
    "DickeSpace",
    "DickeState",
    "enumerate_blocks",
    "encode_initial",
    "dicke_derivative",
    "dicke_observables",
    "evolve_dicke",
    "propagate_dicke",
    "dicke_basis",
    "to_full_density_matrix",
    "from_full_density_matrix",
    # analytics exports
    "collective_rate",
    "symmetric_solution",
    "symmetric_fraction",
    "success_probability",
    "MeanFieldParams",
    "MeanFieldPeak",
    "MonotonicDecrease",
    "meanfield_params",
    "meanfield_population",
    "meanfield_intensity",
    "meanfield_initial_intensity",
    "meanfield_peak",
    "meanfield_fraction",
    "meanfield_fraction_full",
    "meanfield_guided_energy",
    "meanfield_validity",
    "meanfield_ode",
    "meanfield_summary",
]
