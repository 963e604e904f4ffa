#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Model definitions shared by every solution path.

Unit conventions used throughout the package:

- rates in units of the free-space natural linewidth gamma0
- time in units of tau0 = 1/gamma0
- intensities in units of I0 = hbar*omega0*gamma0
- energies in units of hbar*omega0

This module holds the decay rates, the coupling matrix gamma_ij of the
master equation, the symbolic initial state, the geometry provenance record,
the rate table reader and the trajectory post-processing (energies,
channeling fractions, peak detection).
"""

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import constants
from scipy.integrate import trapezoid

from ..errors import (
    EmptyTrajectory,
    InvalidAtomCount,
    InvalidLinewidth,
    NegativeRate,
    NonMonotonicTimes,
    NotPositiveSemidefinite,
    NotSymmetric,
    ParameterError,
    PositivityViolation,
    RateTableError,
    WrongKind,
    ZeroRadiationRate,
)

logger = logging.getLogger(__name__)

PACKAGE_DIR = Path(__file__).resolve().parent.parent
DEFAULT_RATE_TABLE = PACKAGE_DIR / "data" / "rates_cs_d2_a200nm.csv"
RATE_TABLE_HEADER = ("distance_nm", "gamma_guided", "gamma_rad")

PSD_RELATIVE_TOLERANCE = 1e-10
OBSERVABLE_TOLERANCE = 1e-6


# =============================================================================
# RATES AND COUPLING MATRIX
# =============================================================================


@dataclass(frozen=True)
class DecayRates:
    """
    Single-atom decay rates into the fiber.

    Attributes:
    -----------
    gamma_guided : float
        Decay rate into the guided modes (gamma0 units)
    gamma_rad : float
        Decay rate into the radiation modes (gamma0 units)
    """

    gamma_guided: float
    gamma_rad: float

    def __post_init__(self):
        for name in ("gamma_guided", "gamma_rad"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NegativeRate(f"{name} must be finite, got {value}")
            if value < 0:
                raise NegativeRate(f"{name} must be >= 0, got {value}")
        if self.gamma_rad == 0:
            raise ZeroRadiationRate(
                "gamma_rad must be > 0 (the cooperativity parameter is undefined)"
            )
        object.__setattr__(self, "gamma_guided", float(self.gamma_guided))
        object.__setattr__(self, "gamma_rad", float(self.gamma_rad))

    @property
    def gamma_total(self) -> float:
        return self.gamma_guided + self.gamma_rad

    @property
    def eta(self) -> float:
        """Single-atom cooperativity parameter gamma_guided/gamma_rad."""
        return self.gamma_guided / self.gamma_rad


def make_rates(gamma_guided: float, gamma_rad: float) -> DecayRates:
    """Build validated :class:`DecayRates` (gamma0 units)."""
    return DecayRates(gamma_guided, gamma_rad)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """
    The symmetric positive-semidefinite matrix gamma_ij of the master equation.

    Attributes:
    -----------
    entries : np.ndarray
        N x N real symmetric matrix in gamma0 units (read-only)
    ideal_string : bool
        True only when built by :func:`ideal_string_matrix`
    rates : DecayRates, optional
        Rates the ideal string was built from
    guided : np.ndarray, optional
        Guided-mode part of ``entries``; used to split the emitted intensity
    """

    entries: np.ndarray
    ideal_string: bool = False
    rates: Optional[DecayRates] = None
    guided: Optional[np.ndarray] = None

    def __post_init__(self):
        entries = _validated_matrix(self.entries, "coupling matrix")
        object.__setattr__(self, "entries", entries)
        if self.guided is not None:
            guided = _validated_matrix(self.guided, "guided coupling matrix")
            if guided.shape != entries.shape:
                raise ParameterError(
                    f"guided part has shape {guided.shape}, expected {entries.shape}"
                )
            object.__setattr__(self, "guided", guided)
        if self.ideal_string:
            if self.rates is None:
                raise ParameterError("an ideal-string matrix needs its DecayRates")
            expected = _ideal_entries(self.n, self.rates)
            if not np.allclose(entries, expected, rtol=0, atol=1e-15):
                raise ParameterError("entries do not match the ideal-string form")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def guided_part(self) -> np.ndarray:
        """Guided-mode coupling, zero when no split is known."""
        if self.guided is not None:
            return self.guided
        return np.zeros_like(self.entries)


def _validated_matrix(entries, label: str) -> np.ndarray:
    matrix = np.array(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise ParameterError(f"{label} must be a non-empty square matrix")
    if not np.all(np.isfinite(matrix)):
        raise ParameterError(f"{label} has non-finite entries")
    scale = float(np.max(np.abs(np.diag(matrix))))
    worst = float(np.max(np.abs(matrix - matrix.T)))
    if worst > 1e-12 * max(scale, 1.0):
        raise NotSymmetric(f"{label} is not symmetric (max |g_ij - g_ji| = {worst:.3g})")
    matrix = 0.5 * (matrix + matrix.T)
    tolerance = PSD_RELATIVE_TOLERANCE * max(scale, np.finfo(float).tiny)
    smallest = float(np.linalg.eigvalsh(matrix)[0])
    if smallest < -tolerance:
        raise NotPositiveSemidefinite(smallest, tolerance)
    matrix.setflags(write=False)
    return matrix


def _ideal_entries(n: int, rates: DecayRates) -> np.ndarray:
    return rates.gamma_guided * np.ones((n, n)) + rates.gamma_rad * np.eye(n)


def ideal_string_matrix(n: int, rates: DecayRates) -> CouplingMatrix:
    """
    Coupling matrix for atoms spaced by integer multiples of the fiber period.

    Every guided transfer coefficient attains its maximum, so the matrix is
    gamma_guided * ones + gamma_rad * identity.
    """
    if int(n) != n or n < 1:
        raise InvalidAtomCount(f"atom count must be a positive integer, got {n}")
    n = int(n)
    return CouplingMatrix(
        entries=_ideal_entries(n, rates),
        ideal_string=True,
        rates=rates,
        guided=rates.gamma_guided * np.ones((n, n)),
    )


def load_coupling_matrix(entries, guided=None) -> CouplingMatrix:
    """
    Validate a user-supplied coupling matrix.

    The result never carries the ideal-string flag, even when its entries
    happen to have that form.
    """
    matrix = CouplingMatrix(entries=entries, guided=guided)
    if guided is None:
        logger.info(
            "coupling matrix has no guided part; all emission is attributed "
            "to radiation modes"
        )
    return matrix


# =============================================================================
# INITIAL STATE AND GEOMETRY
# =============================================================================


class StateKind(enum.Enum):
    SYMMETRIC_ONE_EXCITATION = "symmetric"
    PRODUCT = "product"


@dataclass(frozen=True)
class InitialStateSpec:
    """
    Symbolic initial atomic state.

    ``PRODUCT`` stands for prod_j (cos(theta/2)|e_j> + exp(i phi) sin(theta/2)|g_j>),
    so theta = 0 is full excitation and theta = pi is the ground state.
    """

    kind: StateKind
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not isinstance(self.kind, StateKind):
            object.__setattr__(self, "kind", StateKind(self.kind))
        if not 0.0 <= self.theta <= math.pi:
            raise ParameterError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ParameterError(f"phi must lie in [0, 2pi), got {self.phi}")

    @classmethod
    def symmetric(cls) -> "InitialStateSpec":
        return cls(StateKind.SYMMETRIC_ONE_EXCITATION)

    @classmethod
    def product(cls, theta: float, phi: float = 0.0) -> "InitialStateSpec":
        return cls(StateKind.PRODUCT, theta, phi)

    @property
    def excited_amplitude(self) -> complex:
        return complex(math.cos(self.theta / 2))

    @property
    def ground_amplitude(self) -> complex:
        return complex(np.exp(1j * self.phi) * math.sin(self.theta / 2))

    def initial_population(self, n: int) -> float:
        if self.kind is StateKind.SYMMETRIC_ONE_EXCITATION:
            return 1.0
        return product_state_moments(self, n)[0]

    def describe(self) -> str:
        if self.kind is StateKind.SYMMETRIC_ONE_EXCITATION:
            return "symmetric"
        return f"product(theta={self.theta:.6g}, phi={self.phi:.6g})"


def product_state_moments(spec: InitialStateSpec, n: int) -> Tuple[float, float]:
    """
    Population and pairwise correlation of a product state.

    Returns
    -------
    (P0, C0)
        P0 = n cos^2(theta/2) and C0 = <s_i^+ s_j> = cos^2(theta/2) sin^2(theta/2)
        for each pair i != j, which equals P0 (n - P0) / n^2.
    """
    if spec.kind is not StateKind.PRODUCT:
        raise WrongKind("product_state_moments needs a product-state spec")
    if n < 1:
        raise InvalidAtomCount(f"atom count must be >= 1, got {n}")
    excited = math.cos(spec.theta / 2) ** 2
    ground = math.sin(spec.theta / 2) ** 2
    return n * excited, excited * ground


@dataclass(frozen=True)
class GeometryMetadata:
    """
    Provenance of the fiber geometry; echoed into outputs, drives no numerics.

    ``spacing_multiples`` are the integers q_j with z_{j+1} - z_j = q_j * lambda_F.
    All lengths are > 0 except ``atom_surface_distance_nm``, where 0 places the
    atoms on the fiber surface.
    """

    fiber_radius_nm: float = 200.0
    core_index: float = 1.45
    clad_index: float = 1.0
    wavelength_nm: float = 852.0
    atom_surface_distance_nm: float = 100.0
    spacing_multiples: Tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("fiber_radius_nm", "wavelength_nm", "core_index", "clad_index"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0")
        if self.atom_surface_distance_nm < 0:
            raise ParameterError("atom_surface_distance_nm must be >= 0")
        if not self.core_index > self.clad_index:
            raise ParameterError("core_index must exceed clad_index")
        multiples = tuple(self.spacing_multiples)
        if any(int(q) != q or q < 1 for q in multiples):
            raise ParameterError("spacing multiples must be positive integers")
        object.__setattr__(self, "spacing_multiples", tuple(int(q) for q in multiples))

    def to_dict(self) -> dict:
        return {
            "fiber_radius_nm": self.fiber_radius_nm,
            "core_index": self.core_index,
            "clad_index": self.clad_index,
            "wavelength_nm": self.wavelength_nm,
            "atom_surface_distance_nm": self.atom_surface_distance_nm,
            "spacing_multiples": list(self.spacing_multiples),
        }


# =============================================================================
# RATE TABLE
# =============================================================================


@dataclass(frozen=True, eq=False)
class RateTable:
    """Decay rates tabulated against atom-surface distance."""

    distance_nm: np.ndarray
    gamma_guided: np.ndarray
    gamma_rad: np.ndarray
    source: str = ""

    def lookup(self, distance_nm: float) -> DecayRates:
        """Linear interpolation inside the table; no extrapolation."""
        low, high = self.distance_nm[0], self.distance_nm[-1]
        if not low <= distance_nm <= high:
            raise RateTableError(
                f"distance {distance_nm} nm is outside the rate table range "
                f"[{low}, {high}] nm of {self.source or 'the table'}"
            )
        return make_rates(
            float(np.interp(distance_nm, self.distance_nm, self.gamma_guided)),
            float(np.interp(distance_nm, self.distance_nm, self.gamma_rad)),
        )

    def covers(self, distance_nm: float) -> bool:
        return bool(self.distance_nm[0] <= distance_nm <= self.distance_nm[-1])


def load_rate_table(path: Union[str, Path] = DEFAULT_RATE_TABLE) -> RateTable:
    """
    Read a ``distance_nm,gamma_guided,gamma_rad`` CSV file.

    Rows must be sorted by strictly increasing distance.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = tuple(cell.strip() for cell in next(reader, ()))
        if header != RATE_TABLE_HEADER:
            raise RateTableError(
                f"{path}: header must be {','.join(RATE_TABLE_HEADER)}, got {header}"
            )
        try:
            rows = [[float(cell) for cell in row] for row in reader if row]
        except ValueError as exc:
            raise RateTableError(f"{path}: non-numeric entry ({exc})") from exc
    if not rows or any(len(row) != 3 for row in rows):
        raise RateTableError(f"{path}: expected at least one row of three values")
    table = np.array(rows)
    if np.any(np.diff(table[:, 0]) <= 0):
        raise RateTableError(f"{path}: rows must be sorted by increasing distance")
    for row in table:
        make_rates(row[1], row[2])
    return RateTable(table[:, 0], table[:, 1], table[:, 2], source=str(path))


# =============================================================================
# TRAJECTORIES
# =============================================================================


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Sampled observables of one emission run.

    Attributes:
    -----------
    times : np.ndarray
        Strictly increasing sample times (tau0)
    population : np.ndarray
        Total excited-state population P(t)
    jpjm : np.ndarray
        <J+ J->(t)
    i_guided, i_rad : np.ndarray
        Emitted intensities (I0)
    n_atoms : int
    solver : str
        Identity of the producing solver
    """

    times: np.ndarray
    population: np.ndarray
    jpjm: np.ndarray
    i_guided: np.ndarray
    i_rad: np.ndarray
    n_atoms: int
    solver: str = ""
    i_total: np.ndarray = field(init=False)

    def __post_init__(self):
        arrays = {}
        for name in ("times", "population", "jpjm", "i_guided", "i_rad"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            arrays[name] = array
        size = arrays["times"].size
        if size == 0:
            raise EmptyTrajectory("trajectory has no samples")
        if any(array.shape != (size,) for array in arrays.values()):
            raise ParameterError("trajectory arrays must be 1-D and of equal length")
        if np.any(np.diff(arrays["times"]) <= 0):
            raise NonMonotonicTimes("trajectory times must be strictly increasing")
        tol = OBSERVABLE_TOLERANCE * max(1, self.n_atoms)
        population = arrays["population"]
        if np.any(population < -tol) or np.any(population > self.n_atoms + tol):
            raise PositivityViolation(
                f"population left [0, {self.n_atoms}]: "
                f"range [{population.min():.3g}, {population.max():.3g}]"
            )
        if np.any(arrays["jpjm"] < -tol):
            raise PositivityViolation("<J+J-> became negative")
        for name, array in arrays.items():
            object.__setattr__(self, name, array)
        total = arrays["i_guided"] + arrays["i_rad"]
        total.setflags(write=False)
        object.__setattr__(self, "i_total", total)

    def __len__(self) -> int:
        return self.times.size

    @property
    def energies(self) -> "TrajectoryEnergies":
        return trajectory_energies(self)

    @property
    def u_guided(self) -> float:
        return self.energies.u_guided

    @property
    def u_rad(self) -> float:
        return self.energies.u_rad

    @property
    def truncation_bound(self) -> float:
        return float(self.population[-1])

    def to_rows(self):
        """Yield (t, P, <J+J->, i_guided, i_rad, i_total) sample tuples."""
        return zip(
            self.times, self.population, self.jpjm, self.i_guided, self.i_rad, self.i_total
        )


class TrajectoryEnergies(NamedTuple):
    u_guided: float
    u_rad: float
    f_guided: float
    truncation_bound: float
    budget_residual: float


def channel_fractions(u_guided: float, u_rad: float) -> Tuple[float, float]:
    """Split of emitted energy between guided and radiation modes."""
    total = u_guided + u_rad
    if total <= 0:
        logger.warning("no energy emitted; reporting f_guided = 0")
        return 0.0, 0.0
    f_guided = min(max(u_guided / total, 0.0), 1.0)
    return f_guided, 1.0 - f_guided


def trajectory_energies(traj: Trajectory) -> TrajectoryEnergies:
    """
    Integrate the intensities of a trajectory.

    Energies use the composite trapezoidal rule on the sampled grid. The
    energy still stored at the final sample, P(t_final), bounds what the
    truncated integration misses, and ``budget_residual`` is
    u_guided + u_rad + P(t_final) - P(0), zero up to integration error.
    """
    if len(traj) < 2:
        raise EmptyTrajectory("energy integration needs at least two samples")
    u_guided = float(trapezoid(traj.i_guided, traj.times))
    u_rad = float(trapezoid(traj.i_rad, traj.times))
    f_guided, _ = channel_fractions(u_guided, u_rad)
    remaining = float(traj.population[-1])
    residual = u_guided + u_rad + remaining - float(traj.population[0])
    return TrajectoryEnergies(u_guided, u_rad, f_guided, remaining, residual)


def guided_intensity_from_population(traj: Trajectory, rates: DecayRates) -> np.ndarray:
    """Reconstruct I_guided = -(dP/dt + gamma_rad P) by finite differences."""
    if len(traj) < 3:
        raise EmptyTrajectory("finite differences need at least three samples")
    derivative = np.gradient(traj.population, traj.times, edge_order=2)
    return -(derivative + rates.gamma_rad * traj.population)


def trajectory_peak(traj: Trajectory) -> Optional[Tuple[float, float]]:
    """
    Largest interior local maximum of the guided intensity.

    Returns ``None`` when i_guided never rises above its initial value.
    """
    signal = traj.i_guided
    if signal.size < 3:
        return None
    index = int(np.argmax(signal))
    if index == 0 or index == signal.size - 1 or signal[index] <= signal[0]:
        return None
    return float(traj.times[index]), float(signal[index])


def cooperativity_length(n: int, rates: DecayRates, gamma0_linewidth_mhz: float) -> float:
    """
    Cooperativity length L0 = c / Gamma in meters.

    The linewidth is the ordinary-frequency value gamma0/2pi in MHz, so the
    angular collective rate is Gamma * 2pi * linewidth.
    """
    if not (math.isfinite(gamma0_linewidth_mhz) and gamma0_linewidth_mhz > 0):
        raise InvalidLinewidth(f"linewidth must be > 0 MHz, got {gamma0_linewidth_mhz}")
    if n < 1:
        raise InvalidAtomCount(f"atom count must be >= 1, got {n}")
    big_gamma = rates.gamma_rad + n * rates.gamma_guided
    return constants.c / (big_gamma * 2 * math.pi * gamma0_linewidth_mhz * 1e6)
