#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Brute-force master-equation solver on the full 2^N-dimensional atom space.

Basis convention: computational product basis where bit j of a basis index
is 1 when atom j is excited. Single-atom lowering and raising operators act
by bit arithmetic on a (2,)*N tensor view of the density matrix, so no
2^N x 2^N operator is ever stored.

This solver is the reference against which the permutation-invariant solver
and the closed-form results are checked.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..errors import (
    AtomCountExceedsCap,
    DimensionMismatch,
    InvalidAtomCount,
    ParameterError,
    PositivityViolation,
    TraceDrift,
)
from .integrator import IntegratorConfig, integrate_sampled
from .model import CouplingMatrix, InitialStateSpec, StateKind, Trajectory

logger = logging.getLogger(__name__)

DEFAULT_ATOM_CAP = 10
HERMITIAN_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-10
EIGENVALUE_TOLERANCE = 1e-8
TRACE_DRIFT_LIMIT = 1e-6
POSITIVITY_LIMIT = 1e-6


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Density matrix of ``n_atoms`` two-level atoms.

    Attributes:
    -----------
    n_atoms : int
        Number of atoms
    entries : np.ndarray
        (2^n, 2^n) complex matrix in the bit-encoded product basis
    """

    n_atoms: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"{self.n_atoms} atoms need a {self.dim}x{self.dim} matrix, "
                f"got {entries.shape}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return 2**self.n_atoms

    def validate(
        self,
        hermitian_tol: float = HERMITIAN_TOLERANCE,
        trace_tol: float = TRACE_TOLERANCE,
        eigenvalue_tol: float = EIGENVALUE_TOLERANCE,
    ) -> "DensityMatrix":
        """Check Hermiticity, unit trace and positivity; return self."""
        rho = self.entries
        if not np.allclose(rho, rho.conj().T, rtol=0, atol=hermitian_tol):
            raise ParameterError("density matrix is not Hermitian")
        trace = np.trace(rho)
        if abs(trace - 1) > trace_tol:
            raise TraceDrift(f"density matrix trace is {trace.real:.12g}")
        smallest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if smallest < -eigenvalue_tol:
            raise PositivityViolation(f"density matrix eigenvalue {smallest:.3g} < 0")
        return self


# =============================================================================
# BIT-INDEX OPERATOR KERNELS
# =============================================================================


def _apply_left(matrix: np.ndarray, atom: int, n: int, raising: bool) -> np.ndarray:
    """Return sigma_atom @ matrix (or sigma_atom^dagger @ matrix)."""
    tensor = matrix.reshape((2,) * n + (matrix.shape[1],))
    axis = n - 1 - atom
    source = [slice(None)] * (n + 1)
    target = [slice(None)] * (n + 1)
    source[axis], target[axis] = (0, 1) if raising else (1, 0)
    out = np.zeros_like(tensor)
    out[tuple(target)] = tensor[tuple(source)]
    return out.reshape(matrix.shape)


def _lower_sum(matrix: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Return (sum_j w_j sigma_j) @ matrix."""
    out = np.zeros_like(matrix)
    for atom, weight in enumerate(weights):
        if weight != 0:
            out += weight * _apply_left(matrix, atom, n, raising=False)
    return out


def _raise_sum(matrix: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Return (sum_j w_j sigma_j^dagger) @ matrix."""
    out = np.zeros_like(matrix)
    for atom, weight in enumerate(weights):
        if weight != 0:
            out += weight * _apply_left(matrix, atom, n, raising=True)
    return out


def _dissipator(rho: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """D[L] rho for the collective jump operator L = sum_j w_j sigma_j (real w)."""
    l_rho = _lower_sum(rho, weights, n)
    l_rho_dag = _lower_sum(rho.conj().T, weights, n)
    jump = _lower_sum(l_rho.conj().T, weights, n).conj().T
    left = _raise_sum(l_rho, weights, n)
    right = _raise_sum(l_rho_dag, weights, n).conj().T
    return jump - 0.5 * (left + right)


@functools.lru_cache(maxsize=32)
def _excitation_counts(n: int) -> np.ndarray:
    indices = np.arange(2**n)
    counts = np.zeros(2**n)
    for atom in range(n):
        counts += (indices >> atom) & 1
    counts.setflags(write=False)
    return counts


def _local_decay(rho: np.ndarray, n: int) -> np.ndarray:
    """sum_j D[sigma_j] rho."""
    tensor = rho.reshape((2,) * (2 * n))
    jumps = np.zeros_like(tensor)
    for atom in range(n):
        row, col = n - 1 - atom, 2 * n - 1 - atom
        source = [slice(None)] * (2 * n)
        target = [slice(None)] * (2 * n)
        source[row] = source[col] = 1
        target[row] = target[col] = 0
        jumps[tuple(target)] += tensor[tuple(source)]
    counts = _excitation_counts(n)
    return jumps.reshape(rho.shape) - 0.5 * (counts[:, None] + counts[None, :]) * rho


# =============================================================================
# STATE CONSTRUCTION
# =============================================================================


def _check_atom_count(n: int, atom_cap: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidAtomCount(f"atom count must be a positive integer, got {n}")
    if n > atom_cap:
        raise AtomCountExceedsCap(int(n), atom_cap)
    if n > DEFAULT_ATOM_CAP:
        logger.info(
            "exact solver above the default cap: n=%d needs %.1f MiB per density matrix",
            n,
            16 * 4**n / 2**20,
        )


def build_density_matrix(
    spec: InitialStateSpec, n: int, atom_cap: int = DEFAULT_ATOM_CAP
) -> DensityMatrix:
    """
    Pure-state density matrix for a symbolic initial state.

    Parameters
    ----------
    spec : InitialStateSpec
        Symmetric one-excitation state or identical product state
    n : int
        Atom count
    atom_cap : int
        Largest accepted atom count
    """
    _check_atom_count(n, atom_cap)
    dim = 2**n
    if spec.kind is StateKind.SYMMETRIC_ONE_EXCITATION:
        psi = np.zeros(dim, dtype=complex)
        psi[[1 << atom for atom in range(n)]] = 1 / np.sqrt(n)
    else:
        single = np.array([spec.ground_amplitude, spec.excited_amplitude])
        psi = functools.reduce(np.kron, [single] * n)
    return DensityMatrix(n, np.outer(psi, psi.conj())).validate()


def _as_array(rho: Union[DensityMatrix, np.ndarray], n: int) -> np.ndarray:
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if entries.shape != (2**n, 2**n):
        raise DimensionMismatch(
            f"coupling is for {n} atoms but the state has shape {entries.shape}"
        )
    return entries.astype(complex, copy=False)


# =============================================================================
# LIOUVILLIAN
# =============================================================================


def lindblad_derivative(
    rho: Union[DensityMatrix, np.ndarray], coupling: CouplingMatrix
) -> np.ndarray:
    """
    Time derivative of rho under the collective-decay master equation.

    The ideal string is evaluated as gamma_guided D[J-] + gamma_rad sum_j D[sigma_j];
    any other coupling is diagonalized into sum_k lambda_k D[sum_j v_kj sigma_j].
    """
    n = coupling.n
    matrix = _as_array(rho, n)
    if coupling.ideal_string:
        rates = coupling.rates
        derivative = rates.gamma_rad * _local_decay(matrix, n)
        if rates.gamma_guided:
            derivative += rates.gamma_guided * _dissipator(matrix, np.ones(n), n)
        return derivative
    eigenvalues, vectors = np.linalg.eigh(coupling.entries)
    derivative = np.zeros_like(matrix)
    scale = max(float(eigenvalues[-1]), 0.0)
    for value, vector in zip(eigenvalues, vectors.T):
        if value > 1e-14 * scale:
            derivative += value * _dissipator(matrix, vector, n)
    return derivative


def lindblad_derivative_naive(
    rho: Union[DensityMatrix, np.ndarray], coupling: CouplingMatrix
) -> np.ndarray:
    """Literal double sum (1/2) sum_ij g_ij (2 s_j r s_i^+ - s_i^+ s_j r - r s_i^+ s_j)."""
    n = coupling.n
    matrix = _as_array(rho, n)
    derivative = np.zeros_like(matrix)
    for i in range(n):
        for j in range(n):
            gamma = coupling.entries[i, j]
            if gamma == 0:
                continue
            s_j_rho = _apply_left(matrix, j, n, raising=False)
            jump = _apply_left(s_j_rho.conj().T, i, n, raising=False).conj().T
            left = _apply_left(s_j_rho, i, n, raising=True)
            s_i_rho_dag = _apply_left(matrix.conj().T, i, n, raising=False)
            right = _apply_left(s_i_rho_dag, j, n, raising=True).conj().T
            derivative += 0.5 * gamma * (2 * jump - left - right)
    return derivative


# =============================================================================
# OBSERVABLES
# =============================================================================


@functools.lru_cache(maxsize=32)
def _pair_indices(n: int, i: int, j: int) -> Tuple[np.ndarray, np.ndarray]:
    indices = np.arange(2**n)
    if i == j:
        rows = indices[((indices >> j) & 1) == 1]
        return rows, rows
    mask = (((indices >> j) & 1) == 1) & (((indices >> i) & 1) == 0)
    rows = indices[mask]
    return rows, rows ^ (1 << j) ^ (1 << i)


def correlation_matrix(rho: Union[DensityMatrix, np.ndarray], n: int) -> np.ndarray:
    """C_ij = <sigma_i^dagger sigma_j> (complex, Hermitian)."""
    matrix = _as_array(rho, n)
    correlations = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            rows, cols = _pair_indices(n, i, j)
            correlations[i, j] = matrix[rows, cols].sum()
    return correlations


def coupling_collective_rate(coupling: CouplingMatrix) -> float:
    """Largest eigenvalue of gamma_ij, the fastest collective decay rate."""
    return float(np.linalg.eigvalsh(coupling.entries)[-1])


def evolve_exact(
    coupling: CouplingMatrix,
    spec: InitialStateSpec,
    config: IntegratorConfig = IntegratorConfig(),
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> Trajectory:
    """
    Integrate the master equation from ``spec`` and sample the observables.

    The state is never renormalized: trace drift beyond 1e-6 raises
    :class:`TraceDrift` and eigenvalues below -1e-6 on the checked samples
    raise :class:`PositivityViolation`.
    """
    n = coupling.n
    rho0 = build_density_matrix(spec, n, atom_cap).entries
    dim = rho0.shape[0]
    times = config.sample_times(coupling_collective_rate(coupling))
    guided = coupling.guided_part
    radiative = coupling.entries - guided
    checked = config.checked_indices()
    logger.info(
        "exact run: n=%d, %s, t_final=%.6g, %d samples", n, spec.describe(), times[-1], times.size
    )

    def rhs(t, y):
        return lindblad_derivative(y.reshape(dim, dim), coupling).ravel()

    def observe(index, t, y):
        rho = y.reshape(dim, dim)
        trace = np.trace(rho)
        if abs(trace - 1) > TRACE_DRIFT_LIMIT:
            raise TraceDrift(f"trace drifted to {trace.real:.10g} at t={t:.6g}")
        if index in checked:
            smallest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
            if smallest < -POSITIVITY_LIMIT:
                raise PositivityViolation(f"eigenvalue {smallest:.3g} at t={t:.6g}")
        corr = correlation_matrix(rho, n)
        return (
            float(np.trace(corr).real),
            float(corr.sum().real),
            float(np.sum(guided * corr).real),
            float(np.sum(radiative * corr).real),
        )

    samples = np.array(integrate_sampled(rhs, rho0.ravel(), times, observe, config))
    return Trajectory(
        times=times,
        population=samples[:, 0],
        jpjm=samples[:, 1],
        i_guided=samples[:, 2],
        i_rad=samples[:, 3],
        n_atoms=n,
        solver="exact",
    )
