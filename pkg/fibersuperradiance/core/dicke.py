#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Permutation-invariant solver in the Dicke block basis.

For the ideal string the master equation commutes with atom permutations, so
the density matrix decomposes into total-spin blocks j = N/2, N/2 - 1, ...
each of dimension 2j + 1 and multiplicity d_N(j). Storing one (2j+1)x(2j+1)
matrix per block reduces the state from 4^N to O(N^3) numbers.

Half-integer spins are indexed by ``two_j = 2j``. Inside a block, row and
column ``i`` stand for m = -j + i (ascending).

Multiplicity conventions
------------------------
FOLDED (default)
    The block matrix holds the total weight of all d_N(j) copies, the state is
    rho = sum_j B_j / d_N(j) (x) 1_{d_N(j)} and tr rho = sum_j tr B_j.
PER_COPY
    The block matrix holds the weight of a single copy and
    tr rho = sum_j d_N(j) tr B_j.

Local decay sum_k D[sigma_k] moves weight from |j, m><j, m'| to j' in
{j + 1, j, j - 1} at (m - 1, m' - 1). In the FOLDED convention the factor is
c(j -> j') * g(j, m, j') * g(j, m', j') with c = N/2 - j, N/2 + 1,
N/2 + j + 1 and g the Clebsch-Gordan coefficient <j m; 1 -1 | j' m - 1>.
:func:`from_full_density_matrix` and :func:`to_full_density_matrix` map
between this representation and the full 2^N space for small N.
"""

import enum
import functools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space
from scipy.stats import binom

from ..errors import (
    AtomCountOutOfRange,
    ConventionMismatch,
    DimensionMismatch,
    NonPermutationInvariantCoupling,
    ParameterError,
    PositivityViolation,
    TraceDrift,
)
from .exact import DEFAULT_ATOM_CAP, POSITIVITY_LIMIT, TRACE_DRIFT_LIMIT, _check_atom_count
from .integrator import IntegratorConfig, integrate_sampled
from .model import CouplingMatrix, DecayRates, InitialStateSpec, StateKind, Trajectory

logger = logging.getLogger(__name__)

MAX_ATOMS = 500
BLOCK_HERMITIAN_TOLERANCE = 1e-12
WEIGHTED_TRACE_TOLERANCE = 1e-10


class MultiplicityConvention(enum.Enum):
    FOLDED = "folded"
    PER_COPY = "per_copy"


# =============================================================================
# BLOCK STRUCTURE
# =============================================================================


@dataclass(frozen=True)
class DickeBlock:
    """One total-spin sector: spin two_j/2 with multiplicity d_N(j)."""

    two_j: int
    multiplicity: int

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.j


@dataclass(frozen=True)
class DickeSpace:
    """
    All Dicke blocks of ``n_atoms`` spins, largest j first.

    The dimension identity sum_j d_N(j) (2j + 1) = 2^N is verified on
    construction in exact integer arithmetic.
    """

    n_atoms: int
    blocks: Tuple[DickeBlock, ...]

    def __post_init__(self):
        total = sum(block.multiplicity * block.dim for block in self.blocks)
        if total != 2**self.n_atoms:
            raise DimensionMismatch(f"block dimensions sum to {total}, not 2^{self.n_atoms}")

    @property
    def quantum_dimension(self) -> int:
        return sum(block.multiplicity * block.dim for block in self.blocks)

    @property
    def element_count(self) -> int:
        """Number of stored complex entries in a block-diagonal state."""
        return sum(block.dim**2 for block in self.blocks)

    def index_of(self, two_j: int) -> int:
        return (self.n_atoms - two_j) // 2

    @functools.cached_property
    def offsets(self) -> np.ndarray:
        sizes = [block.dim**2 for block in self.blocks]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    @functools.cached_property
    def multiplicities(self) -> np.ndarray:
        return np.array([float(block.multiplicity) for block in self.blocks])


def _multiplicity(n: int, two_j: int) -> int:
    k = (n - two_j) // 2
    return math.comb(n, k) - (math.comb(n, k - 1) if k >= 1 else 0)


@functools.lru_cache(maxsize=64)
def enumerate_blocks(n: int) -> DickeSpace:
    """
    Total-spin decomposition of ``n`` two-level atoms.

    d_N(j) = C(N, N/2 - j) - C(N, N/2 - j - 1) for j = N/2, N/2 - 1, ..., 0 or 1/2.
    """
    if int(n) != n or not 1 <= n <= MAX_ATOMS:
        raise AtomCountOutOfRange(f"atom count must lie in [1, {MAX_ATOMS}], got {n}")
    n = int(n)
    blocks = tuple(
        DickeBlock(two_j, _multiplicity(n, two_j)) for two_j in range(n, -1, -2)
    )
    return DickeSpace(n, blocks)


# =============================================================================
# STATES
# =============================================================================


@dataclass(frozen=True, eq=False)
class DickeState:
    """
    Block-diagonal permutation-invariant density matrix.

    Attributes:
    -----------
    space : DickeSpace
    block_matrices : tuple of np.ndarray
        One (2j+1)x(2j+1) complex matrix per block of ``space``
    convention : MultiplicityConvention
        How d_N(j) enters the trace (see module docstring)
    """

    space: DickeSpace
    block_matrices: Tuple[np.ndarray, ...]
    convention: MultiplicityConvention = MultiplicityConvention.FOLDED

    def __post_init__(self):
        if len(self.block_matrices) != len(self.space.blocks):
            raise DimensionMismatch(
                f"{len(self.space.blocks)} blocks expected, got {len(self.block_matrices)}"
            )
        matrices = []
        for block, matrix in zip(self.space.blocks, self.block_matrices):
            matrix = np.array(matrix, dtype=complex)
            if matrix.shape != (block.dim, block.dim):
                raise DimensionMismatch(
                    f"block j={block.j} needs shape {(block.dim, block.dim)}, "
                    f"got {matrix.shape}"
                )
            matrix.setflags(write=False)
            matrices.append(matrix)
        object.__setattr__(self, "block_matrices", tuple(matrices))

    @classmethod
    def from_vector(
        cls,
        space: DickeSpace,
        vector: np.ndarray,
        convention: MultiplicityConvention = MultiplicityConvention.FOLDED,
    ) -> "DickeState":
        return cls(space, tuple(_split_blocks(space, vector)), convention)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([matrix.ravel() for matrix in self.block_matrices])

    def trace_weights(self) -> np.ndarray:
        if self.convention is MultiplicityConvention.FOLDED:
            return np.ones(len(self.space.blocks))
        return self.space.multiplicities

    def weighted_trace(self) -> complex:
        traces = np.array([np.trace(matrix) for matrix in self.block_matrices])
        return complex(np.sum(self.trace_weights() * traces))

    def with_convention(self, convention: MultiplicityConvention) -> "DickeState":
        """Same physical state stored under another multiplicity convention."""
        if convention is self.convention:
            return self
        scale = self.space.multiplicities
        if convention is MultiplicityConvention.FOLDED:
            matrices = [m * d for m, d in zip(self.block_matrices, scale)]
        else:
            matrices = [m / d for m, d in zip(self.block_matrices, scale)]
        return DickeState(self.space, tuple(matrices), convention)

    def validate(self) -> "DickeState":
        trace = self.weighted_trace()
        if abs(trace - 1) > WEIGHTED_TRACE_TOLERANCE:
            raise TraceDrift(f"weighted trace is {trace.real:.12g}")
        for block, matrix in zip(self.space.blocks, self.block_matrices):
            if not np.allclose(matrix, matrix.conj().T, rtol=0, atol=BLOCK_HERMITIAN_TOLERANCE):
                raise ParameterError(f"block j={block.j} is not Hermitian")
        return self


def _split_blocks(space: DickeSpace, vector: np.ndarray) -> List[np.ndarray]:
    offsets = space.offsets
    if vector.size != offsets[-1]:
        raise DimensionMismatch(f"expected {offsets[-1]} entries, got {vector.size}")
    return [
        vector[offsets[k] : offsets[k + 1]].reshape(block.dim, block.dim)
        for k, block in enumerate(space.blocks)
    ]


def _require_convention(state: DickeState, convention: MultiplicityConvention) -> None:
    if state.convention is not convention:
        raise ConventionMismatch(
            f"state uses the {state.convention.value} convention, "
            f"operation expects {convention.value}"
        )


def encode_initial(
    spec: InitialStateSpec,
    space: DickeSpace,
    convention: MultiplicityConvention = MultiplicityConvention.FOLDED,
) -> DickeState:
    """
    Dicke-block representation of a symbolic initial state.

    Both supported states live in the fully symmetric block j = N/2: the
    one-excitation state is |N/2, -N/2 + 1>, and an identical product state is
    the spin coherent state with amplitude
    sqrt(C(N, k)) cos^k(theta/2) (e^{i phi} sin(theta/2))^(N - k) on k excitations.
    """
    n = space.n_atoms
    top = space.blocks[0]
    if spec.kind is StateKind.SYMMETRIC_ONE_EXCITATION:
        amplitudes = np.zeros(top.dim, dtype=complex)
        amplitudes[1] = 1.0
    else:
        excitations = np.arange(top.dim)
        probability = math.cos(spec.theta / 2) ** 2
        magnitudes = np.sqrt(binom.pmf(excitations, n, probability))
        amplitudes = magnitudes * np.exp(1j * spec.phi * (n - excitations))
    matrices = [np.zeros((block.dim, block.dim), dtype=complex) for block in space.blocks]
    matrices[0] = np.outer(amplitudes, amplitudes.conj())
    state = DickeState(space, tuple(matrices), MultiplicityConvention.FOLDED)
    return state.validate().with_convention(convention)


# =============================================================================
# LIOUVILLIAN
# =============================================================================


@dataclass(frozen=True)
class _BlockCoefficients:
    m: np.ndarray
    lowering: np.ndarray  # sqrt((j + m)(j - m + 1)), zero at m = -j
    up: Optional[np.ndarray]  # c * g g^T towards j + 1
    same: Optional[np.ndarray]
    down: Optional[np.ndarray]


@functools.lru_cache(maxsize=16)
def _coefficients(n: int) -> Tuple[_BlockCoefficients, ...]:
    space = enumerate_blocks(n)
    half = n / 2
    result = []
    for block in space.blocks:
        j = block.j
        m = block.m_values
        lowering = np.sqrt(np.clip((j + m) * (j - m + 1), 0, None))
        up = same = down = None
        if block.two_j < n:
            g = np.sqrt((j - m + 1) * (j - m + 2) / ((2 * j + 1) * (2 * j + 2)))
            up = (half - j) * np.outer(g, g)
        if block.two_j > 0:
            g = np.sqrt(np.clip((j + m) * (j - m + 1), 0, None) / (2 * j * (j + 1)))
            same = (half + 1) * np.outer(g, g)[1:, 1:]
        if block.two_j > 1:
            g = np.sqrt(np.clip((j + m - 1) * (j + m), 0, None) / (2 * j * (2 * j + 1)))
            down = (half + j + 1) * np.outer(g, g)[2:, 2:]
        result.append(_BlockCoefficients(m, lowering, up, same, down))
    return tuple(result)


def _folded_derivative(
    space: DickeSpace, matrices: Sequence[np.ndarray], rates: DecayRates
) -> List[np.ndarray]:
    n = space.n_atoms
    coefficients = _coefficients(n)
    out = [np.zeros_like(matrix) for matrix in matrices]
    g_guided, g_rad = rates.gamma_guided, rates.gamma_rad
    for k, (matrix, coef) in enumerate(zip(matrices, coefficients)):
        a2 = coef.lowering**2
        decay = 0.5 * g_guided * (a2[:, None] + a2[None, :])
        decay += 0.5 * g_rad * (n + coef.m[:, None] + coef.m[None, :])
        out[k] -= decay * matrix
        if g_guided and matrix.shape[0] > 1:
            a = coef.lowering[1:]
            out[k][:-1, :-1] += g_guided * np.outer(a, a) * matrix[1:, 1:]
        if not g_rad:
            continue
        if coef.same is not None:
            out[k][:-1, :-1] += g_rad * coef.same * matrix[1:, 1:]
        if coef.up is not None:
            size = matrix.shape[0]
            out[k - 1][:size, :size] += g_rad * coef.up * matrix
        if coef.down is not None:
            out[k + 1] += g_rad * coef.down * matrix[2:, 2:]
    return out


def dicke_derivative(
    state: DickeState,
    rates: DecayRates,
    convention: MultiplicityConvention = MultiplicityConvention.FOLDED,
) -> DickeState:
    """
    Time derivative of a permutation-invariant state.

    Applies gamma_guided D[J-] (block diagonal) plus gamma_rad sum_k D[sigma_k]
    (couples neighbouring j). The result is expressed in ``convention``, which
    must match the state's own convention.
    """
    _require_convention(state, convention)
    folded = state.with_convention(MultiplicityConvention.FOLDED)
    derivative = DickeState(
        state.space,
        tuple(_folded_derivative(state.space, folded.block_matrices, rates)),
        MultiplicityConvention.FOLDED,
    )
    return derivative.with_convention(convention)


def dicke_observables(state: DickeState) -> Tuple[float, float]:
    """Return (P, <J+ J->) of a state."""
    folded = state.with_convention(MultiplicityConvention.FOLDED)
    return _folded_observables(state.space, folded.block_matrices)


def _folded_observables(space: DickeSpace, matrices: Sequence[np.ndarray]) -> Tuple[float, float]:
    half = space.n_atoms / 2
    population = 0.0
    jpjm = 0.0
    for matrix, coef in zip(matrices, _coefficients(space.n_atoms)):
        diagonal = np.diagonal(matrix).real
        population += float(np.dot(coef.m + half, diagonal))
        jpjm += float(np.dot(coef.lowering**2, diagonal))
    return population, jpjm


# =============================================================================
# EVOLUTION
# =============================================================================


def require_permutation_invariant(coupling: CouplingMatrix) -> DecayRates:
    """Rates of an ideal-string coupling; any other coupling is refused."""
    if not coupling.ideal_string:
        raise NonPermutationInvariantCoupling(
            "the dicke solver needs the ideal-string coupling (permutation "
            "invariance); use the exact solver for general coupling matrices"
        )
    return coupling.rates


def _folded_rhs(space: DickeSpace, rates: DecayRates):
    def rhs(t, y):
        matrices = _split_blocks(space, y)
        return np.concatenate(
            [m.ravel() for m in _folded_derivative(space, matrices, rates)]
        )

    return rhs


def _check_state(space: DickeSpace, y: np.ndarray, t: float, check_positivity: bool) -> None:
    matrices = _split_blocks(space, y)
    trace = sum(np.trace(matrix) for matrix in matrices)
    if abs(trace - 1) > TRACE_DRIFT_LIMIT:
        raise TraceDrift(f"weighted trace drifted to {trace.real:.10g} at t={t:.6g}")
    if check_positivity:
        for block, matrix in zip(space.blocks, matrices):
            smallest = float(np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))[0])
            if smallest < -POSITIVITY_LIMIT:
                raise PositivityViolation(
                    f"block j={block.j} eigenvalue {smallest:.3g} at t={t:.6g}"
                )


def propagate_dicke(
    state: DickeState,
    rates: DecayRates,
    times: np.ndarray,
    config: IntegratorConfig = IntegratorConfig(),
) -> List[DickeState]:
    """States at each of ``times`` (in the input state's convention)."""
    space = state.space
    y0 = state.with_convention(MultiplicityConvention.FOLDED).to_vector()

    def observe(index, t, y):
        return DickeState.from_vector(space, np.array(y)).with_convention(state.convention)

    return integrate_sampled(_folded_rhs(space, rates), y0, np.asarray(times), observe, config)


def evolve_dicke(
    rates: Union[DecayRates, CouplingMatrix],
    spec: InitialStateSpec,
    n: int,
    config: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """
    Integrate the ideal-string dynamics of ``n`` atoms in the Dicke basis.

    Produces the same trajectory contract as the exact solver. A
    :class:`CouplingMatrix` is accepted only if it is the ideal string of
    ``n`` atoms.
    """
    if isinstance(rates, CouplingMatrix):
        if rates.n != n:
            raise DimensionMismatch(f"coupling is for {rates.n} atoms, run asks for {n}")
        rates = require_permutation_invariant(rates)
    space = enumerate_blocks(n)
    y0 = encode_initial(spec, space).to_vector()
    times = config.sample_times(rates.gamma_rad + n * rates.gamma_guided)
    checked = config.checked_indices()
    logger.info(
        "dicke run: n=%d (%d blocks, %d elements), %s, t_final=%.6g",
        n,
        len(space.blocks),
        space.element_count,
        spec.describe(),
        times[-1],
    )

    def observe(index, t, y):
        _check_state(space, y, t, index in checked)
        return _folded_observables(space, _split_blocks(space, y))

    samples = np.array(integrate_sampled(_folded_rhs(space, rates), y0, times, observe, config))
    population, jpjm = samples[:, 0], samples[:, 1]
    return Trajectory(
        times=times,
        population=population,
        jpjm=jpjm,
        i_guided=rates.gamma_guided * jpjm,
        i_rad=rates.gamma_rad * population,
        n_atoms=n,
        solver="dicke",
    )


# =============================================================================
# BRUTE-FORCE BASIS CHANGE
# =============================================================================


@functools.lru_cache(maxsize=8)
def dicke_basis(n: int) -> Tuple[np.ndarray, ...]:
    """
    Explicit Dicke basis vectors in the bit-encoded product basis.

    Returns one array per block of shape (d_N(j), 2j + 1, 2^N); entry
    [copy, i] is |j, m = -j + i, copy>. Copies are orthonormal highest-weight
    vectors lowered with J-, so all copies share the standard phase convention.
    """
    _check_atom_count(n, DEFAULT_ATOM_CAP)
    space = enumerate_blocks(n)
    dim = 2**n
    indices = np.arange(dim)
    excitations = np.array([bin(index).count("1") for index in indices])
    lowering = np.zeros((dim, dim))
    for atom in range(n):
        excited = indices[((indices >> atom) & 1) == 1]
        lowering[excited ^ (1 << atom), excited] = 1.0
    raising = lowering.T
    basis = []
    for block in space.blocks:
        j = block.j
        sector = indices[excitations == int(round(j + n / 2))]
        kernel = null_space(raising[:, sector])
        vectors = np.zeros((block.multiplicity, block.dim, dim))
        top = np.zeros((dim, kernel.shape[1]))
        top[sector] = kernel
        current = top.T
        for i in range(block.dim - 1, -1, -1):
            vectors[:, i] = current
            m = i - j
            if i > 0:
                current = (lowering @ current.T).T / math.sqrt((j + m) * (j - m + 1))
        basis.append(vectors)
    return tuple(basis)


def from_full_density_matrix(rho: np.ndarray, space: DickeSpace) -> DickeState:
    """
    Project a full density matrix onto the block representation (FOLDED).

    B_j(m, m') = sum over copies of <j, m, copy| rho |j, m', copy>; exact for
    permutation-invariant rho.
    """
    basis = dicke_basis(space.n_atoms)
    matrices = [
        np.einsum("lia,ab,ljb->ij", vectors.conj(), rho, vectors) for vectors in basis
    ]
    return DickeState(space, tuple(matrices), MultiplicityConvention.FOLDED)


def to_full_density_matrix(state: DickeState) -> np.ndarray:
    """Expand a block state to the full 2^N x 2^N density matrix."""
    folded = state.with_convention(MultiplicityConvention.FOLDED)
    basis = dicke_basis(state.space.n_atoms)
    rho = 0
    for block, vectors, matrix in zip(state.space.blocks, basis, folded.block_matrices):
        rho = rho + np.einsum("lia,ij,ljb->ab", vectors, matrix, vectors.conj()) / block.multiplicity
    return rho
