"""
Exception hierarchy for FiberSuperradiance.

Two families are distinguished:

- :class:`ParameterError` for invalid inputs and configuration. It derives
  from ``ValueError`` so callers catching ``ValueError`` keep working.
- :class:`NumericalError` for integration failures and loss of physical
  validity along a trajectory.
"""


class SuperradianceError(Exception):
    """Base class for all package errors."""


class ParameterError(SuperradianceError, ValueError):
    """An input violates a documented precondition."""


class NumericalError(SuperradianceError, ArithmeticError):
    """A numerical run failed or produced an unphysical state."""


# core
class NegativeRate(ParameterError):
    pass


class ZeroRadiationRate(ParameterError):
    pass


class InvalidAtomCount(ParameterError):
    pass


class NotSymmetric(ParameterError):
    pass


class NotPositiveSemidefinite(ParameterError):
    def __init__(self, smallest_eigenvalue: float, tolerance: float):
        self.smallest_eigenvalue = smallest_eigenvalue
        self.tolerance = tolerance
        super().__init__(
            f"coupling matrix is not positive semidefinite: smallest eigenvalue "
            f"{smallest_eigenvalue:.6g} < -{tolerance:.3g}"
        )


class WrongKind(ParameterError):
    pass


class EmptyTrajectory(ParameterError):
    pass


class NonMonotonicTimes(ParameterError):
    pass


class InvalidLinewidth(ParameterError):
    pass


class RateTableError(ParameterError):
    pass


# solver-exact
class AtomCountExceedsCap(ParameterError):
    def __init__(self, n_atoms: int, cap: int):
        self.n_atoms = n_atoms
        self.cap = cap
        self.memory_bytes = 16 * 4**n_atoms
        super().__init__(
            f"exact solver refuses n={n_atoms} atoms (cap {cap}): the density "
            f"matrix alone needs 4^{n_atoms} complex entries "
            f"= {self.memory_bytes / 2**20:.1f} MiB; raise the cap explicitly "
            f"or use the dicke solver"
        )


class DimensionMismatch(ParameterError):
    pass


# solver-dicke
class AtomCountOutOfRange(ParameterError):
    pass


class ConventionMismatch(ParameterError):
    pass


class NonPermutationInvariantCoupling(ParameterError):
    pass


# analytics
class NegativeTime(ParameterError):
    pass


class InvalidInitialPopulation(ParameterError):
    pass


# cli
class ConfigError(ParameterError):
    pass


class RangeError(ParameterError):
    pass


class PresetUnavailable(ParameterError):
    pass


# numerical failures
class ToleranceFailure(NumericalError):
    pass


class TraceDrift(NumericalError):
    pass


class PositivityViolation(NumericalError):
    pass
