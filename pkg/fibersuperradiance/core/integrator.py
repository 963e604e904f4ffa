"""
Adaptive Runge-Kutta driver shared by the exact and permutation-invariant solvers.

The state is stepped with scipy's Dormand-Prince 4(5) scheme and observables
are evaluated from each step's dense output as the sample grid is crossed, so
only the current state is ever held in memory.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, TypeVar

import numpy as np
from scipy.integrate import RK45

from ..errors import ParameterError, ToleranceFailure

logger = logging.getLogger(__name__)

T = TypeVar("T")

DEFAULT_DECAY_TIMES = 8.0


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Parameters of the adaptive integration.

    Attributes:
    -----------
    rel_tol, abs_tol : float
        Adaptive step tolerances
    max_step : float
        Largest allowed step (tau0)
    t_final : float, optional
        End of the run (tau0); ``None`` means 8/Gamma of the collective rate
    sample_count : int
        Number of output samples, uniformly spaced from 0 to t_final
    positivity_checks : int
        Number of evenly spaced samples (the last one included) on which the
        state's eigenvalues are checked
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = np.inf
    t_final: Optional[float] = None
    sample_count: int = 801
    positivity_checks: int = 5

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("integrator tolerances must be > 0")
        if not self.max_step > 0:
            raise ParameterError("max_step must be > 0")
        if self.t_final is not None and not self.t_final > 0:
            raise ParameterError(f"t_final must be > 0, got {self.t_final}")
        if int(self.sample_count) != self.sample_count or self.sample_count < 2:
            raise ParameterError("sample_count must be an integer >= 2")
        if self.positivity_checks < 0:
            raise ParameterError("positivity_checks must be >= 0")

    def resolved_t_final(self, collective_rate: float) -> float:
        if self.t_final is not None:
            return float(self.t_final)
        return DEFAULT_DECAY_TIMES / collective_rate

    def sample_times(self, collective_rate: float) -> np.ndarray:
        return np.linspace(0.0, self.resolved_t_final(collective_rate), int(self.sample_count))

    def checked_indices(self) -> set:
        """Sample indices on which positivity is verified."""
        if self.positivity_checks == 0:
            return set()
        count = min(self.positivity_checks, self.sample_count)
        return set(np.linspace(self.sample_count - 1, 0, count).round().astype(int).tolist())


def integrate_sampled(
    fun: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    times: np.ndarray,
    observe: Callable[[int, float, np.ndarray], T],
    config: IntegratorConfig,
) -> List[T]:
    """
    Integrate ``dy/dt = fun(t, y)`` and call ``observe(index, t, y)`` on each sample.

    Raises
    ------
    ToleranceFailure
        If the step size underflows or the solver otherwise fails.
    """
    results = [observe(0, float(times[0]), y0)]
    solver = RK45(
        fun,
        float(times[0]),
        y0,
        float(times[-1]),
        rtol=config.rel_tol,
        atol=config.abs_tol,
        max_step=config.max_step,
    )
    index = 1
    steps = 0
    while index < len(times):
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise ToleranceFailure(f"integration failed at t={solver.t:.6g}: {message}")
        dense = solver.dense_output() if solver.t_old is not None else None
        while index < len(times) and (times[index] <= solver.t or solver.status == "finished"):
            t = float(times[index])
            y = solver.y if t >= solver.t or dense is None else dense(t)
            results.append(observe(index, t, y))
            index += 1
    logger.debug("integration finished: %d steps, %d evaluations", steps, solver.nfev)
    return results
