#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Closed-form emission results.

Two families of solutions are provided:

- the symmetric one-excitation state, which decays exponentially at the
  collective rate Gamma = gamma_rad + N gamma_guided;
- the mean-field theory of a product state, where the pair correlation
  <s_i^+ s_j> is factorized as P (N - P) / N^2 for all times. The population
  then obeys the logistic equation
  dP/dt = -P [gamma + (1 - 1/N) gamma_guided (N - P)]
  with solution P = N (kappa + 1) / (kappa + exp(Gamma (t + t_a))).

Rates are in gamma0 units, times in tau0, intensities in I0 and energies in
hbar*omega0.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import (
    InvalidAtomCount,
    InvalidInitialPopulation,
    NegativeTime,
    NonMonotonicTimes,
    ToleranceFailure,
)
from .model import DecayRates

logger = logging.getLogger(__name__)

KAPPA_SERIES_THRESHOLD = 1e-8
# p0 below this fraction of N is the all-ground state
MIN_POPULATION_FRACTION = 1e-12
ODE_REL_TOL = 1e-12
ODE_ABS_TOL = 1e-14


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise InvalidAtomCount(f"atom count must be an integer >= 1, got {n}")
    return int(n)


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise NegativeTime(f"time must be >= 0, got {t}")


# =============================================================================
# SYMMETRIC ONE-EXCITATION STATE
# =============================================================================


def collective_rate(n: int, rates: DecayRates) -> float:
    """Collective decay rate Gamma = gamma_rad + n gamma_guided."""
    n = _check_n(n)
    return rates.gamma_rad + n * rates.gamma_guided


def symmetric_solution(n: int, rates: DecayRates, t):
    """
    Population and intensities of the decaying symmetric one-excitation state.

    Parameters:
    -----------
    n : int
        Number of atoms
    rates : DecayRates
        Single-atom rates
    t : float or array
        Time(s) in tau0 units, >= 0

    Returns:
    --------
    (P, i_guided, i_rad) with P = exp(-Gamma t), i_guided = n gamma_guided P
    and i_rad = gamma_rad P
    """
    _check_time(t)
    decay = np.exp(-collective_rate(n, rates) * np.asarray(t, dtype=float))
    return decay, n * rates.gamma_guided * decay, rates.gamma_rad * decay


def symmetric_fraction(n: int, rates: DecayRates) -> float:
    """Fraction of energy channeled into the guided modes, n g / (g_rad + n g)."""
    n = _check_n(n)
    return n * rates.gamma_guided / (rates.gamma_rad + n * rates.gamma_guided)


def success_probability(n: int, eta: float) -> float:
    """N eta / (1 + N eta); same value as :func:`symmetric_fraction` with eta = g/g_rad."""
    n = _check_n(n)
    return n * eta / (1 + n * eta)


# =============================================================================
# MEAN-FIELD THEORY
# =============================================================================


@dataclass(frozen=True)
class MeanFieldParams:
    """
    Parameters of the logistic mean-field solution.

    Attributes:
    -----------
    n : int
        Number of atoms
    rates : DecayRates
    p0 : float
        Initial excited population, 0 < p0 <= n
    kappa : float
        (n - 1) gamma_guided / gamma
    big_gamma : float
        gamma_rad + n gamma_guided = gamma (kappa + 1)
    tau : float
        1 / big_gamma
    t_a : float
        Time offset with P(0) = p0; zero at full excitation
    """

    n: int
    rates: DecayRates
    p0: float
    kappa: float
    big_gamma: float
    tau: float
    t_a: float


def meanfield_params(n: int, rates: DecayRates, p0: float) -> MeanFieldParams:
    n = _check_n(n)
    if not (math.isfinite(p0) and 0 < p0 <= n):
        raise InvalidInitialPopulation(f"initial population must lie in (0, {n}], got {p0}")
    if p0 < MIN_POPULATION_FRACTION * n:
        raise InvalidInitialPopulation(
            f"initial population {p0:.3g} is indistinguishable from the ground state"
        )
    kappa = (n - 1) * rates.gamma_guided / rates.gamma_total
    big_gamma = rates.gamma_rad + n * rates.gamma_guided
    tau = 1.0 / big_gamma
    # (kappa + 1) n/p0 - kappa >= 1 for p0 <= n
    argument = max((kappa + 1) * (n / p0) - kappa, 1.0)
    t_a = tau * math.log(argument) if p0 < n else 0.0
    return MeanFieldParams(n, rates, float(p0), kappa, big_gamma, tau, t_a)


def _growth(params: MeanFieldParams, t):
    return np.exp(params.big_gamma * (np.asarray(t, dtype=float) + params.t_a))


def meanfield_population(params: MeanFieldParams, t):
    """P(t) = N (kappa + 1) / (kappa + exp(Gamma (t + t_a)))."""
    _check_time(t)
    return params.n * (params.kappa + 1) / (params.kappa + _growth(params, t))


def meanfield_intensity(params: MeanFieldParams, t):
    """
    Guided intensity of the mean-field solution in I0 units.

    N (kappa + 1) / (kappa + E) * [gamma (kappa + 1) E / (kappa + E) - gamma_rad]
    with E = exp(Gamma (t + t_a)).
    """
    _check_time(t)
    growth = _growth(params, t)
    kappa = params.kappa
    gamma = params.rates.gamma_total
    population = params.n * (kappa + 1) / (kappa + growth)
    return population * (gamma * (kappa + 1) * growth / (kappa + growth) - params.rates.gamma_rad)


def meanfield_initial_intensity(n: int, rates: DecayRates, p0: float) -> float:
    """I_guided(0) = p0 gamma_guided [1 + (N - 1)(1 - p0/N)]."""
    params = meanfield_params(n, rates, p0)
    return params.p0 * rates.gamma_guided * (1 + (params.n - 1) * (1 - params.p0 / params.n))


class MeanFieldPeak(NamedTuple):
    t_max: float
    i_max: float
    t_p: float
    t_a: float


class MonotonicDecrease(NamedTuple):
    """The guided intensity decreases from t = 0 (no superradiant burst).

    ``t_p`` is None for a single atom.
    """

    t_p: Optional[float]
    t_a: float


def meanfield_peak(n: int, rates: DecayRates, p0: float) -> Union[MeanFieldPeak, MonotonicDecrease]:
    """
    Locate the superradiant burst of the mean-field guided intensity.

    The burst occurs at t_max = t_p - t_a with height
    gamma_guided N^3 / (4 (N - 1)), where
    t_p = tau ln{(1 - 1/N) [2 + (N - 2) gamma_guided / gamma]}.
    It exists only if t_a < t_p; a single atom always decays monotonically.
    """
    params = meanfield_params(n, rates, p0)
    if params.n == 1:
        return MonotonicDecrease(None, params.t_a)
    n = params.n
    argument = (1 - 1 / n) * (2 + (n - 2) * rates.gamma_guided / rates.gamma_total)
    t_p = params.tau * math.log(argument)
    if not params.t_a < t_p:
        return MonotonicDecrease(t_p, params.t_a)
    i_max = rates.gamma_guided * n**3 / (4 * (n - 1))
    return MeanFieldPeak(t_p - params.t_a, i_max, t_p, params.t_a)


def _log_ratio_over_kappa(kappa: float, x: float) -> float:
    # [ln(1 + kappa) - ln(1 + (1 - x) kappa)] / (x kappa)
    if kappa < KAPPA_SERIES_THRESHOLD:
        return 1 - kappa / 2 * (2 - x) + kappa**2 / 3 * (3 - 3 * x + x**2)
    # ln[(1 + kappa) / (1 + (1 - x) kappa)] written to stay accurate for small x
    return math.log1p(x * kappa / (1 + (1 - x) * kappa)) / (x * kappa)


def meanfield_fraction(n: int, rates: DecayRates, p0: float) -> float:
    """
    Guided fraction of the energy emitted by the mean-field solution.

    f = 1 - (gamma_rad/gamma) ln[(1 + kappa) / (1 + (1 - p0/N) kappa)] / (kappa p0/N),
    which reduces to the single-atom value gamma_guided/gamma as kappa -> 0.
    """
    params = meanfield_params(n, rates, p0)
    ratio = _log_ratio_over_kappa(params.kappa, params.p0 / params.n)
    return 1 - rates.gamma_rad / rates.gamma_total * ratio


def meanfield_fraction_full(n: int, rates: DecayRates) -> float:
    """Mean-field guided fraction at full excitation, 1 - (gamma_rad/gamma) ln(1 + kappa)/kappa."""
    return meanfield_fraction(n, rates, float(_check_n(n)))


def meanfield_guided_energy(n: int, rates: DecayRates, p0: float) -> float:
    """Total energy emitted into the guided modes (hbar*omega0 units)."""
    return p0 * meanfield_fraction(n, rates, p0)


def meanfield_validity(n: int, p0: float) -> bool:
    """
    Whether N >> N - P0 >> 1 holds, read as 1 <= N - P0 <= N/10.

    The mean-field factorization is derived under this condition; the
    formulas are still evaluated when it fails.
    """
    deficit = n - p0
    return 1 <= deficit <= n / 10


def meanfield_ode(n: int, rates: DecayRates, p0: float, time_grid) -> np.ndarray:
    """
    Integrate the logistic population equation numerically.

    Independent of the closed form; used to validate it.

    Raises
    ------
    ToleranceFailure
        If the integrator does not reach the end of the grid.
    """
    params = meanfield_params(n, rates, p0)
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise NonMonotonicTimes("time grid must be a non-empty 1-D sequence")
    if grid[0] != 0:
        raise NegativeTime(f"time grid must start at 0, got {grid[0]}")
    if np.any(np.diff(grid) <= 0):
        raise NonMonotonicTimes("time grid must be strictly increasing")
    if grid.size == 1:
        return np.array([params.p0])

    gamma = rates.gamma_total
    coupling = (1 - 1 / params.n) * rates.gamma_guided

    def rhs(t, y):
        return -y * (gamma + coupling * (params.n - y))

    solution = solve_ivp(
        rhs,
        (0.0, float(grid[-1])),
        [params.p0],
        method="DOP853",
        t_eval=grid,
        rtol=ODE_REL_TOL,
        atol=ODE_ABS_TOL,
    )
    if not solution.success:
        raise ToleranceFailure(f"mean-field integration failed: {solution.message}")
    logger.debug("mean-field ODE: %d evaluations", solution.nfev)
    return solution.y[0]


def meanfield_summary(n: int, rates: DecayRates, p0: float) -> Tuple[MeanFieldParams, Union[MeanFieldPeak, MonotonicDecrease], float]:
    """Parameters, peak characterization and guided fraction in one call."""
    params = meanfield_params(n, rates, p0)
    if not meanfield_validity(params.n, params.p0):
        logger.warning(
            "mean-field condition N >> N - P0 >> 1 is not met (N=%d, P0=%.6g); "
            "results are indicative only",
            params.n,
            params.p0,
        )
    return params, meanfield_peak(n, rates, p0), meanfield_fraction(n, rates, p0)
