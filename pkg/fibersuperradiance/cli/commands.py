"""
Subcommand implementations.

Every command takes a merged :class:`RunConfig`, writes its data files and
returns a :class:`SummaryRecord`. Output is deterministic: CSV values are
written with 17 significant digits and JSON keys keep a fixed order, with the
unit in each key name (``_gamma0`` rates, ``_tau0`` times, ``_I0``
intensities, ``_hbar_omega0`` energies).
"""

import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..core.analytics import (
    MIN_POPULATION_FRACTION,
    MeanFieldPeak,
    collective_rate,
    meanfield_fraction,
    meanfield_intensity,
    meanfield_params,
    meanfield_population,
    meanfield_summary,
    meanfield_validity,
    symmetric_fraction,
    symmetric_solution,
)
from ..core.dicke import evolve_dicke
from ..core.exact import coupling_collective_rate, evolve_exact
from ..core.integrator import DEFAULT_DECAY_TIMES
from ..core.model import (
    DEFAULT_RATE_TABLE,
    DecayRates,
    InitialStateSpec,
    StateKind,
    Trajectory,
    cooperativity_length,
    ideal_string_matrix,
    load_coupling_matrix,
    load_rate_table,
    trajectory_energies,
    trajectory_peak,
)
from ..errors import ConfigError, PresetUnavailable, RangeError
from .config import RunConfig

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = "t_tau0,P,JpJm,i_guided_I0,i_rad_I0,i_total_I0"
SWEEP_HEADER = "n,f_guided"
FLOAT_FORMAT = "%.17g"


# =============================================================================
# SUMMARY RECORD
# =============================================================================


@dataclass
class SummaryRecord:
    """
    JSON summary of one command.

    Fields left at ``None`` are omitted from the output. Analytic and numeric
    guided fractions appear together only when both were computed.
    """

    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    geometry: Optional[Dict[str, Any]] = None
    n: Optional[int] = None
    gamma_guided_gamma0: Optional[float] = None
    gamma_rad_gamma0: Optional[float] = None
    eta: Optional[float] = None
    Gamma_gamma0: Optional[float] = None
    kappa: Optional[float] = None
    t_a_tau0: Optional[float] = None
    t_p_tau0: Optional[float] = None
    peak: Optional[Dict[str, Any]] = None
    meanfield_condition_met: Optional[bool] = None
    f_guided_analytic: Optional[float] = None
    f_guided_numeric: Optional[float] = None
    u_guided_hbar_omega0: Optional[float] = None
    u_rad_hbar_omega0: Optional[float] = None
    truncation_bound_hbar_omega0: Optional[float] = None
    energy_budget_residual_hbar_omega0: Optional[float] = None
    numeric_peak: Optional[Dict[str, Any]] = None
    linewidth_MHz: Optional[float] = None
    L0_m: Optional[float] = None
    validity: Optional[str] = None
    solver: Optional[str] = None
    tolerances: Optional[Dict[str, Any]] = None
    outputs: List[str] = field(default_factory=list)
    runs: Optional[List[Dict[str, Any]]] = None
    wall_time_s: Optional[float] = None

    def set_rates(self, rates: DecayRates) -> None:
        self.gamma_guided_gamma0 = rates.gamma_guided
        self.gamma_rad_gamma0 = rates.gamma_rad
        self.eta = rates.eta

    def to_dict(self) -> Dict[str, Any]:
        result = {}
        for item in fields(self):
            value = getattr(self, item.name)
            if value is None or (item.name == "outputs" and not value):
                continue
            result[item.name] = value
        return result

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


# =============================================================================
# OUTPUT HELPERS
# =============================================================================


def _prepare(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_trajectory_csv(traj: Trajectory, path, downsample: int = 1) -> Path:
    """Write a trajectory with the fixed header, full precision."""
    path = _prepare(path)
    rows = np.column_stack(
        [traj.times, traj.population, traj.jpjm, traj.i_guided, traj.i_rad, traj.i_total]
    )[::downsample]
    np.savetxt(path, rows, fmt=FLOAT_FORMAT, delimiter=",", header=TRAJECTORY_HEADER, comments="")
    logger.info("wrote %s (%d rows)", path, rows.shape[0])
    return path


def write_sweep_csv(rows: List[Tuple[int, float]], path) -> Path:
    path = _prepare(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        _write_sweep(rows, handle)
    logger.info("wrote %s (%d rows)", path, len(rows))
    return path


def _write_sweep(rows, handle) -> None:
    handle.write(SWEEP_HEADER + "\n")
    for n, fraction in rows:
        handle.write(f"{n:d},{FLOAT_FORMAT % fraction}\n")


def write_summary(record: SummaryRecord, path) -> Path:
    path = _prepare(path)
    path.write_text(record.to_json(), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def _analytic_trajectory(n, times, population, i_guided, rates: DecayRates, label) -> Trajectory:
    if rates.gamma_guided > 0:
        jpjm = i_guided / rates.gamma_guided
    else:
        jpjm = population * (1 + (n - 1) * (n - population) / n)
    return Trajectory(
        times=times,
        population=population,
        jpjm=jpjm,
        i_guided=i_guided,
        i_rad=rates.gamma_rad * population,
        n_atoms=n,
        solver=label,
    )


def _peak_dict(peak) -> Dict[str, Any]:
    if isinstance(peak, MeanFieldPeak):
        return {"t_max_tau0": peak.t_max, "i_max_I0": peak.i_max}
    return {"monotonic": True}


def _record_meanfield(record: SummaryRecord, n: int, rates: DecayRates, p0: float) -> None:
    params, peak, fraction = meanfield_summary(n, rates, p0)
    record.kappa = params.kappa
    record.t_a_tau0 = params.t_a
    record.t_p_tau0 = peak.t_p
    record.peak = _peak_dict(peak)
    record.meanfield_condition_met = meanfield_validity(n, p0)
    record.f_guided_analytic = fraction


# =============================================================================
# ANALYTIC
# =============================================================================


def cmd_analytic(config: RunConfig) -> SummaryRecord:
    """Closed-form summary and, with ``output``, a closed-form time series."""
    n = config.require_n()
    rates = config.rates()
    record = SummaryRecord("analytic", config.to_dict(), config.geometry().to_dict(), n)
    record.set_rates(rates)
    big_gamma = collective_rate(n, rates)
    record.Gamma_gamma0 = big_gamma
    t_final = config.t_final if config.t_final is not None else DEFAULT_DECAY_TIMES / big_gamma
    times = np.linspace(0.0, t_final, config.samples)

    if config.mode == "symmetric":
        record.f_guided_analytic = symmetric_fraction(n, rates)
        population, i_guided, _ = symmetric_solution(n, rates, times)
        label = "analytic-symmetric"
    else:
        p0 = InitialStateSpec.product(config.theta, config.phi).initial_population(n)
        _record_meanfield(record, n, rates, p0)
        params = meanfield_params(n, rates, p0)
        population = meanfield_population(params, times)
        i_guided = meanfield_intensity(params, times)
        label = "analytic-meanfield"

    if config.output:
        traj = _analytic_trajectory(n, times, population, i_guided, rates, label)
        record.outputs.append(str(write_trajectory_csv(traj, config.output, config.downsample)))
    return record


# =============================================================================
# EVOLVE
# =============================================================================


def _load_matrix(path) -> np.ndarray:
    try:
        return np.loadtxt(Path(path), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: not a numeric comma-separated matrix ({exc})") from exc


def run_trajectory(config: RunConfig, n: int, rates: Optional[DecayRates]) -> Tuple[Trajectory, float]:
    """Dispatch one solver run; returns the trajectory and its collective rate."""
    spec = config.initial_state()
    integrator = config.integrator()
    if config.coupling:
        guided = _load_matrix(config.coupling_guided) if config.coupling_guided else None
        coupling = load_coupling_matrix(_load_matrix(config.coupling), guided)
    else:
        coupling = ideal_string_matrix(n, rates)
    if config.solver == "exact":
        traj = evolve_exact(coupling, spec, integrator, atom_cap=config.atom_cap)
        return traj, coupling_collective_rate(coupling)
    traj = evolve_dicke(coupling, spec, coupling.n, integrator)
    return traj, coupling_collective_rate(coupling)


def _record_trajectory(record: SummaryRecord, traj: Trajectory) -> None:
    energies = trajectory_energies(traj)
    record.f_guided_numeric = energies.f_guided
    record.u_guided_hbar_omega0 = energies.u_guided
    record.u_rad_hbar_omega0 = energies.u_rad
    record.truncation_bound_hbar_omega0 = energies.truncation_bound
    record.energy_budget_residual_hbar_omega0 = energies.budget_residual
    peak = trajectory_peak(traj)
    if peak is None:
        record.numeric_peak = {"monotonic": True}
    else:
        record.numeric_peak = {"t_max_tau0": peak[0], "i_max_I0": peak[1]}
    record.solver = traj.solver


def cmd_evolve(config: RunConfig) -> SummaryRecord:
    """Integrate the master equation and write the trajectory CSV."""
    if config.coupling:
        rates = None
        n = int(_load_matrix(config.coupling).shape[0])
        if config.n is not None and config.n != n:
            raise ConfigError(f"--n {config.n} disagrees with the {n}x{n} coupling matrix")
    else:
        n = config.require_n()
        rates = config.rates()
    record = SummaryRecord("evolve", config.to_dict(), config.geometry().to_dict(), n)
    traj, big_gamma = run_trajectory(config, n, rates)
    record.Gamma_gamma0 = big_gamma

    if rates is not None:
        record.set_rates(rates)
        spec = config.initial_state()
        if spec.kind is StateKind.SYMMETRIC_ONE_EXCITATION:
            record.f_guided_analytic = symmetric_fraction(n, rates)
        elif spec.initial_population(n) >= MIN_POPULATION_FRACTION * n:
            _record_meanfield(record, n, rates, spec.initial_population(n))
    _record_trajectory(record, traj)
    record.tolerances = {
        "rel_tol": config.rel_tol,
        "abs_tol": config.abs_tol,
        "samples": config.samples,
        "positivity_checks": config.positivity_checks,
    }

    output = config.output or Path(config.outdir) / f"evolve_{config.solver}_n{n}.csv"
    record.outputs.append(str(write_trajectory_csv(traj, output, config.downsample)))
    return record


# =============================================================================
# SWEEP
# =============================================================================


def sweep_value(mode: str, n: int, rates: DecayRates, theta: float) -> float:
    """Guided fraction of one sweep row."""
    if mode == "symmetric":
        return symmetric_fraction(n, rates)
    p0 = InitialStateSpec.product(theta).initial_population(n)
    return meanfield_fraction(n, rates, p0)


def sweep_rows(
    mode: str, n_min: int, n_max: int, rates: DecayRates, theta: float = 0.0, n_jobs: int = 1
) -> List[Tuple[int, float]]:
    """Rows ``(n, f_guided)`` for n_min..n_max, in increasing n."""
    if n_min < 1 or n_max < n_min:
        raise RangeError(f"invalid atom-number range {n_min}..{n_max}")
    counts = list(range(n_min, n_max + 1))
    values = Parallel(n_jobs=n_jobs)(
        delayed(sweep_value)(mode, n, rates, theta) for n in counts
    )
    return list(zip(counts, values))


def cmd_sweep(config: RunConfig) -> SummaryRecord:
    """Guided fraction against atom number, one CSV row per n."""
    if config.n_max is None:
        raise ConfigError("the sweep needs --n-max")
    rates = config.rates()
    rows = sweep_rows(config.mode, config.n_min, config.n_max, rates, config.theta, config.n_jobs)
    record = SummaryRecord("sweep", config.to_dict(), config.geometry().to_dict())
    record.set_rates(rates)
    if config.output:
        record.outputs.append(str(write_sweep_csv(rows, config.output)))
    else:
        _write_sweep(rows, sys.stdout)
    return record


# =============================================================================
# LENGTH
# =============================================================================


def cmd_length(config: RunConfig) -> SummaryRecord:
    """Cooperativity length L0 = c / Gamma."""
    n = config.require_n()
    rates = config.rates()
    length = cooperativity_length(n, rates, config.linewidth_mhz)
    record = SummaryRecord("length", config.to_dict(), config.geometry().to_dict(), n)
    record.set_rates(rates)
    record.Gamma_gamma0 = collective_rate(n, rates)
    record.linewidth_MHz = config.linewidth_mhz
    record.L0_m = length
    record.validity = (
        f"the model holds for sample lengths L << L0 = {length:.4g} m; "
        f"longer strings need propagation effects"
    )
    logger.info("L0 = %.6g m for N=%d", length, n)
    return record


# =============================================================================
# FIGURE PRESETS
# =============================================================================


class FigurePreset(NamedTuple):
    kind: str
    theta: float
    description: str


PRESETS = {
    "fig3": FigurePreset("symmetric", 0.0, "guided fraction of the symmetric state, N = 1..100"),
    "fig4a": FigurePreset("evolve", 0.0, "guided intensity of N = 10 fully excited atoms"),
    "fig4b": FigurePreset("evolve", math.pi / 2, "guided intensity of N = 10 half-excited atoms"),
    "fig5a": FigurePreset("meanfield", 0.0, "mean-field guided fraction, full excitation"),
    "fig5b": FigurePreset("meanfield", math.pi / 2, "mean-field guided fraction, half excitation"),
}
PRESET_DISTANCE_NM = 100.0
PRESET_SWEEP_RANGE = (1, 100)
PRESET_EVOLVE_N = 10
PRESET_EVOLVE_T_FINAL = 6.0


def _preset_rates(config: RunConfig) -> Tuple[float, DecayRates]:
    distance = config.distance_nm if config.distance_nm is not None else PRESET_DISTANCE_NM
    table = load_rate_table(config.rate_table or DEFAULT_RATE_TABLE)
    if not table.covers(distance):
        raise PresetUnavailable(
            f"no rates for r - a = {distance:g} nm in {table.source}: the decay rates "
            f"at this distance are only known as curve endpoints or bounds, so the "
            f"preset is disabled rather than run with invented rates; supply a "
            f"rate table covering it with --rate-table"
        )
    if config.gamma_guided is not None or config.gamma_rad is not None:
        logger.warning("figure presets take their rates from the rate table; direct rates ignored")
    return distance, table.lookup(distance)


def _run_preset_trajectory(config: RunConfig, n: int, rates: DecayRates) -> Trajectory:
    return run_trajectory(config, n, rates)[0]


def cmd_figure(config: RunConfig, preset: str) -> SummaryRecord:
    """Write the data behind one preset into ``outdir``."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    settings = PRESETS[preset]
    distance, rates = _preset_rates(config)
    outdir = Path(config.outdir)
    record = SummaryRecord("figure", config.to_dict(), None)
    record.geometry = replace(config.geometry(), atom_surface_distance_nm=distance).to_dict()
    record.set_rates(rates)
    record.validity = settings.description
    logger.info("preset %s: %s at r - a = %g nm", preset, settings.description, distance)

    if settings.kind in ("symmetric", "meanfield"):
        n_min, n_max = PRESET_SWEEP_RANGE
        rows = sweep_rows(settings.kind, n_min, n_max, rates, settings.theta, config.n_jobs)
        record.outputs.append(str(write_sweep_csv(rows, outdir / f"{preset}.csv")))
        record.f_guided_analytic = rows[-1][1]
        record.n = n_max
        return record

    n = PRESET_EVOLVE_N
    t_final = config.t_final if config.t_final is not None else PRESET_EVOLVE_T_FINAL
    run_config = replace(
        config, solver="exact", init="product", theta=settings.theta, phi=0.0, t_final=t_final
    )
    atoms = (n, 1)
    trajectories = Parallel(n_jobs=config.n_jobs)(
        delayed(_run_preset_trajectory)(run_config, count, rates) for count in atoms
    )
    record.n = n
    record.Gamma_gamma0 = collective_rate(n, rates)
    _record_meanfield(record, n, rates, run_config.initial_state().initial_population(n))
    _record_trajectory(record, trajectories[0])
    record.runs = []
    for count, traj, stem in zip(atoms, trajectories, (preset, f"{preset}_single_atom")):
        path = write_trajectory_csv(traj, outdir / f"{stem}.csv", config.downsample)
        record.outputs.append(str(path))
        energies = trajectory_energies(traj)
        record.runs.append(
            {
                "n": count,
                "f_guided_numeric": energies.f_guided,
                "u_guided_hbar_omega0": energies.u_guided,
                "i_guided_0_per_atom_I0": float(traj.i_guided[0]) / count,
            }
        )
    return record
