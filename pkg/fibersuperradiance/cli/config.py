"""
Run configuration for the command-line front end.

Values are merged as defaults < config file < explicit flags. A config file is
either a flat ``key = value`` file or the JSON summary of an earlier run, whose
``"config"`` object is read back so that the run can be reproduced.
"""

import configparser
import json
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union, get_args

from ..core.integrator import IntegratorConfig
from ..core.model import (
    DEFAULT_RATE_TABLE,
    DecayRates,
    GeometryMetadata,
    InitialStateSpec,
    StateKind,
    load_rate_table,
    make_rates,
)
from ..errors import ConfigError, ParameterError

logger = logging.getLogger(__name__)

_SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters shared by all subcommands.

    Attributes:
    -----------
    n : int, optional
        Number of atoms
    gamma_guided, gamma_rad : float, optional
        Direct single-atom rates (gamma0 units); override the rate table
    rate_table, distance_nm : optional
        Rate table file and atom-surface distance used when no direct rates
        are given
    mode : str
        ``symmetric`` or ``meanfield`` for analytic and sweep runs
    init, theta, phi
        Initial state (``symmetric`` or ``product``) and product-state angles
    solver : str
        ``exact`` or ``dicke``
    coupling, coupling_guided : str, optional
        CSV files with a general coupling matrix and its guided part
    rel_tol, abs_tol, max_step, t_final, samples, positivity_checks, atom_cap
        Integration controls
    n_min, n_max : int
        Sweep range (inclusive)
    linewidth_mhz : float
        Natural linewidth gamma0/2pi of the transition
    output, summary, outdir
        CSV path, JSON summary path and figure output directory
    downsample : int
        Keep every k-th sample in trajectory CSV files
    n_jobs : int
        joblib workers for sweeps and presets
    timing : bool
        Add the wall time to the summary
    fiber_radius_nm, core_index, clad_index, wavelength_nm
        Geometry provenance, echoed into summaries
    """

    n: Optional[int] = None
    gamma_guided: Optional[float] = None
    gamma_rad: Optional[float] = None
    rate_table: Optional[str] = None
    distance_nm: Optional[float] = None
    mode: str = "symmetric"
    init: str = "symmetric"
    theta: float = 0.0
    phi: float = 0.0
    solver: str = "dicke"
    coupling: Optional[str] = None
    coupling_guided: Optional[str] = None
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf
    t_final: Optional[float] = None
    samples: int = 801
    positivity_checks: int = 5
    atom_cap: int = 10
    n_min: int = 1
    n_max: Optional[int] = None
    linewidth_mhz: float = 5.3
    output: Optional[str] = None
    summary: Optional[str] = None
    outdir: str = "."
    downsample: int = 1
    n_jobs: int = 1
    timing: bool = False
    fiber_radius_nm: float = 200.0
    core_index: float = 1.45
    clad_index: float = 1.0
    wavelength_nm: float = 852.0

    def __post_init__(self):
        if self.mode not in ("symmetric", "meanfield"):
            raise ConfigError(f"mode must be symmetric or meanfield, got {self.mode!r}")
        if self.init not in ("symmetric", "product"):
            raise ConfigError(f"init must be symmetric or product, got {self.init!r}")
        if self.solver not in ("exact", "dicke"):
            raise ConfigError(f"solver must be exact or dicke, got {self.solver!r}")
        if self.downsample < 1:
            raise ConfigError("downsample must be >= 1")

    def require_n(self) -> int:
        if self.n is None:
            raise ConfigError("the number of atoms is required (--n)")
        if self.n < 1:
            raise ParameterError(f"atom count must be >= 1, got {self.n}")
        return self.n

    def rates(self) -> DecayRates:
        """Direct rates if given, otherwise the rate table at ``distance_nm``."""
        direct = self.gamma_guided is not None or self.gamma_rad is not None
        tabulated = self.rate_table is not None or self.distance_nm is not None
        if direct:
            if self.gamma_guided is None or self.gamma_rad is None:
                raise ConfigError("give both --gamma-guided and --gamma-rad")
            if tabulated:
                logger.warning("direct rates given; ignoring the rate table lookup")
            return make_rates(self.gamma_guided, self.gamma_rad)
        if self.distance_nm is None:
            raise ConfigError("give --gamma-guided/--gamma-rad or --distance-nm")
        table = load_rate_table(self.rate_table or DEFAULT_RATE_TABLE)
        return table.lookup(self.distance_nm)

    def initial_state(self) -> InitialStateSpec:
        if self.init == "symmetric":
            return InitialStateSpec.symmetric()
        return InitialStateSpec(StateKind.PRODUCT, self.theta, self.phi)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_step=self.max_step,
            t_final=self.t_final,
            sample_count=self.samples,
            positivity_checks=self.positivity_checks,
        )

    def geometry(self) -> GeometryMetadata:
        return GeometryMetadata(
            fiber_radius_nm=self.fiber_radius_nm,
            core_index=self.core_index,
            clad_index=self.clad_index,
            wavelength_nm=self.wavelength_nm,
            atom_surface_distance_nm=(
                self.distance_nm if self.distance_nm is not None else 100.0
            ),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Every field that is set, in field order; unset and infinite values are left out."""
        echo = {}
        for key, value in asdict(self).items():
            if value is None or (isinstance(value, float) and math.isinf(value)):
                continue
            echo[key] = value
        return echo


def _base_type(hint):
    args = [arg for arg in get_args(hint) if arg is not type(None)]
    return args[0] if args else hint


def _to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    try:
        return configparser.ConfigParser.BOOLEAN_STATES[str(value).strip().lower()]
    except KeyError:
        raise ConfigError(f"not a boolean: {value!r}") from None


def _to_int(value) -> int:
    number = float(value)
    if number != int(number):
        raise ValueError(f"not an integer: {value!r}")
    return int(number)


_CONVERTERS = {
    field.name: {bool: _to_bool, int: _to_int, float: float}.get(_base_type(field.type), str)
    for field in fields(RunConfig)
}


def coerce_values(values: Dict[str, Any], source: str) -> Dict[str, Any]:
    """Normalize keys (dashes to underscores) and convert values to field types."""
    result = {}
    for raw_key, raw_value in values.items():
        key = raw_key.strip().replace("-", "_")
        if key not in _CONVERTERS:
            raise ConfigError(f"{source}: unknown key {raw_key!r}")
        try:
            result[key] = _CONVERTERS[key](raw_value)
        except (TypeError, ValueError, OverflowError) as exc:
            raise ConfigError(f"{source}: bad value for {raw_key!r}: {exc}") from exc
    return result


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a config file into field values.

    JSON files must contain a ``"config"`` object (as written into every run
    summary); anything else is parsed as flat ``key = value`` lines.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(document.get("config"), dict):
            raise ConfigError(f"{path}: JSON config needs a 'config' object")
        return coerce_values(document["config"], str(path))
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if parser.sections() != [_SECTION]:
        raise ConfigError(f"{path}: sections are not supported")
    return coerce_values(dict(parser[_SECTION]), str(path))


def build_run_config(
    flags: Dict[str, Any], config_path: Optional[Union[str, Path]] = None, **overrides
) -> RunConfig:
    """Merge defaults, a config file and explicit flag values."""
    values: Dict[str, Any] = {}
    if config_path is not None:
        values.update(read_config_file(config_path))
        logger.debug("loaded %d keys from %s", len(values), config_path)
    values.update(coerce_values(flags, "command line"))
    values.update(overrides)
    return replace(RunConfig(), **values)
