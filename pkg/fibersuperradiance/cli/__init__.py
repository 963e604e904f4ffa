"""
Command-line front end.

Usage examples::

    fibersuperradiance analytic --mode symmetric --n 100 --gamma-guided 0.26 --gamma-rad 1.06
    fibersuperradiance evolve --solver exact --n 10 --init product --theta 0 --distance-nm 100
    fibersuperradiance sweep --mode meanfield --n-min 2 --n-max 100 --distance-nm 100
    fibersuperradiance length --n 100 --gamma-guided 0.26 --gamma-rad 1.06
    fibersuperradiance figure fig4a --outdir data/

Exit codes: 0 success, 2 usage or configuration error, 3 solver or numerical
error, 4 I/O error.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from .. import __version__
from ..errors import NumericalError, ParameterError
from .commands import (
    PRESETS,
    SummaryRecord,
    cmd_analytic,
    cmd_evolve,
    cmd_figure,
    cmd_length,
    cmd_sweep,
    write_summary,
)
from .config import RunConfig, build_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_NON_CONFIG_KEYS = ("command", "preset", "config", "verbose", "quiet", "log_file")


def _add_rate_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("rates and geometry")
    group.add_argument("--gamma-guided", type=float, help="guided decay rate (gamma0)")
    group.add_argument("--gamma-rad", type=float, help="radiation-mode decay rate (gamma0)")
    group.add_argument("--rate-table", help="CSV table distance_nm,gamma_guided,gamma_rad")
    group.add_argument("--distance-nm", type=float, help="atom-surface distance r - a (nm)")
    group.add_argument("--fiber-radius-nm", type=float)
    group.add_argument("--core-index", type=float)
    group.add_argument("--clad-index", type=float)
    group.add_argument("--wavelength-nm", type=float)


def _add_state_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--theta", type=float, help="product-state angle in [0, pi]")
    parser.add_argument("--phi", type=float, help="product-state phase in [0, 2pi)")


def _add_integrator_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("integration")
    group.add_argument("--rel-tol", type=float)
    group.add_argument("--abs-tol", type=float)
    group.add_argument("--max-step", type=float, help="largest step (tau0)")
    group.add_argument("--positivity-checks", type=int, help="samples with eigenvalue checks")
    group.add_argument("--atom-cap", type=int, help="largest n the exact solver accepts")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key = value file or JSON summary")
    common.add_argument("-v", "--verbose", action="store_true", default=False)
    common.add_argument("-q", "--quiet", action="store_true", default=False)
    common.add_argument("--log-file", default=None)

    parser = argparse.ArgumentParser(
        prog="fibersuperradiance",
        description="Cooperative emission of atoms into the guided modes of a nanofiber",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, help_text):
        return sub.add_parser(
            name, parents=[common], help=help_text, argument_default=argparse.SUPPRESS
        )

    analytic = add("analytic", "closed-form summary and time series")
    analytic.add_argument("--n", type=int)
    analytic.add_argument("--mode", choices=("symmetric", "meanfield"))
    _add_state_options(analytic)
    _add_rate_options(analytic)
    analytic.add_argument("--t-final", type=float, help="end of the time series (tau0)")
    analytic.add_argument("--samples", type=int)
    analytic.add_argument("--output", help="CSV time series")
    analytic.add_argument("--summary", help="JSON summary file")
    analytic.add_argument("--downsample", type=int)
    analytic.add_argument("--timing", action="store_const", const=True)

    evolve = add("evolve", "integrate the master equation")
    evolve.add_argument("--n", type=int)
    evolve.add_argument("--solver", choices=("exact", "dicke"))
    evolve.add_argument("--init", choices=("symmetric", "product"))
    _add_state_options(evolve)
    _add_rate_options(evolve)
    evolve.add_argument("--coupling", help="CSV file with a general N x N coupling matrix")
    evolve.add_argument("--coupling-guided", help="CSV file with its guided part")
    _add_integrator_options(evolve)
    evolve.add_argument("--t-final", type=float, help="end of the run (tau0)")
    evolve.add_argument("--samples", type=int)
    evolve.add_argument("--output", help="trajectory CSV")
    evolve.add_argument("--outdir", help="directory for the default CSV name")
    evolve.add_argument("--summary", help="JSON summary file")
    evolve.add_argument("--downsample", type=int, help="keep every k-th sample")
    evolve.add_argument("--timing", action="store_const", const=True)

    sweep = add("sweep", "guided fraction versus atom number")
    sweep.add_argument("--mode", choices=("symmetric", "meanfield"))
    sweep.add_argument("--n-min", type=int)
    sweep.add_argument("--n-max", type=int)
    _add_state_options(sweep)
    _add_rate_options(sweep)
    sweep.add_argument("--n-jobs", type=int, help="joblib workers")
    sweep.add_argument("--output", help="CSV file (default: stdout)")
    sweep.add_argument("--summary", help="JSON summary file")

    length = add("length", "cooperativity length L0 = c / Gamma")
    length.add_argument("--n", type=int)
    length.add_argument("--linewidth-mhz", type=float, help="natural linewidth gamma0/2pi")
    _add_rate_options(length)
    length.add_argument("--summary", help="JSON summary file")

    figure = add("figure", "data sets of the preset figures")
    figure.add_argument("preset", choices=sorted(PRESETS))
    figure.add_argument("--distance-nm", type=float)
    figure.add_argument("--rate-table")
    _add_integrator_options(figure)
    figure.add_argument("--t-final", type=float)
    figure.add_argument("--samples", type=int)
    figure.add_argument("--outdir", help="output directory")
    figure.add_argument("--downsample", type=int)
    figure.add_argument("--n-jobs", type=int, help="joblib workers")
    figure.add_argument("--timing", action="store_const", const=True)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False, log_file: Optional[str] = None):
    """Log to stderr; DEBUG with ``verbose``, WARNING with ``quiet``."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=handlers,
        force=True,
    )


def _dispatch(command: str, config: RunConfig, preset: Optional[str]) -> SummaryRecord:
    if command == "analytic":
        return cmd_analytic(config)
    if command == "evolve":
        return cmd_evolve(config)
    if command == "sweep":
        return cmd_sweep(config)
    if command == "length":
        return cmd_length(config)
    return cmd_figure(config, preset)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the ``fibersuperradiance`` console script."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet, args.log_file)
    flags = {key: value for key, value in vars(args).items() if key not in _NON_CONFIG_KEYS}
    preset = getattr(args, "preset", None)

    try:
        config = build_run_config(flags, args.config)
        start = time.perf_counter()
        record = _dispatch(args.command, config, preset)
        if config.timing:
            record.wall_time_s = time.perf_counter() - start
        summary_path = config.summary
        if args.command == "figure":
            summary_path = f"{config.outdir}/{preset}.json"
        if summary_path:
            record.outputs.append(str(Path(summary_path)))
            write_summary(record, summary_path)
        if args.command != "sweep" or config.output:
            sys.stdout.write(record.to_json())
    except ParameterError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except NumericalError as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    return EXIT_OK


__all__ = ["main", "build_parser", "configure_logging", "RunConfig", "SummaryRecord"]
