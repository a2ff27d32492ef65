# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Command-line front end: ``indoctrination <command> [options]``.

Results go to standard output as JSON or CSV; diagnostics go to standard
error. The exit status is 0 on success, 1 for a usage error, 2 when a
solver fails and 3 when ``verify`` finds a profitable deviation.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from astropy.table import Table
from pydantic import ValidationError

from .core import (
    EffortProfile,
    NullDebateError,
    OpinionConfig,
    SolverConvergenceError,
    UnimodalityError,
)
from .dynamics import iterate_to_stationary, stationary_closed_form
from .equilibrium import solve_baseline
from .limited_exposure import (
    LIMITED_EXPOSURE_OPINIONS,
    exposure_grid,
    limited_config,
    polarization,
    solve_equilibrium,
    sweep,
)
from .settings import Command, OutputFormat, RunConfig
from .verification import certify_equilibrium, is_certified, max_payoff_gain

__all__ = ["UsageError", "build_parser", "run", "main", "console_main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_NOT_CERTIFIED = 3

CSV_NUMBER_FORMAT = "%.12g"

LIMITED_COLUMNS = ("delta", "w", "e1", "e2", "e3", "r_star", "polarization")
EQUILIBRIUM_COLUMNS = ("opinion", "size", "aggregate", "effort", "payoff")
PROCESS_COLUMNS = ("delta", "pi1", "pi2", "pi3", "iterations")
VERIFY_COLUMNS = ("player", "current_effort", "best_effort", "payoff_gain", "method")

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    """
    Raised for command-line arguments that cannot be parsed.
    """


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _comma_floats(text):
    try:
        return tuple(float(item) for item in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        ) from None


def _comma_ints(text):
    try:
        return tuple(int(item) for item in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from None


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:steps, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected start:stop:steps, got {text!r}"
        ) from None


def build_parser():
    """
    Parser for the ``indoctrination`` command line.
    """
    common = _ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="solver tolerance (1e-12)")
    common.add_argument("--max-iter", type=int, help="iteration limit (1000000)")
    common.add_argument(
        "--format", choices=[f.value for f in OutputFormat], help="output format"
    )
    common.add_argument("--logfile", type=Path, help="also log diagnostics here")

    parser = _ArgumentParser(
        prog="indoctrination",
        description="Equilibria, polarization and opinion dynamics of the "
        "indoctrination game.",
    )
    commands = parser.add_subparsers(
        dest="command", required=True, parser_class=_ArgumentParser
    )

    equilibrium = commands.add_parser(
        Command.EQUILIBRIUM.value,
        parents=[common],
        help="equilibrium of the full-monitoring game",
    )
    equilibrium.add_argument("--opinions", type=_comma_floats, required=True)
    equilibrium.add_argument("--sizes", type=_comma_ints, required=True)

    limited = commands.add_parser(
        Command.LIMITED.value,
        parents=[common],
        help="equilibrium of the limited-exposure game",
    )
    limited.add_argument("--delta", type=float, required=True)
    limited.add_argument("--sizes", type=_comma_ints)

    sweep_parser = commands.add_parser(
        Command.SWEEP.value,
        parents=[common],
        help="limited-exposure equilibrium over a grid of exposure levels",
    )
    sweep_parser.add_argument("--grid", type=_grid, help="start:stop:steps")

    process = commands.add_parser(
        Command.PROCESS.value,
        parents=[common],
        help="stationary distribution of the indoctrination process",
    )
    process.add_argument("--delta", type=float, required=True)
    process.add_argument("--pi0", type=_comma_floats)

    verify = commands.add_parser(
        Command.VERIFY.value,
        parents=[common],
        help="certify an equilibrium written by equilibrium or limited",
    )
    verify.add_argument("--input", type=Path, required=True)
    verify.add_argument("--certification-tol", type=float)
    return parser


def _setup_logging(logfile, err_stream):
    package_logger = logging.getLogger("indoctrination")
    console_format = logging.Formatter("%(message)s")
    if package_logger.hasHandlers() is False:
        package_logger.setLevel(logging.INFO)
        # Warnings reach the console as the single diagnostic written by run
        ch = logging.StreamHandler(err_stream)
        ch.setFormatter(console_format)
        ch.setLevel(logging.ERROR)
        package_logger.addHandler(ch)
        if logfile is not None:
            # by default this appends to existing logfile
            fh = logging.FileHandler(logfile)
            fh.setFormatter(logging.Formatter("%(levelname)s - %(message)s"))
            fh.setLevel(logging.INFO)
            package_logger.addHandler(fh)


def _number_formats(table):
    floats = [name for name in table.colnames if table[name].dtype.kind == "f"]
    return {name: CSV_NUMBER_FORMAT for name in floats}


def _run_equilibrium(config):
    opinion_config = OpinionConfig(opinions=config.opinions, sizes=config.sizes)
    baseline = solve_baseline(opinion_config)
    aggregates = list(baseline.aggregates.values)
    payoffs = list(baseline.per_opinion_payoff)
    payload = {
        "opinions": list(opinion_config.opinions),
        "sizes": list(opinion_config.sizes),
        "aggregates": aggregates,
        "efforts": list(baseline.symmetric_profile.efforts),
        "payoffs": payoffs,
    }
    per_player = [agg / size for agg, size in zip(aggregates, opinion_config.sizes)]
    table = Table(
        [
            list(opinion_config.opinions),
            list(opinion_config.sizes),
            aggregates,
            per_player,
            payoffs,
        ],
        names=EQUILIBRIUM_COLUMNS,
    )
    return payload, table, EXIT_OK


def _run_limited(config):
    eq = solve_equilibrium(config.delta, tol=config.tol, max_iter=config.max_iter)
    sizes = config.limited_sizes
    value = polarization(eq.aggregates, limited_config(sizes)).value
    payload = {
        "delta": eq.delta,
        "w": eq.w,
        "e1": eq.e1,
        "e2": eq.e2,
        "e3": eq.e3,
        "r_star": eq.r_star,
        "polarization": value,
        "efforts": list(eq.to_profile(sizes).efforts),
        "opinions": list(LIMITED_EXPOSURE_OPINIONS),
        "sizes": list(sizes),
    }
    row = [payload[name] for name in LIMITED_COLUMNS]
    table = Table(rows=[row], names=LIMITED_COLUMNS)
    return payload, table, EXIT_OK


def _run_sweep(config):
    grid = exposure_grid(*config.grid)
    table = sweep(grid, tol=config.tol, max_iter=config.max_iter)
    table.meta.clear()
    payload = [{name: float(row[name]) for name in table.colnames} for row in table]
    return payload, table, EXIT_OK


def _run_process(config):
    pi, iterations = iterate_to_stationary(
        config.initial_shares, config.delta, tol=config.tol, max_iter=config.max_iter
    )
    closed_form = stationary_closed_form(config.delta)
    difference = max(abs(a - b) for a, b in zip(pi.probs, closed_form.probs))
    payload = {
        "delta": config.delta,
        "pi": list(pi.probs),
        "iterations": iterations,
        "pi_closed_form": list(closed_form.probs),
        "max_abs_difference": difference,
    }
    table = Table(
        rows=[(config.delta, *pi.probs, iterations)], names=PROCESS_COLUMNS
    )
    return payload, table, EXIT_OK


def _run_verify(config):
    data = json.loads(config.input.read_text())
    try:
        opinion_config = OpinionConfig(opinions=data["opinions"], sizes=data["sizes"])
        profile = EffortProfile.from_group_efforts(opinion_config, data["efforts"])
    except (KeyError, TypeError) as err:
        raise ValueError(f"{config.input} is not an equilibrium file: {err}") from None
    delta = data.get("delta")
    reports = certify_equilibrium(
        profile, opinion_config, delta=delta, tol=config.certification_tol
    )
    certified = is_certified(reports, tol=config.certification_tol)
    records = [
        {
            "player": report.player,
            "current_effort": report.current_effort,
            "best_effort": report.best_effort,
            "payoff_gain": report.payoff_gain,
            "method": report.method.value,
        }
        for report in reports
    ]
    payload = {
        "certified": certified,
        "max_payoff_gain": max_payoff_gain(reports),
        "reports": records,
    }
    table = Table(rows=[tuple(r.values()) for r in records], names=VERIFY_COLUMNS)
    return payload, table, EXIT_OK if certified else EXIT_NOT_CERTIFIED


_HANDLERS = {
    Command.EQUILIBRIUM: _run_equilibrium,
    Command.LIMITED: _run_limited,
    Command.SWEEP: _run_sweep,
    Command.PROCESS: _run_process,
    Command.VERIFY: _run_verify,
}


def _one_line(err):
    return " ".join(str(err).split())


def run(config, stream=None, err_stream=None):
    """
    Carry out one run and write its results.

    Parameters
    ----------

    config : `~indoctrination.settings.RunConfig`
        What to compute and how to write it.

    stream : file-like, optional
        Where results are written; standard output by default.

    err_stream : file-like, optional
        Where the one-line diagnostic of a failure is written; standard
        error by default.

    Returns
    -------

    int
        Exit status.
    """
    stream = sys.stdout if stream is None else stream
    err_stream = sys.stderr if err_stream is None else err_stream
    try:
        payload, table, status = _HANDLERS[config.command](config)
    except (SolverConvergenceError, UnimodalityError) as err:
        print(f"indoctrination: solver failure: {_one_line(err)}", file=err_stream)
        return EXIT_SOLVER
    except (NullDebateError, ValueError, OSError) as err:
        print(f"indoctrination: error: {_one_line(err)}", file=err_stream)
        return EXIT_USAGE

    if config.format == OutputFormat.JSON:
        stream.write(json.dumps(payload, indent=2) + "\n")
    else:
        table.write(stream, format="ascii.csv", formats=_number_formats(table))
    if status == EXIT_NOT_CERTIFIED:
        print(
            "indoctrination: profile is not an equilibrium "
            f"(largest deviation gain {payload['max_payoff_gain']})",
            file=err_stream,
        )
    return status


def main(argv=None, stream=None, err_stream=None):
    """
    Parse ``argv`` and run the requested command.

    Returns
    -------

    int
        Exit status.
    """
    err_stream = sys.stderr if err_stream is None else err_stream
    try:
        args = build_parser().parse_args(argv)
        settings = {
            name: value for name, value in vars(args).items() if value is not None
        }
        config = RunConfig(**settings)
    except (UsageError, ValidationError) as err:
        print(f"indoctrination: error: {_one_line(err)}", file=err_stream)
        return EXIT_USAGE

    _setup_logging(config.logfile, err_stream)
    logger.debug(f"Running {config.command.value}")
    return run(config, stream=stream, err_stream=err_stream)


def console_main():
    sys.exit(main())
