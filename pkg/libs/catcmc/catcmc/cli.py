import json
import logging
import math
import sys
from typing import Callable, Optional

import click
import numpy as np
import pandas as pd
from trogon import tui

from catcmc import settings
from catcmc.config import RunConfig, load_config, parse_modes
from catcmc.exceptions import CatCMCException
from catcmc.geometry import neck_params, singular_length
from catcmc.reports import Report, dumps, write_report, write_table

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


class _ProgressLog:
    """Output queue of the verify suite: logs each finished check."""

    def put_nowait(self, item):
        logger.info("check %s finished: %s", item.name, "pass" if item.passed else "FAIL")


def _nan_if_none(value):
    return math.nan if value is None else value


def _solve_neck(config: RunConfig):
    from catcmc.solvers.nonlinear import mode_amplitudes, solve_cmc_neck

    params = neck_params(config.tau, **config.grid())
    f = config.boundary.to_boundary(params.n_x)
    u, report = solve_cmc_neck(
        params,
        config.delta,
        f,
        tol=config.tol,
        max_iter=config.max_iter,
        smallness=config.smallness,
        newton=config.newton,
    )
    modes = list(range(params.n_x // 2 + 1))
    amplitudes = mode_amplitudes(u, modes)
    table = pd.DataFrame({"s": params.s, "omega": params.omega})
    for k in modes:
        table[f"mode_{k}"] = amplitudes[k]
    results = {
        "solve": report.model_dump(mode="json"),
        "l": params.l,
        "n_x": params.n_x,
        "n_s": params.n_s,
        "sup_physical": float(np.max(np.abs(u.values * params.omega))),
    }
    return results, {"profiles.csv": table}, []


def _solve_disk(config: RunConfig):
    from catcmc.solvers.disk import DISK_SMALLNESS, mode_profile, solve_cmc_disk, spherical_cap

    n_x = config.resolved_n_x()
    f = config.boundary.to_boundary(n_x).plus
    g = solve_cmc_disk(
        config.delta,
        f,
        config.n_r,
        tol=config.tol,
        max_iter=config.max_iter,
        smallness=DISK_SMALLNESS if config.smallness is None else config.smallness,
    )
    table = pd.DataFrame({"r": g.r, "cap": spherical_cap(config.delta, g.r)})
    for k in range(n_x // 2 + 1):
        table[f"mode_{k}"] = mode_profile(g, k)
    results = {
        "delta": config.delta,
        "n_r": g.n_r,
        "n_theta": g.n_theta,
        "origin": g.origin,
        "h_at_1": float(np.mean(g.boundary)),
        "sup_norm": g.sup_norm(),
    }
    if not config.boundary.modes():
        results["cap_error"] = float(
            np.max(np.abs(g.values - spherical_cap(config.delta, g.r)[None, :]))
        )
    return results, {"disk_profile.csv": table}, []


def _sweep_tau(config: RunConfig):
    from catcmc.verify.experiments import decay_sweep, lower_norm_fit, tau_continuity_experiment

    f = config.boundary.to_boundary(config.resolved_n_x())
    decay = decay_sweep(config.tau_list, config.delta, f, n_r=config.n_r, **config.grid())
    continuity = tau_continuity_experiment(
        config.delta,
        f,
        config.tau_list,
        bottom_delta_sign=config.bottom_delta_sign,
        n_r=config.n_r,
        **config.grid(),
    )
    sweep = pd.DataFrame(
        {
            "tau": config.tau_list,
            "distance": continuity.distances,
            "rescaled_distance": continuity.rescaled_distances,
            "sheet_distance": continuity.sheet_distances,
            "weighted_norm": [r.solve.weighted_norm for r in decay],
            "weighted_norm_one": [r.weighted_norm_one for r in decay],
            "lower_norm": [r.lower_norm for r in decay],
            "lower_ratio": [r.lower_ratio for r in decay],
            "rescaled_lower_norm": [r.rescaled_lower_norm for r in decay],
            "iterations": [r.solve.iterations for r in decay],
        }
    )
    fits = pd.DataFrame(
        {
            "tau": [r.tau for r in decay],
            "exponent": [_nan_if_none(r.fit.exponent) for r in decay],
            "r_squared": [r.fit.r_squared for r in decay],
            "window_lo": [r.fit.window[0] for r in decay],
            "window_hi": [r.fit.window[1] for r in decay],
            "points": [r.fit.points for r in decay],
        }
    )
    results = {
        "decay": [r.model_dump(mode="json", exclude={"solve"}) for r in decay],
        "continuity": continuity.model_dump(mode="json"),
        "lower_fit": lower_norm_fit(decay).model_dump(mode="json"),
        "rescaled_lower_fit": lower_norm_fit(decay, rescaled=True).model_dump(mode="json"),
    }
    return results, {"tau_sweep.csv": sweep, "decay_fit.csv": fits}, []


def _derivative(config: RunConfig):
    from catcmc.verify.experiments import derivative_convergence_experiment

    f = config.boundary.to_boundary(config.resolved_n_x())
    report = derivative_convergence_experiment(
        config.delta,
        f,
        config.tau_list,
        step=config.dtau_fraction,
        n_r=config.n_r,
        **config.grid(),
    )
    table = pd.DataFrame(
        {
            "tau0": report.taus,
            "distance": report.distances,
            "cauchy": report.cauchy + [math.nan],
        }
    )
    return {"derivative": report.model_dump(mode="json")}, {"derivative.csv": table}, []


def _nondegeneracy(config: RunConfig):
    from catcmc.solvers.linear import (
        growth_exponent,
        locate_singular_length,
        singular_length_sweep,
    )

    n_s = settings.n_s() if config.n_s is None else config.n_s
    table = None
    for k in (0, 1, 2):
        lengths, sigmas = singular_length_sweep(config.lmin, config.lmax, config.steps, k, n_s)
        if table is None:
            table = pd.DataFrame({"l": lengths})
        table[f"sigma_mode_{k}"] = sigmas

    located = locate_singular_length(config.lmin, config.lmax, config.steps, n_s)
    sqrt2 = abs(located - math.sqrt(2.0))
    logger.warning(
        "singular length %.6f differs from sqrt(2) by %.4f (reported only)", located, sqrt2
    )
    results = {
        "singular_length": located,
        "root": singular_length(),
        "distance_to_sqrt2": sqrt2,
        "growth_exponents": {str(k): growth_exponent(k) for k in range(5)},
        "free_growth_exponents": {
            str(k): growth_exponent(k, potential=False) for k in range(5)
        },
    }
    return results, {"nondegeneracy.csv": table}, []


def _verify(config: RunConfig):
    from catcmc.verify.suite import run_suite

    checks = run_suite(config.suite, _ProgressLog(), tau=config.tau, n_x=config.n_x)
    table = pd.DataFrame(
        {
            "name": [c.name for c in checks],
            "passed": [c.passed for c in checks],
            "note": [c.note for c in checks],
        }
    )
    results = {
        "suite": config.suite,
        "passed": sum(c.passed for c in checks),
        "failed": sum(not c.passed for c in checks),
    }
    return results, {"checks.csv": table}, checks


def config_record(config: RunConfig) -> dict:
    """The config as stored in reports, without the output directory."""
    return config.model_dump(mode="json", exclude={"output_dir"})


COMMANDS: dict[str, Callable] = {
    "solve-neck": _solve_neck,
    "solve-disk": _solve_disk,
    "sweep-tau": _sweep_tau,
    "derivative": _derivative,
    "nondegeneracy": _nondegeneracy,
    "verify": _verify,
}


def run(config: RunConfig, write: bool = True) -> Report:
    """Run one command and write its report and tables to the output directory."""
    logger.info("running %s", config.command)
    results, tables, checks = COMMANDS[config.command](config)
    report = Report(
        command=config.command,
        config=config_record(config),
        results=results,
        checks=checks,
    )
    if write:
        output_dir = config.resolved_output_dir()
        for name, frame in tables.items():
            write_table(frame, output_dir, name)
        write_report(report, output_dir)
    return report


def execute(
    command: str,
    config_path: Optional[str],
    plus: tuple[str, ...] = (),
    minus: tuple[str, ...] = (),
    **overrides,
):
    """Build the config, run the command and map errors to exit codes."""
    ctx = click.get_current_context()
    output_dir = overrides.get("output_dir") or settings.output_dir()
    config = None
    try:
        if plus or minus:
            overrides["boundary"] = {"plus": parse_modes(plus), "minus": parse_modes(minus)}
        config = load_config(config_path, command=command, **overrides)
        output_dir = config.resolved_output_dir()
        report = run(config)
    except CatCMCException as exc:
        record = exc.to_record()
        logger.error("%s failed: %s", command, exc)
        report = Report(
            command=command,
            config={} if config is None else config_record(config),
            error=record,
        )
        write_report(report, output_dir)
        click.echo(json.dumps(record, sort_keys=True), err=True)
        ctx.exit(exc.exit_code)

    click.echo(dumps(report), nl=False)
    if any(not check.passed for check in report.checks):
        ctx.exit(1)


def common_options(fn):
    options = [
        click.option("--config", "config_path", default=None, help="YAML run configuration."),
        click.option("--output-dir", default=None, help="Directory for report and tables."),
        click.option("--gamma", type=float, default=None, help="Weight exponent in (0, 1)."),
        click.option("--n-x", type=int, default=None, help="Angular grid size (power of 2)."),
        click.option("--n-s", type=int, default=None, help="Latitude grid size (odd)."),
        click.option("--tol", type=float, default=None, help="Residual tolerance."),
        click.option("--max-iter", type=int, default=None, help="Iteration cap."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def boundary_options(fn):
    options = [
        click.option(
            "--plus",
            multiple=True,
            help="Boundary mode on s = +l (and r = 1) as k:a,b for a cos(kx) + b sin(kx).",
        ),
        click.option("--minus", multiple=True, help="Boundary mode on s = -l as k:a,b."),
        click.option(
            "--lower-modes-allowed",
            is_flag=True,
            default=None,
            help="Strip modes |k| < 2 from the boundary data instead of failing.",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@tui(command="ui", help="Open the terminal UI")
@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
def main(verbose):
    """Constant mean curvature necks near the catenoid."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


@main.command("solve-neck")
@click.option("--tau", type=float, default=None, help="Neck scale in (0, 1).")
@click.option("--delta", type=float, default=None, help="Mean curvature.")
@click.option("--smallness", type=float, default=None, help="Data smallness threshold.")
@click.option("--newton", is_flag=True, default=None, help="Newton instead of Picard.")
@boundary_options
@common_options
def solve_neck(config_path, plus, minus, **options):
    """Solve H'(h') = tau delta cosh(s) on one neck.

    Examples:

        \b
        $ catcmc solve-neck --tau 0.1 --delta 1e-3 --plus 2:1e-3,0
    """
    execute("solve-neck", config_path, plus=plus, minus=minus, **options)


@main.command("solve-disk")
@click.option("--delta", type=float, default=None, help="Mean curvature.")
@click.option("--n-r", type=int, default=None, help="Radial grid size.")
@click.option("--smallness", type=float, default=None, help="Data smallness threshold.")
@boundary_options
@common_options
def solve_disk(config_path, plus, minus, **options):
    """Solve the disk limit H_D(h) = delta with data on r = 1 (the --plus modes)."""
    execute("solve-disk", config_path, plus=plus, minus=minus, **options)


@main.command("sweep-tau")
@click.option("--tau", "tau_list", type=float, multiple=True, help="Scales to sweep.")
@click.option("--delta", type=float, default=None, help="Mean curvature.")
@click.option("--n-r", type=int, default=None, help="Radial grid size of the limits.")
@click.option(
    "--bottom-delta-sign",
    type=click.Choice(["1", "-1"]),
    default=None,
    help="Orientation of the bottom sheet limit (tried both ways when unset).",
)
@boundary_options
@common_options
def sweep_tau(config_path, plus, minus, tau_list, bottom_delta_sign, **options):
    """Improved decay and O(tau) closeness to the disk limits over a tau sweep."""
    execute(
        "sweep-tau",
        config_path,
        plus=plus,
        minus=minus,
        tau_list=list(tau_list) or None,
        bottom_delta_sign=None if bottom_delta_sign is None else int(bottom_delta_sign),
        **options,
    )


@main.command("derivative")
@click.option("--tau", "tau_list", type=float, multiple=True, help="Base scales tau0.")
@click.option("--delta", type=float, default=None, help="Mean curvature.")
@click.option("--n-r", type=int, default=None, help="Radial grid size of the limit.")
@click.option(
    "--dtau-fraction",
    type=float,
    default=None,
    help="Difference step dtau as a fraction of tau0, at most 0.1.",
)
@boundary_options
@common_options
def derivative(config_path, plus, minus, tau_list, **options):
    """Finite-difference tau-derivative against its disk limit on r in [0.5, 1]."""
    execute(
        "derivative",
        config_path,
        plus=plus,
        minus=minus,
        tau_list=list(tau_list) or None,
        **options,
    )


@main.command("nondegeneracy")
@click.option("--lmin", type=float, default=None, help="Shortest half-length.")
@click.option("--lmax", type=float, default=None, help="Longest half-length.")
@click.option("--steps", type=int, default=None, help="Sweep intervals.")
@common_options
def nondegeneracy(config_path, **options):
    """Sweep the smallest singular value of the Dirichlet problem over l."""
    execute("nondegeneracy", config_path, **options)


@main.command("verify")
@click.option("--suite", default=None, help="all, quick or a single check name.")
@click.option("--tau", type=float, default=None, help="Override the scale of the checks.")
@common_options
def verify(config_path, **options):
    """Run the acceptance checks; exits 1 when any check fails."""
    execute("verify", config_path, **options)


if __name__ == "__main__":
    main()
