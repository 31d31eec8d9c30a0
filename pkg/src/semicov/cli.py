"""Command line entry point.

Each subcommand reads a TOML kernel config where one is needed, writes
its numeric results as CSV plus a ``manifest.json`` into ``--out``, and
prints a one line summary. Stochastic subcommands require an explicit
``--seed``; nothing falls back to the wall clock, and the written bytes
do not depend on ``--workers``. Exit codes: 0 on success, 1 on domain
errors (error name on stderr), 2 on usage errors.

Column files use full round trip precision (shortest decimal form that
parses back to the same float). Input series files are single column
CSV, one value per line, with an optional header line.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import click
import numpy as np

from . import acftest, fisher as fisher_mod, forecast as forecast_mod
from . import kernels, ruin as ruin_mod, simulate as simulate_mod
from .design import Criterion, search
from .errors import InvalidParameterError, SemicovError
from .matalg import Design

__all__ = ["main"]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, subcommand: str, kernel_mapping,
                    seed, parameters: dict, output_names: list) -> None:
    _write_json(out_dir / "manifest.json", {
        "subcommand": subcommand,
        "kernel_config": kernel_mapping,
        "seed": seed,
        "parameters": parameters,
        "output_paths": output_names,
    })


def _prepare_out(out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_column(path: Path) -> np.ndarray:
    """One float per line; a leading non-numeric header line is skipped."""
    values = []
    with open(path) as fh:
        for line in fh:
            text = line.strip()
            if not text:
                continue
            field = text.split(",")[0]
            try:
                values.append(float(field))
            except ValueError:
                if values:
                    raise InvalidParameterError(
                        f"non-numeric line in {path}: {text!r}"
                    ) from None
    if not values:
        raise InvalidParameterError(f"no numeric data in {path}")
    return np.asarray(values)


def _domain_guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SemicovError as exc:
            click.echo(f"{type(exc).__name__}: {exc}", err=True)
            raise SystemExit(1) from exc
    return wrapper


_kernel_option = click.option(
    "--kernel", "kernel_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Kernel config file (TOML).",
)
_out_option = click.option(
    "--out", type=click.Path(file_okay=False, path_type=Path),
    default=Path("."), show_default=True,
    help="Directory receiving CSV outputs and the run manifest.",
)
_workers_option = click.option(
    "--workers", type=int, default=1, show_default=True,
    help="Worker threads for replicated draws; outputs are identical for any count.",
)


@click.group()
def main():
    """Semicontinuous covariance kernels: information, designs, simulation."""


@main.command("validate-kernel")
@_kernel_option
@click.option("--d-max", type=float, default=None,
              help="Largest lag checked (default: per-family heuristic).")
@click.option("--cells", type=int, default=512, show_default=True,
              help="Grid cells used by the checks.")
@_out_option
@_domain_guard
def validate_kernel_cmd(kernel_path, d_max, cells, out):
    """Check a kernel config against the covariance class conditions."""
    kernel = kernels.from_config(kernel_path)
    report = kernels.validate_abc(kernel, d_max=d_max, cells=cells)
    out_dir = _prepare_out(out)
    conditions = ("normalized", "nonnegative", "nonincreasing", "convex", "vanishes")
    rows = []
    for name in conditions:
        ok = getattr(report, name)
        witness = report.witnesses.get(name, ())
        rows.append((name, ok, " ".join(repr(w) for w in witness)))
        click.echo(f"{name}: {'pass' if ok else 'FAIL'}")
    _write_csv(out_dir / "validation.csv",
               ["condition", "passed", "witness_lags"], rows)
    _write_manifest(
        out_dir, "validate-kernel", kernels.to_mapping(kernel), None,
        {"d_max": d_max, "cells": cells}, ["validation.csv"],
    )
    if not report.passed:
        click.echo("kernel fails the covariance class conditions", err=True)
        raise SystemExit(1)
    click.echo(f"ok: checked up to lag {report.d_max} in {report.cells} cells")


def _design_from_flags(n, d, start, points) -> Design:
    if points is not None:
        try:
            levels = tuple(float(x) for x in points.split(","))
        except ValueError:
            raise click.UsageError("--points must be comma separated numbers")
        return Design(levels)
    if n is None or d is None:
        raise click.UsageError("equispaced designs need both --n and --d")
    return Design.equispaced(n, d, start=start)


@main.command("fisher")
@_kernel_option
@click.option("--design", "design_kind", type=click.Choice(["equispaced"]),
              default="equispaced", show_default=True,
              help="Design layout when --points is not given.")
@click.option("--n", type=int, default=None, help="Number of design points.")
@click.option("--d", type=float, default=None, help="Consecutive spacing.")
@click.option("--start", type=float, default=0.0, show_default=True,
              help="First design point.")
@click.option("--points", type=str, default=None,
              help="Explicit comma separated design points; overrides --n/--d.")
@_out_option
@_domain_guard
def fisher_cmd(kernel_path, design_kind, n, d, start, points, out):
    """Fisher information report for one kernel on one design."""
    del design_kind
    kernel = kernels.from_config(kernel_path)
    design = _design_from_flags(n, d, start, points)
    report = fisher_mod.report(kernel, design)
    out_dir = _prepare_out(out)
    header = ["n", "m_theta", "m_r", "lower_bound", "upper_bound"]
    row = (report.n, report.m_theta, report.m_r,
           report.lower_bound, report.upper_bound)
    _write_csv(out_dir / "fisher.csv", header, [row])
    _write_json(out_dir / "fisher.json", {
        "n": report.n,
        "m_theta": report.m_theta,
        "m_r": report.m_r,
        "lower_bound": report.lower_bound,
        "upper_bound": report.upper_bound,
        "points": list(design.points),
        "distances": list(report.distances),
    })
    _write_manifest(
        out_dir, "fisher", kernels.to_mapping(kernel), None,
        {"n": n, "d": d, "start": start, "points": points},
        ["fisher.csv", "fisher.json"],
    )
    click.echo(f"m_theta={report.m_theta!r} m_r={report.m_r!r}")


@main.command("fisher-grid")
@_kernel_option
@click.option("--d-min", type=float, required=True, help="Smallest spacing.")
@click.option("--d-max", type=float, required=True, help="Largest spacing.")
@click.option("--steps", type=int, default=50, show_default=True)
@click.option("--n", type=int, default=2, show_default=True,
              help="Points in each equispaced design.")
@_out_option
@_domain_guard
def fisher_grid_cmd(kernel_path, d_min, d_max, steps, n, out):
    """Sweep the spacing, reporting information and effectiveness.

    Effectiveness compares the kernel against its own no-nugget
    counterpart on the same design.
    """
    if d_min <= 0.0 or d_max < d_min or steps < 1:
        raise click.UsageError("need 0 < --d-min <= --d-max and --steps >= 1")
    kernel = kernels.from_config(kernel_path)
    base = kernels.no_nugget_counterpart(kernel)
    rows = []
    for d in np.linspace(d_min, d_max, steps):
        design = Design.equispaced(n, float(d))
        rep = fisher_mod.report(kernel, design)
        eff_theta, eff_r = fisher_mod.effectiveness(kernel, base, design)
        rows.append((float(d), rep.m_theta, rep.m_r, eff_theta, eff_r))
    out_dir = _prepare_out(out)
    _write_csv(out_dir / "fisher_grid.csv",
               ["d", "m_theta", "m_r", "eff_theta", "eff_r"], rows)
    _write_manifest(
        out_dir, "fisher-grid", kernels.to_mapping(kernel), None,
        {"d_min": d_min, "d_max": d_max, "steps": steps, "n": n},
        ["fisher_grid.csv"],
    )
    click.echo(f"wrote {len(rows)} grid rows")


@main.command("design-search")
@_kernel_option
@click.option("--space", nargs=2, type=float, required=True, metavar="A B",
              help="Design interval endpoints.")
@click.option("--n", type=int, required=True, help="Number of design points.")
@click.option("--criterion", type=click.Choice([c.value for c in Criterion]),
              default=Criterion.THETA.value, show_default=True)
@click.option("--grid", "grid_step", type=float, default=None,
              help="Gap grid step (default: span/200).")
@click.option("--seed", type=int, required=True,
              help="Seed for the descent fallback on large grids.")
@_out_option
@_domain_guard
def design_search_cmd(kernel_path, space, n, criterion, grid_step, seed, out):
    """Search the gap grid for an information-optimal design."""
    kernel = kernels.from_config(kernel_path)
    result = search(kernel, (space[0], space[1]), n,
                    criterion=Criterion(criterion), grid_step=grid_step,
                    seed=seed)
    out_dir = _prepare_out(out)
    trace_rows = [
        (i, value, " ".join(repr(g) for g in gaps))
        for i, (gaps, value) in enumerate(result.trace)
    ]
    _write_csv(out_dir / "search_trace.csv",
               ["improvement", "value", "gaps"], trace_rows)
    _write_json(out_dir / "design_search.json", {
        "criterion": result.criterion.value,
        "best_points": list(result.best.points),
        "best_gaps": list(result.best.distances),
        "best_value": result.best_value,
        "collapsed": result.collapsed,
        "exhaustive": result.exhaustive,
        "evaluations": result.evaluations,
        "grid_step": result.grid_step,
        "ties": [list(t) for t in result.ties],
    })
    _write_manifest(
        out_dir, "design-search", kernels.to_mapping(kernel), seed,
        {"space": list(space), "n": n, "criterion": criterion,
         "grid_step": grid_step},
        ["search_trace.csv", "design_search.json"],
    )
    marks = []
    if result.collapsed:
        marks.append("collapsed")
    if len(result.ties) > 1:
        marks.append(f"{len(result.ties)} ties")
    suffix = f" ({', '.join(marks)})" if marks else ""
    click.echo(
        f"best value {result.best_value!r} at points "
        f"{' '.join(repr(p) for p in result.best.points)}{suffix}"
    )


@main.command("simulate")
@_kernel_option
@click.option("--t-max", type=int, required=True, help="Steps per walk.")
@click.option("--replicates", type=int, default=1, show_default=True)
@click.option("--seed", type=int, required=True)
@_workers_option
@_out_option
@_domain_guard
def simulate_cmd(kernel_path, t_max, replicates, seed, workers, out):
    """Draw correlated increments and their random walks."""
    kernel = kernels.from_config(kernel_path)
    paths = simulate_mod.sample_increments(kernel, t_max, replicates, seed,
                                           workers=workers)
    out_dir = _prepare_out(out)
    steps = range(1, paths.t_max + 1)
    inc_header = ["replicate"] + [f"x{t}" for t in steps]
    walk_header = ["replicate"] + [f"w{t}" for t in steps]
    _write_csv(out_dir / "increments.csv", inc_header,
               ((i, *row) for i, row in enumerate(paths.increments)))
    _write_csv(out_dir / "walks.csv", walk_header,
               ((i, *row) for i, row in enumerate(paths.walks)))
    _write_manifest(
        out_dir, "simulate", kernels.to_mapping(kernel), seed,
        {"t_max": t_max, "replicates": replicates, "workers": workers},
        ["increments.csv", "walks.csv"],
    )
    click.echo(f"wrote {replicates} walks of length {t_max}")


@main.command("compare-jumps")
@click.option("--r", type=float, required=True, help="Decay rate shared by both kernels.")
@click.option("--t-max", type=int, default=100, show_default=True)
@click.option("--seed", type=int, required=True)
@_out_option
@_domain_guard
def compare_jumps_cmd(r, t_max, seed, out):
    """Couple a one-jump and a several-jump walk on shared noise.

    Both kernels share the same lag-zero drop; at large decay rates the
    later jumps sit under covariance values too small to matter and the
    walks coincide, while slow decay keeps them visibly apart.
    """
    comp = simulate_mod.compare_nugget_vs_jumps(r, t_max=t_max, seed=seed)
    out_dir = _prepare_out(out)
    rows = zip(range(1, t_max + 1), comp.walk_single, comp.walk_multi,
               comp.difference)
    _write_csv(out_dir / "compare_jumps.csv",
               ["t", "walk_single_jump", "walk_several_jumps", "difference"],
               rows)
    _write_manifest(
        out_dir, "compare-jumps", None, seed,
        {"r": r, "t_max": t_max}, ["compare_jumps.csv"],
    )
    click.echo(f"max walk difference {comp.max_abs_difference!r}")


@main.command("acf-test")
@click.option("--kernel", "kernel_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Kernel config file (TOML); required outside --mc mode.")
@click.option("--input", "series_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Single column CSV of observed increments.")
@click.option("--t-max", type=int, default=None,
              help="Series length when simulating (defaults to 100 in --mc mode).")
@click.option("--seed", type=int, default=None,
              help="Seed; required whenever the series is simulated.")
@click.option("--max-lag", type=int, default=None,
              help="Highest autocorrelation lag (default: length - 1).")
@click.option("--mc", is_flag=True,
              help="Sample the statistic under random jump heights instead.")
@click.option("--replicates", type=int, default=None, help="Monte Carlo sample size.")
@click.option("--c-law", type=click.Choice([law.value for law in acftest.CLaw]),
              default=acftest.CLaw.UNIFORM01.value, show_default=True,
              help="Distribution of the random jump height.")
@click.option("--n-jumps", type=int, default=1, show_default=True)
@click.option("--jump-lags", type=str, default="30,73", show_default=True,
              help="Lags of the later jumps when --n-jumps exceeds one.")
@click.option("--r", type=float, default=0.01, show_default=True,
              help="Decay rate of the sampled kernels in --mc mode.")
@_workers_option
@_out_option
@_domain_guard
def acf_test_cmd(kernel_path, series_path, t_max, seed, max_lag, mc,
                 replicates, c_law, n_jumps, jump_lags, r, workers, out):
    """Autocorrelation residual statistic for one series, or its MC law.

    Without --mc: compares the empirical autocorrelation of a series
    (read from --input, or simulated under the kernel) against the
    kernel's theoretical one and reports the summed absolute residual.
    With --mc: draws random jump heights, simulates a path per draw and
    emits the (height, statistic) sample.
    """
    out_dir = _prepare_out(out)
    if mc:
        if series_path is not None or kernel_path is not None:
            raise click.UsageError("--mc simulates its own kernels; drop --kernel/--input")
        if replicates is None or seed is None:
            raise click.UsageError("--mc needs --replicates and --seed")
        length = 100 if t_max is None else t_max
        try:
            lags = tuple(float(x) for x in jump_lags.split(","))
        except ValueError:
            raise click.UsageError("--jump-lags must be comma separated numbers")
        sample = acftest.t_distribution_mc(
            length, r, replicates, seed, c_law=acftest.CLaw(c_law),
            n_jumps=n_jumps, jump_lags=lags, workers=workers,
        )
        header = [f"c{j + 1}" for j in range(n_jumps)] + ["t_value"]
        rows = ((*heights, t)
                for heights, t in zip(sample.heights, sample.t_values))
        _write_csv(out_dir / "t_sample.csv", header, rows)
        _write_manifest(
            out_dir, "acf-test", None, seed,
            {"mc": True, "replicates": replicates, "t_max": length, "r": r,
             "c_law": c_law, "n_jumps": n_jumps, "jump_lags": jump_lags,
             "workers": workers},
            ["t_sample.csv"],
        )
        note = " (high rejection rate)" if sample.high_rejection else ""
        click.echo(
            f"sampled {replicates} draws, {sample.rejected} rejected{note}"
        )
        return

    if kernel_path is None:
        raise click.UsageError("--kernel is required outside --mc mode")
    kernel = kernels.from_config(kernel_path)
    if series_path is not None:
        series = _read_column(series_path)
    else:
        if t_max is None or seed is None:
            raise click.UsageError("simulating a series needs --t-max and --seed")
        paths = simulate_mod.sample_increments(kernel, t_max, 1, seed)
        series = paths.increments[0]
    stat = acftest.sum_of_residuals(kernel, series, max_lag=max_lag)
    rows = zip(stat.lags, stat.theoretical, stat.empirical,
               np.abs(stat.theoretical - stat.empirical))
    _write_csv(out_dir / "acf.csv",
               ["lag", "theoretical", "empirical", "abs_residual"], rows)
    _write_csv(out_dir / "t_value.csv", ["t_value", "n", "max_lag"],
               [(stat.t_value, stat.n, len(stat.theoretical) - 1)])
    _write_manifest(
        out_dir, "acf-test", kernels.to_mapping(kernel), seed,
        {"input": None if series_path is None else series_path.name,
         "t_max": t_max, "max_lag": max_lag},
        ["acf.csv", "t_value.csv"],
    )
    click.echo(f"t_value={stat.t_value!r} over n={stat.n}")


@main.command("table1")
@click.option("--replicates", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--r", type=float, default=0.01, show_default=True)
@click.option("--n", type=int, default=100, show_default=True,
              help="Length of each simulated series.")
@_workers_option
@_out_option
@_domain_guard
def table1_cmd(replicates, seed, r, n, workers, out):
    """Mean residual statistic across the jump scenario grid."""
    rows = acftest.table1_experiment(replicates, seed, r=r, n=n,
                                     workers=workers)
    out_dir = _prepare_out(out)
    _write_csv(
        out_dir / "table1.csv",
        ["scenario", "n_jumps", "parameter", "value", "mean_t",
         "std_error", "replicates"],
        ((row.scenario, row.n_jumps, row.parameter, row.value, row.mean_t,
          row.std_error, row.replicates) for row in rows),
    )
    _write_manifest(
        out_dir, "table1", None, seed,
        {"replicates": replicates, "r": r, "n": n, "workers": workers},
        ["table1.csv"],
    )
    click.echo(f"wrote {len(rows)} scenario rows")


@main.command("forecast")
@_kernel_option
@click.option("--input", "walk_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Single column CSV of observed walk levels (walk starts at 0).")
@click.option("--horizon", type=int, required=True)
@click.option("--replicates", type=int, required=True)
@click.option("--alpha", type=float, default=0.05, show_default=True,
              help="Two sided band level.")
@click.option("--seed", type=int, required=True)
@_workers_option
@_out_option
@_domain_guard
def forecast_cmd(kernel_path, walk_path, horizon, replicates, alpha, seed,
                 workers, out):
    """Conditional forecast bands for the continuation of a walk."""
    kernel = kernels.from_config(kernel_path)
    walk = _read_column(walk_path)
    result = forecast_mod.conditional_forecast(
        kernel, walk, horizon, replicates, seed, alpha=alpha, workers=workers,
    )
    out_dir = _prepare_out(out)
    rows = zip(result.steps, result.lower, result.point, result.mean,
               result.upper)
    _write_csv(out_dir / "forecast.csv",
               ["step", "lower", "median", "mean", "upper"], rows)
    _write_manifest(
        out_dir, "forecast", kernels.to_mapping(kernel), seed,
        {"input": walk_path.name, "horizon": horizon,
         "replicates": replicates, "alpha": alpha, "workers": workers},
        ["forecast.csv"],
    )
    click.echo(
        f"forecast {horizon} steps from level {result.last_observed!r}"
    )


@main.command("ruin")
@_kernel_option
@click.option("--u", type=float, default=None, help="Initial capital.")
@click.option("--horizon", type=int, required=True)
@click.option("--replicates", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--input", "surplus_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Observed surplus CSV (first value is the initial capital); "
                   "switches to the conditional estimate.")
@click.option("--compare-uncorrelated", is_flag=True,
              help="Also estimate under independent increments and emit the quotient.")
@_workers_option
@_out_option
@_domain_guard
def ruin_cmd(kernel_path, u, horizon, replicates, seed, surplus_path,
             compare_uncorrelated, workers, out):
    """Monte Carlo ruin probabilities for the correlated surplus."""
    kernel = kernels.from_config(kernel_path)

    def estimate(k):
        if surplus_path is None:
            return ruin_mod.ruin_probability(k, u, horizon, replicates, seed,
                                             workers=workers)
        return ruin_mod.conditional_ruin(k, surplus, horizon, replicates,
                                         seed, workers=workers)

    if surplus_path is None:
        if u is None:
            raise click.UsageError("either --u or --input is required")
    else:
        surplus = _read_column(surplus_path)
        if u is not None and u != surplus[0]:
            raise click.UsageError("--u disagrees with the surplus file")
    est = estimate(kernel)
    out_dir = _prepare_out(out)
    periods = range(1, est.horizon + 1)
    if compare_uncorrelated:
        baseline = estimate(kernels.nugget_ou(0.0, 1.0))
        quotient = ruin_mod.ruin_quotient(est, baseline)
        _write_csv(out_dir / "psi_curve.csv",
                   ["t", "psi", "psi_uncorrelated", "quotient"],
                   zip(periods, est.psi, baseline.psi, quotient))
    else:
        _write_csv(out_dir / "psi_curve.csv", ["t", "psi"],
                   zip(periods, est.psi))
    _write_csv(out_dir / "first_ruin.csv", ["t", "count"],
               zip(periods, est.first_ruin_counts))
    _write_manifest(
        out_dir, "ruin", kernels.to_mapping(kernel), seed,
        {"u": est.u, "horizon": horizon, "replicates": replicates,
         "input": None if surplus_path is None else surplus_path.name,
         "compare_uncorrelated": compare_uncorrelated, "workers": workers},
        ["psi_curve.csv", "first_ruin.csv"],
    )
    click.echo(f"psi({est.u!r}, {est.horizon}) = {float(est.psi[-1])!r}")


if __name__ == "__main__":
    main()
