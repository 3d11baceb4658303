"""Command-line front end for the simulation / estimation / evaluation pipeline.

Subcommands: ``simulate``, ``estimate``, ``evaluate``, ``rate`` and
``reproduce-fig2`` (the one-command reference experiment).  Every run writes
its fully resolved configuration to ``effective.cfg`` in the output
directory, data goes to CSV files, figures to PNG files, and diagnostics to
standard error.  Exit codes: 0 success, 1 usage or configuration error,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    ExperimentSpec,
    default_spec,
    load_spec,
    save_spec,
)
from .contrast import contrast
from .evaluate import (
    l2_loss_mc,
    rate_experiment,
    write_loss_csv,
    write_rate_csv,
)
from .genetic import ga_minimize, write_trace_csv
from .process import read_path_csv, simulate, write_path_csv
from .splines import (
    build_sieve_config,
    load_spline_link,
    save_spline_link,
    sieve_from_spacing,
)

__all__ = ["main"]

OUTDIR_ENV = "INGARCH_SIEVE_OUT"
FIG2_RUNS = 4
SURFACE_POINTS = 101


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ingarch-sieve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config file (key = value sections)")
        p.add_argument(
            "--out",
            default=None,
            help=f"output directory (default: ${OUTDIR_ENV} or current directory)",
        )
        p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering, write CSV data only")

    p = sub.add_parser("simulate", help="simulate a count path and write it as CSV")
    common(p)
    p.add_argument("--n", type=int, help="path length (overrides config)")
    p.add_argument("--seed", type=int, help="simulation seed (overrides config)")

    p = sub.add_parser("estimate", help="fit a spline link to a simulated path")
    common(p)
    p.add_argument("--path", required=True, help="input path CSV from `simulate`")
    p.add_argument("--seed", type=int, help="optimizer seed (overrides config)")
    p.add_argument("--prefix", default="estimate", help="output file prefix")

    p = sub.add_parser("evaluate", help="Monte Carlo loss of a stored estimate")
    common(p)
    p.add_argument("--estimate", required=True,
                   help="estimate file base (without .csv/.cfg)")
    p.add_argument("--seed", type=int, help="evaluation seed (overrides config)")
    p.add_argument("--prefix", default="loss", help="output file prefix")

    p = sub.add_parser("rate", help="loss-decay experiment across sample sizes")
    common(p)
    p.add_argument("--n", required=True,
                   help="comma-separated sample sizes, e.g. 250,500,1000")
    p.add_argument("--seeds", type=int, default=1, help="replications per sample size")

    p = sub.add_parser("reproduce-fig2",
                       help="run the full reference experiment (4 optimizer runs)")
    common(p)
    p.add_argument("--seed", type=int, help="base seed for every stage")
    return parser


def _load_effective_spec(args) -> ExperimentSpec:
    spec = default_spec()
    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        spec = load_spec(args.config)
    return spec


def _outdir(args) -> Path:
    out = args.out or os.environ.get(OUTDIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_spec(spec: ExperimentSpec, outdir: Path) -> None:
    save_spec(spec, outdir / "effective.cfg")


def _stage_simulate(spec: ExperimentSpec, outdir: Path, figures: bool):
    sim = spec.simulation
    path = simulate(
        spec.truth,
        sim.n,
        burn_in=sim.burn_in,
        initial_intensity=sim.initial_intensity,
        seed=sim.seed,
    )
    write_path_csv(path, outdir / "path.csv")
    if figures:
        from . import plots

        plots.save_path_overview(path, outdir / "path_overview.png")
        plots.save_link_levels(spec.truth, spec.truth.count_cap,
                               outdir / "link_truth.png", title="true link")
    return path


def _stage_estimate(spec: ExperimentSpec, counts, outdir: Path, prefix: str,
                    ga_seed: int, figures: bool):
    counts = np.asarray(counts, dtype=np.int64)
    if spec.sieve.spacing is not None:
        sieve = sieve_from_spacing(
            spec.sieve.max_intensity,
            spec.sieve.spacing,
            spec.sieve.grid_points,
            int(counts.max()),
        )
    else:
        sieve = build_sieve_config(
            spec.sieve.max_intensity,
            counts.size,
            grid_points=spec.sieve.grid_points,
            count_cap=int(counts.max()),
        )
    ga = replace(spec.ga, seed=ga_seed)
    result = ga_minimize(sieve, counts, spec.sieve.bounds(), ga)
    save_spline_link(result.best, outdir / f"{prefix}_coeffs")
    write_trace_csv(result.trace, outdir / f"{prefix}_trace.csv")
    if figures:
        from . import plots

        plots.save_traces({prefix: result.trace}, outdir / f"{prefix}_trace.png")
        plots.save_estimate_comparison(
            spec.truth, result.best, result.best.config.count_cap,
            outdir / f"{prefix}_levels.png",
        )
    return result


def _stage_evaluate(spec: ExperimentSpec, estimate, outdir: Path, prefix: str,
                    eval_seed: int):
    loss = l2_loss_mc(
        estimate,
        spec.truth,
        n_eval=spec.evaluation.n_eval,
        burn_in=spec.evaluation.burn_in,
        seed=eval_seed,
    )
    write_loss_csv(loss, outdir / f"{prefix}.csv")
    return loss


def _write_surface_csv(spec: ExperimentSpec, estimate, out) -> None:
    truth = spec.truth
    cap = estimate.config.count_cap
    lams = np.linspace(0.0, truth.max_intensity, SURFACE_POINTS)
    with open(out, "w", newline="") as fh:
        fh.write("lambda,y,m_true,m_hat\n")
        for y in range(cap + 1):
            ys = np.full(lams.size, y)
            mt = truth.values(lams, ys)
            mh = estimate.values(lams, ys)
            for lam, a, b in zip(lams, mt, mh):
                fh.write(f"{repr(float(lam))},{y},{repr(float(a))},{repr(float(b))}\n")


def _cmd_simulate(args) -> int:
    spec = _load_effective_spec(args)
    if args.n is not None:
        spec = replace(spec, simulation=replace(spec.simulation, n=args.n))
    if args.seed is not None:
        spec = replace(spec, simulation=replace(spec.simulation, seed=args.seed))
    outdir = _outdir(args)
    _echo_spec(spec, outdir)
    path = _stage_simulate(spec, outdir, not args.no_figures)
    print(f"wrote {len(path)} observations to {outdir / 'path.csv'}", file=sys.stderr)
    return 0


def _cmd_estimate(args) -> int:
    spec = _load_effective_spec(args)
    if not os.path.exists(args.path):
        raise ConfigError(f"path file not found: {args.path}")
    path = read_path_csv(args.path)
    outdir = _outdir(args)
    _echo_spec(spec, outdir)
    seed = args.seed if args.seed is not None else spec.ga.seed
    result = _stage_estimate(spec, path.counts, outdir, args.prefix, seed,
                             not args.no_figures)
    print(
        f"best contrast {result.contrast!r} after {result.evaluations} evaluations; "
        f"feasible: {result.constraint.passes}",
        file=sys.stderr,
    )
    return 0


def _cmd_evaluate(args) -> int:
    spec = _load_effective_spec(args)
    base = args.estimate
    if not os.path.exists(base + ".csv") or not os.path.exists(base + ".cfg"):
        raise ConfigError(f"estimate files not found: {base}.csv / {base}.cfg")
    estimate = load_spline_link(base)
    outdir = _outdir(args)
    _echo_spec(spec, outdir)
    seed = args.seed if args.seed is not None else spec.evaluation.seed
    loss = _stage_evaluate(spec, estimate, outdir, args.prefix, seed)
    print(f"loss {loss.loss!r} (std error {loss.std_error!r})", file=sys.stderr)
    return 0


def _cmd_rate(args) -> int:
    spec = _load_effective_spec(args)
    try:
        n_values = [int(v) for v in args.n.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse sample sizes {args.n!r}") from None
    outdir = _outdir(args)
    _echo_spec(spec, outdir)
    table = rate_experiment(n_values, args.seeds, spec)
    write_rate_csv(table, outdir / "rate.csv")
    with open(outdir / "rate_fit.cfg", "w") as fh:
        fh.write(f"fitted_slope = {repr(table.fitted_slope)}\n")
        fh.write(f"slope_ci_low = {repr(table.slope_ci[0])}\n")
        fh.write(f"slope_ci_high = {repr(table.slope_ci[1])}\n")
    if not args.no_figures:
        from . import plots

        plots.save_rate_plot(table, outdir / "rate_loglog.png")
    print(f"fitted slope {table.fitted_slope!r}", file=sys.stderr)
    return 0


def _cmd_reproduce_fig2(args) -> int:
    spec = _load_effective_spec(args)
    if args.seed is not None:
        from .config import with_seed

        spec = with_seed(spec, args.seed)
    outdir = _outdir(args)
    figures = not args.no_figures
    _echo_spec(spec, outdir)

    path = _stage_simulate(spec, outdir, figures)
    losses = []
    traces = {}
    for run in range(FIG2_RUNS):
        prefix = f"run{run}"
        result = _stage_estimate(spec, path.counts, outdir, prefix,
                                 spec.ga.seed + run, figures)
        loss = _stage_evaluate(spec, result.best, outdir, f"{prefix}_loss",
                               spec.evaluation.seed + run)
        _write_surface_csv(spec, result.best, outdir / f"{prefix}_surface.csv")
        if figures:
            from . import plots

            plots.save_estimate_comparison(
                spec.truth, result.best, result.best.config.count_cap,
                outdir / f"{prefix}_levels.png", loss=loss.loss,
            )
        losses.append(loss)
        traces[prefix] = result.trace
        print(f"{prefix}: loss {loss.loss!r}", file=sys.stderr)

    with open(outdir / "losses.csv", "w", newline="") as fh:
        fh.write("run,loss,std_error,n_eval,seed\n")
        for run, loss in enumerate(losses):
            fh.write(f"{run},{repr(loss.loss)},{repr(loss.std_error)},"
                     f"{loss.n_eval},{loss.seed}\n")
    if figures:
        from . import plots

        plots.save_traces(traces, outdir / "ga_traces.png")
        plots.save_link_surface(spec.truth, spec.truth.count_cap,
                                outdir / "link_truth_3d.png", title="true link")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "evaluate": _cmd_evaluate,
    "rate": _cmd_rate,
    "reproduce-fig2": _cmd_reproduce_fig2,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, _UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures: bad data, invariant breaches
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
