"""Command-line interface: solve, run, and compare subcommands.

Exit codes: 0 success, 1 config/usage validation error, 2 solver
non-convergence.
"""
from __future__ import annotations

import sys

import click

from . import harness
from .config import default_config, load_config
from .errors import ConfigError, NonConvergence, UnknownScheme


def _load(path):
    if path is None:
        return default_config()
    return load_config(path)


@click.group()
def main():
    """Simulator and solvers for a renewable-powered edge system."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON config file (packaged default if omitted).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--tol", default=1e-9, show_default=True,
              help="Fixed-point tolerance for value iteration.")
def solve(config_path, out_dir, tol):
    """Solve the exact model and dump C*, V*, and the optimal policy."""
    try:
        cfg = _load(config_path)
        harness.solve(cfg, out_dir, tol=tol)
    except ConfigError as err:
        click.echo(str(err), err=True)
        sys.exit(1)
    except NonConvergence as err:
        click.echo(f"solver did not converge: {err}", err=True)
        sys.exit(2)
    click.echo(f"oracle tables written to {out_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--scheme", required=True,
              help="pds, q, myopic, oracle, or fixed:<level>.")
@click.option("--slots", default=1000, show_default=True)
@click.option("--runs", default=30, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--trace", is_flag=True, help="Dump per-slot exogenous draws.")
def run(config_path, scheme, slots, runs, seed, out_dir, trace):
    """Simulate one scheme over seeded replicas."""
    try:
        cfg = _load(config_path)
        summary = harness.run_experiment(
            cfg, scheme, slots, runs, seed, out_dir, trace=trace
        )
    except (ConfigError, UnknownScheme, ValueError) as err:
        click.echo(str(err), err=True)
        sys.exit(1)
    except NonConvergence as err:
        click.echo(f"solver did not converge: {err}", err=True)
        sys.exit(2)
    stats = summary.per_scheme[scheme]
    final = stats["final_running_avg_cost"]
    click.echo(
        f"{scheme}: final running-average cost "
        f"{final if final is not None else 'n/a'} over {runs} runs x {slots} slots"
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--schemes", required=True,
              help="Comma-separated scheme names (at least two).")
@click.option("--slots", default=1000, show_default=True)
@click.option("--runs", default=30, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--trace", is_flag=True, help="Dump per-slot exogenous draws.")
def compare(config_path, schemes, slots, runs, seed, out_dir, trace):
    """Run several schemes under common random numbers and rank them."""
    names = [s.strip() for s in schemes.split(",") if s.strip()]
    try:
        cfg = _load(config_path)
        report = harness.compare(cfg, names, slots, runs, seed, out_dir,
                                 trace=trace)
    except (ConfigError, UnknownScheme, ValueError) as err:
        click.echo(str(err), err=True)
        sys.exit(1)
    except NonConvergence as err:
        click.echo(f"solver did not converge: {err}", err=True)
        sys.exit(2)
    best = report["best_scheme"]
    click.echo(f"best scheme at final slot: {best}")
    for name, cost in sorted(report["final"].items(), key=lambda kv: kv[1]):
        red = report["reduction_vs_best"][name]
        click.echo(f"  {name}: {cost:.4f}  (best saves {red:.1%})")


if __name__ == "__main__":
    main()
