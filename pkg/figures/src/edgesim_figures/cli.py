"""CLI: `figures <kind> --in <dir> --out <file.png>`."""
from __future__ import annotations

import sys

import click

from .render import KINDS, FigureSpec, SchemaMismatch, render


@click.command()
@click.argument("kind", type=click.Choice(KINDS))
@click.option("--in", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory holding the harness CSV output.")
@click.option("--out", "output_path", required=True, type=click.Path(),
              help="Image file to write.")
@click.option("--workload", type=float, default=None,
              help="Workload slice for policy_map (default: largest).")
@click.option("--environment", default=None,
              help="Environment slice for policy_map (default: last label).")
def main(kind, input_dir, output_path, workload, environment):
    """Render one figure kind from an edgesim output directory."""
    spec = FigureSpec(kind=kind, input_dir=input_dir, output_path=output_path,
                      workload=workload, environment=environment)
    try:
        out = render(spec)
    except SchemaMismatch as err:
        click.echo(f"schema mismatch: {err}", err=True)
        sys.exit(1)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
