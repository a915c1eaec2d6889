"""Tabulate the closed-form bounds and predictions."""

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from lfpp.utils import analytic
from lfpp.utils.logger import setup_logger
from lfpp.utils.records import BOUNDS_FLOAT_FORMAT, emit_rows
from lfpp.utils.validators import parse_float

console = Console()
logger = setup_logger(__name__)

DEFAULT_RANGES = {"lambda": ("0", "1", "0.01"), "gamma": ("0.02", "2", "0.02")}


@click.command(name="bounds")
@click.option(
    "--kind",
    type=click.Choice(["lambda", "gamma"]),
    default="lambda",
    show_default=True,
    help="Tabulate xi-indexed (lambda) or gamma-indexed (d_gamma) quantities",
)
@click.option("--start", default=None, help="First grid point (accepts 1/sqrt6, sqrt2, ...)")
@click.option("--stop", default=None, help="Last grid point")
@click.option("--step", default=None, help="Grid spacing")
@click.option("--knots", is_flag=True, help="Insert 1/sqrt6 (or sqrt(8/3)) into the grid")
@click.option("--nonneg", is_flag=True, help="Also apply lambda >= 0 to the lower bound")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="CSV path")
@click.pass_context
def bounds_cmd(ctx, kind, start, stop, step, knots, nonneg, output):
    """Write one CSV row per grid point with every analytic quantity.

    Example:
        lfpp bounds --kind lambda --start 0 --stop 1 --step 0.05 --knots
    """
    config = ctx.obj["config"]
    defaults = DEFAULT_RANGES[kind]
    try:
        start, stop, step = (
            parse_float(value if value is not None else default)
            for value, default in zip((start, stop, step), defaults)
        )
        if kind == "lambda":
            rows = analytic.lambda_table(start, stop, step, insert_knots=knots, nonneg=nonneg)
            row_type = analytic.BoundsRow
        else:
            rows = analytic.gamma_table(
                start, stop, step, insert_knots=knots, nonneg=nonneg, allow_endpoint=True
            )
            row_type = analytic.GammaRow
        name = "bounds.csv" if kind == "lambda" else "gamma_bounds.csv"
        path = Path(output) if output else Path(config.harness.out_dir) / name
        emit_rows(rows, path, row_type=row_type, float_format=BOUNDS_FLOAT_FORMAT)
    except Exception as e:
        logger.error(f"Failed to tabulate bounds: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()

    console.print(f"[bold green]✓[/bold green] Wrote {len(rows)} rows to {path}")
    if not rows:
        return

    table = Table(title=f"{kind} bounds (first and last rows)")
    columns = list(row_type.__dataclass_fields__)[:5]
    for column in columns:
        table.add_column(column, style="cyan" if column in ("xi", "gamma") else None)
    shown = rows if len(rows) <= 6 else rows[:3] + rows[-3:]
    for row in shown:
        table.add_row(*(f"{getattr(row, c):.6f}" for c in columns))
    console.print(table)
