"""Render SVG figures of the bounds with estimate overlays."""

from pathlib import Path

import click
from rich.console import Console

from lfpp.utils.figures import FIGURE_IDS, Curve, FigureSpec, Overlay, write_figure
from lfpp.utils.logger import setup_logger
from lfpp.utils.records import parse_table
from lfpp.utils.validators import parse_float

console = Console()
logger = setup_logger(__name__)

OVERLAY_COLUMNS = {
    "lambda_bounds": ("lambda_hat", "lambda_stderr", "lambda-hat"),
    "g_bound": ("g_hat", "g_stderr", "g-hat"),
}


def load_overlays(figure_id: str, estimates_path: Path):
    """Estimate points for a figure; d_bounds has none."""
    if figure_id not in OVERLAY_COLUMNS:
        logger.warning(f"Figure {figure_id} has no estimate overlay; ignoring {estimates_path}")
        return []
    value, err, label = OVERLAY_COLUMNS[figure_id]
    frame = parse_table(estimates_path)
    missing = [c for c in ("xi", value, err) if c not in frame.columns]
    if missing:
        raise ValueError(f"{estimates_path}: missing columns {missing}")
    return [Overlay(label, frame["xi"].tolist(), frame[value].tolist(), frame[err].tolist())]


def previous_bound_curves(config, figure_id: str):
    """Dashed overlay curves supplied in the config for this figure."""
    return [
        Curve(b.label, [p[0] for p in b.points], [p[1] for p in b.points], dashed=True)
        for b in config.plot.previous_bounds
        if b.figure == figure_id
    ]


@click.command(name="plot")
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.option("--start", default=None, help="Range start (xi, or gamma for d_bounds)")
@click.option("--stop", default=None, help="Range end")
@click.option(
    "--estimates",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="estimates.csv to overlay",
)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="SVG path")
@click.pass_context
def plot_cmd(ctx, figure_id, start, stop, estimates, output):
    """Draw the analytic curves of FIGURE_ID as SVG, with optional estimate overlays.

    Figures: lambda_bounds (xi in [0, 1]), d_bounds (gamma in [sqrt2, 2]),
    g_bound (xi in [0, 1]).

    Example:
        lfpp plot lambda_bounds --estimates lfpp-out/estimates.csv
    """
    config = ctx.obj["config"]
    path = Path(output) if output else Path(config.harness.out_dir) / f"{figure_id}.svg"

    try:
        spec = FigureSpec(
            figure_id,
            start=parse_float(start) if start is not None else None,
            stop=parse_float(stop) if stop is not None else None,
            overlays=load_overlays(figure_id, Path(estimates)) if estimates else [],
            extra_curves=previous_bound_curves(config, figure_id),
        )
        write_figure(
            spec,
            path,
            samples=config.plot.samples,
            width=config.plot.width,
            height=config.plot.height,
        )
    except Exception as e:
        logger.error(f"Failed to render {figure_id}: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()

    if figure_id == "d_bounds" and not spec.extra_curves:
        console.print("[yellow]No previous bounds configured; dashed curves omitted[/yellow]")
    console.print(f"[bold green]✓[/bold green] Wrote {path}")
