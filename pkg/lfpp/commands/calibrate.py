"""Fit the fourier sampler's variance offset against the exact sampler."""

import click
from rich.console import Console

from lfpp.utils.gff import calibrate_fourier_offset
from lfpp.utils.logger import setup_logger

console = Console()
logger = setup_logger(__name__)


@click.command(name="calibrate")
@click.option("--k", "level", type=int, default=5, show_default=True, help="Calibration level")
@click.option("--reps", type=int, default=5000, show_default=True, help="Replicates")
@click.option("--seed", type=int, default=None, help="Master seed (default: from config)")
@click.option("--dry-run", is_flag=True, help="Print the fitted offset without saving it")
@click.pass_context
def calibrate_cmd(ctx, level, reps, seed, dry_run):
    """Fit the fourier offset c0 so its centre variance matches the exact sampler.

    The fitted value is stored in the config file and used by later runs.

    Example:
        lfpp calibrate --k 5 --reps 5000
    """
    config = ctx.obj["config"]
    seed = config.harness.master_seed if seed is None else seed

    if reps < 2:
        console.print("[bold red]Error:[/bold red] --reps must be at least 2")
        raise click.Abort()

    console.print(f"[bold blue]Calibrating fourier sampler[/bold blue] at k={level}")
    console.print(f"[dim]Replicates: {reps}, seed: {seed}[/dim]\n")

    try:
        offset = calibrate_fourier_offset(
            level, reps, seed, padding_factor=config.sampler.padding_factor
        )
    except Exception as e:
        logger.error(f"Calibration failed: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()

    console.print(f"[bold green]✓[/bold green] c0 = {offset:.6f}")
    if dry_run:
        return

    config.sampler.fourier_offset = offset
    config.sampler.calibration_level = level
    config.sampler.calibration_replicates = reps
    config.sampler.calibration_seed = seed
    path = config.save(ctx.obj.get("config_path"))
    console.print(f"[dim]Saved to {path}[/dim]")
