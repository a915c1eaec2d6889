"""Initialize LFPP Lab configuration."""

import click
from rich.console import Console
from rich.prompt import Confirm, FloatPrompt, IntPrompt, Prompt

from lfpp.commands.calibrate import calibrate_cmd
from lfpp.config import Config

console = Console()


@click.command(name="init")
@click.pass_context
def init_cmd(ctx):
    """Initialize LFPP Lab configuration."""
    console.print("[bold blue]LFPP Lab Setup[/bold blue]")
    console.print()

    config = Config()

    # Sampler setup
    console.print("[bold]Field Sampler[/bold]")
    config.simulate.sampler = Prompt.ask(
        "Default sampler",
        choices=["exact", "fourier", "layered"],
        default=config.simulate.sampler,
    )
    config.sampler.padding_factor = FloatPrompt.ask(
        "Padding factor (extra units on each side of the square)",
        default=config.sampler.padding_factor,
    )

    # Harness setup
    console.print("\n[bold]Execution[/bold]")
    config.harness.master_seed = IntPrompt.ask("Master seed", default=config.harness.master_seed)
    config.harness.workers = IntPrompt.ask("Worker processes", default=config.harness.workers)
    config.harness.out_dir = Prompt.ask("Output directory", default=config.harness.out_dir)

    # Save config
    path = config.save(ctx.obj.get("config_path"))
    console.print(f"\n[bold green]✓[/bold green] Configuration saved to {path}")

    # Offer calibration
    if Confirm.ask("\nCalibrate the fourier sampler against the exact sampler now?", default=False):
        level = IntPrompt.ask("Calibration level", default=5)
        reps = IntPrompt.ask("Replicates (a few minutes at 5000)", default=5000)
        ctx.obj["config"] = config
        ctx.invoke(calibrate_cmd, level=level, reps=reps)
