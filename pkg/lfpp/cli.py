"""Main CLI entry point for LFPP Lab."""

import click
from rich.console import Console

from lfpp import __version__
from lfpp.config import Config
from lfpp.utils.logger import set_verbosity

console = Console()


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Config file (default: ~/.lfpp/config.yaml)",
)
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.pass_context
def cli(ctx, config_path, verbose):
    """LFPP Lab - simulate Liouville first passage percolation and check its exponent bounds."""
    ctx.ensure_object(dict)
    set_verbosity(verbose)
    ctx.obj["config_path"] = config_path
    ctx.obj["config"] = Config.load(config_path)


# Import and register commands
from lfpp.commands import bounds, calibrate, census, estimate, init, plot, simulate  # noqa: E402

cli.add_command(init.init_cmd)
cli.add_command(calibrate.calibrate_cmd)
cli.add_command(bounds.bounds_cmd)
cli.add_command(simulate.simulate_cmd)
cli.add_command(census.census_cmd)
cli.add_command(estimate.estimate_cmd)
cli.add_command(plot.plot_cmd)


if __name__ == "__main__":
    cli()
