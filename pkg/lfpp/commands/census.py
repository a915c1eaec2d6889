"""Census-only experiments: count low vertices and fit their growth exponent."""

import click
from rich.console import Console
from rich.table import Table

from lfpp.commands.simulate import common_options, execute, resolve_harness
from lfpp.exceptions import InsufficientSignalError
from lfpp.utils.gff import SamplerKind
from lfpp.utils.logger import setup_logger
from lfpp.utils.records import CENSUS_ESTIMATES_FILE, emit_rows
from lfpp.utils.scaling import (
    CensusEstimateRow,
    ExperimentPlan,
    census_row,
    estimate_census_exponent,
)
from lfpp.utils.validators import (
    parse_float_list,
    parse_int_list,
    validate_alpha_list,
    validate_k_list,
)

console = Console()
logger = setup_logger(__name__)


def census_estimates(plan, records, alphas):
    """Fit every alpha; alphas without signal are reported and skipped."""
    rows, skipped = [], []
    for alpha in alphas:
        try:
            rows.append(census_row(estimate_census_exponent(plan, alpha, records)))
        except InsufficientSignalError as e:
            logger.warning(str(e))
            skipped.append(alpha)
    return rows, skipped


def print_census_table(rows, skipped):
    table = Table(title="Census exponents")
    table.add_column("alpha", style="cyan")
    table.add_column("exponent", style="green")
    table.add_column("stderr")
    table.add_column("2 - alpha^2/2")
    table.add_column("accepted")
    for row in rows:
        table.add_row(
            f"{row.alpha:.4g}",
            f"{row.exponent:.4f}",
            f"{row.stderr:.4f}",
            f"{row.bound:.4f}",
            "[green]yes[/green]" if row.accepted else "[red]no[/red]",
        )
    for alpha in skipped:
        table.add_row(f"{alpha:.4g}", "insufficient signal", "", f"{2 - alpha**2 / 2:.4f}", "")
    console.print(table)


@click.command(name="census")
@click.option("--alpha", "alpha_text", default="0.5,1.0", show_default=True, help="Thresholds")
@click.option("--k", "k_text", default="5..8", show_default=True, help="Levels")
@click.option("--reps", type=int, default=200, show_default=True, help="Replicates per level")
@click.option(
    "--sampler",
    type=click.Choice(["exact", "fourier", "layered"]),
    default=None,
    help="Field sampler",
)
@common_options
@click.pass_context
def census_cmd(ctx, alpha_text, k_text, reps, sampler, seed, workers, out_dir):
    """Count vertices with h below alpha log(eps) and fit the count exponent.

    Writes census.jsonl, census_estimates.csv and manifest.json.

    Example:
        lfpp census --alpha 0.5,1 --k 5..8 --reps 200 --sampler exact
    """
    config = ctx.obj["config"]
    seed, workers, out_dir = resolve_harness(config, seed, workers, out_dir)
    try:
        alphas = parse_float_list(alpha_text)
        k_list = parse_int_list(k_text)
    except ValueError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()
    if not alphas or not validate_alpha_list(alphas):
        console.print("[bold red]Error:[/bold red] --alpha needs positive values")
        raise click.Abort()
    if not validate_k_list(k_list):
        console.print("[bold red]Error:[/bold red] --k must be strictly increasing levels >= 0")
        raise click.Abort()

    plan = ExperimentPlan(
        xi_list=[0.0],
        k_list=k_list,
        replicates=reps,
        sampler_kind=SamplerKind.parse(sampler or config.simulate.sampler).value,
        master_seed=seed,
        quantile=config.estimate.quantile,
        census_slack=config.estimate.census_slack,
        min_k=config.estimate.min_k,
        census_alpha=alphas,
    )
    console.print(f"[bold blue]Census run[/bold blue] alpha={alphas}, k={k_list}, reps={reps}")

    result, outputs = execute(plan, config, workers, out_dir, crossings=False)
    rows, skipped = census_estimates(plan, result.census, alphas)
    emit_rows(rows, out_dir / CENSUS_ESTIMATES_FILE, row_type=CensusEstimateRow)

    print_census_table(rows, skipped)
    console.print(f"\n[bold green]✓[/bold green] Results in {out_dir}")
