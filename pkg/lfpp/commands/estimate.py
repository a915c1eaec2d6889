"""Fit exponents from simulation records."""

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from lfpp.commands.census import census_estimates, print_census_table
from lfpp.utils.logger import setup_logger
from lfpp.utils.records import (
    CENSUS_ESTIMATES_FILE,
    CENSUS_FILE,
    CROSSINGS_FILE,
    ESTIMATES_FILE,
    LENGTH_COMPARE_FILE,
    MANIFEST_FILE,
    emit_rows,
    read_census,
    read_crossings,
)
from lfpp.utils.runner import read_manifest
from lfpp.utils.scaling import (
    CensusEstimateRow,
    EstimateRow,
    ExperimentPlan,
    LengthCompareRow,
    estimate_g,
    estimate_lambda,
    estimate_rows,
    length_compare_row,
    length_comparison_check,
)

console = Console()
logger = setup_logger(__name__)


def load_plan(input_dir: Path, crossings, census) -> ExperimentPlan:
    """The plan stored in the manifest, or one inferred from the records."""
    manifest_path = input_dir / MANIFEST_FILE
    if manifest_path.exists():
        return ExperimentPlan(**read_manifest(manifest_path)["plan"])
    logger.warning(f"No {MANIFEST_FILE} in {input_dir}; inferring the plan from records")
    records = list(crossings) + list(census)
    if not records:
        raise ValueError(f"no records found in {input_dir}")
    cells = {}
    for r in crossings:
        cells[(r.xi, r.k)] = cells.get((r.xi, r.k), 0) + 1
    for r in census:
        cells[(r.alpha, r.k)] = cells.get((r.alpha, r.k), 0) + 1
    multi_xi = sorted({x for r in crossings for x, _ in r.multi_xi})
    return ExperimentPlan(
        xi_list=sorted({r.xi for r in crossings}) or [0.0],
        k_list=sorted({r.k for r in records}),
        replicates=min(cells.values()),
        sampler_kind=records[0].sampler,
        multi_xi=multi_xi,
        census_alpha=sorted({r.alpha for r in census}),
    )


@click.command(name="estimate")
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--quantile", type=float, default=None, help="Per-scale quantile (default: median)")
@click.option("--slack", type=float, default=None, help="Band slack for lambda and g")
@click.option("--min-k", type=int, default=None, help="Smallest level used in fits")
@click.option("--out", "out_dir", default=None, help="Output directory (default: INPUT_DIR)")
@click.pass_context
def estimate_cmd(ctx, input_dir, quantile, slack, min_k, out_dir):
    """Estimate lambda(xi), g(xi), census exponents and length comparisons.

    Writes estimates.csv and, when the records allow it, census_estimates.csv
    and length_compare.csv.

    Example:
        lfpp estimate lfpp-out
    """
    config = ctx.obj["config"]
    input_dir = Path(input_dir)
    out_dir = Path(out_dir) if out_dir else input_dir

    try:
        crossings_path = input_dir / CROSSINGS_FILE
        census_path = input_dir / CENSUS_FILE
        crossings = read_crossings(crossings_path) if crossings_path.exists() else []
        census = read_census(census_path) if census_path.exists() else []
        plan = load_plan(input_dir, crossings, census)
        overrides = {
            "quantile": quantile if quantile is not None else config.estimate.quantile,
            "slack": slack if slack is not None else config.estimate.lambda_slack,
            "census_slack": config.estimate.census_slack,
            "min_k": min_k if min_k is not None else plan.min_k,
        }
        plan = ExperimentPlan(**{**plan.model_dump(), **overrides})
    except Exception as e:
        logger.error(f"Failed to read records: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()

    console.print(f"[bold blue]Estimating exponents[/bold blue] from {input_dir}")
    console.print(f"[dim]{len(crossings)} crossing and {len(census)} census records[/dim]\n")

    try:
        if crossings:
            lambdas = estimate_lambda(plan, crossings)
            g_plan = plan.model_copy(update={"slack": config.estimate.g_slack})
            lambda_hats = {xi: e.exponent for xi, e in lambdas.items()}
            gs = estimate_g(g_plan, crossings, lambda_hats)
            rows = estimate_rows(lambdas, gs)
            emit_rows(rows, out_dir / ESTIMATES_FILE, row_type=EstimateRow)
            print_estimates(rows)

            compare = [
                length_compare_row(
                    length_comparison_check(plan, xi, xt, crossings, lambda_hats[xi])
                )
                for xi in plan.xi_list
                for xt in plan.multi_xi
                if xt <= xi
            ]
            if compare:
                emit_rows(compare, out_dir / LENGTH_COMPARE_FILE, row_type=LengthCompareRow)
                print_length_compare(compare)

        if census:
            census_rows, skipped = census_estimates(plan, census, plan.census_alpha)
            emit_rows(census_rows, out_dir / CENSUS_ESTIMATES_FILE, row_type=CensusEstimateRow)
            print_census_table(census_rows, skipped)
    except Exception as e:
        logger.error(f"Estimation failed: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()

    console.print(f"\n[bold green]✓[/bold green] Estimates written to {out_dir}")
    console.print("\n[bold]Next steps:[/bold]")
    console.print(f"  lfpp plot lambda_bounds --estimates {out_dir / ESTIMATES_FILE}")


def _flag(ok: bool) -> str:
    return "[green]yes[/green]" if ok else "[red]no[/red]"


def print_estimates(rows):
    table = Table(title="Exponent estimates")
    table.add_column("xi", style="cyan")
    table.add_column("lambda_hat", style="green")
    table.add_column("band")
    table.add_column("in band")
    table.add_column("g_hat", style="green")
    table.add_column("g bound")
    table.add_column("in band")
    for row in rows:
        table.add_row(
            f"{row.xi:.4f}",
            f"{row.lambda_hat:.4f} ± {row.lambda_stderr:.4f}",
            f"[{row.lambda_lower:.4f}, {row.lambda_upper:.4f}]",
            _flag(row.lambda_in_band),
            f"{row.g_hat:.4f} ± {row.g_stderr:.4f}",
            f"{row.g_bound:.4f}",
            _flag(row.g_in_band),
        )
    console.print(table)


def print_length_compare(rows):
    table = Table(title="Length comparison along geodesics")
    table.add_column("xi", style="cyan")
    table.add_column("xi_tilde", style="cyan")
    table.add_column("fitted")
    table.add_column("bound")
    table.add_column("margin")
    table.add_column("passed")
    for row in rows:
        table.add_row(
            f"{row.xi:.4f}",
            f"{row.xi_tilde:.4f}",
            f"{row.fitted_exponent:.4f}",
            f"{row.bound_exponent:.4f}",
            f"{row.margin:+.4f}",
            _flag(row.passed),
        )
    console.print(table)
