"""Run LFPP crossing experiments."""

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from lfpp.exceptions import MemoryBudgetError
from lfpp.utils.gff import SamplerKind
from lfpp.utils.logger import setup_logger
from lfpp.utils.paths import PathRecord
from lfpp.utils.records import save_field, write_geodesic_csv
from lfpp.utils.runner import check_memory, plan_tasks, replicate_field, run_tasks, write_run
from lfpp.utils.scaling import ExperimentPlan
from lfpp.utils.validators import (
    parse_float_list,
    parse_int_list,
    validate_alpha_list,
    validate_k_list,
    validate_output_dir,
    validate_seed,
    validate_xi_list,
)

console = Console()
logger = setup_logger(__name__)


def common_options(func):
    """--seed, --workers and --out, shared by simulate and census."""
    func = click.option("--out", "out_dir", default=None, help="Output directory")(func)
    func = click.option("--workers", type=int, default=None, help="Worker processes")(func)
    func = click.option("--seed", type=int, default=None, help="Master seed (u64)")(func)
    return func


def resolve_harness(config, seed, workers, out_dir):
    """Flags win over config values; invalid values abort before any work."""
    seed = config.harness.master_seed if seed is None else seed
    workers = config.harness.workers if workers is None else workers
    out_dir = config.harness.out_dir if out_dir is None else out_dir
    if not validate_seed(seed):
        console.print("[bold red]Error:[/bold red] --seed must be an unsigned 64-bit integer")
        raise click.Abort()
    if workers < 1:
        console.print("[bold red]Error:[/bold red] --workers must be at least 1")
        raise click.Abort()
    if not validate_output_dir(out_dir):
        console.print(f"[bold red]Error:[/bold red] Output path '{out_dir}' is not a directory")
        raise click.Abort()
    return seed, workers, Path(out_dir)


def execute(plan, config, workers, out_dir, crossings=True, keep_geodesics=False):
    """Check memory, run the plan and write records plus manifest."""
    try:
        check_memory(plan, config, workers)
    except MemoryBudgetError as e:
        logger.error(str(e))
        console.print(
            f"[bold red]Error:[/bold red] refusing to run: needs about {e.required_bytes} bytes, "
            f"budget is {e.budget_bytes} bytes"
        )
        raise click.Abort()

    try:
        tasks = plan_tasks(plan, config, crossings=crossings, keep_geodesic=keep_geodesics)
        result = run_tasks(tasks, workers=workers)
        outputs = write_run(out_dir, plan, config, result)
    except Exception as e:
        logger.error(f"Run failed: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()
    return result, outputs


@click.command(name="simulate")
@click.option("--xi", "xi_text", default=None, help="Comma-separated xi values")
@click.option("--k", "k_text", default=None, help="Levels, e.g. 5,6,7 or 5..9")
@click.option("--reps", type=int, default=None, help="Replicates per (xi, k)")
@click.option(
    "--sampler",
    type=click.Choice(["exact", "fourier", "layered"]),
    default=None,
    help="Field sampler",
)
@click.option("--multi-xi", "multi_xi_text", default=None, help="Re-evaluate geodesics at these xi")
@click.option("--census-alpha", "alpha_text", default=None, help="Census thresholds alpha")
@click.option("--keep-geodesics", is_flag=True, help="Store geodesics and dump replicate 0 as CSV")
@click.option("--save-fields", is_flag=True, help="Write the replicate 0 field of each level")
@common_options
@click.pass_context
def simulate_cmd(
    ctx,
    xi_text,
    k_text,
    reps,
    sampler,
    multi_xi_text,
    alpha_text,
    keep_geodesics,
    save_fields,
    seed,
    workers,
    out_dir,
):
    """Sample fields and compute crossing distances and geodesics.

    Writes crossings.jsonl (one record per replicate and xi), census.jsonl when
    --census-alpha is given, and manifest.json.

    Example:
        lfpp simulate --xi 0,1/sqrt6 --k 5..8 --reps 50 --sampler fourier
    """
    config = ctx.obj["config"]
    defaults = config.simulate
    seed, workers, out_dir = resolve_harness(config, seed, workers, out_dir)

    try:
        xi_list = parse_float_list(xi_text) if xi_text is not None else defaults.xi
        k_list = parse_int_list(k_text) if k_text is not None else defaults.k
        multi_xi = (
            parse_float_list(multi_xi_text) if multi_xi_text is not None else defaults.multi_xi
        )
        alphas = parse_float_list(alpha_text) if alpha_text is not None else defaults.census_alpha
    except ValueError as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise click.Abort()

    if not validate_xi_list(xi_list) or (multi_xi and not validate_xi_list(multi_xi)):
        console.print("[bold red]Error:[/bold red] xi values must be nonnegative numbers")
        raise click.Abort()
    if not validate_k_list(k_list):
        console.print("[bold red]Error:[/bold red] --k must be strictly increasing levels >= 0")
        raise click.Abort()
    if not validate_alpha_list(alphas):
        console.print("[bold red]Error:[/bold red] census alphas must be positive")
        raise click.Abort()

    plan = ExperimentPlan(
        xi_list=xi_list,
        k_list=k_list,
        replicates=reps if reps is not None else defaults.reps,
        sampler_kind=SamplerKind.parse(sampler or defaults.sampler).value,
        master_seed=seed,
        quantile=config.estimate.quantile,
        slack=config.estimate.lambda_slack,
        census_slack=config.estimate.census_slack,
        min_k=config.estimate.min_k,
        multi_xi=multi_xi,
        census_alpha=alphas,
    )

    console.print("[bold blue]Simulating LFPP crossings[/bold blue]")
    table = Table(title="Experiment Plan")
    table.add_column("Setting", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("xi", ", ".join(f"{x:.6g}" for x in plan.xi_list))
    table.add_row("k", ", ".join(str(k) for k in plan.k_list))
    table.add_row("Replicates", str(plan.replicates))
    table.add_row("Sampler", plan.sampler_kind)
    table.add_row("Seed", str(plan.master_seed))
    table.add_row("Workers", str(workers))
    table.add_row("Output", str(out_dir))
    console.print(table)
    console.print()

    result, outputs = execute(plan, config, workers, out_dir, keep_geodesics=keep_geodesics)

    if keep_geodesics:
        for record in result.crossings:
            if record.replicate == 0 and record.geodesic:
                geodesic = PathRecord(tuple(record.geodesic), 2**record.k + 1)
                name = f"geodesic_k{record.k}_xi{record.xi:.6g}.csv"
                write_geodesic_csv(out_dir / "geodesics" / name, geodesic, record.epsilon)

    if save_fields:
        for task in plan_tasks(plan, config):
            if task.replicate == 0:
                path = out_dir / "fields" / f"field_k{task.k}_r0.bin"
                save_field(replicate_field(task), path)
                logger.info(f"Saved replicate 0 field for k={task.k} to {path}")

    console.print(
        f"\n[bold green]✓[/bold green] {len(result.crossings)} crossings in "
        f"{result.wall_seconds:.1f}s"
    )
    for name, path in outputs.items():
        console.print(f"  [dim]{name}: {path}[/dim]")
    console.print("\n[bold]Next steps:[/bold]")
    console.print(f"  lfpp estimate {out_dir}")
