"""Deterministic replicate execution for ``lfpp simulate`` and ``lfpp census``.

Replicate (k, r) always uses the seed ``replicate_seed(master_seed, k, r)``; tasks
are dispatched to a process pool and collected in task order by a single
collector, so the written files do not depend on the worker count.
"""

import hashlib
import json
import multiprocessing
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn

import lfpp
from lfpp.config import Config
from lfpp.exceptions import MemoryBudgetError
from lfpp.utils.gff import FieldSample, GridSpec, SamplerKind, replicate_seed, sample_field
from lfpp.utils.logger import console, setup_logger
from lfpp.utils.paths import census, crossing_distance, multi_xi_evaluate
from lfpp.utils.records import (
    CENSUS_FILE,
    CROSSINGS_FILE,
    MANIFEST_FILE,
    CensusRecord,
    CrossingRecord,
    write_jsonl,
)
from lfpp.utils.scaling import ExperimentPlan

logger = setup_logger(__name__)

# rough per-vertex footprint of the heap search (python floats, ints, heap tuples)
ENGINE_BYTES_PER_VERTEX = 240
# complex noise, spectrum and transform buffers of the padded sampling box
SAMPLER_BYTES_PER_PADDED_VERTEX = 64


@dataclass(frozen=True)
class ReplicateTask:
    """Everything one worker needs to process replicate ``replicate`` at level ``k``."""

    k: int
    replicate: int
    seed: int
    sampler: str
    xi_list: Tuple[float, ...]
    multi_xi: Tuple[float, ...] = ()
    census_alpha: Tuple[float, ...] = ()
    crossings: bool = True
    keep_geodesic: bool = False
    padding_factor: float = 1.0
    fourier_offset: float = -0.5
    exact_max_side: int = 129
    overflow_limit: float = 700.0


@dataclass
class ReplicateOutput:
    k: int
    replicate: int
    crossings: List[CrossingRecord] = field(default_factory=list)
    census: List[CensusRecord] = field(default_factory=list)
    seconds: float = 0.0


@dataclass
class RunResult:
    """Collected records of a run, in (k, replicate, xi) order."""

    crossings: List[CrossingRecord] = field(default_factory=list)
    census: List[CensusRecord] = field(default_factory=list)
    seconds_per_level: Dict[int, float] = field(default_factory=dict)
    wall_seconds: float = 0.0


def replicate_field(task: ReplicateTask) -> FieldSample:
    """The field a task runs on; the same seed always gives the same values."""
    return sample_field(
        SamplerKind.parse(task.sampler),
        GridSpec(task.k, task.padding_factor),
        task.seed,
        fourier_offset=task.fourier_offset,
        exact_max_side=task.exact_max_side,
    )


def run_replicate(task: ReplicateTask) -> ReplicateOutput:
    """Sample one field and run every requested crossing and census on it."""
    start = time.perf_counter()
    kind = SamplerKind.parse(task.sampler)
    sample = replicate_field(task)
    output = ReplicateOutput(task.k, task.replicate)

    if task.crossings:
        for xi in task.xi_list:
            result = crossing_distance(sample, xi, overflow_limit=task.overflow_limit)
            lengths = multi_xi_evaluate(result.geodesic, sample, task.multi_xi)
            output.crossings.append(
                CrossingRecord.from_result(
                    result,
                    task.replicate,
                    multi_xi=list(zip(task.multi_xi, lengths)),
                    keep_geodesic=task.keep_geodesic,
                )
            )
    for alpha in task.census_alpha:
        output.census.append(
            CensusRecord.from_result(
                census(sample, alpha), task.k, task.replicate, task.seed, kind.value
            )
        )

    output.seconds = time.perf_counter() - start
    return output


def plan_tasks(
    plan: ExperimentPlan,
    config: Config,
    crossings: bool = True,
    keep_geodesic: bool = False,
) -> List[ReplicateTask]:
    """Expand a plan into tasks ordered by (k, replicate)."""
    return [
        ReplicateTask(
            k=k,
            replicate=r,
            seed=replicate_seed(plan.master_seed, k, r),
            sampler=SamplerKind.parse(plan.sampler_kind).value,
            xi_list=tuple(plan.xi_list),
            multi_xi=tuple(plan.multi_xi),
            census_alpha=tuple(plan.census_alpha),
            crossings=crossings,
            keep_geodesic=keep_geodesic,
            padding_factor=config.sampler.padding_factor,
            fourier_offset=config.sampler.fourier_offset,
            exact_max_side=config.sampler.exact_max_side,
            overflow_limit=config.engine.overflow_limit,
        )
        for k in plan.k_list
        for r in range(plan.replicates)
    ]


def estimate_memory(plan: ExperimentPlan, padding_factor: float = 1.0, workers: int = 1) -> int:
    """Peak bytes for the largest level, times the number of concurrent workers."""
    k = max(plan.k_list)
    vertices = (2**k + 1) ** 2
    padded_side = 2**k + 2 * max(1, int(round(padding_factor * 2**k))) + 1
    per_worker = (
        ENGINE_BYTES_PER_VERTEX * vertices + SAMPLER_BYTES_PER_PADDED_VERTEX * padded_side**2
    )
    return per_worker * max(1, workers)


def check_memory(plan: ExperimentPlan, config: Config, workers: int) -> int:
    """
    Refuse plans whose memory estimate exceeds the configured budget.

    Raises:
        MemoryBudgetError: Carrying the required byte count
    """
    required = estimate_memory(plan, config.sampler.padding_factor, workers)
    budget = config.harness.memory_budget_bytes
    if required > budget:
        raise MemoryBudgetError(required, budget)
    logger.debug(f"Memory estimate {required} bytes within budget {budget}")
    return required


def run_tasks(
    tasks: Sequence[ReplicateTask], workers: int = 1, show_progress: bool = True
) -> RunResult:
    """Execute tasks on ``workers`` processes and collect outputs in task order."""
    result = RunResult()
    start = time.perf_counter()
    progress = Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        TimeElapsedColumn(),
        console=console,
        disable=not show_progress,
    )
    with progress:
        bar = progress.add_task("Replicates", total=len(tasks))
        if workers <= 1:
            outputs = map(run_replicate, tasks)
            _collect(outputs, result, progress, bar)
        else:
            # imap yields in submission order whatever the completion order
            with multiprocessing.get_context("spawn").Pool(workers) as pool:
                _collect(pool.imap(run_replicate, tasks, chunksize=1), result, progress, bar)
    result.wall_seconds = time.perf_counter() - start
    return result


def _collect(outputs, result: RunResult, progress: Progress, bar) -> None:
    for output in outputs:
        result.crossings.extend(output.crossings)
        result.census.extend(output.census)
        spent = result.seconds_per_level.get(output.k, 0.0)
        result.seconds_per_level[output.k] = spent + output.seconds
        progress.advance(bar)


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(
    plan: ExperimentPlan,
    config: Config,
    outputs: Dict[str, Path],
    result: Optional[RunResult] = None,
) -> dict:
    """Manifest of a run; ``manifest_hash`` covers everything except timings and timestamps."""
    body = {
        "code_version": lfpp.__version__,
        "plan": plan.model_dump(),
        "sampler": config.sampler.model_dump(),
        "engine": config.engine.model_dump(),
        "calibration": {"fourier_offset": config.sampler.fourier_offset},
        "outputs": {name: file_digest(path) for name, path in sorted(outputs.items())},
    }
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"))
    manifest = dict(body)
    manifest["manifest_hash"] = hashlib.sha256(canonical.encode()).hexdigest()
    manifest["created_at"] = datetime.now(timezone.utc).isoformat()
    if result is not None:
        manifest["timing"] = {
            "wall_seconds": result.wall_seconds,
            "seconds_per_level": {str(k): s for k, s in sorted(result.seconds_per_level.items())},
        }
    return manifest


def write_run(
    out_dir: Path, plan: ExperimentPlan, config: Config, result: RunResult
) -> Dict[str, Path]:
    """Write crossings.jsonl, census.jsonl and manifest.json into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: Dict[str, Path] = {}
    if result.crossings:
        outputs[CROSSINGS_FILE] = out_dir / CROSSINGS_FILE
        write_jsonl(result.crossings, outputs[CROSSINGS_FILE])
    if result.census:
        outputs[CENSUS_FILE] = out_dir / CENSUS_FILE
        write_jsonl(result.census, outputs[CENSUS_FILE])
    manifest = build_manifest(plan, config, outputs, result)
    manifest_path = out_dir / MANIFEST_FILE
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    logger.info(f"Wrote manifest {manifest_path}")
    outputs[MANIFEST_FILE] = manifest_path
    return outputs


def read_manifest(path: Path) -> dict:
    return json.loads(Path(path).read_text())
