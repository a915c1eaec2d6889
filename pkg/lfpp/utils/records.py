"""Persistence of simulation results: JSON-lines records, CSV tables and field files."""

import json
import math
import struct
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel

from lfpp.exceptions import DomainError
from lfpp.utils.gff import FieldSample, GridSpec, SamplerKind
from lfpp.utils.logger import setup_logger
from lfpp.utils.paths import CensusResult, CrossingResult, PathRecord

logger = setup_logger(__name__)

CROSSINGS_FILE = "crossings.jsonl"
CENSUS_FILE = "census.jsonl"
MANIFEST_FILE = "manifest.json"
ESTIMATES_FILE = "estimates.csv"
CENSUS_ESTIMATES_FILE = "census_estimates.csv"
LENGTH_COMPARE_FILE = "length_compare.csv"
BOUNDS_FLOAT_FORMAT = "%.12g"

FIELD_MAGIC = b"LFPPFLD1"
FIELD_HEADER = struct.Struct("<8sIB3x")

Model = TypeVar("Model", bound=BaseModel)


class CrossingRecord(BaseModel):
    """One crossing computation, as stored in crossings.jsonl."""

    xi: float
    k: int
    replicate: int
    seed: int
    sampler: str
    distance: float
    vertex_count: int
    direction: str = "horizontal"
    multi_xi: List[Tuple[float, float]] = []
    geodesic: Optional[List[int]] = None

    @classmethod
    def from_result(
        cls,
        result: CrossingResult,
        replicate: int,
        multi_xi: Sequence[Tuple[float, float]] = (),
        keep_geodesic: bool = False,
    ) -> "CrossingRecord":
        return cls(
            xi=result.xi,
            k=result.level,
            replicate=replicate,
            seed=result.seed,
            sampler=result.sampler_kind,
            distance=result.distance,
            vertex_count=result.vertex_count,
            direction=result.direction,
            multi_xi=[(float(x), float(length)) for x, length in multi_xi],
            geodesic=list(result.geodesic.vertices) if keep_geodesic else None,
        )

    @property
    def epsilon(self) -> float:
        return 2.0 ** -self.k

    def length_at(self, xi_tilde: float) -> Optional[float]:
        """LFPP length of the stored geodesic at ``xi_tilde`` if it can be recovered."""
        if math.isclose(xi_tilde, self.xi, rel_tol=0.0, abs_tol=1e-12):
            return self.distance
        for x, length in self.multi_xi:
            if math.isclose(x, xi_tilde, rel_tol=0.0, abs_tol=1e-12):
                return length
        if xi_tilde == 0:
            return self.epsilon * self.vertex_count
        return None


class CensusRecord(BaseModel):
    """One census count, as stored in census.jsonl."""

    k: int
    replicate: int
    seed: int
    sampler: str
    alpha: float
    count: int
    epsilon: float
    vertex_count: int

    @classmethod
    def from_result(
        cls, result: CensusResult, level: int, replicate: int, seed: int, sampler: str
    ) -> "CensusRecord":
        return cls(
            k=level,
            replicate=replicate,
            seed=seed,
            sampler=sampler,
            alpha=result.alpha,
            count=result.count,
            epsilon=result.epsilon,
            vertex_count=result.vertex_count,
        )


# ---------------------------------------------------------------------------
# JSON lines
# ---------------------------------------------------------------------------


def write_jsonl(records: Iterable[BaseModel], path: Path) -> int:
    """Write one JSON object per line; returns the number of records."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w") as f:
        for record in records:
            f.write(record.model_dump_json(exclude_none=True))
            f.write("\n")
            count += 1
    logger.info(f"Wrote {count} records to {path}")
    return count


def read_jsonl(path: Path, model: Type[Model]) -> List[Model]:
    """Parse a JSON-lines file into ``model`` instances, skipping blank lines."""
    records = []
    with open(path) as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(model.model_validate_json(line))
            except ValueError as e:
                raise DomainError(f"{path}:{number}: malformed record: {e}") from e
    return records


def read_crossings(path: Path) -> List[CrossingRecord]:
    return read_jsonl(path, CrossingRecord)


def read_census(path: Path) -> List[CensusRecord]:
    return read_jsonl(path, CensusRecord)


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------


def emit_rows(
    rows: Sequence,
    path: Path,
    row_type: Optional[type] = None,
    float_format: Optional[str] = None,
) -> Path:
    """Write dataclass rows (or dicts) as CSV; an empty sequence gives a header-only file.

    Args:
        rows: Rows to write
        path: Output path
        row_type: Dataclass used for the header when ``rows`` is empty
        float_format: printf format for floats; None keeps full repr precision
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if row_type is not None and is_dataclass(row_type):
        columns = [f.name for f in fields(row_type)]
    elif rows:
        first = rows[0]
        columns = [f.name for f in fields(first)] if is_dataclass(first) else list(first)
    else:
        columns = []
    records = [asdict(r) if is_dataclass(r) else dict(r) for r in rows]
    pd.DataFrame.from_records(records, columns=columns).to_csv(
        path, index=False, float_format=float_format
    )
    logger.info(f"Wrote {len(records)} rows to {path}")
    return path


def parse_table(path: Path) -> pd.DataFrame:
    """Read a CSV written by :func:`emit_rows` without losing float precision."""
    return pd.read_csv(path, float_precision="round_trip")


def parse_rows(path: Path, row_type: type) -> List:
    """Read CSV rows back into ``row_type`` instances."""
    frame = parse_table(path)
    names = [f.name for f in fields(row_type)]
    missing = [n for n in names if n not in frame.columns]
    if missing:
        raise DomainError(f"{path}: missing columns {missing}")
    return [row_type(**{n: _plain(rec[n]) for n in names}) for rec in frame.to_dict("records")]


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_geodesic_csv(path: Path, geodesic: PathRecord, epsilon: float) -> Path:
    """Dump a geodesic as (x, y) coordinates for plotting."""
    rows = [{"x": col * epsilon, "y": row * epsilon} for row, col in geodesic.positions()]
    return emit_rows(rows, path)


# ---------------------------------------------------------------------------
# Field files
# ---------------------------------------------------------------------------


def save_field(sample: FieldSample, path: Path) -> Tuple[Path, Path]:
    """Write a field as a 16-byte header plus little-endian float64 values, and a JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    kind = SamplerKind(sample.sampler_kind)
    with open(path, "wb") as f:
        f.write(FIELD_HEADER.pack(FIELD_MAGIC, int(sample.spec.level), kind.code))
        f.write(np.ascontiguousarray(sample.values, dtype="<f8").tobytes())
    sidecar = path.with_suffix(path.suffix + ".json")
    metadata = {
        "seed": int(sample.seed),
        "calibration": sample.calibration,
        "normalization": sample.normalization,
        "padding_factor": sample.spec.padding_factor,
        "sampler": kind.value,
        "k": int(sample.spec.level),
    }
    sidecar.write_text(json.dumps(metadata, indent=2))
    logger.debug(f"Saved field k={sample.spec.level} to {path}")
    return path, sidecar


def load_field(path: Path) -> FieldSample:
    """Inverse of :func:`save_field`; the sidecar is optional."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < FIELD_HEADER.size:
        raise DomainError(f"{path}: truncated field header")
    magic, level, code = FIELD_HEADER.unpack_from(data)
    if magic != FIELD_MAGIC:
        raise DomainError(f"{path}: not an LFPP field file")
    spec_kwargs = {}
    metadata = {}
    sidecar = path.with_suffix(path.suffix + ".json")
    if sidecar.exists():
        metadata = json.loads(sidecar.read_text())
        spec_kwargs["padding_factor"] = metadata.get("padding_factor", 1.0)
    spec = GridSpec(level, **spec_kwargs)
    n = spec.n_per_side
    body = np.frombuffer(data, dtype="<f8", offset=FIELD_HEADER.size)
    if body.size != n * n:
        raise DomainError(f"{path}: expected {n * n} values, found {body.size}")
    return FieldSample(
        spec,
        body.reshape(n, n).astype(float),
        SamplerKind.from_code(code),
        int(metadata.get("seed", 0)),
        metadata.get("normalization", "zero_domain_mean"),
        metadata.get("calibration"),
    )
