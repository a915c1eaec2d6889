"""LFPP lengths, crossing distances and geodesics on a sampled field.

Every vertex v carries the weight w(v) = eps * exp(xi * h(v)). A path's LFPP length
is the sum of the weights of all its vertices, endpoints included, so the
shortest-path search adds the weight of the vertex being entered and starts each
source at its own weight.
"""

import heapq
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from lfpp.exceptions import DomainError, WeightRangeError
from lfpp.utils.gff import FieldSample
from lfpp.utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_OVERFLOW_LIMIT = 700.0
DIRECTIONS = ("horizontal", "vertical")

Vertex = Tuple[int, int]


@dataclass(frozen=True)
class PathRecord:
    """A lattice path as row-major vertex indices on an n x n grid."""

    vertices: Tuple[int, ...]
    n_per_side: int
    field_values: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.vertices:
            raise DomainError("path has no vertices")
        total = self.n_per_side**2
        for index in self.vertices:
            if not 0 <= index < total:
                n = self.n_per_side
                raise DomainError(f"vertex {index} outside the {n}x{n} grid")
        for a, b in zip(self.vertices, self.vertices[1:]):
            ra, ca = divmod(a, self.n_per_side)
            rb, cb = divmod(b, self.n_per_side)
            if abs(ra - rb) + abs(ca - cb) != 1:
                raise DomainError(f"vertices {a} and {b} are not nearest neighbours")

    @classmethod
    def from_vertices(cls, sample: FieldSample, vertices: Sequence[int]) -> "PathRecord":
        """Build a path on ``sample``'s grid and record h along it."""
        flat = sample.values.ravel()
        vertices = tuple(int(v) for v in vertices)
        if not vertices:
            raise DomainError("path has no vertices")
        return cls(vertices, sample.spec.n_per_side, tuple(float(flat[v]) for v in vertices))

    @classmethod
    def from_positions(cls, sample: FieldSample, positions: Sequence[Vertex]) -> "PathRecord":
        n = sample.spec.n_per_side
        return cls.from_vertices(sample, [row * n + col for row, col in positions])

    @property
    def is_simple(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def positions(self) -> List[Vertex]:
        return [divmod(v, self.n_per_side) for v in self.vertices]


@dataclass
class CrossingResult:
    """Minimal left-to-right (or top-to-bottom) crossing of one field sample."""

    xi: float
    distance: float
    geodesic: PathRecord
    level: int
    seed: int
    sampler_kind: str
    direction: str = "horizontal"

    @property
    def vertex_count(self) -> int:
        return self.geodesic.vertex_count

    @property
    def epsilon(self) -> float:
        return 2.0 ** -self.level


@dataclass(frozen=True)
class CensusResult:
    """Number of vertices with h below alpha * log(eps)."""

    alpha: float
    count: int
    epsilon: float
    vertex_count: int = 0


# ---------------------------------------------------------------------------
# Weights and lengths
# ---------------------------------------------------------------------------


def _check_xi(xi: float) -> None:
    if not math.isfinite(xi) or xi < 0:
        raise DomainError(f"xi must be a finite nonnegative number, got {xi}")


def vertex_weights(
    sample: FieldSample, xi: float, overflow_limit: float = DEFAULT_OVERFLOW_LIMIT
) -> np.ndarray:
    """Weights eps * exp(xi * h); eps = 2^-k is applied exactly with ldexp.

    Raises:
        WeightRangeError: If the field is not finite or an exponent exceeds ``overflow_limit``
    """
    _check_xi(xi)
    values = sample.values
    if not np.all(np.isfinite(values)):
        raise WeightRangeError("field contains non-finite values")
    exponents = xi * values + math.log(sample.epsilon)
    largest = float(exponents.max())
    if largest > overflow_limit:
        raise WeightRangeError(
            f"weight exponent {largest:.1f} exceeds {overflow_limit} "
            f"(xi={xi}, max|h|={float(np.abs(values).max()):.2f})"
        )
    weights = np.ldexp(np.exp(xi * values), -int(sample.spec.level))
    if not np.all(np.isfinite(weights)):
        raise WeightRangeError(f"weights overflow at xi={xi}")
    return weights


def lfpp_length(path: PathRecord, sample: FieldSample, xi: float) -> float:
    """Sum of eps * exp(xi * h) over every vertex of ``path``, compensated summation."""
    _check_xi(xi)
    if path.n_per_side != sample.spec.n_per_side:
        raise DomainError("path and field live on different grids")
    flat = sample.values.ravel()
    level = -int(sample.spec.level)
    return math.fsum(math.ldexp(math.exp(xi * float(flat[v])), level) for v in path.vertices)


def multi_xi_evaluate(
    geodesic: PathRecord, sample: FieldSample, xi_list: Sequence[float]
) -> List[float]:
    """LFPP length of one fixed path under each xi in ``xi_list``."""
    return [lfpp_length(geodesic, sample, xi) for xi in xi_list]


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------


def _search(
    weights: List[float],
    n: int,
    sources: Sequence[int],
    targets: Sequence[int],
) -> Tuple[float, int, List[int]]:
    """Vertex-weighted Dijkstra with lazy deletion.

    Heap entries are (distance, index), so equal distances settle the smaller
    row-major index first. A predecessor only changes on a strictly shorter
    distance, or on an equal one from a smaller predecessor index.
    """
    total = n * n
    dist = [math.inf] * total
    pred = [-1] * total
    done = bytearray(total)
    is_target = bytearray(total)
    for t in targets:
        is_target[t] = 1
    queue: List[Tuple[float, int]] = []
    for s in sources:
        dist[s] = weights[s]
        queue.append((weights[s], s))
    heapq.heapify(queue)
    heappop, heappush = heapq.heappop, heapq.heappush

    while queue:
        d, u = heappop(queue)
        if done[u]:
            continue
        done[u] = 1
        if is_target[u]:
            return d, u, pred
        row, col = divmod(u, n)
        neighbours = []
        if row > 0:
            neighbours.append(u - n)
        if col > 0:
            neighbours.append(u - 1)
        if col < n - 1:
            neighbours.append(u + 1)
        if row < n - 1:
            neighbours.append(u + n)
        for v in neighbours:
            if done[v]:
                continue
            candidate = d + weights[v]
            if candidate < dist[v]:
                dist[v] = candidate
                pred[v] = u
                heappush(queue, (candidate, v))
            elif candidate == dist[v] and u < pred[v]:
                pred[v] = u

    raise DomainError("no target reachable from the sources")


def _backtrace(pred: List[int], end: int) -> List[int]:
    path = [end]
    while pred[path[-1]] >= 0:
        path.append(pred[path[-1]])
    path.reverse()
    return path


def crossing_distance(
    sample: FieldSample,
    xi: float,
    direction: str = "horizontal",
    overflow_limit: float = DEFAULT_OVERFLOW_LIMIT,
) -> CrossingResult:
    """Minimal LFPP length between opposite sides of the unit square.

    Args:
        sample: Field sample
        xi: LFPP parameter
        direction: ``horizontal`` (column 0 to column n-1) or ``vertical``
            (row 0 to row n-1)
        overflow_limit: Largest allowed weight exponent

    Returns:
        CrossingResult with the distance, the geodesic and its vertex count
    """
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be one of {DIRECTIONS}, got '{direction}'")
    if direction == "vertical":
        result = crossing_distance(sample.transposed(), xi, "horizontal", overflow_limit)
        n = sample.spec.n_per_side
        vertices = [col * n + row for row, col in result.geodesic.positions()]
        result.geodesic = PathRecord.from_vertices(sample, vertices)
        result.direction = "vertical"
        return result

    n = sample.spec.n_per_side
    weights = vertex_weights(sample, xi, overflow_limit).ravel().tolist()
    left = [row * n for row in range(n)]
    right = [row * n + n - 1 for row in range(n)]
    distance, end, pred = _search(weights, n, left, right)
    geodesic = PathRecord.from_vertices(sample, _backtrace(pred, end))
    logger.debug(
        f"Crossing at k={sample.spec.level}, xi={xi}: D={distance:.6g}, #P={geodesic.vertex_count}"
    )
    return CrossingResult(
        xi=float(xi),
        distance=distance,
        geodesic=geodesic,
        level=int(sample.spec.level),
        seed=int(sample.seed),
        sampler_kind=str(getattr(sample.sampler_kind, "value", sample.sampler_kind)),
    )


def point_geodesic(
    sample: FieldSample,
    xi: float,
    z: Vertex,
    w: Vertex,
    overflow_limit: float = DEFAULT_OVERFLOW_LIMIT,
) -> Tuple[float, PathRecord]:
    """Minimal vertex-weighted path from z to w, both endpoints counted."""
    sample.spec.check_vertex(*z)
    sample.spec.check_vertex(*w)
    n = sample.spec.n_per_side
    weights = vertex_weights(sample, xi, overflow_limit).ravel().tolist()
    start, stop = z[0] * n + z[1], w[0] * n + w[1]
    distance, end, pred = _search(weights, n, [start], [stop])
    return distance, PathRecord.from_vertices(sample, _backtrace(pred, end))


def point_distance(
    sample: FieldSample,
    xi: float,
    z: Vertex,
    w: Vertex,
    overflow_limit: float = DEFAULT_OVERFLOW_LIMIT,
) -> float:
    """D(z, w); equals the weight of z when z == w."""
    return point_geodesic(sample, xi, z, w, overflow_limit)[0]


# ---------------------------------------------------------------------------
# Census and path split
# ---------------------------------------------------------------------------


def census(sample: FieldSample, alpha: float) -> CensusResult:
    """Count vertices with h < alpha * log(eps)."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    threshold = alpha * math.log(sample.epsilon)
    count = int(np.count_nonzero(sample.values < threshold))
    return CensusResult(float(alpha), count, sample.epsilon, sample.spec.vertex_count)


@dataclass(frozen=True)
class PathSplit:
    """Low/high decomposition of an LFPP length at threshold alpha * log(eps)."""

    low_count: int
    low_term: float
    high_term: float

    @property
    def bound(self) -> float:
        return self.low_term + self.high_term

    def __iter__(self):
        return iter((self.low_count, self.low_term, self.high_term))


def path_split(path: PathRecord, sample: FieldSample, xi_tilde: float, alpha: float) -> PathSplit:
    """Split L^{xi_tilde}(path) into vertices below and above alpha * log(eps).

    Each low vertex contributes at most eps^{1 + alpha * xi_tilde}, so
    ``low_term + high_term`` bounds the length from above.
    """
    _check_xi(xi_tilde)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if path.n_per_side != sample.spec.n_per_side:
        raise DomainError("path and field live on different grids")
    eps = sample.epsilon
    threshold = alpha * math.log(eps)
    flat = sample.values.ravel()
    heights = [float(flat[v]) for v in path.vertices]
    low_count = sum(1 for h in heights if h < threshold)
    level = -int(sample.spec.level)
    high_term = math.fsum(
        math.ldexp(math.exp(xi_tilde * h), level) for h in heights if h >= threshold
    )
    low_term = eps ** (1.0 + alpha * xi_tilde) * low_count
    return PathSplit(low_count, low_term, high_term)
