"""Samplers for the approximate circle-average field h_eps on the unit-square grid.

Three samplers share one contract: ``sample_*(spec, seed) -> FieldSample``, pure in
(spec, seed), with values restricted to the 2^k + 1 by 2^k + 1 vertex grid and
shifted to zero domain mean. A global shift of the field multiplies every LFPP
length by the same factor, so exponent estimates do not depend on the shift.

- ``exact_dgff``: zero-boundary discrete GFF on the padded box, exact covariance
  (inverse 5-point Laplacian), scaled by sqrt(2 pi) so Var grows like log(1/eps).
- ``fourier``: stationary field on the padded torus with power 1/|m|^2 for
  physical frequencies between 1 and 1/eps, rescaled so Var = log(1/eps) + c0.
- ``layered``: sum of independent per-scale layers, log 2 variance each.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
from scipy import stats

from lfpp.exceptions import DomainError, GridTooLargeError
from lfpp.utils.logger import setup_logger

logger = setup_logger(__name__)

LOG2 = math.log(2.0)
DEFAULT_FOURIER_OFFSET = -0.5
DEFAULT_EXACT_MAX_SIDE = 129
DEFAULT_UNIFORMITY_BOUND = 2.0


class SamplerKind(str, Enum):
    """Available field samplers; the value is the persisted name."""

    EXACT_DGFF = "exact_dgff"
    FOURIER = "fourier"
    LAYERED = "layered"

    @classmethod
    def parse(cls, name: str) -> "SamplerKind":
        """Accept the persisted names plus the short CLI alias ``exact``."""
        aliases = {"exact": cls.EXACT_DGFF}
        if name in aliases:
            return aliases[name]
        return cls(name)

    @property
    def code(self) -> int:
        return list(SamplerKind).index(self)

    @classmethod
    def from_code(cls, code: int) -> "SamplerKind":
        return list(SamplerKind)[code]


@dataclass(frozen=True)
class GridSpec:
    """Vertex grid of the unit square at scale eps = 2^-level.

    Vertex (row, col) sits at (col * eps, row * eps); indices are row-major,
    ``index = row * n_per_side + col``. The left boundary is column 0, the right
    boundary column n_per_side - 1.
    """

    level: int
    padding_factor: float = 1.0

    def __post_init__(self):
        if not isinstance(self.level, (int, np.integer)) or self.level < 0:
            raise DomainError(f"level must be a nonnegative integer, got {self.level}")
        if not math.isfinite(self.padding_factor) or self.padding_factor < 0:
            raise DomainError(f"padding_factor must be nonnegative, got {self.padding_factor}")

    @property
    def n_per_side(self) -> int:
        return 2 ** int(self.level) + 1

    @property
    def epsilon(self) -> float:
        return 2.0 ** -int(self.level)

    @property
    def vertex_count(self) -> int:
        return self.n_per_side ** 2

    @property
    def pad_cells(self) -> int:
        """Lattice steps added on each side of the unit square for sampling."""
        return int(round(self.padding_factor * 2 ** int(self.level)))

    @property
    def center(self) -> Tuple[int, int]:
        half = self.n_per_side // 2
        return half, half

    def index(self, row: int, col: int) -> int:
        self.check_vertex(row, col)
        return row * self.n_per_side + col

    def position(self, index: int) -> Tuple[int, int]:
        if not 0 <= index < self.vertex_count:
            raise DomainError(f"vertex index {index} outside the grid")
        return divmod(int(index), self.n_per_side)

    def coordinates(self, index: int) -> Tuple[float, float]:
        row, col = self.position(index)
        return col * self.epsilon, row * self.epsilon

    def check_vertex(self, row: int, col: int) -> None:
        n = self.n_per_side
        if not (0 <= row < n and 0 <= col < n):
            raise DomainError(f"vertex ({row}, {col}) outside the {n}x{n} grid")


@dataclass
class FieldSample:
    """One realization of h_eps on a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray
    sampler_kind: SamplerKind
    seed: int
    normalization: str = "zero_domain_mean"
    calibration: Optional[float] = None

    def __post_init__(self):
        n = self.spec.n_per_side
        if self.values.shape != (n, n):
            raise DomainError(f"values must have shape {(n, n)}, got {self.values.shape}")

    @property
    def epsilon(self) -> float:
        return self.spec.epsilon

    def shifted(self, constant: float) -> "FieldSample":
        """Copy with ``constant`` added at every vertex (normalization dropped)."""
        return FieldSample(
            self.spec,
            self.values + constant,
            self.sampler_kind,
            self.seed,
            normalization="shifted",
            calibration=self.calibration,
        )

    def transposed(self) -> "FieldSample":
        """Reflection across the diagonal: left/right crossings become top/bottom."""
        return FieldSample(
            self.spec,
            np.ascontiguousarray(self.values.T),
            self.sampler_kind,
            self.seed,
            self.normalization,
            self.calibration,
        )

    @classmethod
    def from_values(
        cls,
        values: np.ndarray,
        sampler_kind: SamplerKind = SamplerKind.LAYERED,
        seed: int = 0,
        normalization: str = "none",
    ) -> "FieldSample":
        """Wrap a hand-built square array whose side is 2^k + 1."""
        values = np.asarray(values, dtype=float)
        side = values.shape[0]
        level = int(round(math.log2(side - 1))) if side > 1 else -1
        if values.ndim != 2 or values.shape[1] != side or level < 0 or 2**level + 1 != side:
            raise DomainError(f"field must be square with side 2^k + 1, got {values.shape}")
        return cls(GridSpec(level), values, sampler_kind, seed, normalization)


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------


def replicate_seed(master_seed: int, level: int, replicate: int) -> int:
    """Counter-based 64-bit seed for replicate ``replicate`` at scale ``level``."""
    sequence = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(level), int(replicate))
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _layer_rng(seed: int, layer: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(layer),)))


def _normalize(values: np.ndarray) -> np.ndarray:
    values = values - values.mean()
    # second pass removes the residual rounding of the first subtraction
    return values - values.mean()


def _window(spec: GridSpec, padded: np.ndarray, pad: int) -> np.ndarray:
    n = spec.n_per_side
    return padded[pad : pad + n, pad : pad + n]


# ---------------------------------------------------------------------------
# Exact zero-boundary DGFF
# ---------------------------------------------------------------------------


def _dirichlet_spectrum(side: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the 5-point Dirichlet Laplacian on a side x side box.

    Returns the 2-D eigenvalue array and the orthonormal 1-D sine modes
    (mode index first).
    """
    p = np.arange(1, side + 1)
    one_d = 2.0 - 2.0 * np.cos(np.pi * p / (side + 1))
    eigen = one_d[:, None] + one_d[None, :]
    angles = np.pi * np.outer(p, np.arange(1, side + 1)) / (side + 1)
    modes = np.sqrt(2.0 / (side + 1)) * np.sin(angles)
    return eigen, modes


def _exact_side(spec: GridSpec, max_side: int) -> int:
    if spec.n_per_side > max_side:
        raise GridTooLargeError(
            f"exact sampler supports at most {max_side} vertices per side, "
            f"got {spec.n_per_side} (level {spec.level})"
        )
    return spec.n_per_side + 2 * spec.pad_cells


def sample_exact_dgff(
    spec: GridSpec, seed: int, max_side: int = DEFAULT_EXACT_MAX_SIDE
) -> FieldSample:
    """Exact zero-boundary DGFF on the padded box, restricted to the unit square.

    The Dirichlet Laplacian is diagonalised by the type-I discrete sine transform,
    so the sample ``DST(Z / sqrt(eigen))`` has covariance exactly the inverse
    Laplacian.

    Raises:
        GridTooLargeError: If n_per_side exceeds ``max_side``
    """
    side = _exact_side(spec, max_side)
    eigen, _ = _dirichlet_spectrum(side)
    noise = _layer_rng(seed, 0).standard_normal((side, side))
    padded = scipy.fft.dstn(noise / np.sqrt(eigen), type=1, norm="ortho")
    values = math.sqrt(2.0 * math.pi) * _window(spec, padded, spec.pad_cells)
    return FieldSample(spec, _normalize(values), SamplerKind.EXACT_DGFF, int(seed))


def dgff_variance(
    spec: GridSpec, row: int, col: int, max_side: int = DEFAULT_EXACT_MAX_SIDE
) -> float:
    """Exact marginal variance of the exact sampler at a vertex, before normalization."""
    spec.check_vertex(row, col)
    side = _exact_side(spec, max_side)
    eigen, modes = _dirichlet_spectrum(side)
    pad = spec.pad_cells
    weights = np.outer(modes[:, row + pad] ** 2, modes[:, col + pad] ** 2)
    return float(2.0 * math.pi * np.sum(weights / eigen))


# ---------------------------------------------------------------------------
# Fourier synthesis on the padded torus
# ---------------------------------------------------------------------------


def _torus_spectrum(spec: GridSpec) -> Tuple[int, int, np.ndarray]:
    """Torus side in lattice steps, window offset and per-mode variances."""
    pad = max(1, spec.pad_cells)
    side = 2 ** int(spec.level) + 2 * pad
    modes = scipy.fft.fftfreq(side, d=1.0 / side)
    radius = np.hypot(modes[:, None], modes[None, :])
    # physical frequency |m| / (side * eps) must lie in [1, 1/eps]
    lowest = side * spec.epsilon
    band = (radius >= lowest) & (radius <= side)
    power = np.zeros_like(radius)
    power[band] = 1.0 / (2.0 * math.pi * radius[band] ** 2)
    return side, pad, power


def fourier_raw_variance(spec: GridSpec) -> float:
    """Marginal variance of the unscaled torus field."""
    return float(_torus_spectrum(spec)[2].sum())


def _fourier_unscaled(spec: GridSpec, seed: int) -> np.ndarray:
    side, pad, power = _torus_spectrum(spec)
    rng = _layer_rng(seed, 0)
    noise = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
    torus = scipy.fft.ifft2(np.sqrt(power) * noise, norm="forward").real
    return _window(spec, torus, pad)


def fourier_scale(spec: GridSpec, offset: float) -> float:
    """Multiplier taking the raw variance to log(1/eps) + offset (0 when degenerate)."""
    raw = fourier_raw_variance(spec)
    target = math.log(1.0 / spec.epsilon) + offset
    if raw <= 0 or target <= 0:
        return 0.0
    return math.sqrt(target / raw)


def sample_fourier(
    spec: GridSpec, seed: int, offset: float = DEFAULT_FOURIER_OFFSET
) -> FieldSample:
    """Stationary log-correlated field synthesised by one inverse FFT.

    Args:
        spec: Grid specification
        seed: 64-bit seed
        offset: Calibration constant c0 in Var = log(1/eps) + c0
    """
    values = fourier_scale(spec, offset) * _fourier_unscaled(spec, seed)
    return FieldSample(
        spec, _normalize(values), SamplerKind.FOURIER, int(seed), calibration=float(offset)
    )


# ---------------------------------------------------------------------------
# Hierarchical layers
# ---------------------------------------------------------------------------


def _layer_weights(spec: GridSpec, layer: int) -> np.ndarray:
    """Row-normalised bilinear weights from grid vertices to the 2^-layer lattice."""
    cells = 2**layer
    coords = np.arange(spec.n_per_side) * spec.epsilon * cells
    left = np.minimum(np.floor(coords).astype(int), cells - 1)
    frac = coords - left
    weights = np.zeros((spec.n_per_side, cells + 1))
    rows = np.arange(spec.n_per_side)
    weights[rows, left] = 1.0 - frac
    weights[rows, left + 1] = frac
    return weights / np.linalg.norm(weights, axis=1, keepdims=True)


def layered_components(spec: GridSpec, seed: int) -> np.ndarray:
    """Independent layers j = 0..k, stacked along the first axis, before normalization.

    Layer 0 is a single Gaussian shared by every vertex; layer j >= 1 interpolates
    i.i.d. Gaussians on the 2^-j lattice with weights normalised so that every
    vertex has variance exactly log 2.
    """
    n = spec.n_per_side
    sigma = math.sqrt(LOG2)
    layers = np.empty((int(spec.level) + 1, n, n))
    layers[0] = sigma * _layer_rng(seed, 0).standard_normal()
    for j in range(1, int(spec.level) + 1):
        nodes = _layer_rng(seed, j).standard_normal((2**j + 1, 2**j + 1))
        weights = _layer_weights(spec, j)
        layers[j] = sigma * (weights @ nodes @ weights.T)
    return layers


def sample_layered(spec: GridSpec, seed: int) -> FieldSample:
    """Sum of :func:`layered_components`, mean-normalised."""
    values = layered_components(spec, seed).sum(axis=0)
    return FieldSample(spec, _normalize(values), SamplerKind.LAYERED, int(seed))


def sample_field(
    kind: SamplerKind,
    spec: GridSpec,
    seed: int,
    fourier_offset: float = DEFAULT_FOURIER_OFFSET,
    exact_max_side: int = DEFAULT_EXACT_MAX_SIDE,
) -> FieldSample:
    """Dispatch to the sampler named by ``kind``."""
    kind = SamplerKind(kind)
    if kind is SamplerKind.EXACT_DGFF:
        return sample_exact_dgff(spec, seed, max_side=exact_max_side)
    if kind is SamplerKind.FOURIER:
        return sample_fourier(spec, seed, offset=fourier_offset)
    return sample_layered(spec, seed)


# ---------------------------------------------------------------------------
# Statistical validation
# ---------------------------------------------------------------------------


@dataclass
class FieldStats:
    """Moment summary of a set of samples sharing spec and sampler."""

    spec: GridSpec
    sampler_kind: SamplerKind
    replicates: int
    degenerate: bool
    center_variance: float
    variance_min: float
    variance_median: float
    variance_max: float
    variance_spread: float
    uniform: bool
    lags: List[float] = field(default_factory=list)
    covariances: List[float] = field(default_factory=list)
    covariance_slope: float = math.nan
    covariance_intercept: float = math.nan
    center_skewness: float = math.nan
    center_excess_kurtosis: float = math.nan


def _interior_subsample(n: int, count: int = 17) -> np.ndarray:
    if n <= 2:
        return np.arange(n)
    return np.unique(np.linspace(1, n - 2, min(n - 2, count)).round().astype(int))


def _lag_steps(spec: GridSpec) -> List[int]:
    steps, lag = [], 4
    while lag * spec.epsilon <= 0.125 + 1e-12 and lag < spec.n_per_side:
        steps.append(lag)
        lag *= 2
    return steps


class FieldAccumulator:
    """Streaming moment sums over replicate fields.

    Sums are plain additions, so accumulators built over disjoint replicate sets
    can be merged in any order.
    """

    def __init__(self, spec: GridSpec, sampler_kind: SamplerKind, subsample: int = 17):
        self.spec = spec
        self.sampler_kind = SamplerKind(sampler_kind)
        n = spec.n_per_side
        self.rows = _interior_subsample(n, subsample)
        self.lags = _lag_steps(spec)
        self.count = 0
        self.sum = np.zeros((self.rows.size, self.rows.size))
        self.sum_sq = np.zeros_like(self.sum)
        self.center_values: List[float] = []
        # horizontal pairs: base vertex on the subsample, partner ``lag`` columns right
        self.pair_bases = {
            lag: self.rows[self.rows + lag < n] for lag in self.lags
        }
        self.pair_sums = {
            lag: self._pair_zeros(lag) for lag in self.lags
        }

    def _pair_zeros(self, lag: int) -> dict:
        shape = (self.rows.size, self.pair_bases[lag].size)
        return {"x": np.zeros(shape), "y": np.zeros(shape), "xy": np.zeros(shape)}

    def add(self, sample: FieldSample) -> None:
        if sample.spec != self.spec or SamplerKind(sample.sampler_kind) != self.sampler_kind:
            raise DomainError("all samples must share spec and sampler_kind")
        values = sample.values
        grid = values[np.ix_(self.rows, self.rows)]
        self.sum += grid
        self.sum_sq += grid * grid
        row, col = self.spec.center
        self.center_values.append(float(values[row, col]))
        for lag in self.lags:
            bases = self.pair_bases[lag]
            x = values[np.ix_(self.rows, bases)]
            y = values[np.ix_(self.rows, bases + lag)]
            sums = self.pair_sums[lag]
            sums["x"] += x
            sums["y"] += y
            sums["xy"] += x * y
        self.count += 1

    def merge(self, other: "FieldAccumulator") -> "FieldAccumulator":
        if other.spec != self.spec or other.sampler_kind != self.sampler_kind:
            raise DomainError("cannot merge accumulators of different specs")
        self.count += other.count
        self.sum += other.sum
        self.sum_sq += other.sum_sq
        self.center_values.extend(other.center_values)
        for lag in self.lags:
            for key in ("x", "y", "xy"):
                self.pair_sums[lag][key] += other.pair_sums[lag][key]
        return self

    def finalize(self, uniformity_bound: float = DEFAULT_UNIFORMITY_BOUND) -> FieldStats:
        count = self.count
        if count < 2:
            logger.warning(f"Field statistics from {count} sample(s) are degenerate")
            nan = math.nan
            return FieldStats(
                self.spec, self.sampler_kind, count, True, nan, nan, nan, nan, nan, False
            )

        variance = (self.sum_sq - self.sum**2 / count) / (count - 1)
        variance = np.maximum(variance, 0.0)
        lags, covariances = [], []
        for lag in self.lags:
            sums = self.pair_sums[lag]
            if sums["xy"].size == 0:
                continue
            cov = (sums["xy"] - sums["x"] * sums["y"] / count) / (count - 1)
            lags.append(lag * self.spec.epsilon)
            covariances.append(float(cov.mean()))

        slope = intercept = math.nan
        if len(lags) >= 2:
            fit = stats.linregress(np.log(lags), covariances)
            slope, intercept = float(fit.slope), float(fit.intercept)

        center = np.asarray(self.center_values)
        spread = float(variance.max() - variance.min())
        return FieldStats(
            spec=self.spec,
            sampler_kind=self.sampler_kind,
            replicates=count,
            degenerate=False,
            center_variance=float(center.var(ddof=1)),
            variance_min=float(variance.min()),
            variance_median=float(np.median(variance)),
            variance_max=float(variance.max()),
            variance_spread=spread,
            uniform=spread <= uniformity_bound,
            lags=lags,
            covariances=covariances,
            covariance_slope=slope,
            covariance_intercept=intercept,
            center_skewness=float(stats.skew(center)),
            center_excess_kurtosis=float(stats.kurtosis(center)),
        )


def validate_field(
    samples: Iterable[FieldSample],
    uniformity_bound: float = DEFAULT_UNIFORMITY_BOUND,
    subsample: int = 17,
) -> FieldStats:
    """Variance, uniformity and covariance-decay summary of replicate samples.

    Args:
        samples: Samples sharing spec and sampler_kind (any iterable; consumed once)
        uniformity_bound: Largest allowed max - min of per-vertex variances
        subsample: Interior rows/columns used for the per-vertex statistics

    Raises:
        DomainError: If the samples mix specs or samplers, or there are none
    """
    accumulator: Optional[FieldAccumulator] = None
    for sample in samples:
        if accumulator is None:
            accumulator = FieldAccumulator(sample.spec, sample.sampler_kind, subsample)
        accumulator.add(sample)
    if accumulator is None:
        raise DomainError("validate_field needs at least one sample")
    return accumulator.finalize(uniformity_bound)


def center_variance_slope(
    kind: SamplerKind,
    levels: Sequence[int],
    replicates: int,
    master_seed: int = 0,
    **sampler_options,
) -> Tuple[float, List[float]]:
    """Slope of the centre-vertex variance against log(1/eps) over ``levels``."""
    variances = []
    for level in levels:
        spec = GridSpec(level)
        row, col = spec.center
        centre = [
            sample_field(kind, spec, replicate_seed(master_seed, level, r), **sampler_options)
            .values[row, col]
            for r in range(replicates)
        ]
        variances.append(float(np.var(centre, ddof=1)))
    abscissae = [math.log(2.0 ** level) for level in levels]
    return float(stats.linregress(abscissae, variances).slope), variances


def calibrate_fourier_offset(
    level: int = 5,
    replicates: int = 5000,
    master_seed: int = 0,
    padding_factor: float = 1.0,
) -> float:
    """Fit c0 so the fourier centre variance matches the exact sampler at ``level``.

    Normalization is linear, so the normalised fourier variance is the squared
    scale times the normalised variance of the unscaled field; solving for the
    scale gives c0 in closed form from two Monte-Carlo variances.
    """
    spec = GridSpec(level, padding_factor)
    row, col = spec.center
    exact, unscaled = [], []
    for r in range(replicates):
        seed = replicate_seed(master_seed, level, r)
        exact.append(sample_exact_dgff(spec, seed).values[row, col])
        raw = _fourier_unscaled(spec, seed)
        unscaled.append(_normalize(raw)[row, col])
    exact_var = float(np.var(exact, ddof=1))
    unscaled_var = float(np.var(unscaled, ddof=1))
    offset = exact_var * fourier_raw_variance(spec) / unscaled_var - math.log(1.0 / spec.epsilon)
    logger.info(
        f"Calibrated fourier offset c0 = {offset:.6f} "
        f"(exact centre variance {exact_var:.4f}, level {level}, {replicates} replicates)"
    )
    return offset
