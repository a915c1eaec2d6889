"""Tests for the field samplers and their statistical validation."""

import math

import numpy as np
import pytest
import scipy.sparse
import scipy.sparse.linalg

from lfpp.exceptions import DomainError, GridTooLargeError
from lfpp.utils.gff import (
    LOG2,
    FieldAccumulator,
    FieldSample,
    GridSpec,
    SamplerKind,
    calibrate_fourier_offset,
    center_variance_slope,
    dgff_variance,
    fourier_raw_variance,
    fourier_scale,
    layered_components,
    replicate_seed,
    sample_exact_dgff,
    sample_field,
    sample_fourier,
    sample_layered,
    validate_field,
)

ALL_KINDS = [SamplerKind.EXACT_DGFF, SamplerKind.FOURIER, SamplerKind.LAYERED]


def _dirichlet_laplacian(side: int) -> scipy.sparse.csr_matrix:
    tri = scipy.sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(side, side))
    eye = scipy.sparse.identity(side)
    return (scipy.sparse.kron(eye, tri) + scipy.sparse.kron(tri, eye)).tocsr()


def _samples(kind, spec, count, master_seed=0, **options):
    for r in range(count):
        yield sample_field(kind, spec, replicate_seed(master_seed, spec.level, r), **options)


class TestGridSpec:
    """Test grid geometry."""

    def test_epsilon_spacing(self):
        """Test that eps * (n - 1) == 1 exactly."""
        for level in range(12):
            spec = GridSpec(level)
            assert spec.epsilon * (spec.n_per_side - 1) == 1.0
            assert spec.vertex_count == spec.n_per_side**2

    def test_indexing(self):
        """Test row-major indices and coordinates."""
        spec = GridSpec(2)
        assert spec.index(1, 3) == 8
        assert spec.position(8) == (1, 3)
        assert spec.coordinates(8) == (0.75, 0.25)
        assert spec.center == (2, 2)

    def test_invalid(self):
        """Test rejection of bad levels, padding and vertices."""
        with pytest.raises(DomainError):
            GridSpec(-1)
        with pytest.raises(DomainError):
            GridSpec(3, padding_factor=-0.5)
        with pytest.raises(DomainError):
            GridSpec(2).check_vertex(5, 0)
        with pytest.raises(DomainError):
            GridSpec(2).position(25)

    def test_pad_cells(self):
        """Test the padding width in lattice steps."""
        assert GridSpec(5).pad_cells == 32
        assert GridSpec(5, padding_factor=0.5).pad_cells == 16
        assert GridSpec(5, padding_factor=0.0).pad_cells == 0


class TestSeeding:
    """Test the counter-based seeds."""

    def test_deterministic(self):
        """Test that seeds depend only on (master, k, r)."""
        assert replicate_seed(7, 5, 3) == replicate_seed(7, 5, 3)
        assert 0 <= replicate_seed(7, 5, 3) < 2**64

    def test_distinct(self):
        """Test that different coordinates give different seeds."""
        seeds = {replicate_seed(0, k, r) for k in range(5, 9) for r in range(50)}
        assert len(seeds) == 200
        assert replicate_seed(0, 5, 3) != replicate_seed(1, 5, 3)


class TestSamplers:
    """Test the three samplers."""

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_same_seed_same_field(self, kind):
        """Test bitwise reproducibility for a fixed seed."""
        spec = GridSpec(5)
        first = sample_field(kind, spec, 1234)
        second = sample_field(kind, spec, 1234)
        assert np.array_equal(first.values, second.values)
        assert not np.array_equal(first.values, sample_field(kind, spec, 1235).values)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_zero_mean(self, kind):
        """Test that every sample has zero mean over the square."""
        sample = sample_field(kind, GridSpec(5), 99)
        assert abs(sample.values.mean()) < 1e-10
        assert sample.sampler_kind == kind
        assert sample.normalization == "zero_domain_mean"

    def test_exact_size_cap(self):
        """Test that the exact sampler refuses grids above the cap."""
        with pytest.raises(GridTooLargeError):
            sample_exact_dgff(GridSpec(8), 0)
        assert sample_exact_dgff(GridSpec(8), 0, max_side=257).values.shape == (257, 257)

    @pytest.mark.parametrize("level,padding", [(2, 1.0), (1, 0.5), (0, 3.0)])
    def test_exact_variance_matches_inverse_laplacian(self, level, padding):
        """Test the spectral variance against a sparse solve of the Dirichlet Laplacian."""
        spec = GridSpec(level, padding)
        side = spec.n_per_side + 2 * spec.pad_cells
        laplacian = _dirichlet_laplacian(side)
        pad = spec.pad_cells
        for row, col in [spec.center, (0, 0), (0, spec.n_per_side - 1)]:
            flat = (row + pad) * side + (col + pad)
            rhs = np.zeros(side * side)
            rhs[flat] = 1.0
            green = scipy.sparse.linalg.spsolve(laplacian.tocsc(), rhs)
            expected = 2.0 * math.pi * green[flat]
            assert dgff_variance(spec, row, col) == pytest.approx(expected, rel=1e-10)

    def test_fourier_scale(self):
        """Test that scaling takes the raw variance to log(1/eps) + offset."""
        spec = GridSpec(6)
        scale = fourier_scale(spec, -0.5)
        assert scale**2 * fourier_raw_variance(spec) == pytest.approx(6 * LOG2 - 0.5)
        assert fourier_scale(spec, -100.0) == 0.0

    def test_fourier_records_calibration(self):
        """Test that the offset used is stored on the sample."""
        assert sample_fourier(GridSpec(4), 1, offset=-0.25).calibration == -0.25

    def test_layered_level_zero(self):
        """Test that the level-0 layered field is identically zero after normalization."""
        sample = sample_layered(GridSpec(0), 5)
        assert sample.values.shape == (2, 2)
        assert np.allclose(sample.values, 0.0, atol=1e-12)

    def test_layered_components_sum(self):
        """Test that the layered sample is the normalized sum of its layers."""
        spec = GridSpec(4)
        layers = layered_components(spec, 17)
        assert layers.shape == (5, 17, 17)
        assert np.all(layers[0] == layers[0, 0, 0])
        total = layers.sum(axis=0)
        assert np.allclose(sample_layered(spec, 17).values, total - total.mean(), atol=1e-12)


class TestFieldSample:
    """Test FieldSample helpers."""

    def test_shape_checked(self):
        """Test that values must match the grid."""
        with pytest.raises(DomainError):
            FieldSample(GridSpec(2), np.zeros((4, 4)), SamplerKind.LAYERED, 0)

    def test_from_values(self):
        """Test wrapping a hand-built field."""
        sample = FieldSample.from_values(np.zeros((9, 9)))
        assert sample.spec.level == 3
        with pytest.raises(DomainError):
            FieldSample.from_values(np.zeros((4, 4)))

    def test_shifted_and_transposed(self):
        """Test the shift and reflection helpers."""
        values = np.arange(9.0).reshape(3, 3)
        sample = FieldSample.from_values(values)
        assert np.array_equal(sample.shifted(2.0).values, values + 2.0)
        assert np.array_equal(sample.transposed().values, values.T)


class TestValidation:
    """Test the streaming field statistics."""

    def test_single_sample_is_degenerate(self):
        """Test that one replicate gives NaN statistics without failing."""
        stats = validate_field([sample_layered(GridSpec(4), 0)])
        assert stats.degenerate
        assert math.isnan(stats.center_variance)
        assert not stats.uniform

    def test_empty_input(self):
        """Test that an empty sample set is rejected."""
        with pytest.raises(DomainError):
            validate_field([])

    def test_mixed_samples(self):
        """Test that mixed specs or samplers are rejected."""
        with pytest.raises(DomainError):
            validate_field([sample_layered(GridSpec(4), 0), sample_layered(GridSpec(5), 0)])
        with pytest.raises(DomainError):
            validate_field([sample_layered(GridSpec(4), 0), sample_fourier(GridSpec(4), 0)])

    def test_merge_matches_single_pass(self):
        """Test that merged accumulators give the single-pass statistics."""
        spec = GridSpec(5)
        samples = list(_samples(SamplerKind.FOURIER, spec, 20))
        whole = validate_field(samples)

        left = FieldAccumulator(spec, SamplerKind.FOURIER)
        right = FieldAccumulator(spec, SamplerKind.FOURIER)
        for s in samples[:7]:
            left.add(s)
        for s in samples[7:]:
            right.add(s)
        merged = right.merge(left).finalize()

        assert merged.replicates == 20
        assert merged.variance_median == pytest.approx(whole.variance_median, rel=1e-9)
        assert merged.covariance_slope == pytest.approx(whole.covariance_slope, rel=1e-9)

    def test_lags(self):
        """Test that covariance lags run from 4 eps to 1/8."""
        stats = validate_field(_samples(SamplerKind.LAYERED, GridSpec(6), 5))
        assert stats.lags == [4 / 64, 8 / 64]


@pytest.mark.slow
class TestSamplerStatistics:
    """Monte-Carlo checks of the log-correlated structure."""

    @pytest.mark.parametrize(
        "kind,levels",
        [
            (SamplerKind.EXACT_DGFF, [4, 5, 6, 7]),
            (SamplerKind.FOURIER, [4, 5, 6, 7, 8]),
            (SamplerKind.LAYERED, [4, 5, 6, 7, 8]),
        ],
    )
    def test_variance_grows_like_log(self, kind, levels):
        """Test that the centre variance grows with slope ~1 in log(1/eps)."""
        slope, variances = center_variance_slope(kind, levels, replicates=2000)
        assert 0.85 <= slope <= 1.15
        assert variances == sorted(variances)

    @pytest.mark.parametrize("kind", [SamplerKind.FOURIER, SamplerKind.LAYERED])
    def test_covariance_decays_like_log(self, kind):
        """Test that the covariance slope against log distance is ~ -1."""
        stats = validate_field(_samples(kind, GridSpec(9), 500))
        assert -1.2 <= stats.covariance_slope <= -0.8

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_marginal_is_gaussian(self, kind):
        """Test skewness and excess kurtosis of the centre value for every sampler."""
        stats = validate_field(_samples(kind, GridSpec(5), 20000))
        assert abs(stats.center_skewness) < 0.1
        assert abs(stats.center_excess_kurtosis) < 0.2

    def test_layered_variance(self):
        """Test the layered centre variance against k log 2."""
        stats = validate_field(_samples(SamplerKind.LAYERED, GridSpec(8), 1000))
        assert stats.center_variance == pytest.approx(8 * LOG2, rel=0.15)

    def test_layers_are_independent(self):
        """Test that distinct layers are uncorrelated at the centre vertex."""
        spec = GridSpec(4)
        row, col = spec.center
        draws = np.array(
            [layered_components(spec, replicate_seed(0, 4, r))[:, row, col] for r in range(4000)]
        )
        assert abs(np.corrcoef(draws[:, 1], draws[:, 2])[0, 1]) < 0.05
        assert np.var(draws[:, 3], ddof=1) == pytest.approx(LOG2, rel=0.1)

    def test_exact_variance_is_uniform(self):
        """Test that the exact sampler's per-vertex variance spread is small."""
        stats = validate_field(_samples(SamplerKind.EXACT_DGFF, GridSpec(5), 1000))
        assert stats.uniform
        assert stats.variance_spread < 2.0

    def test_calibrated_fourier_matches_exact(self):
        """Test that the calibrated fourier centre variance matches the exact sampler."""
        offset = calibrate_fourier_offset(level=5, replicates=20000, master_seed=1)
        spec = GridSpec(5)
        exact = validate_field(_samples(SamplerKind.EXACT_DGFF, spec, 20000, master_seed=2))
        fourier = validate_field(
            _samples(SamplerKind.FOURIER, spec, 20000, master_seed=2, fourier_offset=offset)
        )
        assert abs(exact.center_variance - fourier.center_variance) < 0.3
