"""Tests for exponent estimation."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from lfpp.exceptions import DomainError, InsufficientSignalError, MissingCellError
from lfpp.utils import analytic
from lfpp.utils.records import CensusRecord, CrossingRecord
from lfpp.utils.scaling import (
    ExperimentPlan,
    Target,
    census_row,
    estimate_census_exponent,
    estimate_g,
    estimate_lambda,
    estimate_rows,
    fit_loglog,
    length_compare_row,
    length_comparison_check,
)

LEVELS = [5, 6, 7, 8, 9]


def _plan(**overrides):
    settings = {"xi_list": [0.3], "k_list": LEVELS, "replicates": 4}
    settings.update(overrides)
    return ExperimentPlan(**settings)


def _crossings(xi, levels, reps, distance, vertex_count, multi_xi=None):
    records = []
    for k in levels:
        for r in range(reps):
            records.append(
                CrossingRecord(
                    xi=xi,
                    k=k,
                    replicate=r,
                    seed=1000 * k + r,
                    sampler="fourier",
                    distance=distance(k, r),
                    vertex_count=vertex_count(k, r),
                    multi_xi=multi_xi(k, r) if multi_xi else [],
                )
            )
    return records


def _census(alpha, levels, reps, count):
    return [
        CensusRecord(
            k=k,
            replicate=r,
            seed=r,
            sampler="exact_dgff",
            alpha=alpha,
            count=count(k, r),
            epsilon=2.0**-k,
            vertex_count=(2**k + 1) ** 2,
        )
        for k in levels
        for r in range(reps)
    ]


class TestExperimentPlan:
    """Test plan validation."""

    def test_fit_levels(self):
        """Test that levels below min_k are excluded from fits."""
        plan = _plan(k_list=[2, 3, 4, 5, 6], min_k=4)
        assert plan.fit_levels == [4, 5, 6]

    def test_invalid_plans(self):
        """Test rejection of unsorted levels, negative xi and bad alphas."""
        with pytest.raises(ValidationError):
            _plan(k_list=[6, 5, 7])
        with pytest.raises(ValidationError):
            _plan(xi_list=[-0.1])
        with pytest.raises(ValidationError):
            _plan(census_alpha=[0.0])
        with pytest.raises(ValidationError):
            _plan(replicates=0)


class TestFitLogLog:
    """Test the log-log regression."""

    def test_exact_power_law(self):
        """Test that an exact power law is recovered with r^2 = 1."""
        points = [(k * math.log(2), math.log(3.0 * 2.0 ** (-0.25 * k))) for k in LEVELS]
        fit = fit_loglog(points)
        assert fit.slope == pytest.approx(-0.25, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)

    def test_too_few_points(self):
        """Test that two scales are not enough."""
        with pytest.raises(InsufficientSignalError):
            fit_loglog([(1.0, 0.0), (2.0, 1.0)])

    def test_degenerate_points(self):
        """Test that repeated abscissae and non-finite values are rejected."""
        with pytest.raises(DomainError):
            fit_loglog([(1.0, 0.0), (1.0, 1.0), (2.0, 1.0)])
        with pytest.raises(DomainError):
            fit_loglog([(1.0, 0.0), (2.0, -math.inf), (3.0, 1.0)])

    def test_noisy_coverage(self):
        """Test that 3 standard errors cover the true slope in at least 95% of fits."""
        rng = np.random.default_rng(42)
        levels = range(5, 13)
        covered = 0
        for _ in range(1000):
            points = [
                (k * math.log(2), -0.5 * k * math.log(2) + rng.normal(0.0, 0.05))
                for k in levels
            ]
            fit = fit_loglog(points)
            covered += abs(fit.slope + 0.5) <= 3 * fit.stderr
        assert covered >= 950


class TestLambdaAndG:
    """Test lambda-hat and g-hat on synthetic records."""

    def test_power_law_records(self):
        """Test exponents from exact power laws in distance and vertex count."""
        records = _crossings(
            0.3,
            LEVELS,
            4,
            distance=lambda k, r: 2.0 ** (-0.25 * k),
            vertex_count=lambda k, r: round(2.0 ** (1.31 * k)),
        )
        plan = _plan()
        lam = estimate_lambda(plan, records)[0.3]
        assert lam.target == Target.LAMBDA
        assert lam.exponent == pytest.approx(0.25, abs=1e-10)
        assert [s.k for s in lam.per_scale_summary] == LEVELS
        g = estimate_g(plan, records)[0.3]
        assert g.exponent == pytest.approx(1.31, abs=0.01)
        assert g.bound == pytest.approx(analytic.g_upper(0.3, lam.exponent))

    def test_band_flags(self):
        """Test the in-band flags for lambda and g."""
        low, high = analytic.lambda_lower(0.3), analytic.lambda_upper(0.3)
        inside = _crossings(
            0.3, LEVELS, 2, lambda k, r: 2.0 ** (-(low + high) / 2 * k), lambda k, r: 2**k
        )
        outside = _crossings(0.3, LEVELS, 2, lambda k, r: 2.0 ** (-0.9 * k), lambda k, r: 2**k)
        plan = _plan(replicates=2)
        assert estimate_lambda(plan, inside)[0.3].in_band
        assert not estimate_lambda(plan, outside)[0.3].in_band

    def test_zero_xi_deterministic(self):
        """Test that xi = 0 records give lambda ~ 0 and g ~ 1."""
        records = _crossings(
            0.0, LEVELS, 3, lambda k, r: 1.0 + 2.0**-k, lambda k, r: 2**k + 1
        )
        plan = _plan(xi_list=[0.0], replicates=3)
        assert estimate_lambda(plan, records)[0.0].exponent == pytest.approx(0.0, abs=0.02)
        g = estimate_g(plan, records)[0.0]
        assert g.exponent == pytest.approx(1.0, abs=0.05)
        assert g.in_band

    def test_quantile_ordering(self):
        """Test that a lower quantile gives a smaller per-scale summary."""
        rng = np.random.default_rng(0)
        noise = rng.lognormal(0.0, 0.3, size=(10, 20))
        records = _crossings(
            0.3,
            LEVELS,
            20,
            lambda k, r: 2.0 ** (-0.2 * k) * noise[k, r],
            lambda k, r: 2**k,
        )
        low = estimate_lambda(_plan(replicates=20, quantile=0.25), records)[0.3]
        mid = estimate_lambda(_plan(replicates=20), records)[0.3]
        for a, b in zip(low.per_scale_summary, mid.per_scale_summary):
            assert a.value <= b.value

    def test_missing_cell(self):
        """Test that a scale with too few records is reported."""
        records = _crossings(0.3, [5, 6, 7, 8], 4, lambda k, r: 1.0, lambda k, r: 40)
        with pytest.raises(MissingCellError):
            estimate_lambda(_plan(), records)

    def test_min_k_excludes_small_scales(self):
        """Test that levels below min_k do not enter the fit."""
        records = _crossings(
            0.3,
            [2, 3] + LEVELS,
            2,
            lambda k, r: 2.0 ** (-0.25 * k) if k >= 5 else 100.0,
            lambda k, r: 2**k,
        )
        plan = _plan(k_list=[2, 3] + LEVELS, replicates=2, min_k=5)
        assert estimate_lambda(plan, records)[0.3].exponent == pytest.approx(0.25, abs=1e-10)

    def test_estimate_rows(self):
        """Test flattening into estimates.csv rows."""
        records = _crossings(
            0.3, LEVELS, 2, lambda k, r: 2.0 ** (-0.1 * k), lambda k, r: 2 ** (k + 1)
        )
        plan = _plan(replicates=2)
        lambdas = estimate_lambda(plan, records)
        rows = estimate_rows(lambdas, estimate_g(plan, records))
        assert len(rows) == 1
        assert rows[0].xi == 0.3
        assert rows[0].lambda_hat == pytest.approx(0.1)
        assert rows[0].lambda_lower == analytic.lambda_lower(0.3)


class TestCensusExponent:
    """Test the census exponent fit."""

    def test_power_law_counts(self):
        """Test recovery of a growth exponent and the acceptance flag."""
        records = _census(1.0, LEVELS, 3, lambda k, r: round(2.0 ** (1.2 * k)))
        estimate = estimate_census_exponent(_plan(replicates=3), 1.0, records)
        assert estimate.exponent == pytest.approx(1.2, abs=0.01)
        assert estimate.bound == 1.5
        assert estimate.in_band
        row = census_row(estimate)
        assert row.accepted
        assert row.usable_scales == 5

    def test_vanishing_counts(self):
        """Test that all-zero counts give insufficient signal."""
        records = _census(2.5, LEVELS, 3, lambda k, r: 0)
        with pytest.raises(InsufficientSignalError):
            estimate_census_exponent(_plan(replicates=3), 2.5, records)

    def test_zero_scales_dropped(self):
        """Test that zero-count scales are dropped when enough remain."""
        records = _census(1.0, LEVELS, 3, lambda k, r: 0 if k < 7 else 2 ** (k - 5))
        estimate = estimate_census_exponent(_plan(replicates=3), 1.0, records)
        assert estimate.exponent == pytest.approx(1.0, abs=1e-10)
        assert census_row(estimate).usable_scales == 3

    def test_scales_below_min_k_not_counted(self):
        """Test that usable scales only count levels the fit used."""
        levels = [2, 3, 5, 6, 7, 8, 9]
        records = _census(1.0, levels, 3, lambda k, r: 2**k)
        plan = _plan(k_list=levels, replicates=3, min_k=5)
        estimate = estimate_census_exponent(plan, 1.0, records)
        assert estimate.fit_levels == LEVELS
        assert census_row(estimate).usable_scales == 5
        assert estimate.exponent == pytest.approx(1.0, abs=1e-10)

    def test_missing_census_cell(self):
        """Test that a missing census scale is reported."""
        records = _census(1.0, LEVELS[:-1], 3, lambda k, r: 5)
        with pytest.raises(MissingCellError):
            estimate_census_exponent(_plan(replicates=3), 1.0, records)


class TestLengthComparison:
    """Test the length comparison along geodesics."""

    def test_same_xi_margin_is_slack(self):
        """Test that xi_tilde = xi gives margin equal to the slack."""
        records = _crossings(
            0.3, LEVELS, 2, lambda k, r: 2.0 ** (-0.2 * k), lambda k, r: 2**k
        )
        report = length_comparison_check(_plan(replicates=2), 0.3, 0.3, records)
        assert report.margin == pytest.approx(0.15, abs=1e-10)
        assert report.passed
        assert length_compare_row(report).passed

    def test_zero_field_records(self):
        """Test h = 0 records, where every length is eps times the vertex count."""
        records = _crossings(
            0.5,
            LEVELS,
            2,
            lambda k, r: 1.0 + 2.0**-k,
            lambda k, r: 2**k + 1,
            multi_xi=lambda k, r: [(0.2, 1.0 + 2.0**-k)],
        )
        plan = _plan(xi_list=[0.5], replicates=2, multi_xi=[0.2])
        for xi_tilde in (0.2, 0.0):
            report = length_comparison_check(plan, 0.5, xi_tilde, records)
            assert report.passed
            assert report.bound_exponent < report.lambda_hat + 1e-12

    def test_missing_length(self):
        """Test that an unrecorded xi_tilde is reported."""
        records = _crossings(0.5, LEVELS, 2, lambda k, r: 1.0, lambda k, r: 33)
        with pytest.raises(MissingCellError):
            length_comparison_check(_plan(xi_list=[0.5], replicates=2), 0.5, 0.2, records, 0.1)

    def test_xi_tilde_above_xi(self):
        """Test that xi_tilde > xi is rejected."""
        with pytest.raises(DomainError):
            length_comparison_check(_plan(), 0.3, 0.4, [])
