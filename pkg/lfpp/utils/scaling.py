"""Exponent estimation from per-scale Monte-Carlo records.

Each observable is summarised per scale by a quantile (median by default) and the
summaries are regressed on log(1/eps) = k log 2. Distances decay like eps^lambda,
so lambda is the negated slope; vertex counts and census counts grow like
eps^-exponent, so their exponent is the slope itself.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator
from scipy import stats

from lfpp.exceptions import DomainError, InsufficientSignalError, MissingCellError
from lfpp.utils import analytic
from lfpp.utils.logger import setup_logger
from lfpp.utils.records import CensusRecord, CrossingRecord

logger = setup_logger(__name__)

LOG2 = math.log(2.0)


class Target(str, Enum):
    LAMBDA = "lambda"
    G = "g"
    CENSUS = "census"
    LENGTH = "length"

    @property
    def decays(self) -> bool:
        """True when the observable behaves like eps^+exponent."""
        return self in (Target.LAMBDA, Target.LENGTH)


class ExperimentPlan(BaseModel):
    """What was (or will be) simulated, and how it is summarised."""

    xi_list: List[float] = Field(min_length=1)
    k_list: List[int] = Field(min_length=1)
    replicates: int = Field(ge=1)
    sampler_kind: str = "fourier"
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    quantile: float = Field(default=0.5, gt=0.0, lt=1.0)
    slack: float = Field(default=0.15, ge=0.0)
    census_slack: float = Field(default=0.3, ge=0.0)
    min_k: int = Field(default=4, ge=0)
    multi_xi: List[float] = []
    census_alpha: List[float] = []

    @field_validator("xi_list", "multi_xi")
    @classmethod
    def _nonnegative(cls, values: List[float]) -> List[float]:
        if any(not math.isfinite(x) or x < 0 for x in values):
            raise ValueError("xi values must be finite and nonnegative")
        return values

    @field_validator("census_alpha")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(not math.isfinite(a) or a <= 0 for a in values):
            raise ValueError("census alphas must be positive")
        return values

    @field_validator("k_list")
    @classmethod
    def _increasing(cls, values: List[int]) -> List[int]:
        if any(k < 0 for k in values) or any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("k_list must be nonnegative and strictly increasing")
        return values

    @property
    def fit_levels(self) -> List[int]:
        return [k for k in self.k_list if k >= self.min_k]


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float


@dataclass(frozen=True)
class ScaleSummary:
    k: int
    value: float
    count: int


@dataclass
class ScalingEstimate:
    """Fitted exponent with its regression diagnostics."""

    target: Target
    exponent: float
    stderr: float
    r_squared: float
    intercept: float
    per_scale_summary: List[ScaleSummary] = field(default_factory=list)
    xi: Optional[float] = None
    alpha: Optional[float] = None
    bound: Optional[float] = None
    in_band: Optional[bool] = None
    fit_levels: List[int] = field(default_factory=list)


@dataclass
class LengthCompareReport:
    """Fitted decay exponent of L^{xi_tilde} along xi-geodesics against its bound."""

    xi: float
    xi_tilde: float
    lambda_hat: float
    fitted_exponent: float
    bound_exponent: float
    slack: float
    margin: float
    passed: bool
    estimate: ScalingEstimate


@dataclass(frozen=True)
class EstimateRow:
    """One line of estimates.csv."""

    xi: float
    lambda_hat: float
    lambda_stderr: float
    lambda_r_squared: float
    g_hat: float
    g_stderr: float
    g_r_squared: float
    lambda_lower: float
    lambda_upper: float
    g_bound: float
    lambda_in_band: bool
    g_in_band: bool


@dataclass(frozen=True)
class CensusEstimateRow:
    alpha: float
    exponent: float
    stderr: float
    r_squared: float
    bound: float
    accepted: bool
    usable_scales: int


@dataclass(frozen=True)
class LengthCompareRow:
    xi: float
    xi_tilde: float
    lambda_hat: float
    fitted_exponent: float
    bound_exponent: float
    margin: float
    passed: bool


def fit_loglog(points: Sequence[Tuple[float, float]]) -> LogLogFit:
    """Ordinary least squares of log(observable) on log(1/eps).

    Raises:
        InsufficientSignalError: With fewer than 3 points
        DomainError: If the abscissae are not distinct or a value is not finite
    """
    if len(points) < 3:
        raise InsufficientSignalError(f"need at least 3 scales to fit, got {len(points)}")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("log-log points must be finite")
    if np.unique(x).size != x.size:
        raise DomainError("log-log abscissae must be distinct")
    fit = stats.linregress(x, y)
    r_squared = min(1.0, max(0.0, float(fit.rvalue) ** 2))
    return LogLogFit(float(fit.slope), float(fit.intercept), float(fit.stderr), r_squared)


def _estimate(
    target: Target, summary: List[ScaleSummary], fit_levels: Sequence[int]
) -> ScalingEstimate:
    used = [s for s in summary if s.k in fit_levels]
    fit = fit_loglog([(s.k * LOG2, math.log(s.value)) for s in used])
    exponent = -fit.slope if target.decays else fit.slope
    return ScalingEstimate(
        target,
        exponent,
        fit.stderr,
        fit.r_squared,
        fit.intercept,
        summary,
        fit_levels=[s.k for s in used],
    )


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=1e-12)


def _cell(
    plan: ExperimentPlan, records: Sequence[CrossingRecord], xi: float, k: int
) -> List[CrossingRecord]:
    cell = [r for r in records if r.k == k and _same(r.xi, xi) and r.direction == "horizontal"]
    if len(cell) < plan.replicates:
        raise MissingCellError(
            f"cell (xi={xi}, k={k}) has {len(cell)} records, plan needs {plan.replicates}"
        )
    return cell


def _summaries(
    plan: ExperimentPlan,
    records: Sequence[CrossingRecord],
    xi: float,
    observable,
) -> List[ScaleSummary]:
    summary = []
    for k in plan.k_list:
        values = [observable(r) for r in _cell(plan, records, xi, k)]
        summary.append(ScaleSummary(k, float(np.quantile(values, plan.quantile)), len(values)))
    return summary


def estimate_lambda(
    plan: ExperimentPlan, records: Sequence[CrossingRecord]
) -> Dict[float, ScalingEstimate]:
    """lambda-hat per xi from the per-scale quantile of crossing distances."""
    estimates = {}
    for xi in plan.xi_list:
        summary = _summaries(plan, records, xi, lambda r: r.distance)
        estimate = _estimate(Target.LAMBDA, summary, plan.fit_levels)
        estimate.xi = xi
        low, high = analytic.lambda_lower(xi), analytic.lambda_upper(xi)
        estimate.in_band = low - plan.slack <= estimate.exponent <= high + plan.slack
        logger.debug(f"lambda_hat({xi}) = {estimate.exponent:.4f} +/- {estimate.stderr:.4f}")
        estimates[xi] = estimate
    return estimates


def estimate_g(
    plan: ExperimentPlan,
    records: Sequence[CrossingRecord],
    lambda_hats: Optional[Dict[float, float]] = None,
) -> Dict[float, ScalingEstimate]:
    """g-hat per xi from the per-scale quantile of geodesic vertex counts.

    The band check compares g-hat with g_upper(xi, lambda_hat) + slack; lambda_hat
    is estimated from the same records unless supplied.
    """
    if lambda_hats is None:
        lambda_hats = {xi: e.exponent for xi, e in estimate_lambda(plan, records).items()}
    estimates = {}
    for xi in plan.xi_list:
        summary = _summaries(plan, records, xi, lambda r: float(r.vertex_count))
        estimate = _estimate(Target.G, summary, plan.fit_levels)
        estimate.xi = xi
        estimate.bound = analytic.g_upper(xi, lambda_hats[xi])
        estimate.in_band = estimate.exponent <= estimate.bound + plan.slack
        estimates[xi] = estimate
    return estimates


def estimate_census_exponent(
    plan: ExperimentPlan, alpha: float, records: Sequence[CensusRecord]
) -> ScalingEstimate:
    """Fitted growth exponent of the census count at threshold alpha.

    Scales whose quantile count is 0 are dropped with a warning.

    Raises:
        MissingCellError: If a scale has fewer records than the plan requires
        InsufficientSignalError: If fewer than 3 usable scales remain
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    summary = []
    for k in plan.k_list:
        counts = [r.count for r in records if r.k == k and _same(r.alpha, alpha)]
        if len(counts) < plan.replicates:
            raise MissingCellError(
                f"census cell (alpha={alpha}, k={k}) has {len(counts)} records, "
                f"plan needs {plan.replicates}"
            )
        summary.append(ScaleSummary(k, float(np.quantile(counts, plan.quantile)), len(counts)))

    usable = [s.k for s in summary if s.value > 0 and s.k in plan.fit_levels]
    dropped = [s.k for s in summary if s.value <= 0]
    if dropped:
        logger.warning(f"Census alpha={alpha}: dropped scales {dropped} with zero counts")
    if len(usable) < 3:
        raise InsufficientSignalError(
            f"census alpha={alpha}: only {len(usable)} usable scales (counts vanish)"
        )
    estimate = _estimate(Target.CENSUS, summary, usable)
    estimate.alpha = alpha
    estimate.bound = 2.0 - alpha**2 / 2.0
    estimate.in_band = estimate.exponent <= estimate.bound + plan.census_slack
    return estimate


def length_comparison_check(
    plan: ExperimentPlan,
    xi: float,
    xi_tilde: float,
    records: Sequence[CrossingRecord],
    lambda_hat: Optional[float] = None,
) -> LengthCompareReport:
    """Compare the decay exponent of L^{xi_tilde} along xi-geodesics with its bound.

    The length comparison bound says L^{xi_tilde} <= eps^{bound - slack}, so the
    check passes when ``fitted >= bound - slack``; ``margin`` is the difference.
    """
    if not 0 <= xi_tilde <= xi:
        raise DomainError(f"need 0 <= xi_tilde <= xi, got xi_tilde={xi_tilde}, xi={xi}")
    if lambda_hat is None:
        sub = plan.model_copy(update={"xi_list": [xi]})
        lambda_hat = estimate_lambda(sub, records)[xi].exponent

    def length(record: CrossingRecord) -> float:
        value = record.length_at(xi_tilde)
        if value is None:
            raise MissingCellError(
                f"record (xi={record.xi}, k={record.k}) has no length at xi_tilde={xi_tilde}"
            )
        return value

    summary = _summaries(plan, records, xi, length)
    estimate = _estimate(Target.LENGTH, summary, plan.fit_levels)
    estimate.xi = xi
    bound = analytic.length_compare_exponent(xi, xi_tilde, lambda_hat)
    margin = estimate.exponent - (bound - plan.slack)
    estimate.bound = bound
    estimate.in_band = margin >= 0
    return LengthCompareReport(
        xi=xi,
        xi_tilde=xi_tilde,
        lambda_hat=lambda_hat,
        fitted_exponent=estimate.exponent,
        bound_exponent=bound,
        slack=plan.slack,
        margin=margin,
        passed=margin >= 0,
        estimate=estimate,
    )


def estimate_rows(
    lambda_estimates: Dict[float, ScalingEstimate], g_estimates: Dict[float, ScalingEstimate]
) -> List[EstimateRow]:
    """Flatten per-xi estimates into estimates.csv rows."""
    rows = []
    for xi, lam in lambda_estimates.items():
        g = g_estimates[xi]
        rows.append(
            EstimateRow(
                xi=xi,
                lambda_hat=lam.exponent,
                lambda_stderr=lam.stderr,
                lambda_r_squared=lam.r_squared,
                g_hat=g.exponent,
                g_stderr=g.stderr,
                g_r_squared=g.r_squared,
                lambda_lower=analytic.lambda_lower(xi),
                lambda_upper=analytic.lambda_upper(xi),
                g_bound=g.bound,
                lambda_in_band=bool(lam.in_band),
                g_in_band=bool(g.in_band),
            )
        )
    return rows


def census_row(estimate: ScalingEstimate) -> CensusEstimateRow:
    return CensusEstimateRow(
        alpha=estimate.alpha,
        exponent=estimate.exponent,
        stderr=estimate.stderr,
        r_squared=estimate.r_squared,
        bound=estimate.bound,
        accepted=bool(estimate.in_band),
        usable_scales=len(estimate.fit_levels),
    )


def length_compare_row(report: LengthCompareReport) -> LengthCompareRow:
    return LengthCompareRow(
        xi=report.xi,
        xi_tilde=report.xi_tilde,
        lambda_hat=report.lambda_hat,
        fitted_exponent=report.fitted_exponent,
        bound_exponent=report.bound_exponent,
        margin=report.margin,
        passed=report.passed,
    )
