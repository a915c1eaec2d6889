"""Closed-form bounds and predictions for the LFPP distance exponent.

Every formula here is a pure function of floats. Constants are built from
integer expressions at import time so that golden values in tests can be
compared to 1e-9 without hard-coded decimals leaking into the formulas.

Conventions:
    xi     -- LFPP parameter, xi >= 0
    lam    -- a candidate value of the distance exponent lambda(xi)
    gamma  -- LQG parameter in (0, 2]
    d      -- a candidate value of the LQG dimension d_gamma
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from lfpp.exceptions import DomainError

# Knot of both lambda bounds: lambda(1/sqrt6) = 1/6, equivalently d_{sqrt(8/3)} = 4.
XI_SQRT83 = 1.0 / math.sqrt(6.0)
GAMMA_SQRT83 = math.sqrt(8.0 / 3.0)

# Slope and offset of the linear branch through (1/sqrt6, 1/6).
LINEAR_SLOPE = math.sqrt(5.0 / 2.0) - 1.0 / math.sqrt(6.0)
LINEAR_OFFSET = (math.sqrt(15.0) - 2.0) / 6.0

# Where the linear branch of the lower bound overtakes -xi^2/2.
XI_CROSSOVER = math.sqrt(2.0) - LINEAR_SLOPE

# Upper bound for 2/d_2 (dashed reference line of the figures).
TWO_OVER_D2_UPPER = 2.0 - math.sqrt(5.0 / 2.0)

G_AT_KNOT = (4.0 + math.sqrt(15.0)) / 6.0
G_GAMMA_MAX = 2.0 * math.sqrt(10.0) - 5.0

LAMBDA_MIN = -0.5
LAMBDA_MAX = 1.0
LIPSCHITZ_CONSTANT = 2.0


def _check_xi(xi: float) -> None:
    if not math.isfinite(xi) or xi < 0:
        raise DomainError(f"xi must be a finite nonnegative number, got {xi}")


def _check_gamma(gamma: float, allow_endpoint: bool = True) -> None:
    upper_ok = gamma <= 2.0 if allow_endpoint else gamma < 2.0
    if not math.isfinite(gamma) or gamma <= 0 or not upper_ok:
        interval = "(0, 2]" if allow_endpoint else "(0, 2)"
        raise DomainError(f"gamma must lie in {interval}, got {gamma}")


def _check_dimension(d: float) -> None:
    if not math.isfinite(d) or d <= 0:
        raise DomainError(f"d must be positive, got {d}")


# ---------------------------------------------------------------------------
# Bounds for lambda(xi)
# ---------------------------------------------------------------------------


def _linear_branch(xi: float) -> float:
    return LINEAR_SLOPE * xi - LINEAR_OFFSET


def lambda_lower(xi: float, nonneg: bool = False) -> float:
    """Lower bound for lambda(xi).

    For xi <= 1/sqrt6 this is max{linear branch, -xi^2/2}; beyond the knot it is
    max{1/4 - xi^2/2, -1/2}. Both pieces take the value 1/6 at the knot.

    Args:
        xi: LFPP parameter, xi >= 0
        nonneg: Also apply lambda >= 0, which holds for the annulus-crossing
            variant of the exponent

    Returns:
        The lower bound

    Raises:
        DomainError: If xi is negative or not finite
    """
    _check_xi(xi)
    if xi <= XI_SQRT83:
        value = max(_linear_branch(xi), -xi * xi / 2.0)
    else:
        value = max(0.25 - xi * xi / 2.0, LAMBDA_MIN)
    return max(value, 0.0) if nonneg else value


def lambda_upper(xi: float) -> float:
    """Upper bound for lambda(xi).

    For xi <= 1/sqrt6 this is min{1/4 - xi^2/2, sqrt2 xi}; beyond the knot it is
    the linear branch clamped at 1.
    """
    _check_xi(xi)
    if xi <= XI_SQRT83:
        return min(0.25 - xi * xi / 2.0, math.sqrt(2.0) * xi)
    return min(_linear_branch(xi), LAMBDA_MAX)


def lambda_lower_branch(xi: float) -> str:
    """Name of the closed form that is active in :func:`lambda_lower` at xi."""
    _check_xi(xi)
    if xi <= XI_SQRT83:
        return "linear" if _linear_branch(xi) >= -xi * xi / 2.0 else "parabola"
    return "quarter" if 0.25 - xi * xi / 2.0 >= LAMBDA_MIN else "floor"


def lambda_upper_branch(xi: float) -> str:
    """Name of the closed form that is active in :func:`lambda_upper` at xi."""
    _check_xi(xi)
    if xi <= XI_SQRT83:
        return "quarter" if 0.25 - xi * xi / 2.0 <= math.sqrt(2.0) * xi else "root2"
    return "linear" if _linear_branch(xi) <= LAMBDA_MAX else "ceiling"


def watabiki_lambda_ext(xi: float) -> float:
    """Extended Watabiki prediction min{xi^2, 1}."""
    _check_xi(xi)
    return min(xi * xi, 1.0)


def dg_guess_lambda(xi: float) -> float:
    """Alternative guess min{xi/sqrt6, 1}."""
    _check_xi(xi)
    return min(xi / math.sqrt(6.0), 1.0)


# ---------------------------------------------------------------------------
# Bounds and predictions for d_gamma
# ---------------------------------------------------------------------------


def watabiki_d(gamma: float) -> float:
    """Watabiki's prediction 1 + gamma^2/4 + (1/4) sqrt((4+gamma^2)^2 + 16 gamma^2)."""
    _check_gamma(gamma)
    g2 = gamma * gamma
    return 1.0 + g2 / 4.0 + 0.25 * math.sqrt((4.0 + g2) ** 2 + 16.0 * g2)


def dg_guess_d(gamma: float) -> float:
    """Alternative guess 2 + gamma^2/2 + gamma/sqrt6."""
    _check_gamma(gamma)
    return 2.0 + gamma * gamma / 2.0 + gamma / math.sqrt(6.0)


def _d_linear(gamma: float) -> float:
    # dual of the linear lambda branch
    return (
        12.0 - math.sqrt(6.0) * gamma + 3.0 * math.sqrt(10.0) * gamma + 3.0 * gamma * gamma
    ) / (4.0 + math.sqrt(15.0))


def _d_quarter(gamma: float) -> float:
    # dual of 1/4 - xi^2/2
    g2 = gamma * gamma
    return (4.0 + g2 + math.sqrt(16.0 + 2.0 * g2 + g2 * g2)) / 3.0


def _d_parabola(gamma: float) -> float:
    # dual of -xi^2/2: 2g^2 / (4 + g^2 - sqrt(16 + g^4)) in conjugate form
    g2 = gamma * gamma
    return (4.0 + g2 + math.sqrt(16.0 + g2 * g2)) / 4.0


def _d_root2(gamma: float) -> float:
    # dual of sqrt2 xi
    return 2.0 + gamma * gamma / 2.0 + math.sqrt(2.0) * gamma


def d_lower(gamma: float, nonneg: bool = False, allow_endpoint: bool = False) -> float:
    """Lower bound for d_gamma on (0, 2).

    Args:
        gamma: LQG parameter
        nonneg: Also apply d_gamma >= 2 + gamma^2/2 (dual of lambda >= 0)
        allow_endpoint: Evaluate at gamma = 2 as the one-sided limit

    Raises:
        DomainError: If gamma is outside (0, 2) (or (0, 2] with allow_endpoint)
    """
    _check_gamma(gamma, allow_endpoint)
    if gamma <= GAMMA_SQRT83:
        value = max(_d_linear(gamma), _d_parabola(gamma))
    else:
        value = _d_quarter(gamma)
    if nonneg:
        value = max(value, 2.0 + gamma * gamma / 2.0)
    return value


def d_upper(gamma: float, allow_endpoint: bool = False) -> float:
    """Upper bound for d_gamma on (0, 2); see :func:`d_lower` for the arguments."""
    _check_gamma(gamma, allow_endpoint)
    if gamma <= GAMMA_SQRT83:
        return min(_d_quarter(gamma), _d_root2(gamma))
    return _d_linear(gamma)


def lambda_from_gamma(gamma: float, d: float) -> float:
    """Exponent 1 - (gamma/d) Q with Q = 2/gamma + gamma/2, valid at xi = gamma/d."""
    _check_gamma(gamma)
    _check_dimension(d)
    q = 2.0 / gamma + gamma / 2.0
    return 1.0 - (gamma / d) * q


# ---------------------------------------------------------------------------
# Length comparison, geodesic dimension, background and central charge
# ---------------------------------------------------------------------------


def alpha_star(xi: float, lam: float) -> float:
    """Threshold sqrt(2 + 2 lam + xi^2) - xi balancing the two path-split terms.

    Raises:
        DomainError: If the radicand is negative
    """
    _check_xi(xi)
    radicand = 2.0 + 2.0 * lam + xi * xi
    if not math.isfinite(radicand) or radicand < 0:
        raise DomainError(f"2 + 2*lam + xi^2 must be nonnegative, got {radicand}")
    return math.sqrt(radicand) - xi


def length_compare_exponent(xi: float, xi_tilde: float, lam: float) -> float:
    """Exponent lam - (xi - xi_tilde) * alpha_star(xi, lam) bounding L^{xi_tilde}."""
    _check_xi(xi_tilde)
    if xi_tilde > xi:
        raise DomainError(f"xi_tilde ({xi_tilde}) must not exceed xi ({xi})")
    return lam - (xi - xi_tilde) * alpha_star(xi, lam)


def g_upper(xi: float, lam: float) -> float:
    """Geodesic dimension bound 1 - lam + xi * alpha_star(xi, lam)."""
    return 1.0 - lam + xi * alpha_star(xi, lam)


def g_upper_curve(xi: float) -> float:
    """The g bound with the lower bound for lambda plugged in."""
    return g_upper(xi, lambda_lower(xi))


def geodesic_gamma_bound(gamma: float, d: float) -> float:
    """Euclidean dimension bound for gamma-LQG geodesics given a dimension d.

    Equals g_upper(gamma/d, lambda_from_gamma(gamma, d)), i.e.
    (gamma/d) * (Q - gamma/d + sqrt(2 + 2 lam + gamma^2/d^2)) with lam = 1 - gamma Q / d.
    """
    _check_gamma(gamma)
    _check_dimension(d)
    return g_upper(gamma / d, lambda_from_gamma(gamma, d))


def q_of(xi: float, lam: float) -> float:
    """Background charge Q(xi) = (1 - lam) / xi.

    Raises:
        DomainError: If xi is not strictly positive
    """
    if not math.isfinite(xi) or xi <= 0:
        raise DomainError(f"Q diverges at xi = {xi}; xi must be positive")
    return (1.0 - lam) / xi


def c_of(xi: float, lam: float) -> float:
    """Central charge 25 - 6 Q(xi)^2."""
    q = q_of(xi, lam)
    return 25.0 - 6.0 * q * q


def contradiction_interval() -> Tuple[float, float]:
    """Open interval of xi on which the extended Watabiki prediction fails."""
    left = math.sqrt(5.0 / 2.0) - math.sqrt(2.0 / 3.0)
    right = (4.0 + math.sqrt(15.0)) / (
        math.sqrt(2.0) * (3.0 * math.sqrt(5.0) - math.sqrt(3.0))
    )
    return left, right


def q_mono_threshold() -> float:
    """Threshold below which Q(xi) is strictly decreasing."""
    return math.sqrt(2.0 - math.sqrt(113.0 - 8.0 * math.sqrt(15.0)) / 6.0)


# ---------------------------------------------------------------------------
# Numeric checks of the differential inequalities
# ---------------------------------------------------------------------------


@dataclass
class Violations:
    """Pairs (xi_tilde, xi) at which one inequality fails, with positive margins."""

    kind: str
    xi_tilde: np.ndarray
    xi: np.ndarray
    margin: np.ndarray

    def __len__(self) -> int:
        return int(self.margin.size)


@dataclass
class DifferentialReport:
    """Outcome of :func:`check_differential_inequalities`."""

    grid_size: int
    secant: Violations
    monotone: Violations
    lipschitz: Violations
    out_of_range: Violations

    @property
    def total(self) -> int:
        return len(self.secant) + len(self.monotone) + len(self.lipschitz) + len(
            self.out_of_range
        )

    @property
    def ok(self) -> bool:
        return self.total == 0

    def summary(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "secant": len(self.secant),
            "monotone": len(self.monotone),
            "lipschitz": len(self.lipschitz),
            "out_of_range": len(self.out_of_range),
        }


def _pair_violations(kind: str, xs: np.ndarray, margin: np.ndarray, tol: float) -> Violations:
    rows, cols = np.nonzero(np.triu(margin > tol, k=1))
    return Violations(kind, xs[rows], xs[cols], margin[rows, cols])


def check_differential_inequalities(
    lam_fn: Callable[[float], float],
    xi_grid: Sequence[float],
    tol: float = 1e-9,
) -> DifferentialReport:
    """Evaluate the secant and monotonicity inequalities on every grid pair.

    For each pair xi_tilde < xi of the grid this checks

        (lam(xi) - lam(xi_tilde)) / (xi - xi_tilde) <= sqrt(2 + 2 lam(xi) + xi^2) - xi
        lam(xi_tilde) + xi_tilde^2 / 2 <= lam(xi) + xi^2 / 2
        |lam(xi) - lam(xi_tilde)| <= 2 (xi - xi_tilde)

    and that every value lies in [-1/2, 1]. Margins are left side minus right side.

    Args:
        lam_fn: Candidate lambda function
        xi_grid: Strictly increasing nonnegative grid
        tol: Margins at or below tol count as satisfied

    Raises:
        DomainError: If the grid is not sorted or has negative entries
    """
    xs = np.asarray(xi_grid, dtype=float)
    if xs.ndim != 1:
        raise DomainError("xi_grid must be one-dimensional")
    if xs.size and (xs[0] < 0 or np.any(np.diff(xs) <= 0)):
        raise DomainError("xi_grid must be strictly increasing and nonnegative")

    lam = np.array([lam_fn(float(x)) for x in xs])
    # column index is xi, row index is xi_tilde
    gap = xs[None, :] - xs[:, None]
    rise = lam[None, :] - lam[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(gap > 0, rise / np.where(gap > 0, gap, 1.0), 0.0)
    radicand = np.maximum(2.0 + 2.0 * lam + xs * xs, 0.0)
    alpha = np.sqrt(radicand) - xs

    secant = _pair_violations("secant", xs, slope - alpha[None, :], tol)
    shifted = lam + xs * xs / 2.0
    monotone = _pair_violations("monotone", xs, shifted[:, None] - shifted[None, :], tol)
    lipschitz = _pair_violations(
        "lipschitz", xs, np.abs(rise) - LIPSCHITZ_CONSTANT * gap, tol
    )

    excess = np.maximum(LAMBDA_MIN - lam, lam - LAMBDA_MAX)
    bad = excess > tol
    out_of_range = Violations("range", xs[bad], xs[bad], excess[bad])

    return DifferentialReport(int(xs.size), secant, monotone, lipschitz, out_of_range)


# ---------------------------------------------------------------------------
# Tabulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsRow:
    """All closed-form quantities at one xi."""

    xi: float
    lambda_lower: float
    lambda_upper: float
    lambda_watabiki_ext: float
    lambda_dg_guess: float
    alpha_star_at_lower: float
    g_upper_at_lower: float
    q_at_lower: float
    q_at_upper: float
    c_at_lower: float
    c_at_upper: float


@dataclass(frozen=True)
class GammaRow:
    """All closed-form quantities at one gamma."""

    gamma: float
    d_lower: float
    d_upper: float
    d_watabiki: float
    d_dg_guess: float
    xi_of_gamma_lower: float
    xi_of_gamma_upper: float
    geodesic_dim_bound: float


def bounds_row(xi: float, nonneg: bool = False) -> BoundsRow:
    """Tabulate every xi-indexed quantity; Q and c are NaN at xi = 0."""
    low = lambda_lower(xi, nonneg=nonneg)
    high = lambda_upper(xi)
    if xi > 0:
        q_low, q_high = q_of(xi, low), q_of(xi, high)
        c_low, c_high = c_of(xi, low), c_of(xi, high)
    else:
        q_low = q_high = c_low = c_high = math.nan
    return BoundsRow(
        xi=xi,
        lambda_lower=low,
        lambda_upper=high,
        lambda_watabiki_ext=watabiki_lambda_ext(xi),
        lambda_dg_guess=dg_guess_lambda(xi),
        alpha_star_at_lower=alpha_star(xi, low),
        g_upper_at_lower=g_upper(xi, low),
        q_at_lower=q_low,
        q_at_upper=q_high,
        c_at_lower=c_low,
        c_at_upper=c_high,
    )


def gamma_row(gamma: float, nonneg: bool = False, allow_endpoint: bool = False) -> GammaRow:
    """Tabulate every gamma-indexed quantity.

    The geodesic bound uses d_lower: the bound decreases as lambda = 1 - gamma Q / d
    grows, so the smallest admissible d gives the bound valid for every d_gamma.
    """
    low = d_lower(gamma, nonneg=nonneg, allow_endpoint=allow_endpoint)
    high = d_upper(gamma, allow_endpoint=allow_endpoint)
    return GammaRow(
        gamma=gamma,
        d_lower=low,
        d_upper=high,
        d_watabiki=watabiki_d(gamma),
        d_dg_guess=dg_guess_d(gamma),
        xi_of_gamma_lower=gamma / high,
        xi_of_gamma_upper=gamma / low,
        geodesic_dim_bound=geodesic_gamma_bound(gamma, low),
    )


def parameter_grid(
    start: float,
    stop: float,
    step: float,
    knots: Optional[Sequence[float]] = None,
) -> List[float]:
    """Points start, start + step, ... <= stop, plus any knots inside [start, stop].

    An empty list is returned when stop < start.
    """
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    if stop < start:
        return []
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    points = [start + i * step for i in range(count)]
    for knot in knots or ():
        if start <= knot <= stop:
            points.append(knot)
    points.sort()
    deduped: List[float] = []
    for p in points:
        if deduped and abs(p - deduped[-1]) <= 1e-12 * max(1.0, abs(p)):
            # prefer the exact knot over an accumulated grid point
            if knots and p in knots:
                deduped[-1] = p
            continue
        deduped.append(p)
    return deduped


LAMBDA_KNOTS = (XI_SQRT83,)
GAMMA_KNOTS = (GAMMA_SQRT83,)


def lambda_table(
    start: float, stop: float, step: float, insert_knots: bool = False, nonneg: bool = False
) -> List[BoundsRow]:
    """Rows of :func:`bounds_row` over a xi grid."""
    grid = parameter_grid(start, stop, step, LAMBDA_KNOTS if insert_knots else None)
    return [bounds_row(x, nonneg=nonneg) for x in grid]


def gamma_table(
    start: float,
    stop: float,
    step: float,
    insert_knots: bool = False,
    nonneg: bool = False,
    allow_endpoint: bool = False,
) -> List[GammaRow]:
    """Rows of :func:`gamma_row` over a gamma grid."""
    grid = parameter_grid(start, stop, step, GAMMA_KNOTS if insert_knots else None)
    return [gamma_row(g, nonneg=nonneg, allow_endpoint=allow_endpoint) for g in grid]
