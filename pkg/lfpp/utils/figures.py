"""SVG figures of the analytic curves with simulation overlays.

Figures are rendered from ``templates/figure.svg.j2``. Every polyline carries its
samples in data coordinates (``data-values``) so the output can be checked
against the closed forms.
"""

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, PackageLoader, select_autoescape

from lfpp.exceptions import DomainError
from lfpp.utils import analytic
from lfpp.utils.logger import setup_logger

logger = setup_logger(__name__)

FIGURE_IDS = ("lambda_bounds", "d_bounds", "g_bound")
DEFAULT_RANGES = {
    "lambda_bounds": (0.0, 1.0),
    "d_bounds": (math.sqrt(2.0), 2.0),
    "g_bound": (0.0, 1.0),
}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
MARGIN = {"left": 64, "right": 160, "top": 40, "bottom": 48}


def get_template_engine() -> Environment:
    """Get configured Jinja2 environment."""
    return Environment(
        loader=PackageLoader("lfpp", "templates"),
        autoescape=select_autoescape(enabled_extensions=("svg.j2",)),
        trim_blocks=True,
        lstrip_blocks=True,
    )


@dataclass
class Overlay:
    """Simulation estimates drawn as points with error bars."""

    label: str
    x: List[float]
    y: List[float]
    err: List[float]


@dataclass
class Curve:
    label: str
    x: List[float]
    y: List[float]
    dashed: bool = False


@dataclass
class FigureSpec:
    """Which figure to draw, on which range, with which overlays."""

    figure_id: str
    start: Optional[float] = None
    stop: Optional[float] = None
    overlays: List[Overlay] = field(default_factory=list)
    extra_curves: List[Curve] = field(default_factory=list)

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise DomainError(f"unknown figure '{self.figure_id}', choose from {FIGURE_IDS}")
        default_start, default_stop = DEFAULT_RANGES[self.figure_id]
        if self.start is None:
            self.start = default_start
        if self.stop is None:
            self.stop = default_stop
        if not self.stop > self.start:
            raise DomainError(f"empty range [{self.start}, {self.stop}]")
        if self.figure_id == "d_bounds":
            if self.start <= 0 or self.stop > 2:
                raise DomainError("d_bounds needs a gamma range inside (0, 2]")
        elif self.start < 0:
            raise DomainError("xi ranges must be nonnegative")


def sample_points(
    start: float, stop: float, samples: int, knots: Sequence[float] = ()
) -> List[float]:
    """``samples`` evenly spaced points on [start, stop] plus the knots inside it."""
    points = set(np.linspace(start, stop, samples).tolist())
    points.update(k for k in knots if start <= k <= stop)
    return sorted(points)


def _curve(
    label: str, fn: Callable[[float], float], xs: Sequence[float], dashed: bool = False
) -> Curve:
    return Curve(label, list(xs), [fn(x) for x in xs], dashed)


def analytic_curves(spec: FigureSpec, samples: int = 512) -> Tuple[List[Curve], List[float]]:
    """Closed-form curves and vertical reference lines of a figure."""
    if spec.figure_id == "lambda_bounds":
        xs = sample_points(spec.start, spec.stop, samples, analytic.LAMBDA_KNOTS)
        curves = [
            _curve("lambda lower bound", analytic.lambda_lower, xs),
            _curve("lambda upper bound", analytic.lambda_upper, xs),
            _curve("Watabiki extension", analytic.watabiki_lambda_ext, xs),
            _curve("xi / sqrt 6", analytic.dg_guess_lambda, xs),
        ]
        return curves, [analytic.TWO_OVER_D2_UPPER]
    if spec.figure_id == "g_bound":
        knots = analytic.LAMBDA_KNOTS + (analytic.TWO_OVER_D2_UPPER,)
        xs = sample_points(spec.start, spec.stop, samples, knots)
        return [_curve("g upper bound", analytic.g_upper_curve, xs)], [analytic.TWO_OVER_D2_UPPER]

    xs = sample_points(spec.start, spec.stop, samples, analytic.GAMMA_KNOTS)
    curves = [
        _curve("d lower bound", lambda g: analytic.d_lower(g, allow_endpoint=True), xs),
        _curve("d upper bound", lambda g: analytic.d_upper(g, allow_endpoint=True), xs),
        _curve("Watabiki prediction", analytic.watabiki_d, xs),
        _curve("DG guess", analytic.dg_guess_d, xs),
    ]
    return curves, []


class _Axes:
    """Affine map from data coordinates to pixels."""

    def __init__(self, x_range, y_range, width, height):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.left = MARGIN["left"]
        self.right = width - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = height - MARGIN["bottom"]

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y: float) -> float:
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def ticks(self, lo: float, hi: float, count: int = 5) -> List[float]:
        return np.linspace(lo, hi, count + 1).tolist()


def _y_range(curves: Sequence[Curve], overlays: Sequence[Overlay]) -> Tuple[float, float]:
    values = [y for c in curves for y in c.y if math.isfinite(y)]
    for o in overlays:
        values += [y - e for y, e in zip(o.y, o.err)] + [y + e for y, e in zip(o.y, o.err)]
    lo, hi = min(values), max(values)
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    return lo - pad, hi + pad


def render_figure(
    spec: FigureSpec, samples: int = 512, width: int = 640, height: int = 480
) -> str:
    """Render a figure to SVG text."""
    curves, vlines = analytic_curves(spec, samples)
    curves += spec.extra_curves
    axes = _Axes((spec.start, spec.stop), _y_range(curves, spec.overlays), width, height)
    x_label = "gamma" if spec.figure_id == "d_bounds" else "xi"

    polylines = []
    for i, c in enumerate(curves):
        pairs = [(x, y) for x, y in zip(c.x, c.y) if math.isfinite(y)]
        polylines.append(
            {
                "label": c.label,
                "color": PALETTE[i % len(PALETTE)],
                "dashed": c.dashed,
                "points": " ".join(f"{axes.px(x):.3f},{axes.py(y):.3f}" for x, y in pairs),
                "values": " ".join(f"{x!r},{y!r}" for x, y in pairs),
            }
        )
    markers = []
    for o in spec.overlays:
        for x, y, e in zip(o.x, o.y, o.err):
            markers.append(
                {
                    "label": o.label,
                    "x": axes.px(x),
                    "y": axes.py(y),
                    "y_low": axes.py(y - e),
                    "y_high": axes.py(y + e),
                    "value": f"{x!r},{y!r},{e!r}",
                }
            )
    lines = [
        {"x": axes.px(v), "value": repr(v)} for v in vlines if spec.start <= v <= spec.stop
    ]
    notes = []
    if spec.figure_id == "d_bounds" and not any(c.dashed for c in curves):
        notes.append("previous best bounds omitted (none configured)")
    if spec.figure_id == "g_bound" and spec.start <= analytic.TWO_OVER_D2_UPPER <= spec.stop:
        notes.append(f"g bound at the dashed line: 2 sqrt10 - 5 = {analytic.G_GAMMA_MAX:.6f}")

    template = get_template_engine().get_template("figure.svg.j2")
    return template.render(
        figure_id=spec.figure_id,
        width=width,
        height=height,
        axes=axes,
        x_label=x_label,
        x_ticks=[(axes.px(t), f"{t:.3g}") for t in axes.ticks(axes.x0, axes.x1)],
        y_ticks=[(axes.py(t), f"{t:.3g}") for t in axes.ticks(axes.y0, axes.y1)],
        polylines=polylines,
        markers=markers,
        vlines=lines,
        notes=notes,
        legend_x=width - MARGIN["right"] + 12,
    )


def write_figure(spec: FigureSpec, path: Path, **kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_figure(spec, **kwargs))
    logger.info(f"Wrote figure {spec.figure_id} to {path}")
    return path


def parse_polylines(svg: str) -> dict:
    """Map each curve label to its (x, y) data samples, read from ``data-values``."""
    curves = {}
    for match in re.finditer(r'<polyline[^>]*data-label="([^"]*)"[^>]*data-values="([^"]*)"', svg):
        pairs = [p.split(",") for p in match.group(2).split()]
        curves[match.group(1)] = [(float(x), float(y)) for x, y in pairs]
    return curves
