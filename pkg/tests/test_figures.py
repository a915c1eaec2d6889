"""Tests for SVG figure rendering."""

import re
import tempfile
from pathlib import Path

import pytest

from lfpp.exceptions import DomainError
from lfpp.utils import analytic
from lfpp.utils.figures import (
    Curve,
    FigureSpec,
    Overlay,
    analytic_curves,
    parse_polylines,
    render_figure,
    sample_points,
    write_figure,
)


class TestFigureSpec:
    """Test figure validation."""

    def test_default_ranges(self):
        """Test the default ranges of each figure."""
        assert (FigureSpec("lambda_bounds").start, FigureSpec("lambda_bounds").stop) == (0.0, 1.0)
        spec = FigureSpec("d_bounds")
        assert spec.start == pytest.approx(2**0.5)
        assert spec.stop == 2.0

    def test_invalid(self):
        """Test rejection of unknown figures and bad ranges."""
        with pytest.raises(DomainError):
            FigureSpec("c_bounds")
        with pytest.raises(DomainError):
            FigureSpec("lambda_bounds", start=0.5, stop=0.5)
        with pytest.raises(DomainError):
            FigureSpec("d_bounds", start=1.0, stop=2.5)
        with pytest.raises(DomainError):
            FigureSpec("g_bound", start=-0.1)


class TestCurves:
    """Test the sampled analytic curves."""

    def test_sample_points_include_knot(self):
        """Test that knots inside the range are inserted."""
        points = sample_points(0.0, 1.0, 11, analytic.LAMBDA_KNOTS)
        assert len(points) == 12
        assert analytic.XI_SQRT83 in points
        assert sample_points(0.5, 1.0, 3, analytic.LAMBDA_KNOTS) == [0.5, 0.75, 1.0]

    def test_lambda_curves(self):
        """Test the curve set of the lambda figure."""
        curves, vlines = analytic_curves(FigureSpec("lambda_bounds"), samples=64)
        assert len(curves) == 4
        assert vlines == [analytic.TWO_OVER_D2_UPPER]

    def test_g_curves(self):
        """Test the curve set of the g figure."""
        curves, vlines = analytic_curves(FigureSpec("g_bound"), samples=64)
        assert [c.label for c in curves] == ["g upper bound"]
        assert len(vlines) == 1


class TestRendering:
    """Test the rendered SVG."""

    def test_lambda_figure(self):
        """Test four curves, one dashed reference line and exact sample values."""
        svg = render_figure(FigureSpec("lambda_bounds"))
        assert len(re.findall(r'<polyline class="curve"', svg)) == 4
        assert svg.count('class="reference dashed"') == 1
        assert 'class="overlay"' not in svg

        curves = parse_polylines(svg)
        lower = dict(curves["lambda lower bound"])
        upper = dict(curves["lambda upper bound"])
        for xi in (0.0, analytic.XI_SQRT83, 1.0):
            assert lower[xi] == pytest.approx(analytic.lambda_lower(xi), abs=1e-9)
            assert upper[xi] == pytest.approx(analytic.lambda_upper(xi), abs=1e-9)
        assert lower[analytic.XI_SQRT83] == pytest.approx(1 / 6, abs=1e-9)

    def test_reference_line_value(self):
        """Test the dashed line sits at the bound for 2/d_2."""
        svg = render_figure(FigureSpec("g_bound"))
        value = re.search(r'class="reference dashed"[^>]*data-value="([^"]*)"', svg).group(1)
        assert float(value) == pytest.approx(2 - 2.5**0.5, abs=1e-12)

    def test_g_bound_at_reference_line(self):
        """Test that the g curve reaches 2 sqrt10 - 5 on the dashed line and the note says so."""
        svg = render_figure(FigureSpec("g_bound"))
        assert "2 sqrt10 - 5 = 1.324555" in svg
        curve = dict(parse_polylines(svg)["g upper bound"])
        value = curve[analytic.TWO_OVER_D2_UPPER]
        assert value == pytest.approx(analytic.G_GAMMA_MAX, abs=1e-12)

    def test_single_overlay_point(self):
        """Test that a one-xi estimate file draws one overlay point."""
        spec = FigureSpec("lambda_bounds", overlays=[Overlay("lambda-hat", [0.4], [0.17], [0.02])])
        svg = render_figure(spec)
        assert svg.count('class="overlay"') == 1
        assert 'data-value="0.4,0.17,0.02"' in svg

    def test_d_bounds_note(self):
        """Test the note when no previous bounds are configured."""
        svg = render_figure(FigureSpec("d_bounds"))
        assert "previous best bounds omitted" in svg
        curves = parse_polylines(svg)
        assert set(curves) == {"d lower bound", "d upper bound", "Watabiki prediction", "DG guess"}
        assert dict(curves["d upper bound"])[2.0] == pytest.approx(4.83612, abs=1e-5)

    def test_d_bounds_previous_bounds(self):
        """Test that configured previous bounds are drawn dashed."""
        extra = [Curve("earlier bound", [1.5, 2.0], [3.0, 4.5], dashed=True)]
        svg = render_figure(FigureSpec("d_bounds", extra_curves=extra))
        assert "previous best bounds omitted" not in svg
        assert svg.count('class="curve dashed"') == 1
        assert parse_polylines(svg)["earlier bound"] == [(1.5, 3.0), (2.0, 4.5)]

    def test_write_figure(self):
        """Test writing the SVG file."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write_figure(FigureSpec("g_bound"), Path(tmpdir) / "figs" / "g.svg", samples=32)
            text = path.read_text()
            assert text.startswith("<?xml")
            assert 'data-figure="g_bound"' in text
