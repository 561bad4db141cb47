from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jsgraph.errors import DegenerateInputError, MetricDomainError
from jsgraph.metric import (
    EUCLIDEAN,
    ConformalMetric,
    geodesic_curvature,
    geodesic_curvatures,
    metric_area,
    metric_length,
)

POINCARE = ConformalMetric.poincare_disk(1.0)


def disk_triangles(r, n=256, rings=64):
    """Polar triangulation of the disk of radius ``r``."""
    tris = []
    t = np.linspace(0, 2 * np.pi, n + 1)
    rad = np.linspace(0, r, rings + 1)
    for i in range(rings):
        for k in range(n):
            a0, a1 = t[k], t[k + 1]
            p = lambda rr, aa: (rr * math.cos(aa), rr * math.sin(aa))
            if i == 0:
                tris.append([(0.0, 0.0), p(rad[1], a0), p(rad[1], a1)])
            else:
                tris.append([p(rad[i], a0), p(rad[i + 1], a0), p(rad[i + 1], a1)])
                tris.append([p(rad[i], a0), p(rad[i + 1], a1), p(rad[i], a1)])
    return np.array(tris)


def test_unit_segment_length() -> None:
    assert metric_length([(0, 0), (1, 0)]) == pytest.approx(1.0, abs=1e-15)


def test_poincare_radial_length() -> None:
    curve = np.column_stack([np.linspace(0, 0.5, 65), np.zeros(65)])
    assert metric_length(curve, POINCARE) == pytest.approx(2 * math.atanh(0.5), rel=1e-8)
    assert 2 * math.atanh(0.5) == pytest.approx(1.0986122886681098, rel=1e-15)


def test_closed_square_perimeter() -> None:
    sq = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]
    assert metric_length(sq) == pytest.approx(4.0, abs=1e-15)


def test_unit_square_area() -> None:
    tris = [[(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 1), (0, 1)]]
    assert metric_area(tris) == pytest.approx(1.0, abs=1e-15)


def test_poincare_disk_area() -> None:
    tris = disk_triangles(0.5)
    assert metric_area(tris, POINCARE, rule="midpoint") == pytest.approx(4 * math.pi / 3, rel=1e-3)


def test_empty_region_area() -> None:
    assert metric_area(np.zeros((0, 3, 2))) == 0.0


def test_degenerate_triangle_rejected() -> None:
    with pytest.raises(DegenerateInputError):
        metric_area([[(0, 0), (1, 0), (2, 0)]])


def test_point_outside_poincare_disk() -> None:
    with pytest.raises(MetricDomainError):
        metric_length([(0, 0), (1.5, 0)], POINCARE)


def test_circle_curvature() -> None:
    R = 2.0
    t = np.linspace(0, 2 * np.pi, 2001)
    circle = np.column_stack([R * np.cos(t), R * np.sin(t)])
    kappa = geodesic_curvatures(circle, EUCLIDEAN, side="left")
    assert np.abs(kappa - 1 / R).max() < 1e-5


def test_straight_line_curvature_zero() -> None:
    line = np.column_stack([np.linspace(0, 1, 11), np.linspace(0, 2, 11)])
    assert np.abs(geodesic_curvatures(line)).max() < 1e-12


def test_poincare_diameter_is_geodesic() -> None:
    chord = np.column_stack([np.linspace(-0.8, 0.8, 101), np.zeros(101)])
    assert abs(geodesic_curvature(chord, POINCARE, index=50)) < 1e-10


def test_coincident_points_rejected() -> None:
    with pytest.raises(DegenerateInputError):
        geodesic_curvatures([(0, 0), (0, 0), (1, 0)])


def test_metric_json_round_trip() -> None:
    for m in (EUCLIDEAN, POINCARE, ConformalMetric.custom("exp(x)")):
        again = ConformalMetric.from_json(m.to_json())
        pts = np.array([[0.1, 0.2], [-0.3, 0.4]])
        assert np.array_equal(again.lam(pts), m.lam(pts))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 4))
def test_euclidean_length_scales(x0, y0, x1, y1, s) -> None:
    seg = np.array([(x0, y0), (x1, y1)])
    assert metric_length(s * seg) == pytest.approx(s * metric_length(seg), rel=1e-12, abs=1e-12)
