from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load, rectangle, square
from jsgraph.analysis import (
    GraphSurface,
    boundary_curvature_verdict,
    cylinder_weighted_H,
    entropy_ratio,
    log_weighted_area,
    minimality_test,
    perturbation,
    weighted_area,
)
from jsgraph.errors import InputError, NumericError
from jsgraph.mesh import generate_mesh
from jsgraph.solver import DirichletData, ProblemKind, Solution, newton_solve


@pytest.fixture(scope="module")
def unit_mesh():
    return generate_mesh(square("CCCC"), 0.2)


@pytest.fixture(scope="module")
def reaper():
    spec = rectangle(-1.2, 1.2, 0.0, 1.0, "-log(cos(x))")
    mesh = generate_mesh(spec, 0.1)
    return newton_solve(mesh, DirichletData.build(mesh), ProblemKind.translator(1.0))


def test_flat_weighted_area(unit_mesh) -> None:
    flat = GraphSurface(unit_mesh, np.zeros(unit_mesh.n_vertices))
    assert weighted_area(flat, 1.0) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.1, 2.0))
def test_flat_shift(tau, c) -> None:
    mesh = generate_mesh(square("CCCC"), 0.5)
    flat = GraphSurface(mesh, np.full(mesh.n_vertices, tau))
    assert weighted_area(flat, c) == pytest.approx(math.exp(c * tau), rel=1e-13)


def test_small_speed_limit(reaper) -> None:
    s = GraphSurface.from_solution(reaper)
    assert weighted_area(s, 1e-8) == pytest.approx(s.area(), rel=1e-6)


def test_log_form_for_large_heights(unit_mesh) -> None:
    high = GraphSurface(unit_mesh, np.full(unit_mesh.n_vertices, 400.0))
    with pytest.raises(NumericError):
        weighted_area(high, 1.0)
    assert log_weighted_area(high, 1.0) == pytest.approx(400.0, rel=1e-14)


def test_shift_identity(reaper) -> None:
    s = GraphSurface.from_solution(reaper)
    base = weighted_area(s, 1.0)
    for tau in (-0.5, 0.3, 1.7):
        shifted = weighted_area(s.with_heights(reaper.u + tau), 1.0)
        assert abs(shifted - math.exp(tau) * base) <= 1e-12 * shifted


def test_weighted_area_converges_under_refinement() -> None:
    spec = rectangle(-1.2, 1.2, 0.0, 1.0, "-log(cos(x))")
    # extruded 1D integral of exp(u) sqrt(1 + u'^2) = sec(x)^2
    exact = 2 * math.tan(1.2)
    errs = []
    for h in (0.2, 0.1):
        mesh = generate_mesh(spec, h)
        sol = newton_solve(mesh, DirichletData.build(mesh), ProblemKind.translator(1.0))
        errs.append(abs(weighted_area(GraphSurface.from_solution(sol), 1.0) - exact))
    assert errs[1] < errs[0]


def test_perturbation_is_deterministic(unit_mesh) -> None:
    a, b = perturbation(unit_mesh, 42), perturbation(unit_mesh, 42)
    assert np.array_equal(a, b)
    assert np.abs(a).max() == pytest.approx(1.0)
    assert np.all(a[unit_mesh.boundary_nodes] == 0.0)


def test_minimality_zero_amplitude(reaper) -> None:
    rep = minimality_test(reaper, trials=3, amplitudes=(0.0,))
    assert rep.passed


def test_minimality_detects_perturbed_input(reaper) -> None:
    bumped = reaper.u + 0.05 * perturbation(reaper.mesh, 123)
    fake = Solution(reaper.mesh, bumped, reaper.kind, None, 0.0, 0, False, 0.0)
    rep = minimality_test(fake, trials=10)
    assert rep.verdict == "not a minimizer"
    assert any(f["test"] == "first-order" for f in rep.failures)
    # each failure names a seed that reproduces the field
    assert rep.failures[0]["seed"] in rep.seeds


def test_minimality_needs_speed(unit_mesh) -> None:
    sol = newton_solve(unit_mesh, DirichletData.build(unit_mesh), ProblemKind.minimal())
    with pytest.raises(InputError):
        minimality_test(sol, trials=1)


def test_straight_arc_verdict() -> None:
    v = boundary_curvature_verdict(load("one_a_square"), "left", ProblemKind.translator(1.0))
    assert v.passed and v.max_dev <= 1e-10


def test_cmc_arc_verdict() -> None:
    v = boundary_curvature_verdict(load("spruck_lens"), "upper", ProblemKind.cmc(1.0))
    assert v.expected == 1.0 and v.passed


def test_circular_arc_fails_for_translator() -> None:
    v = boundary_curvature_verdict(load("spruck_lens"), "upper", ProblemKind.translator(1.0))
    assert not v.passed
    assert v.max_dev == pytest.approx(1.0, abs=1e-4)


def test_c_arc_rejected() -> None:
    with pytest.raises(InputError):
        boundary_curvature_verdict(load("one_a_square"), "top", ProblemKind.minimal())


def test_cylinder_weighted_curvature() -> None:
    assert cylinder_weighted_H(0.0, 3.0, 2.0) == 0.0
    assert cylinder_weighted_H(1.0, 0.0, 1.0) == 1.0
    assert cylinder_weighted_H(2.0, 2.0, 1.0, m=2) == pytest.approx(2 / math.e, rel=1e-15)


def test_entropy_flat_plane() -> None:
    mesh = generate_mesh(square("CCCC", -1.0, 1.0), 0.1)
    flat = GraphSurface(mesh, np.zeros(mesh.n_vertices))
    rep = entropy_ratio(flat, [(0.0, 0.0, 0.0)], [0.3, 0.5], subdivisions=16)
    assert np.allclose(rep.ratios, math.pi, rtol=1e-2)


def test_entropy_far_center() -> None:
    mesh = generate_mesh(square("CCCC"), 0.25)
    flat = GraphSurface(mesh, np.zeros(mesh.n_vertices))
    assert entropy_ratio(flat, [(0.5, 0.5, 2.0)], [1.0]).sup == 0.0
    with pytest.raises(InputError):
        entropy_ratio(flat, [(0.5, 0.5, 0.0)], [0.0])


def test_entropy_stable_under_refinement() -> None:
    spec = rectangle(-1.2, 1.2, 0.0, 1.0, "-log(cos(x))")
    sups = []
    for h in (0.1, 0.05):
        mesh = generate_mesh(spec, h)
        sol = newton_solve(mesh, DirichletData.build(mesh), ProblemKind.translator(1.0))
        sups.append(entropy_ratio(GraphSurface.from_solution(sol), [(0.0, 0.5, 0.0)], [0.3, 0.45]).sup)
    assert math.isfinite(sups[0]) and sups[1] == pytest.approx(sups[0], rel=2e-2)
