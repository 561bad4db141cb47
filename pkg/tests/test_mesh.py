from __future__ import annotations

import numpy as np
import pytest

from conftest import disk, load, square
from jsgraph.errors import MeshError
from jsgraph.mesh import TriMesh, generate_mesh, read_jsmesh, refine, write_jsmesh


def test_unit_square_cover() -> None:
    mesh = generate_mesh(square("CCCC"), 0.25)
    areas = mesh.areas()
    assert np.all(areas > 0)
    assert areas.max() <= 0.25**2
    assert abs(areas.sum() - 1.0) <= 1e-12


def test_graded_boundary_edges() -> None:
    spec = load("scherk_square")
    mesh = generate_mesh(spec, 0.1, grading=4.0)
    lengths = mesh.edge_lengths(mesh.boundary_edges)
    kinds = np.array([spec.arcs[k].kind for k in mesh.boundary_edges[:, 2]])
    assert np.all(lengths[np.isin(kinds, ["A", "B"])] <= 0.025 * 1.5)


def test_h_larger_than_domain() -> None:
    with pytest.raises(MeshError):
        generate_mesh(square("CCCC"), 5.0)


def test_min_angle() -> None:
    for spec, h, g in ((square("ACCC"), 0.05, 8.0), (load("spruck_lens"), 0.1, 1.0), (load("l_hexagon"), 0.1, 2.0)):
        assert generate_mesh(spec, h, g).min_angles().min() >= 20.0


def test_generation_is_deterministic() -> None:
    a = generate_mesh(load("pentagon"), 0.1, 2.0)
    b = generate_mesh(load("pentagon"), 0.1, 2.0)
    assert write_jsmesh(a) == write_jsmesh(b)


def test_refine_two_triangle_square() -> None:
    spec = square("CCCC")
    mesh = TriMesh(
        np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]),
        np.array([(0, 1, 2), (0, 2, 3)]),
        np.array([(0, 1, 0), (1, 2, 1), (2, 3, 2), (3, 0, 3)]),
        np.array([-2, -3, -4, -5]),
        tuple(a.id for a in spec.arcs),
        1.0,
        spec,
    )
    fine = refine(mesh)
    assert fine.n_triangles == 8
    assert fine.areas().sum() == pytest.approx(1.0, abs=1e-15)
    assert fine.n_vertices == mesh.n_vertices + len(mesh.edges())


def test_refine_counts_and_projection() -> None:
    mesh = generate_mesh(disk(1.0), 0.3)
    fine = refine(mesh)
    assert fine.n_vertices == mesh.n_vertices + len(mesh.edges())
    assert fine.n_triangles == 4 * mesh.n_triangles
    r = np.hypot(*fine.vertices[fine.boundary_nodes].T)
    assert np.abs(r - 1.0).max() <= 1e-12


def test_jsmesh_round_trip(tmp_path) -> None:
    spec = load("spruck_lens")
    mesh = generate_mesh(spec, 0.15)
    path = tmp_path / "m.jsmesh"
    text = write_jsmesh(mesh, path)
    again = read_jsmesh(path, spec=spec, h=mesh.h)
    assert np.array_equal(again.vertices, mesh.vertices)
    assert np.array_equal(again.triangles, mesh.triangles)
    assert np.array_equal(again.boundary_edges, mesh.boundary_edges)
    assert np.array_equal(again.vertex_arc, mesh.vertex_arc)
    assert write_jsmesh(again) == text


def test_arc_distance() -> None:
    mesh = generate_mesh(square("ACCC"), 0.2)
    d = mesh.arc_distance(("A",))
    # the A arc is the bottom side
    assert np.allclose(d, mesh.vertices[:, 1], atol=1e-12)
