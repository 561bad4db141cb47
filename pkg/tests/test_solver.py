from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load, rectangle, square
from jsgraph.errors import InputError, NumericError, StructuralCheckError
from jsgraph.mesh import generate_mesh
from jsgraph.metric import EUCLIDEAN, ConformalMetric
from jsgraph.oracles import scherk
from jsgraph.solver import (
    DirichletData,
    ProblemKind,
    SolverConfig,
    assemble_jacobian,
    assemble_residual,
    compare,
    continuation_solve,
    newton_solve,
    read_solution,
    solution_csv,
    stiffness_matrix,
    write_solution,
)

KINDS = (ProblemKind.minimal(), ProblemKind.cmc(1.0), ProblemKind.translator(1.0))


@pytest.fixture(scope="module")
def square_mesh():
    return generate_mesh(square("CCCC"), 0.2)


def test_zero_is_minimal(square_mesh) -> None:
    R = assemble_residual(square_mesh, EUCLIDEAN, np.zeros(square_mesh.n_vertices), ProblemKind.minimal())
    assert np.all(R == 0.0)


def test_jacobian_at_zero_is_stiffness(square_mesh) -> None:
    J = assemble_jacobian(square_mesh, EUCLIDEAN, np.zeros(square_mesh.n_vertices), ProblemKind.minimal(), full=True)
    K = stiffness_matrix(square_mesh)
    # P1 stiffness of a graded square mesh has zero row sums
    assert abs(K.sum(axis=1)).max() < 1e-12
    assert abs(J - K).max() == 0.0


def test_scherk_residual_shrinks() -> None:
    norms = []
    spec = load("scherk_box")
    for h in (0.2, 0.1):
        mesh = generate_mesh(spec, h, 2.0)
        R = assemble_residual(mesh, EUCLIDEAN, scherk(*mesh.vertices.T), ProblemKind.minimal())
        norms.append(np.abs(R).max())
    assert norms[1] < norms[0]


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.name)
def test_jacobian_matches_finite_differences(square_mesh, kind) -> None:
    rng = np.random.default_rng(3)
    metric = ConformalMetric.custom("exp(0.3*x - 0.2*y)")
    for _ in range(3):
        u = np.sin(2 * square_mesh.vertices @ rng.normal(size=2)) * rng.uniform(0.5, 2.0)
        v = rng.normal(size=square_mesh.n_vertices)
        eps = 1e-6
        fd = (assemble_residual(square_mesh, metric, u + eps * v, kind, full=True)
              - assemble_residual(square_mesh, metric, u - eps * v, kind, full=True)) / (2 * eps)
        jv = assemble_jacobian(square_mesh, metric, u, kind, full=True) @ v
        assert np.linalg.norm(jv - fd) <= 1e-6 * np.linalg.norm(jv)


def test_symmetry_of_jacobian(square_mesh) -> None:
    u = np.sin(square_mesh.vertices[:, 0] * 3)
    for kind in KINDS[:2]:
        J = assemble_jacobian(square_mesh, EUCLIDEAN, u, kind)
        assert abs(J - J.T).max() < 1e-14
    J = assemble_jacobian(square_mesh, EUCLIDEAN, u, ProblemKind.translator(1.0))
    assert abs(J - J.T).max() > 1e-6


def test_non_finite_value_rejected(square_mesh) -> None:
    u = np.zeros(square_mesh.n_vertices)
    u[7] = np.nan
    with pytest.raises(NumericError, match="node 7"):
        assemble_residual(square_mesh, EUCLIDEAN, u, ProblemKind.minimal())


def test_zero_data_converges_immediately(square_mesh) -> None:
    sol = newton_solve(square_mesh, DirichletData.build(square_mesh), ProblemKind.minimal())
    assert sol.converged and sol.iterations <= 1
    assert np.abs(sol.u).max() == 0.0


@settings(max_examples=8, deadline=None)
@given(st.floats(-5.0, 5.0))
def test_vertical_translation(tau) -> None:
    mesh = generate_mesh(rectangle(-1.0, 1.0, 0.0, 1.0, "-log(cos(x))"), 0.25)
    data = DirichletData.build(mesh)
    kind = ProblemKind.translator(1.0)
    a = newton_solve(mesh, data, kind)
    b = newton_solve(mesh, data.shifted(tau), kind)
    assert np.abs(b.u - a.u - tau).max() < 1e-9


def test_discrete_comparison(square_mesh) -> None:
    low = DirichletData.from_function(square_mesh, lambda x, y: 0.3 * np.sin(3 * x) * y)
    high = DirichletData.from_function(square_mesh, lambda x, y: 0.3 * np.sin(3 * x) * y + 0.1 + x * x)
    kind = ProblemKind.cmc(0.5)
    a = newton_solve(square_mesh, low, kind)
    b = newton_solve(square_mesh, high, kind)
    assert compare(b, a).holds
    assert compare(a, a).min_difference == 0.0


def test_capped_data_labels() -> None:
    spec = square("ACCC", data="x")
    mesh = generate_mesh(spec, 0.25)
    data = DirichletData.build(mesh, spec, 0.5)
    b = mesh.boundary_nodes
    y, x = mesh.vertices[b, 1], mesh.vertices[b, 0]
    on_a = (y == 0) & (x > 0) & (x < 1)
    assert np.all(data.values[b][on_a] == 0.5)
    assert np.all(data.values[b][y > 0] == np.minimum(x[y > 0], 0.5))
    with pytest.raises(InputError):
        DirichletData.build(mesh, spec)


def test_continuation_example() -> None:
    spec = load("one_a_square")
    res = continuation_solve(
        spec, ProblemKind.translator(1.0), SolverConfig(caps=(1, 2, 4, 8, 16)), h=0.05, grading=8.0
    )
    assert res.status == "converged" and res.monotone and len(res.solutions) == 5
    changes = [r["interior_change"] for r in res.table[1:]]
    assert all(b < a for a, b in zip(changes, changes[1:]))
    # C data stays zero
    mesh = res.mesh
    c_nodes = mesh.boundary_nodes[mesh.arc_distance(("A",))[mesh.boundary_nodes] > 0]
    assert np.all(res.limit.u[c_nodes] == 0.0)
    for a, b in zip(res.solutions, res.solutions[1:]):
        assert compare(b, a, slack=1e-8 * (1 + b.cap)).holds


def test_coarse_monotonicity_violation_is_flagged() -> None:
    # next to the corner where the A side meets zero data the coarse P1
    # discretization is not monotone; this must be reported, not hidden
    spec = load("one_a_square")
    res = continuation_solve(spec, ProblemKind.translator(1.0), SolverConfig(caps=(1, 2, 4, 8, 16)), h=0.1)
    assert res.status == "monotonicity-violation"
    assert not res.monotone
    assert sum(r["violations"] for r in res.table[1:]) >= 1
    assert res.to_json()["monotone"] is False


def test_scherk_continuation_approaches_exact() -> None:
    spec = load("scherk_square")
    res = continuation_solve(spec, ProblemKind.minimal(), SolverConfig(caps=(2, 4, 8, 16, 32)), h=0.15, grading=2.0)
    mesh = res.mesh
    far = mesh.interior_nodes[np.abs(mesh.vertices[mesh.interior_nodes]).max(axis=1) < 0.8]
    # A on the vertical sides, so the limit is the Scherk function with the sign flipped
    exact = -scherk(*mesh.vertices[far].T)
    centre = int(np.argmin(np.hypot(*mesh.vertices.T)))
    errors = [np.abs(s.u[far] - s.u[centre] - exact).max() for s in res.solutions]
    assert res.direction == 0 and all(r["monotone"] is None for r in res.table)
    assert errors[-1] < 0.02


def test_failed_check_needs_override() -> None:
    spec = load("opposite_a_square")
    with pytest.raises(StructuralCheckError):
        continuation_solve(spec, ProblemKind.translator(1.0), h=0.2)


def test_override_diverges() -> None:
    spec = load("opposite_a_square")
    res = continuation_solve(
        spec, ProblemKind.minimal(), SolverConfig(caps=(1, 2, 4, 8, 16)), h=0.1, override=True
    )
    assert res.check.verdict == "fail" and res.override
    assert res.status == "not-converged"
    # the whole interior rises with the cap instead of settling
    mesh = res.mesh
    centre = int(np.argmin(np.hypot(*(mesh.vertices - 0.5).T)))
    values = [s.u[centre] for s in res.solutions]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] > 16 / 4
    changes = [r["interior_change"] for r in res.table[1:]]
    assert all(b > a for a, b in zip(changes, changes[1:]))


def test_mismatched_meshes(square_mesh) -> None:
    other = generate_mesh(square("CCCC"), 0.25)
    a = newton_solve(square_mesh, DirichletData.build(square_mesh), ProblemKind.minimal())
    b = newton_solve(other, DirichletData.build(other), ProblemKind.minimal())
    with pytest.raises(InputError):
        compare(a, b)


def test_csv_round_trip(tmp_path) -> None:
    from jsgraph.mesh import write_jsmesh

    spec = rectangle(-1.0, 1.0, 0.0, 1.0, "-log(cos(x))")
    mesh = generate_mesh(spec, 0.25)
    sol = newton_solve(mesh, DirichletData.build(mesh), ProblemKind.translator(1.0))
    write_jsmesh(mesh, tmp_path / "mesh.jsmesh")
    (tmp_path / "domain.json").write_text(__import__("json").dumps(spec.to_json()))
    side = write_solution(sol, tmp_path / "sol.csv", "mesh.jsmesh", "domain.json")
    again = read_solution(side)
    assert np.array_equal(again.u, sol.u)
    assert again.kind == sol.kind
    assert solution_csv(sol).splitlines()[0] == "x,y,u"
