"""Capped monotone continuation toward Jenkins-Serrin solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..domain.checks import check
from ..errors import InputError, NumericError, StructuralCheckError
from .newton import newton_solve
from .problem import DirichletData, SolverConfig


def monotonicity_slack(cap):
    return 1e-8 * (1.0 + cap)


@dataclass(frozen=True, eq=False)
class ContinuationResult:
    """Per-cap solutions and the diagnostics of the continuation run.

    ``status`` is one of ``converged`` (interior change fell below
    ``eps_js``), ``not-converged`` (all caps solved, no settling),
    ``monotonicity-violation`` (a discretization failure) or
    ``solver-failure`` (aborted; ``solutions`` holds the partial sequence).
    """

    mesh: object
    kind: object
    solutions: tuple
    table: tuple
    status: str
    converged_at: float | None
    delta: float
    eps_js: float
    check: object = None
    override: bool = False
    message: str = ""
    config: SolverConfig = field(default_factory=SolverConfig)
    direction: int = 1

    @property
    def limit(self):
        """Solution at the largest cap reached (the limit candidate)."""
        return self.solutions[-1] if self.solutions else None

    @property
    def monotone(self):
        return all(row["monotone"] is not False for row in self.table)

    def to_json(self):
        return {
            "kind": self.kind.to_json(),
            "status": self.status,
            "converged_at": self.converged_at,
            "delta": self.delta,
            "eps_js": self.eps_js,
            "monotone": self.monotone,
            "direction": self.direction,
            "override": self.override,
            "message": self.message,
            "check_verdict": None if self.check is None else self.check.verdict,
            "config": self.config.to_json(),
            "n_vertices": int(self.mesh.n_vertices),
            "caps": [dict(row) for row in self.table],
        }


def monotone_direction(spec):
    """+1 when raising the cap raises the data (no B arcs), -1 when it lowers
    it (no A arcs), 0 when both kinds are present and the data are unordered."""
    has_a, has_b = bool(spec.arcs_of_kind("A")), bool(spec.arcs_of_kind("B"))
    if has_a and has_b:
        return 0
    return -1 if has_b else 1


def _solve_cap(mesh, spec, kind, config, metric, cap, start):
    data = DirichletData.build(mesh, spec, cap)
    return newton_solve(mesh, data, kind, config, metric, initial=start)


def _solve_with_bisection(mesh, spec, kind, config, metric, lo_cap, prev, cap):
    """Solve at ``cap`` warm-started from ``prev`` (the solution at
    ``lo_cap``); on failure insert intermediate caps, at most
    ``config.max_bisections`` levels deep."""
    start = None if prev is None else prev.u
    try:
        sol = _solve_cap(mesh, spec, kind, config, metric, cap, start)
        if sol.converged:
            return sol, 0
        reason = f"no convergence in {sol.iterations} iterations"
    except NumericError as exc:
        reason = str(exc)
    if config.max_bisections <= 0 or prev is None:
        raise NumericError(f"cap {cap:g}: {reason}")
    mid = 0.5 * (lo_cap + cap)
    sub = replace(config, max_bisections=config.max_bisections - 1)
    mid_sol, n1 = _solve_with_bisection(mesh, spec, kind, sub, metric, lo_cap, prev, mid)
    sol, n2 = _solve_with_bisection(mesh, spec, kind, sub, metric, mid, mid_sol, cap)
    return sol, 1 + n1 + n2


def continuation_solve(spec, kind, config=None, mesh=None, h=None, grading=1.0, override=False, vertex_cap=16):
    """Solve with caps ``config.caps`` on A/B arcs, each warm-started from
    the previous cap.

    The structural check for ``kind`` must pass unless ``override`` is set
    (its verdict is recorded either way).  The mesh is generated from
    ``h`` and ``grading`` when not given.  Interior convergence is declared
    at the first cap whose change from the previous cap is below ``eps_js``
    on interior nodes at distance at least ``delta`` from the A and B arcs.
    Monotonicity in the cap is asserted in the direction the data move
    (see :func:`monotone_direction`) and skipped when A and B arcs coexist.
    """
    from ..mesh import generate_mesh

    config = config or SolverConfig()
    report = check(spec, kind.check_mode, H=kind.H0 if kind.name == "cmc" else None, vertex_cap=vertex_cap)
    if report.verdict != "pass" and not override:
        raise StructuralCheckError(f"structural check verdict is {report.verdict!r}", report)
    if mesh is None:
        if h is None:
            raise InputError("continuation needs a mesh or a mesh size h")
        mesh = generate_mesh(spec, h, grading)
    metric = spec.metric
    delta = config.delta if config.delta is not None else 5.0 * mesh.h
    eps_js = config.eps_js if config.eps_js is not None else 1e-4 * spec.scale
    far = mesh.interior_nodes[mesh.arc_distance(("A", "B"))[mesh.interior_nodes] >= delta]

    direction = monotone_direction(spec)
    solutions, table = [], []
    status, converged_at, message = "not-converged", None, ""
    prev, prev_cap = None, None
    for cap in config.caps:
        try:
            sol, bisections = _solve_with_bisection(mesh, spec, kind, config, metric, prev_cap, prev, cap)
        except NumericError as exc:
            status, message = "solver-failure", str(exc)
            break
        row = {
            "cap": cap,
            "iterations": sol.iterations,
            "residual": sol.residual_norm,
            "bisections": bisections,
            "min_increment": None,
            "violations": 0,
            "monotone": True if direction else None,
            "interior_change": None,
        }
        if prev is not None:
            inc = sol.u - prev.u
            if direction:
                signed = direction * inc
                row["min_increment"] = float(signed.min())
                row["violations"] = int(np.count_nonzero(signed < -monotonicity_slack(cap)))
                row["monotone"] = row["violations"] == 0
            else:
                row["monotone"] = None
            if len(far):
                row["interior_change"] = float(np.abs(inc[far]).max())
                if converged_at is None and row["interior_change"] < eps_js:
                    converged_at = cap
        solutions.append(sol)
        table.append(row)
        prev, prev_cap = sol, cap
    if status != "solver-failure":
        if any(r["monotone"] is False for r in table):
            status = "monotonicity-violation"
            message = "discrete monotonicity violated beyond slack"
        elif converged_at is not None:
            status = "converged"
    return ContinuationResult(
        mesh, kind, tuple(solutions), tuple(table), status, converged_at, delta, eps_js,
        report, override, message, config, direction,
    )


@dataclass(frozen=True)
class CompareReport:
    """Ordering of two solutions on the same mesh.

    Domain vertices are reported separately and excluded from the verdict.
    """

    min_difference: float
    violations: tuple
    corner_min_difference: float | None
    corner_violations: tuple
    slack: float

    @property
    def holds(self):
        return not self.violations

    def to_json(self):
        return {
            "min_difference": self.min_difference,
            "violations": list(self.violations),
            "corner_min_difference": self.corner_min_difference,
            "corner_violations": list(self.corner_violations),
            "slack": self.slack,
            "verdict": "sol1 >= sol2 within slack" if self.holds else "ordering violated",
        }


def compare(sol1, sol2, slack=0.0):
    """Check ``sol1 >= sol2 - slack`` nodewise."""
    if sol1.mesh is not sol2.mesh and not (
        np.array_equal(sol1.mesh.vertices, sol2.mesh.vertices)
        and np.array_equal(sol1.mesh.triangles, sol2.mesh.triangles)
    ):
        raise InputError("solutions live on different meshes")
    diff = sol1.u - sol2.u
    corner = sol1.mesh.vertex_arc <= -2
    regular = np.flatnonzero(~corner)
    corners = np.flatnonzero(corner)
    bad = regular[diff[regular] < -slack]
    cbad = corners[diff[corners] < -slack]
    return CompareReport(
        float(diff[regular].min()) if len(regular) else math.inf,
        tuple(int(i) for i in bad),
        float(diff[corners].min()) if len(corners) else None,
        tuple(int(i) for i in cbad),
        float(slack),
    )
