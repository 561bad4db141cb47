"""Solution export: ``x,y,u`` CSV per node plus a JSON metadata sidecar."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..metric import ConformalMetric
from .problem import ProblemKind, Solution


def solution_csv(solution):
    """CSV text with header ``x,y,u``; floats written with ``repr`` so the
    values round-trip exactly."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "u"])
    for (x, y), u in zip(solution.mesh.vertices.tolist(), solution.u.tolist()):
        w.writerow([repr(x), repr(y), repr(u)])
    return buf.getvalue()


def write_solution(solution, csv_path, mesh_path=None, domain_path=None):
    """Write the CSV and a ``.json`` sidecar next to it; returns the sidecar
    path.  ``mesh_path``/``domain_path`` are recorded as references."""
    csv_path = Path(csv_path)
    csv_path.write_text(solution_csv(solution), encoding="utf-8")
    meta = solution.metadata()
    meta["mesh"] = None if mesh_path is None else str(mesh_path)
    meta["domain"] = None if domain_path is None else str(domain_path)
    meta["values"] = csv_path.name
    side = csv_path.with_suffix(".json")
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return side


def read_solution_values(csv_path, mesh):
    """Nodal values from an ``x,y,u`` CSV, checked against the mesh."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "y", "u"]:
        raise InputError(f"{csv_path}: expected header x,y,u")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 3)
    except ValueError as exc:
        raise InputError(f"{csv_path}: {exc}") from None
    if len(data) != mesh.n_vertices or not np.array_equal(data[:, :2], mesh.vertices):
        raise InputError(f"{csv_path}: node coordinates do not match the mesh")
    return data[:, 2]


def read_solution(sidecar, mesh=None, spec=None):
    """Load a :class:`Solution` from its JSON sidecar.

    The mesh is read from the recorded path unless given.
    """
    from ..domain.spec import DomainSpec
    from ..mesh import read_jsmesh

    sidecar = Path(sidecar)
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{sidecar}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    base = sidecar.parent
    if spec is None and meta.get("domain"):
        spec = DomainSpec.load(base / meta["domain"])
    if mesh is None:
        if not meta.get("mesh"):
            raise InputError(f"{sidecar}: no mesh reference")
        mesh = read_jsmesh(base / meta["mesh"], spec=spec)
    u = read_solution_values(base / meta["values"], mesh)
    kind_obj = meta["kind"]
    kind = ProblemKind(kind_obj["name"], kind_obj.get("H0", 0.0), kind_obj.get("c", 0.0))
    return Solution(
        mesh=mesh,
        u=u,
        kind=kind,
        cap=meta.get("cap"),
        residual_norm=meta["residual"],
        iterations=meta["iterations"],
        converged=meta["converged"],
        tolerance=meta["tolerance"],
        metric=ConformalMetric.from_json(meta.get("metric")),
    )
