"""Command-line entry point: ``jsgraph <command> [flags]``.

Exit codes: 0 success/pass, 1 structural check did not pass, 2 solver
failure, 3 input error, 4 internal assertion.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import InputError, JSGraphError, MeshError, NumericError, StructuralCheckError

EXIT_OK, EXIT_CHECK, EXIT_SOLVER, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3, 4
COMMANDS = ("check", "mesh", "solve", "js", "analyze", "oracle")


@dataclass(frozen=True)
class RunConfig:
    command: str
    domain: str | None = None
    mode: str = "minimal"
    H: float | None = None
    c: float = 1.0
    h: float = 0.1
    grading: float = 4.0
    caps: tuple = (1.0, 2.0, 4.0, 8.0, 16.0)
    tol: float = 1e-10
    seed: int = 0
    out: str | None = None
    format: str = "json"
    solution: str | None = None
    trials: int = 50
    override: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.mode not in ("minimal", "cmc", "translating"):
            raise InputError(f"unknown mode {self.mode!r}")
        if self.format not in ("json", "csv"):
            raise InputError(f"unknown format {self.format!r}")
        for name in ("c", "h", "tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InputError(f"--{name} must be positive")
        if not self.grading >= 1.0:
            raise InputError("--grading must be at least 1")
        if self.H is not None and not (self.H > 0 and math.isfinite(self.H)):
            raise InputError("--H must be positive")
        if self.mode == "cmc" and self.H is None:
            raise InputError("--mode cmc needs --H")
        if self.trials < 1:
            raise InputError("--trials must be at least 1")
        caps = tuple(float(v) for v in self.caps)
        if not caps or any(not (v > 0 and math.isfinite(v)) for v in caps):
            raise InputError("--caps must be positive")
        object.__setattr__(self, "caps", caps)

    @classmethod
    def from_mapping(cls, values):
        known = {f.name for f in fields(cls)}
        extra = set(values) - known
        if extra:
            raise InputError(f"unknown configuration keys {sorted(extra)}")
        return cls(**values)

    def to_json(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["caps"] = list(self.caps)
        # output location does not belong in a reproducible report
        out.pop("out")
        return out

    @property
    def kind(self):
        from .solver import ProblemKind

        if self.mode == "minimal":
            return ProblemKind.minimal()
        if self.mode == "cmc":
            return ProblemKind.cmc(self.H)
        return ProblemKind.translator(self.c)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _caps(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cap list {text!r}") from None


def build_parser():
    p = _Parser(prog="jsgraph", description="Jenkins-Serrin admissibility checks and graph solvers.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--domain", help="domain JSON file")
    p.add_argument("--mode", "--kind", dest="mode", default="minimal",
                   type=lambda s: "translating" if s == "translator" else s)
    p.add_argument("--H", type=float)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--grading", type=float, default=4.0)
    p.add_argument("--caps", type=_caps, default=(1.0, 2.0, 4.0, 8.0, 16.0))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--solution", help="solution sidecar JSON (analyze)")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--override", action="store_true", help="continue past a failed structural check")
    return p


def parse_config(argv):
    ns = build_parser().parse_args(argv)
    return RunConfig.from_mapping(vars(ns))


def _dumps(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _table(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(k) is None else r.get(k) for k in columns])
    return buf.getvalue()


class _Output:
    """Writes named files below ``--out`` (nothing is written elsewhere)."""

    def __init__(self, cfg, stdout):
        self.dir = None if cfg.out is None else Path(cfg.out)
        self.stdout = stdout
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, name):
        return None if self.dir is None else self.dir / name

    def write(self, name, text):
        if self.dir is not None:
            (self.dir / name).write_text(text, encoding="utf-8")

    def emit(self, text):
        self.stdout.write(text)


def _load_domain(cfg):
    from .domain import DomainSpec

    if cfg.domain is None:
        raise InputError(f"{cfg.command} needs --domain")
    return DomainSpec.load(cfg.domain)


def _solver_config(cfg):
    from .solver import SolverConfig

    return SolverConfig(rtol=cfg.tol, caps=cfg.caps)


def cmd_check(cfg, out):
    from .domain import check, validate_domain

    spec = _load_domain(cfg)
    validate_domain(spec, cfg.mode).raise_if_invalid()
    report = check(spec, cfg.mode, H=cfg.H)
    body = report.to_json()
    out.write("check.json", _dumps(body))
    if cfg.format == "csv":
        rows = [dict(r, sides="".join(r.get("labels", ""))) for r in body["polygons"]]
        cols = sorted({k for r in rows for k in r if not isinstance(r[k], (list, dict))})
        out.emit(_table(rows, cols))
    else:
        out.emit(_dumps(body))
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_mesh(cfg, out):
    from .mesh import generate_mesh, write_jsmesh

    spec = _load_domain(cfg)
    mesh = generate_mesh(spec, cfg.h, cfg.grading)
    text = write_jsmesh(mesh)
    out.write("mesh.jsmesh", text)
    if out.dir is None:
        out.emit(text)
    else:
        out.emit(_dumps({"mesh": "mesh.jsmesh", "vertices": mesh.n_vertices, "triangles": mesh.n_triangles}))
    return EXIT_OK


def _export_solution(sol, out, stem):
    from .mesh import write_jsmesh
    from .solver.export import solution_csv

    meta = sol.metadata()
    meta.update({"mesh": "mesh.jsmesh", "values": f"{stem}.csv", "domain": "domain.json"})
    out.write("mesh.jsmesh", write_jsmesh(sol.mesh))
    out.write(f"{stem}.csv", solution_csv(sol))
    out.write(f"{stem}.json", _dumps(meta))
    if sol.mesh.spec is not None:
        out.write("domain.json", _dumps(sol.mesh.spec.to_json()))
    return meta


def cmd_solve(cfg, out):
    from .mesh import generate_mesh
    from .solver import DirichletData, newton_solve

    spec = _load_domain(cfg)
    mesh = generate_mesh(spec, cfg.h, cfg.grading)
    blowup = bool(spec.arcs_of_kind("A") or spec.arcs_of_kind("B"))
    data = DirichletData.build(mesh, spec, max(cfg.caps) if blowup else None)
    sol = newton_solve(mesh, data, cfg.kind, _solver_config(cfg), spec.metric)
    meta = _export_solution(sol, out, "solution")
    if cfg.format == "csv":
        from .solver.export import solution_csv

        out.emit(solution_csv(sol))
    else:
        out.emit(_dumps(meta))
    return EXIT_OK if sol.converged else EXIT_SOLVER


def cmd_js(cfg, out):
    from .analysis import analysis_report
    from .solver.continuation import continuation_solve

    spec = _load_domain(cfg)
    result = continuation_solve(
        spec, cfg.kind, _solver_config(cfg), h=cfg.h, grading=cfg.grading, override=cfg.override
    )
    report = {
        "config": cfg.to_json(),
        "check": result.check.to_json(),
        "continuation": result.to_json(),
        "analysis": None,
    }
    if result.limit is not None and result.status in ("converged", "not-converged"):
        report["analysis"] = analysis_report(result.limit, spec, trials=cfg.trials, seed=cfg.seed)
    if result.limit is not None:
        _export_solution(result.limit, out, "limit")
    out.write("js.json", _dumps(report))
    if cfg.format == "csv":
        cols = ["cap", "iterations", "residual", "bisections", "min_increment", "violations", "monotone", "interior_change"]
        out.emit(_table(result.table, cols))
    else:
        out.emit(_dumps(report))
    if result.status in ("solver-failure", "monotonicity-violation"):
        return EXIT_SOLVER
    return EXIT_OK


def cmd_analyze(cfg, out):
    from .analysis import analysis_report
    from .solver.export import read_solution

    if cfg.solution is None:
        raise InputError("analyze needs --solution <sidecar.json>")
    spec = _load_domain(cfg) if cfg.domain else None
    sol = read_solution(cfg.solution, spec=spec)
    report = analysis_report(sol, spec if spec is not None else sol.mesh.spec, trials=cfg.trials, seed=cfg.seed)
    out.write("analysis.json", _dumps(report))
    if cfg.format == "csv":
        out.emit(_table(report["boundary"], ["arc", "label", "expected", "max_dev", "tol", "samples", "verdict"]))
    else:
        out.emit(_dumps(report))
    return EXIT_OK


def oracle_rows(seed=0, points=5, h=1e-3):
    """Oracle identities ``div(grad u / W) = F`` at seeded random points."""
    from . import oracles

    rng = np.random.default_rng(seed)
    fields_ = (
        (oracles.scherk_field(), lambda: rng.uniform(-1.4, 1.4, 2)),
        (oracles.grim_reaper_field(1.0), lambda: np.array([rng.uniform(-1.2, 1.2), rng.uniform(0.0, 1.0)])),
        (oracles.spherical_cap_field(2.0), lambda: rng.uniform(-0.7, 0.7, 2)),
    )
    rows = []
    for field_, draw in fields_:
        for _ in range(points):
            x, y = draw()
            div = oracles.fd_divergence(field_, (x, y), h)
            rhs = float(field_.rhs(x, y))
            rows.append({
                "oracle": field_.name,
                "x": float(x),
                "y": float(y),
                "u": float(field_.value(x, y)),
                "fd_divergence": div,
                "rhs": rhs,
                "abs_error": abs(div - rhs),
                "tolerance": 10 * h * h + 1e-10,
            })
    return rows


def cmd_oracle(cfg, out):
    rows = oracle_rows(cfg.seed)
    cols = ["oracle", "x", "y", "u", "fd_divergence", "rhs", "abs_error", "tolerance"]
    text = _table(rows, cols)
    out.write("oracle.csv", text)
    out.emit(text if cfg.format == "csv" else _dumps(rows))
    return EXIT_OK if all(r["abs_error"] <= r["tolerance"] for r in rows) else EXIT_INTERNAL


HANDLERS = {
    "check": cmd_check,
    "mesh": cmd_mesh,
    "solve": cmd_solve,
    "js": cmd_js,
    "analyze": cmd_analyze,
    "oracle": cmd_oracle,
}


def run(argv=None, stdout=None, stderr=None):
    """Run one command; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
        out = _Output(cfg, stdout)
        return HANDLERS[cfg.command](cfg, out)
    except StructuralCheckError as exc:
        if exc.report is not None:
            stdout.write(_dumps(exc.report.to_json()))
        stderr.write(f"jsgraph: {exc}\n")
        return EXIT_CHECK
    except (InputError, MeshError) as exc:
        stderr.write(f"jsgraph: input error: {exc}\n")
        return EXIT_INPUT
    except NumericError as exc:
        stderr.write(f"jsgraph: solver failure: {exc}\n")
        return EXIT_SOLVER
    except (AssertionError, JSGraphError) as exc:
        stderr.write(f"jsgraph: internal assertion: {exc}\n")
        return EXIT_INTERNAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
