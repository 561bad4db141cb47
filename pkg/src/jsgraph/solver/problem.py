"""Problem kinds, solver configuration, Dirichlet data and solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..metric import EUCLIDEAN


@dataclass(frozen=True)
class ProblemKind:
    """Right-hand side of ``div(grad u / W) = F`` in the domain metric.

    ``minimal``: F = 0.  ``cmc``: F = H0 (the lower spherical cap of radius
    R has H0 = 2/R).  ``translator``: F = c/W with speed ``c > 0``.
    """

    name: str = "minimal"
    H0: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.name not in ("minimal", "cmc", "translator"):
            raise InputError(f"unknown problem kind {self.name!r}")
        if self.name == "translator" and not self.c > 0:
            raise InputError("translator speed c must be positive")
        if not (math.isfinite(self.H0) and math.isfinite(self.c)):
            raise InputError("problem parameters must be finite")

    @classmethod
    def minimal(cls):
        return cls("minimal")

    @classmethod
    def cmc(cls, H0):
        return cls("cmc", H0=float(H0))

    @classmethod
    def translator(cls, c=1.0):
        return cls("translator", c=float(c))

    @classmethod
    def parse(cls, name, H=None, c=None):
        """Build from a mode name as used on the command line."""
        if name == "minimal":
            return cls.minimal()
        if name == "cmc":
            if H is None:
                raise InputError("cmc kind needs H")
            return cls.cmc(H)
        if name in ("translator", "translating"):
            return cls.translator(1.0 if c is None else c)
        raise InputError(f"unknown problem kind {name!r}")

    @property
    def check_mode(self):
        return {"minimal": "minimal", "cmc": "cmc", "translator": "translating"}[self.name]

    @property
    def symmetric(self):
        return self.name != "translator"

    def to_json(self):
        out = {"name": self.name}
        if self.name == "cmc":
            out["H0"] = self.H0
        if self.name == "translator":
            out["c"] = self.c
        return out


def default_caps(k_max=4):
    return tuple(float(2**k) for k in range(k_max + 1))


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-10
    atol: float = 1e-11
    max_iter: int = 50
    armijo: float = 1e-4
    min_step: float = 2.0**-20
    caps: tuple = field(default_factory=default_caps)
    delta: float | None = None  # interior margin, default 5h
    eps_js: float | None = None  # default 1e-4 * domain diameter
    max_bisections: int = 4

    def __post_init__(self):
        for name in ("rtol", "atol", "armijo", "min_step"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InputError(f"{name} must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be at least 1")
        caps = tuple(float(c) for c in self.caps)
        if not caps or any(not (c > 0 and math.isfinite(c)) for c in caps):
            raise InputError("caps must be positive and finite")
        if any(b <= a for a, b in zip(caps, caps[1:])):
            raise InputError("caps must be strictly increasing")
        object.__setattr__(self, "caps", caps)
        for name in ("delta", "eps_js"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InputError(f"{name} must be positive")

    def to_json(self):
        return {
            "rtol": self.rtol,
            "atol": self.atol,
            "max_iter": self.max_iter,
            "armijo": self.armijo,
            "min_step": self.min_step,
            "caps": list(self.caps),
            "delta": self.delta,
            "eps_js": self.eps_js,
        }


@dataclass(frozen=True, eq=False)
class DirichletData:
    """Boundary values on the boundary nodes of a mesh.

    ``values`` has one entry per mesh vertex; interior entries are NaN.
    """

    values: np.ndarray
    cap: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def build(cls, mesh, spec=None, cap=None):
        """Capped data from the arc labels: ``+cap`` on A arcs, ``-cap`` on B
        arcs and ``min(f, cap)`` on C arcs.

        A domain vertex next to a C arc takes that arc's data (the arc
        starting at the vertex wins when both neighbors are C).  A vertex
        between an A and a B arc takes 0.
        """
        spec = spec if spec is not None else mesh.spec
        if spec is None:
            raise InputError("Dirichlet data needs the domain description")
        has_blowup = bool(spec.arcs_of_kind("A") or spec.arcs_of_kind("B"))
        if has_blowup and cap is None:
            raise InputError("a cap is required when the domain has A or B arcs")
        n = math.inf if cap is None else float(cap)
        values = np.full(mesh.n_vertices, np.nan)
        arcs = spec.arcs
        m = len(arcs)
        nodes = mesh.boundary_nodes
        marks = mesh.vertex_arc[nodes]
        pts = mesh.vertices[nodes]
        # node -> arc whose data applies
        owner = np.where(marks >= 0, marks, -1)
        corner = marks <= -2
        for idx in np.flatnonzero(corner):
            i = int(-2 - marks[idx])
            here, prev = arcs[i], arcs[(i - 1) % m]
            if here.kind == "C":
                owner[idx] = i
            elif prev.kind == "C":
                owner[idx] = (i - 1) % m
            elif here.kind != prev.kind:
                owner[idx] = -3  # A|B corner
            else:
                owner[idx] = i
        for k, a in enumerate(arcs):
            sel = owner == k
            if not np.any(sel):
                continue
            if a.kind == "A":
                values[nodes[sel]] = n
            elif a.kind == "B":
                values[nodes[sel]] = -n
            else:
                f = np.broadcast_to(a.data(pts[sel, 0], pts[sel, 1]), (int(sel.sum()),)).astype(float)
                if not np.all(np.isfinite(f)):
                    raise InputError(f"data on arc {a.id} is not finite on the boundary")
                values[nodes[sel]] = np.minimum(f, n)
        values[nodes[owner == -3]] = 0.0
        return cls(values, None if cap is None else n)

    @classmethod
    def from_function(cls, mesh, fn):
        """Data ``fn(x, y)`` at every boundary node."""
        values = np.full(mesh.n_vertices, np.nan)
        nodes = mesh.boundary_nodes
        p = mesh.vertices[nodes]
        values[nodes] = np.broadcast_to(fn(p[:, 0], p[:, 1]), (len(nodes),))
        if not np.all(np.isfinite(values[nodes])):
            raise InputError("boundary data is not finite")
        return cls(values)

    def shifted(self, tau):
        return DirichletData(self.values + tau, self.cap)

    def apply(self, mesh, u):
        """Copy of ``u`` with boundary values replaced by the data."""
        u = np.array(u, dtype=float)
        b = mesh.boundary_nodes
        u[b] = self.values[b]
        return u


@dataclass(frozen=True, eq=False)
class Solution:
    mesh: object
    u: np.ndarray
    kind: ProblemKind
    cap: float | None
    residual_norm: float
    iterations: int
    converged: bool
    tolerance: float
    metric: object = EUCLIDEAN
    history: tuple = ()

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def metadata(self):
        return {
            "kind": self.kind.to_json(),
            "cap": self.cap,
            "residual": self.residual_norm,
            "tolerance": self.tolerance,
            "iterations": self.iterations,
            "converged": self.converged,
            "metric": self.metric.to_json(),
            "n_vertices": int(self.mesh.n_vertices),
        }
