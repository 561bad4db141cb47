"""Domain description: an ordered, counterclockwise loop of labeled arcs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..metric import ConformalMetric
from .arcs import Arc

# boundary samples per arc used for containment, self-intersection and disks
BOUNDARY_SAMPLES = 256


@dataclass(frozen=True, eq=False)
class DomainSpec:
    arcs: tuple
    metric: ConformalMetric = ConformalMetric.euclidean()
    name: str = "domain"

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if len(self.arcs) < 1:
            raise InputError("domain needs at least one arc")
        ids = [a.id for a in self.arcs]
        if len(set(ids)) != len(ids):
            raise InputError("arc ids must be unique")

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InputError("domain must be a JSON object")
        extra = set(obj) - {"name", "metric", "arcs"}
        if extra:
            raise InputError(f"unknown domain keys {sorted(extra)}")
        if "arcs" not in obj or not isinstance(obj["arcs"], list):
            raise InputError("domain needs an 'arcs' list")
        arcs = [Arc.from_json(a) for a in obj["arcs"]]
        return cls(tuple(arcs), ConformalMetric.from_json(obj.get("metric")), str(obj.get("name", "domain")))

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read domain file {path}: {exc.strerror}") from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_json(obj)

    def to_json(self):
        return {"name": self.name, "metric": self.metric.to_json(), "arcs": [a.to_json() for a in self.arcs]}

    def arc(self, arc_id):
        for a in self.arcs:
            if a.id == arc_id:
                return a
        raise InputError(f"no arc with id {arc_id!r}")

    def arc_index(self, arc_id):
        return [a.id for a in self.arcs].index(self.arc(arc_id).id)

    @property
    def vertices(self):
        """Arc endpoints; vertex ``i`` is the start of arc ``i``."""
        return np.array([a.start for a in self.arcs])

    @property
    def n_vertices(self):
        return len(self.arcs)

    def arcs_of_kind(self, kind):
        return [a for a in self.arcs if a.kind == kind]

    @cached_property
    def boundary_polyline(self):
        """Closed boundary sample (first point not repeated) and arc index per
        sample segment."""
        pts, owner = [], []
        for k, a in enumerate(self.arcs):
            s = a.sample(BOUNDARY_SAMPLES)[:-1]
            pts.append(s)
            owner.extend([k] * len(s))
        return np.vstack(pts), np.array(owner)

    @cached_property
    def scale(self):
        """Domain diameter (from the boundary sample)."""
        pts, _ = self.boundary_polyline
        hull = pts
        if len(pts) > 2000:
            hull = pts[:: len(pts) // 2000 + 1]
        d = hull[:, None, :] - hull[None, :, :]
        return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", d, d))))

    def signed_area(self):
        pts, _ = self.boundary_polyline
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains(self, pts, tol=None):
        """Closed-domain membership of points by winding number, with a
        distance tolerance to the boundary sample."""
        from .polygons import points_in_closed_region

        poly, _ = self.boundary_polyline
        if tol is None:
            tol = 1e-9 * self.scale
        return points_in_closed_region(np.atleast_2d(pts), poly, tol)

    # derived domains used by invariance checks

    def scaled(self, s):
        s = float(s)
        if not self.metric.is_euclidean:
            raise InputError("scaling is only defined for Euclidean domains")
        # C data is kept as written; the structural check ignores it
        arcs = [a.transformed(lambda p: s * np.asarray(p, dtype=float)) for a in self.arcs]
        return DomainSpec(tuple(arcs), self.metric, f"{self.name}*{s:g}")

    def relabeled(self, mapping=None):
        """Swap A and B labels (or apply a custom ``{old: new}`` mapping)."""
        mapping = mapping or {"A": "B", "B": "A"}
        arcs = [a.with_kind(mapping.get(a.kind, a.kind)) for a in self.arcs]
        return DomainSpec(tuple(arcs), self.metric, f"{self.name}~relabeled")


def load_domain(path):
    return DomainSpec.load(path)
