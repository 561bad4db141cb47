"""Boundary arc geometry: segments, circular arcs and sampled polylines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import expr as _expr
from ..errors import DegenerateInputError, InputError
from ..metric import EUCLIDEAN, metric_length

ARC_KINDS = ("A", "B", "C")

# dense sampling used for metric lengths of curved arcs in non-Euclidean metrics
_LENGTH_SAMPLES = 4096


class Segment:
    type = "segment"

    def __init__(self, p, q):
        self.p = np.asarray(p, dtype=float)
        self.q = np.asarray(q, dtype=float)
        if self.p.shape != (2,) or self.q.shape != (2,):
            raise InputError("segment endpoints must be 2D points")
        if np.all(self.p == self.q):
            raise DegenerateInputError("segment endpoints coincide")

    @property
    def start(self):
        return self.p

    @property
    def end(self):
        return self.q

    def euclidean_length(self):
        return float(math.hypot(*(self.q - self.p)))

    def point_at(self, s):
        """Points at normalized arc-length parameters ``s`` in [0, 1]."""
        s = np.asarray(s, dtype=float)[..., None]
        return self.p + s * (self.q - self.p)

    def project(self, pt):
        d = self.q - self.p
        s = np.clip(np.dot(np.asarray(pt) - self.p, d) / np.dot(d, d), 0.0, 1.0)
        return self.p + s * d

    def curvature(self):
        return 0.0

    def transformed(self, fn):
        return Segment(fn(self.p), fn(self.q))

    def reversed(self):
        return Segment(self.q, self.p)

    def to_json(self):
        return {"type": "segment", "p": self.p.tolist(), "q": self.q.tolist()}


class CircularArc:
    """Arc of the circle ``center + radius (cos t, sin t)`` from ``from_angle``
    to ``to_angle``, traversed counterclockwise when ``ccw`` is true."""

    type = "circular_arc"

    def __init__(self, center, radius, from_angle, to_angle, ccw=True):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.from_angle = float(from_angle)
        self.to_angle = float(to_angle)
        self.ccw = bool(ccw)
        if not self.radius > 0:
            raise DegenerateInputError("circular arc radius must be positive")
        raw = self.to_angle - self.from_angle
        if self.ccw:
            sweep = raw % (2 * math.pi)
        else:
            sweep = -((-raw) % (2 * math.pi))
        if sweep == 0 and raw != 0:
            # a nonzero multiple of the full turn is a closed circle
            sweep = 2 * math.pi if self.ccw else -2 * math.pi
        if sweep == 0:
            raise DegenerateInputError("circular arc has zero sweep")
        self.sweep = sweep

    @property
    def start(self):
        return self.point_at(0.0)

    @property
    def end(self):
        return self.point_at(1.0)

    def euclidean_length(self):
        return self.radius * abs(self.sweep)

    def point_at(self, s):
        t = self.from_angle + np.asarray(s, dtype=float) * self.sweep
        return self.center + self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def project(self, pt):
        d = np.asarray(pt, dtype=float) - self.center
        t = math.atan2(d[1], d[0])
        rel = (t - self.from_angle) / self.sweep
        # unwrap into the parameter range of the arc
        period = 2 * math.pi / abs(self.sweep)
        rel = rel - period * math.floor(rel / period)
        if rel > 1.0:
            rel = 0.0 if (rel - 1.0) > (period - rel) else 1.0
        return self.point_at(rel)

    def curvature(self):
        """Signed curvature with respect to the left normal of the traversal."""
        return (1.0 if self.ccw else -1.0) / self.radius

    def transformed(self, fn):
        # only similarity transforms that keep orientation are supported
        c = fn(self.center)
        s = self.point_at(0.0)
        r = float(np.hypot(*(fn(s) - c)))
        e = fn(s) - c
        shift = math.atan2(e[1], e[0]) - self.from_angle
        return CircularArc(c, r, self.from_angle + shift, self.to_angle + shift, self.ccw)

    def reversed(self):
        return CircularArc(self.center, self.radius, self.to_angle, self.from_angle, not self.ccw)

    def to_json(self):
        return {
            "type": "circular_arc",
            "center": self.center.tolist(),
            "radius": self.radius,
            "from_angle": self.from_angle,
            "to_angle": self.to_angle,
            "ccw": self.ccw,
        }


class Sampled:
    type = "sampled"

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise InputError("sampled geometry needs at least two 2D points")
        seg = np.hypot(*np.diff(pts, axis=0).T)
        if np.any(seg == 0):
            raise DegenerateInputError("sampled geometry has coincident consecutive points")
        self.points = pts
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def euclidean_length(self):
        return float(self._cum[-1])

    def point_at(self, s):
        s = np.asarray(s, dtype=float)
        target = s * self._cum[-1]
        x = np.interp(target, self._cum, self.points[:, 0])
        y = np.interp(target, self._cum, self.points[:, 1])
        return np.stack([x, y], axis=-1)

    def project(self, pt):
        pt = np.asarray(pt, dtype=float)
        a, b = self.points[:-1], self.points[1:]
        d = b - a
        s = np.clip(np.einsum("ij,ij->i", pt - a, d) / np.einsum("ij,ij->i", d, d), 0, 1)
        cand = a + s[:, None] * d
        k = int(np.argmin(np.hypot(*(cand - pt).T)))
        return cand[k]

    def curvature(self):
        return None

    def transformed(self, fn):
        return Sampled(np.array([fn(p) for p in self.points]))

    def reversed(self):
        return Sampled(self.points[::-1].copy())

    def to_json(self):
        return {"type": "sampled", "points": self.points.tolist()}


def geometry_from_json(obj):
    if not isinstance(obj, dict) or "type" not in obj:
        raise InputError("arc geometry must be an object with a 'type' key")
    kind = obj["type"]
    keys = {
        "segment": {"type", "p", "q"},
        "circular_arc": {"type", "center", "radius", "from_angle", "to_angle", "ccw"},
        "sampled": {"type", "points"},
    }
    if kind not in keys:
        raise InputError(f"unknown geometry type {kind!r}")
    extra = set(obj) - keys[kind]
    if extra:
        raise InputError(f"unknown geometry keys {sorted(extra)}")
    missing = keys[kind] - set(obj) - {"ccw"}
    if missing:
        raise InputError(f"geometry {kind!r} is missing {sorted(missing)}")
    if kind == "segment":
        return Segment(obj["p"], obj["q"])
    if kind == "circular_arc":
        return CircularArc(obj["center"], obj["radius"], obj["from_angle"], obj["to_angle"], obj.get("ccw", True))
    return Sampled(obj["points"])


@dataclass(frozen=True, eq=False)
class Arc:
    """One boundary arc: ``A`` (data +inf), ``B`` (-inf) or ``C`` (continuous)."""

    id: str
    kind: str
    geometry: object
    data: _expr.Expr | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id or any(ch.isspace() for ch in self.id):
            raise InputError(f"arc id must be a non-empty string without whitespace, got {self.id!r}")
        if self.kind not in ARC_KINDS:
            raise InputError(f"arc {self.id}: kind must be one of A, B, C")
        if self.kind == "C" and self.data is None:
            raise InputError(f"arc {self.id}: C arcs need a 'data' expression")
        if self.kind != "C" and self.data is not None:
            raise InputError(f"arc {self.id}: only C arcs carry data")

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InputError("arc must be an object")
        extra = set(obj) - {"id", "kind", "geometry", "data"}
        if extra:
            raise InputError(f"unknown arc keys {sorted(extra)}")
        for key in ("id", "kind", "geometry"):
            if key not in obj:
                raise InputError(f"arc is missing {key!r}")
        data = obj.get("data")
        if data is not None:
            data = _expr.parse(data)
        return cls(obj["id"], obj["kind"], geometry_from_json(obj["geometry"]), data)

    def to_json(self):
        out = {"id": self.id, "kind": self.kind, "geometry": self.geometry.to_json()}
        if self.data is not None:
            out["data"] = self.data.text
        return out

    @property
    def start(self):
        return self.geometry.start

    @property
    def end(self):
        return self.geometry.end

    def sample(self, n):
        """``n + 1`` points at uniform arc-length parameters."""
        return self.geometry.point_at(np.linspace(0.0, 1.0, int(n) + 1))

    def sample_spacing(self, h):
        n = max(1, int(math.ceil(self.geometry.euclidean_length() / h - 1e-9)))
        return self.sample(n)

    def length(self, metric=EUCLIDEAN):
        """Metric length; closed form for Euclidean segments and circles."""
        if metric.is_euclidean:
            return self.geometry.euclidean_length()
        if isinstance(self.geometry, Sampled):
            return metric_length(self.geometry.points, metric)
        return metric_length(self.sample(_LENGTH_SAMPLES), metric)

    def with_kind(self, kind):
        data = self.data
        if kind == "C" and data is None:
            data = _expr.parse("0")
        if kind != "C":
            data = None
        return Arc(self.id, kind, self.geometry, data)

    def transformed(self, fn, data=None):
        return Arc(self.id, self.kind, self.geometry.transformed(fn), self.data if data is None else data)
