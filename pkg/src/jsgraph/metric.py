"""Conformal Riemannian metrics ``lambda^2 (dx^2 + dy^2)`` on planar domains.

Lengths use three-point Gauss quadrature per polyline segment, areas a
centroid (or edge-midpoint) rule per triangle.  Geodesic curvature follows
the conformal change formula

    kappa_sigma = (kappa_e - d_nu log lambda) / lambda

with ``nu`` the Euclidean unit normal on the chosen side of the curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import expr as _expr
from .errors import DegenerateInputError, InputError, MetricDomainError

_GAUSS_NODES = np.array([0.5 - 0.5 * np.sqrt(3.0 / 5.0), 0.5, 0.5 + 0.5 * np.sqrt(3.0 / 5.0)])
_GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0

KINDS = ("euclidean", "poincare_disk", "custom")


@dataclass(frozen=True)
class ConformalMetric:
    """Metric ``lambda(p)^2 |dp|^2``.

    ``poincare_disk`` with radius ``R`` uses ``lambda = 2R / (R^2 - |p|^2)``
    (curvature -1); ``custom`` evaluates ``lambda`` from an expression in
    ``x, y``.
    """

    kind: str = "euclidean"
    radius: float = 1.0
    expression: str | None = None
    _lam: object = field(default=None, repr=False, compare=False)
    _dlam: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown metric kind {self.kind!r}")
        if self.kind == "poincare_disk" and not self.radius > 0:
            raise InputError("poincare_disk radius must be positive")
        if self.kind == "custom":
            if not self.expression:
                raise InputError("custom metric needs a 'lambda' expression")
            lam = _expr.parse(self.expression)
            object.__setattr__(self, "_lam", lam)
            object.__setattr__(self, "_dlam", (lam.diff("x"), lam.diff("y")))

    @classmethod
    def euclidean(cls):
        return cls("euclidean")

    @classmethod
    def poincare_disk(cls, radius=1.0):
        return cls("poincare_disk", radius=float(radius))

    @classmethod
    def custom(cls, expression):
        return cls("custom", expression=expression)

    @classmethod
    def from_json(cls, obj):
        if obj is None:
            return cls.euclidean()
        if not isinstance(obj, dict) or "kind" not in obj:
            raise InputError("metric must be an object with a 'kind' key")
        kind = obj["kind"]
        allowed = {"euclidean": {"kind"}, "poincare_disk": {"kind", "radius"}, "custom": {"kind", "lambda"}}
        if kind not in allowed:
            raise InputError(f"unknown metric kind {kind!r}")
        extra = set(obj) - allowed[kind]
        if extra:
            raise InputError(f"unknown metric keys {sorted(extra)}")
        if kind == "euclidean":
            return cls.euclidean()
        if kind == "poincare_disk":
            return cls.poincare_disk(float(obj.get("radius", 1.0)))
        return cls.custom(obj["lambda"])

    def to_json(self):
        if self.kind == "euclidean":
            return {"kind": "euclidean"}
        if self.kind == "poincare_disk":
            return {"kind": "poincare_disk", "radius": self.radius}
        return {"kind": "custom", "lambda": self.expression}

    @property
    def is_euclidean(self):
        return self.kind == "euclidean"

    def _check(self, pts):
        if self.kind == "poincare_disk":
            r2 = np.einsum("...i,...i->...", pts, pts)
            if np.any(~(r2 < self.radius**2)):
                raise MetricDomainError(
                    f"point outside the Poincare disk of radius {self.radius}"
                )

    def lam(self, pts):
        """Conformal factor at points of shape ``(..., 2)``."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "euclidean":
            return np.ones(pts.shape[:-1])
        self._check(pts)
        if self.kind == "poincare_disk":
            r2 = np.einsum("...i,...i->...", pts, pts)
            return 2.0 * self.radius / (self.radius**2 - r2)
        val = self._lam(pts[..., 0], pts[..., 1])
        if np.any(~np.isfinite(val)) or np.any(val <= 0):
            raise MetricDomainError(f"lambda = {self.expression} is not positive and finite here")
        return val

    def dlog_lam(self, pts):
        """Euclidean gradient of ``log lambda``, shape ``(..., 2)``."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "euclidean":
            return np.zeros(pts.shape)
        if self.kind == "poincare_disk":
            self._check(pts)
            r2 = np.einsum("...i,...i->...", pts, pts)
            return 2.0 * pts / (self.radius**2 - r2)[..., None]
        lam = self.lam(pts)
        gx = self._dlam[0](pts[..., 0], pts[..., 1])
        gy = self._dlam[1](pts[..., 0], pts[..., 1])
        return np.stack([gx / lam, gy / lam], axis=-1)


EUCLIDEAN = ConformalMetric.euclidean()


def _as_curve(curve):
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError("curve must be an (n, 2) array of points")
    if len(pts) < 2:
        raise InputError("curve needs at least two points")
    return pts


def segment_lengths(curve, metric=EUCLIDEAN):
    """Metric length of every segment of a polyline."""
    pts = _as_curve(curve)
    a, b = pts[:-1], pts[1:]
    d = b - a
    elen = np.hypot(d[:, 0], d[:, 1])
    if metric.is_euclidean:
        return elen
    q = a[:, None, :] + _GAUSS_NODES[None, :, None] * d[:, None, :]
    return elen * (metric.lam(q) @ _GAUSS_WEIGHTS)


def metric_length(curve, metric=EUCLIDEAN):
    """Integral of ``lambda ds`` along a polyline."""
    return float(np.sum(segment_lengths(curve, metric)))


def triangle_areas(tris):
    """Signed Euclidean areas of triangles given as ``(T, 3, 2)`` coordinates."""
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 2)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def metric_area(region, metric=EUCLIDEAN, rule="centroid"):
    """Metric area of a triangle list ``(T, 3, 2)``.

    ``rule`` is ``"centroid"`` (one point) or ``"midpoint"`` (three edge
    midpoints, exact for quadratics).
    """
    tris = np.asarray(region, dtype=float)
    if tris.size == 0:
        return 0.0
    tris = tris.reshape(-1, 3, 2)
    area = np.abs(triangle_areas(tris))
    scale = np.max(np.abs(tris)) if tris.size else 1.0
    if np.any(area <= 1e-14 * max(scale, 1.0) ** 2):
        raise DegenerateInputError("degenerate triangle in region")
    if metric.is_euclidean:
        return float(np.sum(area))
    if rule == "centroid":
        lam2 = metric.lam(tris.mean(axis=1)) ** 2
    elif rule == "midpoint":
        mids = 0.5 * (tris + np.roll(tris, -1, axis=1))
        lam2 = np.mean(metric.lam(mids) ** 2, axis=1)
    else:
        raise InputError(f"unknown quadrature rule {rule!r}")
    return float(np.sum(area * lam2))


def _normal(tangent, side):
    # left normal is the tangent rotated by +90 degrees
    n = np.stack([-tangent[..., 1], tangent[..., 0]], axis=-1)
    if side == "left":
        return n
    if side == "right":
        return -n
    raise InputError(f"side must be 'left' or 'right', got {side!r}")


def euclidean_curvatures(curve, side="left"):
    """Signed circumscribed-circle curvature at every interior sample.

    Positive when the curve bends toward the normal on ``side``.  Returns the
    curvatures and the unit normals used.
    """
    pts = _as_curve(curve)
    if len(pts) < 3:
        raise InputError("curvature needs at least three points")
    p0, p1, p2 = pts[:-2], pts[1:-1], pts[2:]
    a = p1 - p0
    b = p2 - p1
    c = p2 - p0
    la = np.hypot(a[:, 0], a[:, 1])
    lb = np.hypot(b[:, 0], b[:, 1])
    lc = np.hypot(c[:, 0], c[:, 1])
    if np.any(la == 0) or np.any(lb == 0):
        raise DegenerateInputError("coincident consecutive points in curve")
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    # 2 sin(turn) / chord, signed toward the left
    kappa_left = 2.0 * cross / (la * lb * lc)
    tangent = a / la[:, None] + b / lb[:, None]
    tn = np.hypot(tangent[:, 0], tangent[:, 1])
    tangent = np.where(tn[:, None] > 0, tangent / np.where(tn > 0, tn, 1.0)[:, None], c / lc[:, None])
    nu = _normal(tangent, side)
    kappa = kappa_left if side == "left" else -kappa_left
    return kappa, nu


def geodesic_curvatures(curve, metric=EUCLIDEAN, side="left"):
    """``kappa_sigma`` at every interior sample of a polyline."""
    pts = _as_curve(curve)
    kappa_e, nu = euclidean_curvatures(pts, side)
    if metric.is_euclidean:
        return kappa_e
    mid = pts[1:-1]
    dnu = np.einsum("ij,ij->i", metric.dlog_lam(mid), nu)
    return (kappa_e - dnu) / metric.lam(mid)


def geodesic_curvature(curve, metric=EUCLIDEAN, index=1, side="left"):
    """``kappa_sigma`` at sample ``index`` (needs neighbours on both sides)."""
    pts = _as_curve(curve)
    if not 0 < index < len(pts) - 1:
        raise InputError("index must have neighbours on both sides")
    return float(geodesic_curvatures(pts[index - 1 : index + 2], metric, side)[0])


def geodesic_path(p, q, metric=EUCLIDEAN, n=48, gtol=1e-10):
    """Two-point geodesic between ``p`` and ``q`` as an ``(n + 1, 2)`` polyline.

    Minimizes the discrete energy ``sum lambda(mid)^2 |dp|^2`` with the
    endpoints fixed, starting from the straight chord.  Returns ``None`` when
    the minimization does not converge.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    t = np.linspace(0.0, 1.0, n + 1)[:, None]
    chord = p + t * (q - p)
    if metric.is_euclidean:
        return chord

    def energy(flat):
        pts = chord.copy()
        pts[1:-1] = flat.reshape(-1, 2)
        d = pts[1:] - pts[:-1]
        m = 0.5 * (pts[1:] + pts[:-1])
        try:
            lam2 = metric.lam(m) ** 2
            glog = metric.dlog_lam(m)
        except MetricDomainError:
            return np.inf, np.zeros_like(flat)
        d2 = np.einsum("ij,ij->i", d, d)
        e = n * float(np.sum(lam2 * d2))
        # derivative of each segment term with respect to its two endpoints
        common = (lam2 * d2)[:, None] * glog
        g_left = common - 2.0 * lam2[:, None] * d
        g_right = common + 2.0 * lam2[:, None] * d
        grad = np.zeros_like(pts)
        grad[:-1] += g_left
        grad[1:] += g_right
        return e, n * grad[1:-1].ravel()

    res = minimize(energy, chord[1:-1].ravel(), jac=True, method="L-BFGS-B",
                   options={"maxiter": 2000, "gtol": gtol, "ftol": 1e-15})
    e0, g0 = energy(res.x)
    if not np.isfinite(e0):
        return None
    scale = max(1.0, e0)
    if np.max(np.abs(g0)) > 1e-6 * scale:
        return None
    out = chord.copy()
    out[1:-1] = res.x.reshape(-1, 2)
    return out
