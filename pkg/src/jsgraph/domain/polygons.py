"""Admissible polygons: simple closed polygons whose vertices are domain
vertices.

Sides are geodesic chords (straight in the Euclidean metric, numerically
solved otherwise) in the minimal and translating modes, or circular arcs of
curvature ``+-H`` in the CMC mode.  A side that runs along a boundary arc is
marked with that arc, and every side records the A/B arcs it covers so that
``alpha`` and ``beta`` can be accumulated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import EnumerationLimitError, UnsupportedModeError
from ..metric import EUCLIDEAN, geodesic_path, metric_area, metric_length
from .arcs import CircularArc, Sampled, Segment

DEFAULT_VERTEX_CAP = 16
SIDE_SAMPLES = 64

# geometric predicates ----------------------------------------------------


def point_segment_distance(pts, a, b):
    """Distance from every point in ``pts`` to every segment ``a[k]b[k]``;
    returns shape ``(len(pts), len(a))``."""
    pts = np.asarray(pts, dtype=float)
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    rel = pts[:, None, :] - a[None, :, :]
    s = np.clip(np.einsum("pkj,kj->pk", rel, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    proj = a[None] + s[..., None] * d[None]
    return np.hypot(*(pts[:, None, :] - proj).transpose(2, 0, 1))


def distance_to_polyline(pts, poly, closed=False):
    poly = np.asarray(poly, dtype=float)
    a = poly if closed else poly[:-1]
    b = np.roll(poly, -1, axis=0) if closed else poly[1:]
    return point_segment_distance(pts, a, b).min(axis=1)


def winding_numbers(pts, poly):
    """Winding number of a closed polyline (first point not repeated)."""
    pts = np.asarray(pts, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    ax = a[None, :, 0] - pts[:, None, 0]
    ay = a[None, :, 1] - pts[:, None, 1]
    bx = b[None, :, 0] - pts[:, None, 0]
    by = b[None, :, 1] - pts[:, None, 1]
    cross = ax * by - ay * bx
    up = (ay <= 0) & (by > 0) & (cross > 0)
    down = (ay > 0) & (by <= 0) & (cross < 0)
    return np.sum(up, axis=1) - np.sum(down, axis=1)


def points_in_closed_region(pts, poly, tol):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    inside = winding_numbers(pts, poly) != 0
    if np.all(inside):
        return inside
    near = distance_to_polyline(pts[~inside], poly, closed=True) <= tol
    inside[~inside] = near
    return inside


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def segments_intersect(p1, p2, q1, q2, eps):
    """Pairwise closed-segment intersection of ``(m, 2)`` and ``(n, 2)`` sets;
    returns an ``(m, n)`` boolean array."""
    P1, P2 = p1[:, None, :], p2[:, None, :]
    Q1, Q2 = q1[None, :, :], q2[None, :, :]
    d1 = _cross(Q1, Q2, P1)
    d2 = _cross(Q1, Q2, P2)
    d3 = _cross(P1, P2, Q1)
    d4 = _cross(P1, P2, Q2)
    proper = (((d1 > eps) & (d2 < -eps)) | ((d1 < -eps) & (d2 > eps))) & (
        ((d3 > eps) & (d4 < -eps)) | ((d3 < -eps) & (d4 > eps))
    )

    def on_seg(a, b, c, d):
        # c within the bounding box of ab and (nearly) collinear
        return (
            (np.abs(d) <= eps)
            & (np.minimum(a[..., 0], b[..., 0]) - 1e-12 <= c[..., 0] + 0 * d)
            & (c[..., 0] <= np.maximum(a[..., 0], b[..., 0]) + 1e-12)
            & (np.minimum(a[..., 1], b[..., 1]) - 1e-12 <= c[..., 1])
            & (c[..., 1] <= np.maximum(a[..., 1], b[..., 1]) + 1e-12)
        )

    touch = on_seg(Q1, Q2, P1, d1) | on_seg(Q1, Q2, P2, d2) | on_seg(P1, P2, Q1, d3) | on_seg(P1, P2, Q2, d4)
    return proper | touch


def polyline_self_intersects(poly, closed=True, eps=1e-14):
    poly = np.asarray(poly, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0) if closed else None
    if not closed:
        a, b = poly[:-1], poly[1:]
    n = len(a)
    hit = segments_intersect(a, b, a, b, eps)
    idx = np.arange(n)
    diff = np.abs(idx[:, None] - idx[None, :])
    adjacent = diff <= 1
    if closed:
        adjacent |= diff == n - 1
    hit &= ~adjacent
    return bool(np.any(hit))


# sides and polygons ------------------------------------------------------


def _shoelace_open(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def _area_integral(geom):
    """``1/2 * integral (x dy - y dx)`` along a geometry in its direction."""
    if isinstance(geom, Segment):
        return 0.5 * float(geom.p[0] * geom.q[1] - geom.q[0] * geom.p[1])
    if isinstance(geom, CircularArc):
        cx, cy = geom.center
        r = geom.radius
        t0 = geom.from_angle
        t1 = t0 + geom.sweep
        return 0.5 * (
            cx * r * (math.sin(t1) - math.sin(t0)) - cy * r * (math.cos(t1) - math.cos(t0)) + r * r * (t1 - t0)
        )
    return _shoelace_open(geom.points)


@dataclass(eq=False)
class Side:
    """An oriented polygon side from vertex ``i`` to vertex ``j``."""

    uid: int
    i: int
    j: int
    kind: str  # "arc", "chord" or "cmc"
    geometry: object
    points: np.ndarray
    length: float
    area_term: float
    arc_index: int | None = None
    curvature: float = 0.0
    covers: tuple = ()
    indeterminate: bool = False

    def reversed(self):
        return Side(
            uid=self.uid,
            i=self.j,
            j=self.i,
            kind=self.kind,
            geometry=self.geometry.reversed() if self.geometry is not None else None,
            points=self.points[::-1].copy(),
            length=self.length,
            area_term=-self.area_term,
            arc_index=self.arc_index,
            curvature=-self.curvature,
            covers=self.covers,
            indeterminate=self.indeterminate,
        )

    def describe(self, spec):
        out = {"from": vertex_label(spec, self.i), "to": vertex_label(spec, self.j), "type": self.kind}
        if self.arc_index is not None:
            out["arc"] = spec.arcs[self.arc_index].id
        if self.kind == "cmc":
            out["curvature"] = self.curvature
        if self.indeterminate:
            out["indeterminate"] = True
        return out


@dataclass(eq=False)
class AdmissiblePolygon:
    vertex_indices: tuple
    sides: tuple
    is_whole_boundary: bool = False
    alpha: float = 0.0
    beta: float = 0.0
    ell: float = 0.0
    area: float = 0.0
    indeterminate: bool = False
    id: str = ""
    sort_key: tuple = field(default=(), repr=False)


def vertex_label(spec, i):
    n = spec.n_vertices
    return f"{spec.arcs[(i - 1) % n].id}|{spec.arcs[i].id}"


class _SideFactory:
    def __init__(self, spec, mode, H):
        self.spec = spec
        self.mode = mode
        self.H = H
        self.metric = spec.metric
        self.verts = spec.vertices
        self.poly, _ = spec.boundary_polyline
        self.tol = 1e-9 * spec.scale
        self.uid = itertools.count()
        # A/B arcs with a few samples each, for coverage tests
        self.ab = [
            (k, a.sample(32)) for k, a in enumerate(spec.arcs) if a.kind in ("A", "B")
        ]
        self.arc_lengths = [a.length(self.metric) for a in spec.arcs]
        self._boundary = {}

    def _covers(self, pts, own=None):
        cov = set() if own is None else {own}
        for k, samples in self.ab:
            if k == own:
                continue
            if np.all(distance_to_polyline(samples, pts) <= 1e-7 * self.spec.scale):
                cov.add(k)
        return tuple(sorted(cov))

    def _contained(self, pts):
        return bool(np.all(points_in_closed_region(pts, self.poly, max(self.tol, 1e-9))))

    def boundary_side(self, k):
        if k not in self._boundary:
            self._boundary[k] = self._make_boundary_side(k)
        return self._boundary[k]

    def _make_boundary_side(self, k):
        a = self.spec.arcs[k]
        n = self.spec.n_vertices
        pts = a.sample(SIDE_SAMPLES)
        return Side(
            uid=next(self.uid),
            i=k,
            j=(k + 1) % n,
            kind="arc",
            geometry=a.geometry,
            points=pts,
            length=self.arc_lengths[k],
            area_term=_area_integral(a.geometry) if self.metric.is_euclidean else _shoelace_open(a.sample(4096)),
            arc_index=k,
            curvature=a.geometry.curvature() or 0.0,
            covers=self._covers(pts, own=k if a.kind in ("A", "B") else None),
        )

    def _arc_is_geodesic(self, k):
        from .checks import arc_curvatures

        kap = arc_curvatures(self.spec, k)
        return bool(np.max(np.abs(kap)) <= 1e-6 / self.spec.scale)

    def chord(self, i, j):
        """Geodesic side between vertices ``i`` and ``j`` (or the boundary arc
        itself when the two are joined by a geodesic arc)."""
        n = self.spec.n_vertices
        for k in range(n):
            if {k, (k + 1) % n} == {i, j} and self._arc_is_geodesic(k):
                side = self.boundary_side(k)
                return side if side.i == i else side.reversed()
        p, q = self.verts[i], self.verts[j]
        if self.metric.is_euclidean:
            geom = Segment(p, q)
            pts = geom.point_at(np.linspace(0, 1, SIDE_SAMPLES + 1))
            length = geom.euclidean_length()
            indeterminate = False
        else:
            path = geodesic_path(p, q, self.metric, n=SIDE_SAMPLES)
            indeterminate = path is None
            if path is None:
                path = np.array([p + t * (q - p) for t in np.linspace(0, 1, SIDE_SAMPLES + 1)])
            geom = Sampled(path)
            pts = path
            length = metric_length(path, self.metric)
        if not self._contained(pts):
            return None
        return Side(
            uid=next(self.uid),
            i=i,
            j=j,
            kind="chord",
            geometry=geom,
            points=pts,
            length=length,
            area_term=_area_integral(geom),
            covers=self._covers(pts),
            indeterminate=indeterminate,
        )

    def cmc_arcs(self, i, j):
        """Both minor arcs of radius ``1/H`` from vertex ``i`` to ``j``."""
        p, q = self.verts[i], self.verts[j]
        r = 1.0 / self.H
        d = q - p
        dist = float(np.hypot(*d))
        if not dist < 2.0 * r:
            return []
        m = 0.5 * (p + q)
        nrm = np.array([-d[1], d[0]]) / dist
        off = math.sqrt(max(r * r - 0.25 * dist * dist, 0.0))
        out = []
        for sgn in (1.0, -1.0):
            c = m + sgn * off * nrm
            a0 = math.atan2(p[1] - c[1], p[0] - c[0])
            a1 = math.atan2(q[1] - c[1], q[0] - c[0])
            geom = CircularArc(c, r, a0, a1, ccw=sgn > 0)
            if abs(geom.sweep) > math.pi + 1e-12:
                continue
            pts = geom.point_at(np.linspace(0, 1, SIDE_SAMPLES + 1))
            pts[0], pts[-1] = p, q
            if not self._contained(pts):
                continue
            along = self._along_boundary(i, j, pts)
            if along is not None:
                side = self.boundary_side(along)
                out.append(side if side.i == i else side.reversed())
                continue
            out.append(
                Side(
                    uid=next(self.uid),
                    i=i,
                    j=j,
                    kind="cmc",
                    geometry=geom,
                    points=pts,
                    length=r * abs(geom.sweep),
                    area_term=_area_integral(geom),
                    curvature=geom.curvature(),
                    covers=self._covers(pts),
                )
            )
        return out

    def _along_boundary(self, i, j, pts):
        n = self.spec.n_vertices
        for k in range(n):
            if {k, (k + 1) % n} != {i, j}:
                continue
            samples = self.spec.arcs[k].sample(32)
            if np.all(distance_to_polyline(samples, pts) <= 1e-7 * self.spec.scale):
                return k
        return None


def _sides_compatible(s, t, eps):
    """True when two sides meet only at shared endpoint vertices."""
    P, Q = s.points, t.points
    hit = segments_intersect(P[:-1], P[1:], Q[:-1], Q[1:], eps)
    shared = {s.i, s.j} & {t.i, t.j}
    if not shared:
        return not bool(np.any(hit))
    m, n = len(P) - 1, len(Q) - 1
    allow = np.zeros_like(hit)
    for v in shared:
        ps = 0 if s.i == v else m - 1
        qs = 0 if t.i == v else n - 1
        # incident segments may touch at v unless they run back along each other
        pa = P[0] if s.i == v else P[-1]
        pb = P[1] if s.i == v else P[-2]
        qb = Q[1] if t.i == v else Q[-2]
        u1 = (pb - pa) / np.hypot(*(pb - pa))
        u2 = (qb - pa) / np.hypot(*(qb - pa))
        if abs(u1[0] * u2[1] - u1[1] * u2[0]) > 1e-9 or np.dot(u1, u2) < 0:
            allow[ps, qs] = True
    return not bool(np.any(hit & ~allow))


def _finish(spec, verts, sides, whole, H, factory_lengths):
    metric = spec.metric
    covered = set()
    for s in sides:
        covered.update(s.covers)
    alpha = sum(factory_lengths[k] for k in covered if spec.arcs[k].kind == "A")
    beta = sum(factory_lengths[k] for k in covered if spec.arcs[k].kind == "B")
    ell = sum(s.length for s in sides)
    signed = sum(s.area_term for s in sides)
    if signed < 0:
        verts = (verts[0],) + tuple(reversed(verts[1:]))
        sides = tuple(s.reversed() for s in reversed(sides))
        signed = -signed
    if metric.is_euclidean:
        area = signed
    else:
        area = region_metric_area(np.vstack([s.points[:-1] for s in sides]), metric)
    k = verts.index(min(verts))
    verts = verts[k:] + verts[:k]
    sides = sides[k:] + sides[:k]
    labels = [vertex_label(spec, v) for v in verts]
    if whole:
        pid = "boundary"
    else:
        pid = "P[" + ",".join(labels) + "]"
        if any(s.kind == "cmc" or (s.kind == "arc" and s.curvature) for s in sides) or len(verts) == 2:
            sig = "".join("+" if s.curvature > 0 else ("-" if s.curvature < 0 else "0") for s in sides)
            pid += sig
    coords = tuple(sorted(tuple(np.round(spec.vertices[v], 12)) for v in verts))
    sig = tuple(sorted((round(s.length, 10), round(s.curvature, 10)) for s in sides))
    key = (0 if whole else 1, len(verts), coords, sig)
    return AdmissiblePolygon(
        vertex_indices=tuple(verts),
        sides=tuple(sides),
        is_whole_boundary=whole,
        alpha=float(alpha),
        beta=float(beta),
        ell=float(ell),
        area=float(area),
        indeterminate=any(s.indeterminate for s in sides),
        id=pid,
        sort_key=key,
    )


def region_metric_area(boundary, metric, h=None):
    """Metric area of the region bounded by a closed polyline."""
    import triangle

    boundary = np.asarray(boundary, dtype=float)
    if metric.is_euclidean:
        x, y = boundary[:, 0], boundary[:, 1]
        return abs(0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))
    n = len(boundary)
    seg = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    ext = np.ptp(boundary, axis=0).max()
    h = h or ext / 40.0
    tri = triangle.triangulate({"vertices": boundary, "segments": seg}, f"pq30Qa{0.433 * h * h:.12g}")
    return metric_area(tri["vertices"][tri["triangles"]], metric, rule="midpoint")


def _convex_position(verts):
    n = len(verts)
    if n < 3:
        return False
    for k in range(n):
        o, a, b = verts[k], verts[(k + 1) % n], verts[(k + 2) % n]
        if (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) <= 0:
            return False
    return True


def enumerate_admissible_polygons(spec, mode="minimal", H=None, vertex_cap=DEFAULT_VERTEX_CAP):
    """All admissible polygons of ``spec`` in canonical order.

    ``mode`` is ``minimal``, ``translating`` or ``cmc`` (the last needs a
    positive ``H`` and a Euclidean metric).  The boundary itself is always the
    first record.
    """
    if mode not in ("minimal", "translating", "cmc"):
        raise UnsupportedModeError(f"unknown mode {mode!r}")
    n = spec.n_vertices
    if n > vertex_cap:
        raise EnumerationLimitError(
            f"{n} domain vertices exceed the enumeration cap of {vertex_cap}"
        )
    if mode == "cmc":
        if not spec.metric.is_euclidean:
            raise UnsupportedModeError("CMC polygons are only supported for the Euclidean metric")
        if H is None or not H > 0:
            raise UnsupportedModeError("CMC mode needs a positive H")
    factory = _SideFactory(spec, mode, H)
    lengths = factory.arc_lengths
    boundary_sides = tuple(factory.boundary_side(k) for k in range(n))
    polygons = [_finish(spec, tuple(range(n)), boundary_sides, True, H, lengths)]

    # candidate sides per unordered vertex pair
    cands = {}
    for i, j in itertools.combinations(range(n), 2):
        if mode == "cmc":
            sides = factory.cmc_arcs(i, j)
        else:
            c = factory.chord(i, j)
            sides = [c] if c is not None else []
        if sides:
            cands[(i, j)] = sides

    eps = 1e-13 * spec.scale**2
    boundary_uids = {s.uid for s in boundary_sides}
    seen = {frozenset(s.uid for s in boundary_sides)}

    def add(verts, sides):
        key = frozenset(s.uid for s in sides)
        if key in seen:
            return
        seen.add(key)
        poly = _finish(spec, tuple(verts), tuple(sides), False, H, lengths)
        if poly.area <= 1e-12 * spec.scale**2:
            return
        # a chord polygon identical to the boundary is the boundary record
        if key <= boundary_uids and len(sides) == n:
            return
        polygons.append(poly)

    if mode != "cmc" and spec.metric.is_euclidean and len(cands) == n * (n - 1) // 2 and _convex_position(spec.vertices):
        for size in range(3, n + 1):
            for subset in itertools.combinations(range(n), size):
                sides = []
                for a, b in zip(subset, subset[1:] + subset[:1]):
                    s = cands[(min(a, b), max(a, b))][0]
                    sides.append(s if s.i == a else s.reversed())
                add(subset, sides)
    else:
        _dfs_cycles(n, cands, eps, add)
    polygons.sort(key=lambda p: p.sort_key)
    return polygons


def _dfs_cycles(n, cands, eps, add):
    adj = {v: [] for v in range(n)}
    for (i, j), sides in cands.items():
        for s in sides:
            adj[i].append((j, s))
            adj[j].append((i, s.reversed()))
    compat_cache = {}

    def compatible(s, t):
        key = (min(s.uid, t.uid), max(s.uid, t.uid))
        if key not in compat_cache:
            compat_cache[key] = _sides_compatible(s, t, eps)
        return compat_cache[key]

    def extend(start, path, sides):
        v = path[-1]
        for w, s in adj[v]:
            if sides and s.uid == sides[-1].uid:
                continue
            if w == start:
                if len(sides) < 1 or (len(sides) == 1 and s.uid == sides[0].uid):
                    continue
                if all(compatible(s, t) for t in sides):
                    add(path, sides + [s])
                continue
            if w < start or w in path:
                continue
            if all(compatible(s, t) for t in sides):
                extend(start, path + [w], sides + [s])

    for start in range(n):
        extend(start, [start], [])
