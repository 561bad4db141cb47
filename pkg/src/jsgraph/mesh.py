"""Triangular meshes with boundary-arc markers, grading and uniform refinement.

Meshes are built with Shewchuk's Triangle (through the ``triangle`` package)
from a boundary polyline whose vertices lie exactly on the arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, MeshError

INTERIOR = -1
MIN_ANGLE = 20.0
SIZE_RAMP = 0.5


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Conforming triangulation of a domain.

    ``vertex_arc[v]`` is the arc index for vertices on an arc interior, the
    domain-vertex index encoded as ``-2 - i`` for domain vertices, and
    ``INTERIOR`` otherwise.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray  # (m, 3): i, j, arc index
    vertex_arc: np.ndarray
    arc_ids: tuple
    h: float
    spec: object = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("vertices", "triangles", "boundary_edges", "vertex_arc"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def boundary_mask(self):
        return self.vertex_arc != INTERIOR

    @property
    def interior_nodes(self):
        return np.flatnonzero(~self.boundary_mask)

    @property
    def boundary_nodes(self):
        return np.flatnonzero(self.boundary_mask)

    def is_domain_vertex(self):
        return self.vertex_arc <= -2

    def domain_vertex_index(self, v):
        m = int(self.vertex_arc[v])
        return -2 - m if m <= -2 else None

    def marker(self, v):
        m = int(self.vertex_arc[v])
        if m == INTERIOR:
            return "i"
        if m <= -2:
            return f"v:{-2 - m}"
        return f"a:{self.arc_ids[m]}"

    def areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def edges(self):
        """Unique undirected edges as a sorted ``(E, 2)`` array."""
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def edge_lengths(self, edges=None):
        e = self.edges() if edges is None else np.asarray(edges)[:, :2]
        d = self.vertices[e[:, 1]] - self.vertices[e[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def min_angles(self):
        p = self.vertices[self.triangles]
        out = np.full(len(p), np.inf)
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cosang = np.einsum("ij,ij->i", a, b) / (np.hypot(*a.T) * np.hypot(*b.T))
            out = np.minimum(out, np.degrees(np.arccos(np.clip(cosang, -1, 1))))
        return out

    def arc_distance(self, kinds=("A", "B")):
        """Euclidean distance from every vertex to the union of arcs of the
        given kinds (``inf`` when there are none)."""
        from .domain.polygons import distance_to_polyline

        if self.spec is None:
            raise MeshError("mesh carries no domain description")
        dist = np.full(self.n_vertices, np.inf)
        for a in self.spec.arcs:
            if a.kind in kinds:
                pts = a.sample(512)
                dist = np.minimum(dist, distance_to_polyline(self.vertices, pts))
        return dist


def _size_field(spec, h, grading, ramp=False):
    """Target edge length: ``h/grading`` within ``2h`` of A/B arcs, ``h``
    elsewhere.

    With ``ramp`` the size grows linearly at slope ``SIZE_RAMP`` past the
    band instead of jumping.  This is used for the boundary polyline: the
    triangulator may not split boundary segments, so an abrupt jump in
    segment length there would leave slivers.
    """
    fine = h / grading
    ab = [a for a in spec.arcs if a.kind in ("A", "B")]
    if grading == 1.0 or not ab:
        return lambda pts: np.full(len(pts), h)
    from scipy.spatial import cKDTree

    # dense samples; the nearest-sample distance is within fine/16 of the true one
    tree = cKDTree(np.vstack([a.sample_spacing(fine / 8) for a in ab]))

    def size(pts):
        d, _ = tree.query(pts)
        excess = d - 2 * h * (1 + 1e-9)
        if ramp:
            return np.minimum(h, fine + SIZE_RAMP * np.maximum(excess, 0.0))
        return np.where(excess <= 0, fine, h)

    return size


def _boundary_points(spec, size):
    pts, marks, segs = [], [], []
    for k, a in enumerate(spec.arcs):
        s = a.geometry.point_at(_arc_params(a, size))
        n0 = len(pts)
        for m, p in enumerate(s[:-1]):
            pts.append(p)
            marks.append(-2 - k if m == 0 else k)
        segs.extend((n0 + m, n0 + m + 1) for m in range(len(s) - 1))
    segs[-1] = (segs[-1][0], 0)
    return np.array(pts), np.array(marks), np.array(segs)


def _arc_params(arc, size):
    """Arc parameters in [0, 1] spaced by the local target size."""
    length = arc.geometry.euclidean_length()
    fine = np.linspace(0.0, 1.0, 2049)
    local = size(arc.geometry.point_at(fine))
    # number of cells = integral of 1/size along the arc
    density = np.concatenate([[0.0], np.cumsum(0.5 * (1 / local[1:] + 1 / local[:-1]) * np.diff(fine) * length)])
    m = max(2, int(math.ceil(density[-1] - 1e-9)))
    return np.interp(np.linspace(0.0, density[-1], m + 1), density, fine)


def _lattice_frame(spec, pts):
    """Origin and axes of the interior lattice: aligned with the first A/B
    segment, else the first segment, else the coordinate axes."""
    ref = next((a for a in spec.arcs if a.kind in ("A", "B") and a.geometry.type == "segment"), None)
    ref = ref or next((a for a in spec.arcs if a.geometry.type == "segment"), None)
    origin = ref.start if ref is not None else pts[0]
    e1 = np.array([1.0, 0.0]) if ref is None else (ref.end - ref.start) / ref.geometry.euclidean_length()
    return origin, e1, np.array([-e1[1], e1[0]])


def _seed_points(spec, h, grading, size, pts, marks):
    """Interior seed vertices for the triangulator.

    Rows parallel to every A/B arc at spacing ``h/grading`` fill the graded
    band, and a square lattice of spacing ``h`` aligned with a boundary arc
    fills the rest.  Nodes lined up with the blow-up arcs matter because the
    linearized operator there is far stiffer along the arc than across it.
    """
    from scipy.spatial import cKDTree

    fine = h / grading
    cands, spacing = [], []
    if grading > 1.0:
        for k, a in enumerate(spec.arcs):
            if a.kind not in ("A", "B"):
                continue
            ring = pts[marks == k]
            if len(ring) < 2:
                continue
            nxt = np.vstack([ring[1:], a.end])
            prv = np.vstack([a.start, ring[:-1]])
            tang = nxt - prv
            tang /= np.hypot(tang[:, 0], tang[:, 1])[:, None]
            nrm = np.column_stack([-tang[:, 1], tang[:, 0]])
            for j in range(1, int(math.floor(2 * h / fine + 1e-9)) + 1):
                cands.append(ring + j * fine * nrm)
                spacing.append(np.full(len(ring), fine))
    origin, e1, e2 = _lattice_frame(spec, pts)
    rel = pts - origin
    lo1, hi1 = (rel @ e1).min(), (rel @ e1).max()
    lo2, hi2 = (rel @ e2).min(), (rel @ e2).max()
    i = np.arange(math.floor(lo1 / h), math.ceil(hi1 / h) + 1)
    j = np.arange(math.floor(lo2 / h), math.ceil(hi2 / h) + 1)
    I, J = np.meshgrid(i, j, indexing="ij")
    lattice = origin + h * (I.ravel()[:, None] * e1 + J.ravel()[:, None] * e2)
    lattice = lattice[size(lattice) >= h * (1 - 1e-12)]
    cands.append(lattice)
    spacing.append(np.full(len(lattice), h))
    cand = np.vstack(cands)
    sp = np.concatenate(spacing)
    dist, _ = cKDTree(pts).query(cand)
    ok = (dist > 0.6 * sp) & spec.contains(cand, tol=-1.0)
    cand, sp = cand[ok], sp[ok]
    # greedy thinning in priority order (rows before lattice)
    chosen, bucket = [], {}
    for q, r in zip(cand, sp):
        key = (int(math.floor(q[0] / h)), int(math.floor(q[1] / h)))
        clash = False
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for q2, r2 in bucket.get((key[0] + dx, key[1] + dy), ()):
                    if math.hypot(q[0] - q2[0], q[1] - q2[1]) < 0.6 * max(r, r2):
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if not clash:
            chosen.append(q)
            bucket.setdefault(key, []).append((q, r))
    return np.array(chosen).reshape(-1, 2)


def generate_mesh(spec, h, grading=1.0):
    """Constrained Delaunay mesh of ``spec`` with target size ``h``.

    Edges within ``2h`` of A/B arcs target ``h/grading``.  Boundary vertices
    lie exactly on their arcs and are never split, so every boundary vertex
    carries one arc index or is a domain vertex.  Triangle areas are bounded
    by ``s^2/2`` for local size ``s`` (a right triangle with legs ``s``).
    """
    import triangle

    h = float(h)
    grading = float(grading)
    if not h > 0 or not math.isfinite(h):
        raise InputError("mesh size h must be positive")
    if not grading >= 1.0:
        raise InputError("grading must be at least 1")
    if h >= spec.scale:
        raise MeshError(f"mesh size {h:g} is not smaller than the domain diameter {spec.scale:g}")
    size = _size_field(spec, h, grading)
    pts, marks, segs = _boundary_points(spec, _size_field(spec, h, grading, ramp=True))
    if _polyline_crosses(pts):
        from .domain.checks import _crossing_arcs

        raise MeshError("boundary approximation intersects itself on arcs " + ", ".join(_crossing_arcs(spec)))
    seeds = _seed_points(spec, h, grading, size, pts, marks)

    def area_of(s):
        return 0.5 * s * s * (1 + 1e-6)

    tri = triangle.triangulate(
        {"vertices": np.vstack([pts, seeds]), "segments": segs}, f"pq{MIN_ANGLE:g}YQa{area_of(h):.17g}"
    )
    for _ in range(30):
        v, t = tri["vertices"], tri["triangles"]
        p = v[t]
        area = 0.5 * np.abs(
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        target = area_of(size(p.mean(axis=1)))
        if np.all(area <= target):
            break
        tri = triangle.triangulate(
            {"vertices": v, "segments": tri["segments"], "triangles": t, "triangle_max_area": target},
            f"rpq{MIN_ANGLE:g}YQa",
        )
    verts = tri["vertices"]
    _, e1, e2 = _lattice_frame(spec, pts)
    tris = _regularize_diagonals(verts, _orient(verts, tri["triangles"].astype(np.int64)), e1 + e2)
    nb = len(pts)
    if not np.array_equal(verts[:nb], pts):
        raise MeshError("triangulator moved boundary vertices")
    if len(tri["segments"]) != len(segs):
        raise MeshError("triangulator split boundary segments")
    vertex_arc = np.full(len(verts), INTERIOR, dtype=np.int64)
    vertex_arc[:nb] = marks
    tris = _orient(verts, tris)
    if len(tris) == 0:
        raise MeshError("triangulation is empty")
    bedges = np.array([(a, b, _edge_arc(marks, a, b, len(spec.arcs))) for a, b in segs], dtype=np.int64)
    return TriMesh(verts, tris, bedges, vertex_arc, tuple(a.id for a in spec.arcs), h, spec)


def _regularize_diagonals(verts, tris, direction, passes=4):
    """Flip Delaunay-ambiguous diagonals (cocircular quads) so they run as
    close as possible to ``direction``; both choices are equally Delaunay, so
    angles are unchanged but lattice regions get a uniform pattern."""
    tris = tris.copy()
    pref = np.asarray(direction, dtype=float)
    pref = pref / np.hypot(*pref)

    def misalign(p, q):
        d = verts[q] - verts[p]
        return abs(d[0] * pref[1] - d[1] * pref[0]) / math.hypot(d[0], d[1])

    for _ in range(passes):
        opposite = {}
        for t, (a, b, c) in enumerate(tris.tolist()):
            for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
                opposite.setdefault((min(p, q), max(p, q)), []).append((t, p, q, r))
        touched = set()
        flips = 0
        for key in sorted(opposite):
            pair = opposite[key]
            if len(pair) != 2:
                continue
            (t1, a, b, c1), (t2, _, _, c2) = pair
            if t1 in touched or t2 in touched:
                continue
            pa, pb, p1, p2 = verts[a], verts[b], verts[c1], verts[c2]
            scale = max(np.ptp(np.array([pa, pb, p1, p2]), axis=0)) ** 4
            m = np.array([[*(x - p2), np.dot(x - p2, x - p2)] for x in (pa, pb, p1)])
            if abs(np.linalg.det(m)) > 1e-9 * scale:
                continue
            if misalign(c1, c2) >= misalign(a, b) - 1e-9:
                continue
            # quad a -> c2 -> b -> c1 is counterclockwise
            tris[t1] = (a, c2, c1)
            tris[t2] = (c2, b, c1)
            touched.update((t1, t2))
            flips += 1
        if not flips:
            break
    return tris


def _polyline_crosses(pts):
    from .domain.polygons import polyline_self_intersects

    ext = float(np.ptp(pts, axis=0).max())
    return polyline_self_intersects(pts, closed=True, eps=1e-14 * ext * ext)


def _edge_arc(marks, a, b, n_arcs):
    """Arc owning the boundary edge ``a -> b``."""
    ma, mb = int(marks[a]), int(marks[b])
    if ma >= 0:
        return ma
    if mb >= 0:
        return mb
    # both endpoints are domain vertices: the edge is the arc starting at a
    return -2 - ma


def _orient(verts, tris):
    p = verts[tris]
    a = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    tris = tris.copy()
    neg = a < 0
    tris[neg] = tris[neg][:, [0, 2, 1]]
    return tris


def refine(mesh):
    """Uniform 4-split; boundary midpoints are projected onto their arcs."""
    verts = mesh.vertices
    tris = mesh.triangles
    edges = mesh.edges()
    nv = len(verts)
    index = {(int(a), int(b)): nv + k for k, (a, b) in enumerate(edges)}
    mids = 0.5 * (verts[edges[:, 0]] + verts[edges[:, 1]])
    vertex_arc = np.concatenate([mesh.vertex_arc, np.full(len(edges), INTERIOR, dtype=np.int64)])
    new_bedges = []
    for a, b, k in mesh.boundary_edges:
        m = index[(min(a, b), max(a, b))]
        vertex_arc[m] = k
        if mesh.spec is not None:
            mids[m - nv] = mesh.spec.arcs[k].geometry.project(mids[m - nv])
        new_bedges.append((a, m, k))
        new_bedges.append((m, b, k))

    def mid(a, b):
        return index[(a, b) if a < b else (b, a)]

    out = np.empty((4 * len(tris), 3), dtype=np.int64)
    for t, (a, b, c) in enumerate(tris.tolist()):
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out[4 * t : 4 * t + 4] = ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))
    new_verts = np.vstack([verts, mids])
    return TriMesh(new_verts, out, np.array(new_bedges, dtype=np.int64), vertex_arc, mesh.arc_ids, mesh.h / 2, mesh.spec)


# jsmesh text format ---------------------------------------------------------


def write_jsmesh(mesh, path=None):
    """Serialize to the ``jsmesh 1`` text format (returned as a string and
    optionally written to ``path``)."""
    lines = ["jsmesh 1", f"V {mesh.n_vertices}"]
    for v in range(mesh.n_vertices):
        x, y = mesh.vertices[v]
        lines.append(f"{float(x)!r} {float(y)!r} {mesh.marker(v)}")
    lines.append(f"T {mesh.n_triangles}")
    lines.extend(f"{a} {b} {c}" for a, b, c in mesh.triangles.tolist())
    lines.append(f"E {len(mesh.boundary_edges)}")
    lines.extend(f"{a} {b} {mesh.arc_ids[k]}" for a, b, k in mesh.boundary_edges.tolist())
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_jsmesh(source, spec=None, h=None):
    """Parse the ``jsmesh 1`` format from a path or a string."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise InputError("jsmesh: unexpected end of file")
        pos += 1
        return lines[pos - 1]

    def section(tag):
        head = take().split()
        if len(head) != 2 or head[0] != tag:
            raise InputError(f"jsmesh: expected '{tag} <count>' at line {pos}")
        try:
            return int(head[1])
        except ValueError:
            raise InputError(f"jsmesh: bad count at line {pos}") from None

    if take().strip() != "jsmesh 1":
        raise InputError("jsmesh: missing 'jsmesh 1' header")
    nv = section("V")
    verts = np.empty((nv, 2))
    raw_marks = []
    for v in range(nv):
        parts = take().split()
        if len(parts) != 3:
            raise InputError(f"jsmesh: bad vertex line {pos}")
        verts[v] = float(parts[0]), float(parts[1])
        raw_marks.append(parts[2])
    nt = section("T")
    tris = np.array([[int(x) for x in take().split()] for _ in range(nt)], dtype=np.int64).reshape(nt, 3)
    ne = section("E")
    edge_rows = [take().split() for _ in range(ne)]
    arc_ids = list(spec.arcs[k].id for k in range(len(spec.arcs))) if spec is not None else []
    for m in raw_marks:
        if m.startswith("a:") and m[2:] not in arc_ids:
            arc_ids.append(m[2:])
    for row in edge_rows:
        if row[2] not in arc_ids:
            arc_ids.append(row[2])
    vertex_arc = np.full(nv, INTERIOR, dtype=np.int64)
    for v, m in enumerate(raw_marks):
        if m == "i":
            continue
        if m.startswith("v:"):
            vertex_arc[v] = -2 - int(m[2:])
        elif m.startswith("a:"):
            vertex_arc[v] = arc_ids.index(m[2:])
        else:
            raise InputError(f"jsmesh: unknown vertex marker {m!r}")
    bedges = np.array([(int(a), int(b), arc_ids.index(k)) for a, b, k in edge_rows], dtype=np.int64).reshape(ne, 3)
    if h is None:
        d = verts[tris[:, [1, 2, 0]]] - verts[tris]
        h = float(np.max(np.hypot(d[..., 0], d[..., 1]))) if nt else 0.0
    return TriMesh(verts, tris, bedges, vertex_arc, tuple(arc_ids), h, spec)
