"""Closed-form exact solutions and independent numerical references.

The three exact graphs are

* Scherk's surface ``ln(cos x) - ln(cos y)`` (minimal) on the open square
  ``(-pi/2, pi/2)^2``;
* the grim reaper ``-(1/c) ln cos(c x)`` (translator with speed ``c``),
  extruded in ``y``;
* the lower spherical cap ``-sqrt(R^2 - x^2 - y^2)``, which satisfies
  ``div(grad u / W) = 2/R`` with the upward normal ``(X - grad u)/W``.

``fd_divergence`` evaluates the conformal divergence operator by central
differences and ``ode_shoot`` solves the 1D strip and radial reductions by
shooting; neither shares code with the finite-element solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import InputError, OracleDomainError, ShootingError
from .metric import EUCLIDEAN
from .solver.problem import ProblemKind

HALF_PI = 0.5 * math.pi


def _out(value, scalar):
    return float(value) if scalar else value


def _args(*vals):
    scalar = all(np.ndim(v) == 0 for v in vals)
    arrs = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in vals))
    return scalar, arrs


def scherk(x, y):
    """``ln(cos x) - ln(cos y)`` on the open square of side ``pi``."""
    scalar, (x, y) = _args(x, y)
    if np.any(np.abs(x) >= HALF_PI) or np.any(np.abs(y) >= HALF_PI):
        raise OracleDomainError("scherk is defined for |x|, |y| < pi/2")
    return _out(np.log(np.cos(x)) - np.log(np.cos(y)), scalar)


def grim_reaper(x, c=1.0):
    """``-(1/c) ln cos(c x)`` on the strip ``|c x| < pi/2``."""
    if not c > 0:
        raise InputError("grim reaper speed c must be positive")
    scalar, (x,) = _args(x)
    if np.any(np.abs(c * x) >= HALF_PI):
        raise OracleDomainError("grim reaper is defined for |c x| < pi/2")
    return _out(-np.log(np.cos(c * x)) / c, scalar)


def spherical_cap(x, y, R=1.0):
    """Lower hemisphere ``-sqrt(R^2 - x^2 - y^2)`` of radius ``R``."""
    if not R > 0:
        raise InputError("cap radius must be positive")
    scalar, (x, y) = _args(x, y)
    r2 = x * x + y * y
    if np.any(r2 >= R * R):
        raise OracleDomainError("spherical cap is defined for x^2 + y^2 < R^2")
    return _out(-np.sqrt(R * R - r2), scalar)


@dataclass(frozen=True)
class OracleField:
    """An exact solution with its gradient, validity domain and the
    right-hand side ``F`` of ``div(grad u / W) = F`` it satisfies."""

    name: str
    kind: ProblemKind
    value: Callable
    gradient: Callable
    contains: Callable
    rhs: Callable
    params: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return self.value(x, y)


def scherk_field():
    def grad(x, y):
        return -np.tan(np.asarray(x, dtype=float)), np.tan(np.asarray(y, dtype=float))

    def contains(x, y):
        return (np.abs(x) < HALF_PI) & (np.abs(y) < HALF_PI)

    return OracleField("scherk", ProblemKind.minimal(), scherk, grad, contains, lambda x, y: np.zeros(np.shape(x)))


def grim_reaper_field(c=1.0):
    c = float(c)

    def value(x, y):
        return grim_reaper(x, c) + 0.0 * np.asarray(y, dtype=float)

    def grad(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.tan(c * x), np.zeros_like(y)

    def contains(x, y):
        return np.abs(c * np.asarray(x)) < HALF_PI + 0.0 * np.asarray(y)

    def rhs(x, y):
        # W = sec(c x), so c/W = c cos(c x)
        return c * np.cos(c * np.asarray(x, dtype=float)) + 0.0 * np.asarray(y, dtype=float)

    return OracleField("grim_reaper", ProblemKind.translator(c), value, grad, contains, rhs, {"c": c})


def spherical_cap_field(R=2.0):
    R = float(R)

    def value(x, y):
        return spherical_cap(x, y, R)

    def grad(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        s = np.sqrt(R * R - x * x - y * y)
        return x / s, y / s

    def contains(x, y):
        return np.asarray(x) ** 2 + np.asarray(y) ** 2 < R * R

    return OracleField(
        "spherical_cap", ProblemKind.cmc(2.0 / R), value, grad, contains,
        lambda x, y: np.full(np.shape(x), 2.0 / R), {"R": R},
    )


def fd_divergence(u, point, h=1e-4, metric=EUCLIDEAN, inside=None):
    """Central-difference value of ``(1/lambda^2) div_e(grad_e u / W)``,
    ``W = sqrt(1 + |grad_e u|^2 / lambda^2)``, at ``point``.

    ``u`` is an :class:`OracleField` or any callable ``u(x, y)``.  Fluxes are
    formed at the four half-step points, so the result is second order in
    ``h``.  The 3x3 stencil must lie inside ``inside`` (defaults to the
    oracle's validity domain when ``u`` is an oracle).
    """
    if not h > 0:
        raise InputError("step h must be positive")
    x, y = (float(v) for v in point)
    if inside is None and isinstance(u, OracleField):
        inside = u.contains
    off = np.array([-h, 0.0, h])
    sx, sy = np.meshgrid(x + off, y + off, indexing="ij")
    if inside is not None and not np.all(inside(sx, sy)):
        raise OracleDomainError(f"stencil of step {h:g} at ({x:g}, {y:g}) leaves the domain")
    U = np.asarray(u(sx, sy), dtype=float)
    if not np.all(np.isfinite(U)):
        raise OracleDomainError(f"field is not finite on the stencil at ({x:g}, {y:g})")

    def flux(px, py, gx, gy):
        lam2 = float(metric.lam(np.array([[px, py]]))[0]) ** 2
        W = math.sqrt(1.0 + (gx * gx + gy * gy) / lam2)
        return gx / W, gy / W

    # U[i, j] = u(x + (i-1) h, y + (j-1) h)
    east = flux(x + h / 2, y, (U[2, 1] - U[1, 1]) / h, (U[2, 2] + U[1, 2] - U[2, 0] - U[1, 0]) / (4 * h))[0]
    west = flux(x - h / 2, y, (U[1, 1] - U[0, 1]) / h, (U[1, 2] + U[0, 2] - U[1, 0] - U[0, 0]) / (4 * h))[0]
    north = flux(x, y + h / 2, (U[2, 2] + U[2, 1] - U[0, 2] - U[0, 1]) / (4 * h), (U[1, 2] - U[1, 1]) / h)[1]
    south = flux(x, y - h / 2, (U[2, 1] + U[2, 0] - U[0, 1] - U[0, 0]) / (4 * h), (U[1, 1] - U[1, 0]) / h)[1]
    lam2 = float(metric.lam(np.array([[x, y]]))[0]) ** 2
    return ((east - west) + (north - south)) / h / lam2


@dataclass(frozen=True)
class Profile:
    """1D reference solution sampled on ``x`` with derivative ``du``.

    ``parameter`` is the shooting unknown: the initial slope for strip
    problems, the center value for the radial problem.
    """

    kind: ProblemKind
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    parameter: float
    shots: int

    def __call__(self, x):
        return self._spline(x)

    @property
    def _spline(self):
        return CubicHermiteSpline(self.x, self.u, self.du)


def _accel(kind, radial):
    if kind.name == "minimal" and not radial:
        return lambda r, p: 0.0
    if kind.name == "translator" and not radial:
        c = kind.c
        return lambda r, p: c * (1.0 + p * p)
    if kind.name == "cmc" and radial:
        H = kind.H0

        def f(r, p):
            if r == 0.0:
                return 0.5 * H
            w2 = 1.0 + p * p
            return H * w2 * math.sqrt(w2) - p * w2 / r

        return f
    raise InputError(f"no 1D reduction for kind {kind.name!r} ({'radial' if radial else 'strip'})")


def _rk4(f, a, b, u0, p0, n, blowup=1e8):
    """Classical RK4 for ``u' = p, p' = f(r, p)``; returns nodes, values and
    slopes, or ``None`` when the slope blows up."""
    step = (b - a) / n
    r = np.linspace(a, b, n + 1)
    U = np.empty(n + 1)
    P = np.empty(n + 1)
    u, p = u0, p0
    U[0], P[0] = u, p
    for i in range(n):
        t = a + i * step
        k1u, k1p = p, f(t, p)
        k2u, k2p = p + 0.5 * step * k1p, f(t + 0.5 * step, p + 0.5 * step * k1p)
        k3u, k3p = p + 0.5 * step * k2p, f(t + 0.5 * step, p + 0.5 * step * k2p)
        k4u, k4p = p + step * k3p, f(t + step, p + step * k3p)
        u += step * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
        p += step * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0
        if not (abs(p) < blowup and math.isfinite(u)):
            return None, math.copysign(math.inf, p if math.isfinite(p) else 1.0)
        U[i + 1], P[i + 1] = u, p
    return (r, U, P), None


def ode_shoot(kind, interval, left=None, right=0.0, grid=None, steps=None, xtol=1e-14):
    """Reference profile of a 1D reduction by RK4 shooting.

    Strip problems (``minimal``: ``u'' = 0``; ``translator``: ``u'' = c(1 +
    u'^2)``) take values ``left``/``right`` at the ends of ``interval`` and
    shoot on the initial slope.  The ``cmc`` kind is the radial equation
    ``u'' = H W^3 - u' W^2 / r`` on ``[0, b]`` with a regular center
    (``left`` must be ``None``) and ``u(b) = right``; it shoots on ``u(0)``.
    The step is at most ``1e-4`` of the interval.  Returns a
    :class:`Profile` sampled on ``grid`` (101 uniform points by default).
    """
    a, b = (float(v) for v in interval)
    if not b > a:
        raise InputError("interval must be increasing")
    radial = kind.name == "cmc"
    if radial and (a != 0.0 or left is not None):
        raise InputError("radial problems run on [0, b] with a regular center (left=None)")
    if not radial and left is None:
        raise InputError("strip problems need a left value")
    f = _accel(kind, radial)
    n = max(10_000, int(steps or 0))
    shots = 0

    def miss(s):
        nonlocal shots
        shots += 1
        u0, p0 = (s, 0.0) if radial else (float(left), s)
        sol, blown = _rk4(f, a, b, u0, p0, n)
        if sol is None:
            return blown
        return sol[1][-1] - right

    if radial:
        # the equation does not see u, so one shot fixes the center value
        s = -miss(0.0)
    else:
        lo, hi = -1.0, 1.0
        for _ in range(40):
            if miss(lo) < 0:
                break
            lo *= 2.0
        for _ in range(40):
            if miss(hi) > 0:
                break
            hi *= 2.0
        flo, fhi = miss(lo), miss(hi)
        if not (flo < 0 < fhi):
            raise ShootingError(f"could not bracket the right value {right:g}", bracket=(lo, hi, flo, fhi))

        def finite_miss(s):
            m = miss(s)
            return m if math.isfinite(m) else math.copysign(1e300, m)

        s = brentq(finite_miss, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=400)
    u0, p0 = (s, 0.0) if radial else (float(left), s)
    sol, _ = _rk4(f, a, b, u0, p0, n)
    if sol is None:
        raise ShootingError("final shot blew up", bracket=(s, s, math.inf, math.inf))
    nodes, U, P = sol
    spline = CubicHermiteSpline(nodes, U, P)
    xs = np.linspace(a, b, 101) if grid is None else np.asarray(grid, dtype=float)
    if np.any(xs < a) or np.any(xs > b):
        raise InputError("grid points must lie in the interval")
    return Profile(kind, xs, spline(xs), spline.derivative()(xs), float(s), shots)


# brute-force admissible polygons ----------------------------------------
#
# Reference for the structural checker on Euclidean domains whose arcs are
# segments or circular arcs.  Everything is recomputed from the arc
# parameters: lengths and enclosed areas in closed form, containment by a
# crossing-number test on a dense boundary sample, simplicity by pairwise
# segment tests, and polygons by exhaustive vertex orderings.


@dataclass(frozen=True)
class _BFSide:
    i: int
    j: int
    length: float
    area_term: float  # 1/2 * integral of (x dy - y dx) from vertex i to j
    points: np.ndarray
    covers: frozenset
    boundary_arc: int | None


def _bf_arc(geom):
    """(start, sweep, center, radius) for circular arcs, ``None`` for segments."""
    if hasattr(geom, "radius"):
        return geom.from_angle, geom.sweep, np.asarray(geom.center, dtype=float), geom.radius
    return None


def _bf_circle_side(center, r, t0, sweep, n):
    t = t0 + sweep * np.linspace(0.0, 1.0, n)
    pts = center + r * np.column_stack([np.cos(t), np.sin(t)])
    cx, cy = center
    t1 = t0 + sweep
    area = 0.5 * (cx * r * (math.sin(t1) - math.sin(t0)) - cy * r * (math.cos(t1) - math.cos(t0)) + r * r * sweep)
    return pts, r * abs(sweep), area


def _bf_inside(pts, poly, tol):
    """Crossing-number membership with a distance tolerance to ``poly``."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    out = np.zeros(len(pts), dtype=bool)
    for k, (x, y) in enumerate(pts):
        ab = b - a
        t = np.clip(((x - a[:, 0]) * ab[:, 0] + (y - a[:, 1]) * ab[:, 1]) / np.einsum("ij,ij->i", ab, ab), 0, 1)
        dist = np.hypot(a[:, 0] + t * ab[:, 0] - x, a[:, 1] + t * ab[:, 1] - y).min()
        if dist <= tol:
            out[k] = True
            continue
        cond = (a[:, 1] > y) != (b[:, 1] > y)
        xs = a[cond, 0] + (y - a[cond, 1]) * (b[cond, 0] - a[cond, 0]) / (b[cond, 1] - a[cond, 1])
        out[k] = bool(np.count_nonzero(xs > x) % 2)
    return out


def _bf_cross(P, Q, skip):
    """Any intersection between segments of polylines ``P`` and ``Q`` except
    the index pairs in ``skip``."""
    for a in range(len(P) - 1):
        for b in range(len(Q) - 1):
            if (a, b) in skip:
                continue
            p1, p2, q1, q2 = P[a], P[a + 1], Q[b], Q[b + 1]
            lo = np.maximum(np.minimum(p1, p2), np.minimum(q1, q2))
            hi = np.minimum(np.maximum(p1, p2), np.maximum(q1, q2))
            if np.any(lo > hi + 1e-12):
                continue

            def orient(u, v, w):
                return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])

            d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
            d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
            if d1 * d2 <= 0 and d3 * d4 <= 0:
                return True
    return False


def _bf_sides(spec, mode, H, density):
    arcs = spec.arcs
    n = len(arcs)
    verts = np.array([a.start for a in arcs], dtype=float)
    scale = spec.scale
    dense = np.vstack([a.sample(2048)[:-1] for a in arcs])
    tol = 1e-9 * scale
    ab_samples = {k: a.sample(16) for k, a in enumerate(arcs) if a.kind in ("A", "B")}

    def covers(pts, own=None):
        got = set() if own is None else {own}
        for k, s in ab_samples.items():
            seg_a, seg_b = pts[:-1], pts[1:]
            d = seg_b - seg_a
            dd = np.einsum("ij,ij->i", d, d)
            ok = True
            for x in s:
                t = np.clip(((x - seg_a) * d).sum(axis=1) / dd, 0, 1)
                if np.min(np.hypot(*(seg_a + t[:, None] * d - x).T)) > 1e-7 * scale:
                    ok = False
                    break
            if ok:
                got.add(k)
        return frozenset(got)

    sides = {}
    for k, a in enumerate(arcs):
        i, j = k, (k + 1) % n
        circ = _bf_arc(a.geometry)
        if circ is None:
            p, q = verts[i], verts[j]
            pts = np.array([p, q])
            length = float(math.hypot(*(q - p)))
            area = 0.5 * float(p[0] * q[1] - q[0] * p[1])
        else:
            t0, sweep, c, r = circ
            pts, length, area = _bf_circle_side(c, r, t0, sweep, 257)
            pts[0], pts[-1] = verts[i], verts[j]
        own = k if a.kind in ("A", "B") else None
        sides.setdefault((i, j), []).append(_BFSide(i, j, length, area, pts, covers(pts, own), k))

    def contained(pts, length):
        m = max(int(math.ceil(density * length)), 2)
        t = np.linspace(0.0, 1.0, m + 1)
        seg = np.cumsum(np.r_[0.0, np.hypot(*np.diff(pts, axis=0).T)])
        fine = np.column_stack([np.interp(t * seg[-1], seg, pts[:, 0]), np.interp(t * seg[-1], seg, pts[:, 1])])
        return bool(np.all(_bf_inside(fine, dense, max(tol, 1e-9))))

    for i in range(n):
        for j in range(i + 1, n):
            p, q = verts[i], verts[j]
            existing = sides.get((i, j), []) + [
                _BFSide(s.j, s.i, s.length, -s.area_term, s.points[::-1], s.covers, s.boundary_arc)
                for s in sides.get((j, i), [])
            ]
            cands = []
            if mode in ("minimal", "translating"):
                # a straight boundary arc already is the chord
                if any(len(s.points) == 2 for s in existing):
                    continue
                pts = np.array([p, q])
                cands.append((pts, float(math.hypot(*(q - p))), 0.5 * float(p[0] * q[1] - q[0] * p[1])))
            else:
                r = 1.0 / H
                d = q - p
                dist = float(math.hypot(*d))
                if dist >= 2 * r:
                    continue
                mid = 0.5 * (p + q)
                nrm = np.array([-d[1], d[0]]) / dist
                off = math.sqrt(r * r - 0.25 * dist * dist)
                for sgn in (1.0, -1.0):
                    c = mid + sgn * off * nrm
                    t0 = math.atan2(p[1] - c[1], p[0] - c[0])
                    t1 = math.atan2(q[1] - c[1], q[0] - c[0])
                    sweep = (t1 - t0) % (2 * math.pi) if sgn > 0 else -((t0 - t1) % (2 * math.pi))
                    if abs(sweep) > math.pi:
                        continue
                    same = False
                    for s in existing:
                        circ = _bf_arc(arcs[s.boundary_arc].geometry) if s.boundary_arc is not None else None
                        if circ is not None and abs(circ[3] - r) <= 1e-12 * scale and np.hypot(*(circ[2] - c)) <= 1e-9 * scale:
                            same = True
                    if same:
                        continue
                    pts, length, area = _bf_circle_side(c, r, t0, sweep, 257)
                    pts[0], pts[-1] = p, q
                    cands.append((pts, length, area))
            for pts, length, area in cands:
                if contained(pts, length):
                    sides.setdefault((i, j), []).append(_BFSide(i, j, length, area, pts, covers(pts), None))
    return sides


def _bf_between(sides, i, j):
    out = list(sides.get((i, j), []))
    out += [_BFSide(i, j, s.length, -s.area_term, s.points[::-1], s.covers, s.boundary_arc) for s in sides.get((j, i), [])]
    return out


def _bf_simple(chain):
    m = len(chain)
    for x in range(m):
        for y in range(x + 1, m):
            s, t = chain[x], chain[y]
            P, Q = s.points, t.points
            skip = set()
            if s.j == t.i:  # consecutive: end of s meets start of t
                skip.add((len(P) - 2, 0))
            if t.j == s.i:  # wrap-around: end of t meets start of s
                skip.add((0, len(Q) - 2))
            if m == 2:
                skip = {(len(P) - 2, 0), (0, len(Q) - 2)}
            if _bf_cross(P, Q, skip):
                return False
    return True


def brute_force_polygons(spec, mode="minimal", H=None, density=64):
    """Every admissible polygon of a Euclidean domain, as plain records.

    Each record has ``vertices`` (sorted indices), ``alpha``, ``beta``,
    ``ell``, ``area`` and ``whole_boundary``.
    """
    import itertools

    if not spec.metric.is_euclidean:
        raise InputError("the brute-force enumeration is Euclidean only")
    if mode == "cmc" and not (H is not None and H > 0):
        raise InputError("cmc enumeration needs H > 0")
    sides = _bf_sides(spec, mode, H, density)
    arcs = spec.arcs
    n = len(arcs)
    lengths = {k: s.length for (i, j), lst in sides.items() for s in lst if s.boundary_arc is not None for k in [s.boundary_arc]}
    records = []
    seen = set()
    for size in range(2, n + 1):
        for subset in itertools.combinations(range(n), size):
            first, rest = subset[0], subset[1:]
            orders = [subset] if size == 2 else [(first,) + perm for perm in itertools.permutations(rest)]
            for order in orders:
                if size > 2 and order[1] > order[-1]:
                    continue  # mirror image of another ordering
                pairs = [(order[t], order[(t + 1) % size]) for t in range(size)]
                choices = [_bf_between(sides, i, j) for i, j in pairs]
                for chain in itertools.product(*choices):
                    if size == 2 and chain[0].points.shape == chain[1].points[::-1].shape and np.allclose(
                        chain[0].points, chain[1].points[::-1]
                    ):
                        continue
                    if not _bf_simple(chain):
                        continue
                    covered = frozenset().union(*(s.covers for s in chain))
                    area = sum(s.area_term for s in chain)
                    key = (tuple(sorted(order)), round(sum(s.length for s in chain), 9), round(abs(area), 9))
                    if key in seen:
                        continue
                    seen.add(key)
                    whole = size == n and all(s.boundary_arc is not None for s in chain)
                    records.append({
                        "vertices": tuple(sorted(order)),
                        "alpha": sum(lengths[k] for k in covered if arcs[k].kind == "A"),
                        "beta": sum(lengths[k] for k in covered if arcs[k].kind == "B"),
                        "ell": sum(s.length for s in chain),
                        "area": abs(area),
                        "whole_boundary": whole,
                    })
    return records


def brute_force_verdict(spec, mode="minimal", H=None, records=None):
    """Pass/fail of the structural conditions from brute-force records."""
    records = brute_force_polygons(spec, mode, H) if records is None else records
    scale = spec.scale
    strict, equal = 1e-9 * scale, 1e-6 * scale
    has_c = any(a.kind == "C" for a in spec.arcs)
    Hv = float(H) if mode == "cmc" else 0.0
    ok = True
    if mode == "cmc":
        for a in spec.arcs:
            circ = _bf_arc(a.geometry)
            # ccw boundary: a ccw circle bends toward the interior
            kappa = 0.0 if circ is None else math.copysign(1.0 / circ[3], circ[1])
            if a.kind == "A":
                ok &= abs(kappa - Hv) <= 1e-6 / scale
            elif a.kind == "B":
                ok &= abs(kappa + Hv) <= 1e-6 / scale
                ok &= (abs(circ[1]) * circ[3] if circ else a.geometry.euclidean_length()) < math.pi / Hv - strict
            else:
                ok &= kappa >= Hv - 1e-6 / scale
        if any(a.kind == "B" for a in spec.arcs):
            raise InputError("the brute-force disk test covers domains without B arcs only")
        from scipy.optimize import minimize

        pts = np.vstack([a.sample(512) for a in spec.arcs])
        res = minimize(lambda c: np.max(np.hypot(*(pts - c).T)), pts.mean(axis=0), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        ok &= res.fun <= 1.0 / Hv + equal
    for r in records:
        ma = 2 * r["alpha"] - r["ell"] - Hv * r["area"]
        mb = 2 * r["beta"] - r["ell"] + Hv * r["area"]
        if r["whole_boundary"] and not has_c and mode != "translating":
            ok &= abs(r["alpha"] - r["beta"] - Hv * r["area"]) <= equal
            continue
        ok &= ma < -strict
        if mode != "translating":
            ok &= mb < -strict
    return "pass" if ok else "fail"
