"""Domain validation and the structural inequality checks.

Every check returns a :class:`CheckReport`.  An inequality counts as strict
when its margin is below ``-strict_slack`` and an equality holds when the
residual is within ``equality_slack``; both scale with the domain diameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, HypothesisViolationError, UnsupportedModeError
from ..metric import geodesic_curvatures
from .arcs import CircularArc, Segment
from .enclosing import smallest_enclosing_disk
from .polygons import enumerate_admissible_polygons, polyline_self_intersects, segments_intersect

SIGN_CONVENTION = (
    "upward unit normal N = (X - grad u)/W; the graph solves div(grad u/W) = H, "
    "so the lower spherical cap of radius R has H = +2/R; boundary curvatures "
    "are measured with respect to the inward normal of the domain"
)

STRICT_SLACK = 1e-9
EQUALITY_SLACK = 1e-6
CURVATURE_SLACK = 1e-6
CURVATURE_SAMPLES = 256


def arc_curvatures(spec, k, samples=CURVATURE_SAMPLES):
    """Geodesic curvature of arc ``k`` at interior samples, inward normal."""
    arc = spec.arcs[k]
    if isinstance(arc.geometry, Segment) and spec.metric.is_euclidean:
        return np.zeros(samples - 1)
    pts = arc.geometry.points if not isinstance(arc.geometry, (Segment, CircularArc)) else arc.sample(samples)
    if len(pts) < 3:
        return np.zeros(1)
    # counterclockwise boundary: the interior lies to the left
    return geodesic_curvatures(pts, spec.metric, side="left")


@dataclass
class Issue:
    code: str
    message: str
    arcs: tuple = ()

    def to_json(self):
        return {"code": self.code, "message": self.message, "arcs": list(self.arcs)}


@dataclass
class ValidationReport:
    domain: str
    mode: str
    issues: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.issues

    def to_json(self):
        return {"domain": self.domain, "mode": self.mode, "valid": self.valid,
                "issues": [i.to_json() for i in self.issues]}

    def raise_if_invalid(self):
        if self.issues:
            first = self.issues[0]
            msg = "; ".join(f"{i.message} ({', '.join(i.arcs)})" for i in self.issues)
            raise DomainError(msg, arcs=first.arcs, code=first.code)


def validate_domain(spec, mode="minimal"):
    """Structural validation of a domain.

    Checks closure, orientation, simplicity, endpoint disjointness of same-kind
    blow-up arcs, convexity of C arcs and (minimal/translating modes) that A
    and B arcs are geodesics.
    """
    report = ValidationReport(spec.name, mode)
    arcs = spec.arcs
    n = len(arcs)
    scale_hint = max(1.0, float(np.ptp(spec.vertices, axis=0).max()) if n > 1 else 1.0)
    closed = True
    for k in range(n):
        a, b = arcs[k], arcs[(k + 1) % n]
        gap = float(np.hypot(*(a.end - b.start)))
        if gap > 1e-9 * scale_hint:
            closed = False
            report.issues.append(Issue("open-boundary", f"arc {a.id} does not end where {b.id} starts", (a.id, b.id)))
    for k in range(n):
        a, b = arcs[k], arcs[(k + 1) % n]
        if a.kind in ("A", "B") and a.kind == b.kind and (n > 1):
            report.issues.append(
                Issue("adjacent-blow-up", f"two {a.kind} arcs share endpoint", (a.id, b.id))
            )
    if not closed:
        return report

    poly, owner = spec.boundary_polyline
    if spec.signed_area() <= 0:
        report.issues.append(Issue("orientation", "boundary is not counterclockwise", tuple(a.id for a in arcs)))
    if polyline_self_intersects(poly, closed=True, eps=1e-14 * spec.scale**2):
        report.issues.append(Issue("self-intersection", "boundary intersects itself", _crossing_arcs(spec)))

    slack = CURVATURE_SLACK / spec.scale
    for k, a in enumerate(arcs):
        kap = arc_curvatures(spec, k)
        if a.kind == "C" and np.min(kap) < -slack:
            report.issues.append(
                Issue("nonconvex-arc", f"C arc {a.id} is not convex toward the domain (min curvature {np.min(kap):.6g})", (a.id,))
            )
        if a.kind in ("A", "B") and mode in ("minimal", "translating") and np.max(np.abs(kap)) > slack:
            report.issues.append(
                Issue("non-geodesic", f"{a.kind} arc {a.id} is not a geodesic (max |curvature| {np.max(np.abs(kap)):.6g})", (a.id,))
            )
    return report


def _crossing_arcs(spec):
    poly, owner = spec.boundary_polyline
    a, b = poly, np.roll(poly, -1, axis=0)
    hit = segments_intersect(a, b, a, b, 1e-14 * spec.scale**2)
    m = len(a)
    idx = np.arange(m)
    diff = np.abs(idx[:, None] - idx[None, :])
    hit &= ~((diff <= 1) | (diff == m - 1))
    ii, jj = np.nonzero(hit)
    ids = sorted({spec.arcs[owner[i]].id for i in ii} | {spec.arcs[owner[j]].id for j in jj})
    return tuple(ids)


@dataclass
class CheckReport:
    mode: str
    domain: str
    H: float | None
    records: list
    global_records: dict
    hypotheses: list
    verdict: str
    certificate: list
    slack: dict
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.verdict == "pass"

    def record(self, polygon_id):
        for r in self.records:
            if r["id"] == polygon_id:
                return r
        raise KeyError(polygon_id)

    def to_json(self):
        return {
            "domain": self.domain,
            "mode": self.mode,
            "H": self.H,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "hypotheses": self.hypotheses,
            "global": self.global_records,
            "polygons": self.records,
            "slack": self.slack,
            "sign_convention": SIGN_CONVENTION,
            "notes": self.notes,
        }


def _slacks(spec):
    return {"strict": STRICT_SLACK * spec.scale, "equality": EQUALITY_SLACK * spec.scale,
            "curvature": CURVATURE_SLACK / spec.scale}


def _polygon_records(spec, polygons, H, strict_boundary, slack):
    records, failures = [], []
    for p in polygons:
        if p.alpha + p.beta > p.ell + slack["equality"]:
            raise AssertionError(f"alpha + beta exceeds the perimeter on {p.id}")
        ma = 2 * p.alpha - p.ell - H * p.area
        mb = 2 * p.beta - p.ell + H * p.area
        strict = strict_boundary or not p.is_whole_boundary
        ok = (not strict) or (ma < -slack["strict"] and mb < -slack["strict"])
        rec = {
            "id": p.id,
            "whole_boundary": p.is_whole_boundary,
            "vertices": [v for v in _labels(spec, p)],
            "sides": [s.describe(spec) for s in p.sides],
            "alpha": p.alpha,
            "beta": p.beta,
            "ell": p.ell,
            "area": p.area,
            "margin_alpha": ma,
            "margin_beta": mb,
            "strict_required": strict,
            "ok": bool(ok),
            "indeterminate": p.indeterminate,
        }
        records.append(rec)
        if not ok:
            for name, m in (("2alpha < ell" + (" + H Area" if H else ""), ma),
                            ("2beta < ell" + (" - H Area" if H else ""), mb)):
                if m >= -slack["strict"]:
                    failures.append({"polygon": p.id, "condition": name, "margin": m})
    return records, failures


def _labels(spec, p):
    from .polygons import vertex_label

    return [vertex_label(spec, v) for v in p.vertex_indices]


def _verdict(failures, polygons):
    if failures:
        return "fail"
    if any(p.indeterminate for p in polygons):
        return "indeterminate"
    return "pass"


def check_minimal(spec, vertex_cap=16):
    """Jenkins-Serrin conditions for minimal graphs."""
    validate_domain(spec, "minimal").raise_if_invalid()
    slack = _slacks(spec)
    polygons = enumerate_admissible_polygons(spec, "minimal", vertex_cap=vertex_cap)
    has_c = bool(spec.arcs_of_kind("C"))
    records, failures = _polygon_records(spec, polygons, 0.0, has_c, slack)
    whole = polygons[0]
    balance = whole.alpha - whole.beta
    glob = {"alpha_boundary": whole.alpha, "beta_boundary": whole.beta, "area_domain": whole.area,
            "balance": balance, "has_C": has_c}
    if not has_c and abs(balance) > slack["equality"]:
        failures.append({"polygon": whole.id, "condition": "alpha(boundary) = beta(boundary)", "margin": balance})
    notes = []
    if not has_c:
        notes.append("no C arcs: the boundary polygon is held to alpha = beta instead of the strict inequalities")
    return CheckReport("minimal", spec.name, None, records, glob, [], _verdict(failures, polygons), failures, slack, notes)


def check_translating(spec, vertex_cap=16):
    """Sufficient conditions for translating Jenkins-Serrin graphs."""
    b_arcs = spec.arcs_of_kind("B")
    if b_arcs:
        raise HypothesisViolationError(
            "translating existence requires no B arcs", arcs=[a.id for a in b_arcs], code="hypothesis"
        )
    if not spec.arcs_of_kind("C"):
        raise HypothesisViolationError("translating check requires at least one C arc", code="hypothesis")
    validate_domain(spec, "translating").raise_if_invalid()
    slack = _slacks(spec)
    polygons = enumerate_admissible_polygons(spec, "translating", vertex_cap=vertex_cap)
    records, failures = _polygon_records(spec, polygons, 0.0, True, slack)
    # only the alpha inequality is part of the translating conditions
    failures = [f for f in failures if f["condition"].startswith("2alpha")]
    for rec in records:
        rec["ok"] = rec["margin_alpha"] < -slack["strict"]
    whole = polygons[0]
    glob = {"alpha_boundary": whole.alpha, "beta_boundary": whole.beta, "area_domain": whole.area,
            "balance": whole.alpha - whole.beta, "has_C": True}
    notes = [
        "sufficient conditions only: failure does not prove non-existence",
        "strictness is applied to every polygon, including the boundary",
    ]
    return CheckReport("translating", spec.name, None, records, glob, [], _verdict(failures, polygons), failures, slack, notes)


def reflected_boundary(spec, samples=256):
    """Boundary sample of the domain with each B arc reflected across its chord."""
    pts = []
    for a in spec.arcs:
        s = a.sample(samples)[:-1]
        if a.kind == "B":
            p, q = a.start, a.end
            d = (q - p) / np.hypot(*(q - p))
            rel = s - p
            along = rel @ d
            s = p + 2 * along[:, None] * d - rel
        pts.append(s)
    return np.vstack(pts)


def check_cmc(spec, H, vertex_cap=16):
    """Conditions for constant mean curvature ``H`` Jenkins-Serrin graphs."""
    if not spec.metric.is_euclidean:
        raise UnsupportedModeError("the CMC check is only available for the Euclidean metric")
    if not H > 0:
        raise UnsupportedModeError("H must be positive")
    validate_domain(spec, "cmc").raise_if_invalid()
    slack = _slacks(spec)
    hyps, failures = [], []
    for k, a in enumerate(spec.arcs):
        kap = arc_curvatures(spec, k)
        lo, hi = float(np.min(kap)), float(np.max(kap))
        if a.kind == "A":
            ok = max(abs(lo - H), abs(hi - H)) <= slack["curvature"]
            req = f"= {H:g}"
        elif a.kind == "B":
            ok = max(abs(lo + H), abs(hi + H)) <= slack["curvature"]
            req = f"= {-H:g}"
        else:
            ok = lo >= H - slack["curvature"]
            req = f">= {H:g}"
        hyps.append({"name": "curvature", "arc": a.id, "min": lo, "max": hi, "required": req, "ok": bool(ok)})
        if not ok:
            failures.append({"hypothesis": "curvature", "arc": a.id, "measured": [lo, hi], "required": req})
    for a in spec.arcs_of_kind("B"):
        length = a.length()
        ok = length - math.pi / H < -slack["strict"]
        hyps.append({"name": "B length < pi/H", "arc": a.id, "length": length, "bound": math.pi / H, "ok": bool(ok)})
        if not ok:
            failures.append({"hypothesis": "B length < pi/H", "arc": a.id, "measured": length})
    center, radius = smallest_enclosing_disk(reflected_boundary(spec))
    ok = radius <= 1.0 / H + slack["equality"]
    hyps.append({"name": "reflected domain in disk of radius 1/H", "radius": radius, "center": center.tolist(),
                 "bound": 1.0 / H, "ok": bool(ok)})
    if not ok:
        failures.append({"hypothesis": "reflected domain in disk of radius 1/H", "measured": radius})

    has_c = bool(spec.arcs_of_kind("C"))
    polygons = enumerate_admissible_polygons(spec, "cmc", H=H, vertex_cap=vertex_cap)
    records, poly_fail = _polygon_records(spec, polygons, H, has_c, slack)
    failures.extend(poly_fail)
    whole = polygons[0]
    balance = whole.alpha - whole.beta - H * whole.area
    glob = {"alpha_boundary": whole.alpha, "beta_boundary": whole.beta, "area_domain": whole.area,
            "balance": balance, "has_C": has_c}
    if not has_c and abs(balance) > slack["equality"]:
        failures.append({"polygon": whole.id, "condition": "alpha = beta + H Area(domain)", "margin": balance})
    notes = []
    if not has_c:
        notes.append("no C arcs: the boundary polygon is held to alpha = beta + H Area instead of the strict inequalities")
    return CheckReport("cmc", spec.name, float(H), records, glob, hyps, _verdict(failures, polygons), failures, slack, notes)


def check(spec, mode="minimal", H=None, vertex_cap=16):
    if mode == "minimal":
        return check_minimal(spec, vertex_cap)
    if mode == "translating":
        return check_translating(spec, vertex_cap)
    if mode == "cmc":
        return check_cmc(spec, H, vertex_cap)
    raise UnsupportedModeError(f"unknown mode {mode!r}")
