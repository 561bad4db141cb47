"""Domains with labeled boundary arcs and the structural admissibility checks."""

from .arcs import Arc, CircularArc, Sampled, Segment
from .checks import (
    SIGN_CONVENTION,
    CheckReport,
    ValidationReport,
    arc_curvatures,
    check,
    check_cmc,
    check_minimal,
    check_translating,
    validate_domain,
)
from .enclosing import smallest_enclosing_disk
from .polygons import AdmissiblePolygon, enumerate_admissible_polygons
from .spec import DomainSpec, load_domain

__all__ = [
    "AdmissiblePolygon",
    "Arc",
    "CheckReport",
    "CircularArc",
    "DomainSpec",
    "SIGN_CONVENTION",
    "Sampled",
    "Segment",
    "ValidationReport",
    "arc_curvatures",
    "check",
    "check_cmc",
    "check_minimal",
    "check_translating",
    "enumerate_admissible_polygons",
    "load_domain",
    "smallest_enclosing_disk",
    "validate_domain",
]
