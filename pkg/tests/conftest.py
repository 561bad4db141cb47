"""Shared fixtures and domain builders for the test suite."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from jsgraph.domain import DomainSpec
from jsgraph.domain.arcs import Arc, CircularArc, Segment
from jsgraph.expr import parse

DOMAINS = Path(__file__).resolve().parents[1] / "domains"

ACCEPTANCE_LINES: list[str] = []


def load(name):
    return DomainSpec.load(DOMAINS / f"{name}.json")


def square(kinds, a=0.0, b=1.0, data="0"):
    """Axis-aligned square with arcs bottom, right, top, left labeled by ``kinds``."""
    pts = [(a, a), (b, a), (b, b), (a, b)]
    ids = ["bottom", "right", "top", "left"]
    arcs = []
    for k, kind in enumerate(kinds):
        arcs.append(Arc(ids[k], kind, Segment(pts[k], pts[(k + 1) % 4]), parse(data) if kind == "C" else None))
    return DomainSpec(tuple(arcs))


def rectangle(x0, x1, y0, y1, data):
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    return DomainSpec(tuple(
        Arc(f"s{k}", "C", Segment(pts[k], pts[(k + 1) % 4]), parse(data)) for k in range(4)
    ))


def disk(radius=1.0, data="0"):
    return DomainSpec((Arc("rim", "C", CircularArc((0.0, 0.0), radius, 0.0, 2 * math.pi), parse(data)),))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
