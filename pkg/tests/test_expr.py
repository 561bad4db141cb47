from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jsgraph.errors import ExpressionError
from jsgraph.expr import parse


def test_evaluate_and_derivative() -> None:
    e = parse("x^2*sin(y)")
    assert e(2.0, 0.5) == pytest.approx(4 * math.sin(0.5), rel=1e-15)
    assert e.diff("x")(2.0, 0.5) == pytest.approx(4 * math.sin(0.5), rel=1e-15)
    assert e.diff("y")(2.0, 0.5) == pytest.approx(4 * math.cos(0.5), rel=1e-15)
    assert e.symbols == frozenset({"x", "y"})


def test_constants_and_vectorized() -> None:
    e = parse("-log(cos(x)) + pi*0")
    x = np.array([0.0, math.pi / 3])
    assert np.allclose(e(x, 0 * x), [0.0, math.log(2.0)], atol=1e-15)


def test_unknown_symbol() -> None:
    with pytest.raises(ExpressionError, match="unknown symbol 'foo'"):
        parse("x+foo")


def test_unbalanced_parenthesis() -> None:
    with pytest.raises(ExpressionError):
        parse("sin(x")


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_derivative_matches_finite_difference(x, y) -> None:
    e = parse("exp(x*y) + sqrt(4 - x^2 - y^2) / (1 + x^2)")
    h = 1e-6
    fd = (e(x + h, y) - e(x - h, y)) / (2 * h)
    assert e.diff("x")(x, y) == pytest.approx(fd, rel=1e-6, abs=1e-8)
