"""Exception hierarchy shared by every module."""


class JSGraphError(Exception):
    """Base class for all package errors."""


class InputError(JSGraphError, ValueError):
    """Malformed or inconsistent user input."""


class ExpressionError(InputError):
    """Expression text could not be parsed or references unknown names."""

    def __init__(self, message, text="", position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position} in {text!r}"
        super().__init__(message)


class MetricDomainError(InputError):
    """A point lies outside the set where the metric is defined."""


class DegenerateInputError(InputError):
    """Zero-length segments, zero-area triangles and similar."""


class DomainError(InputError):
    """A domain description violates a structural requirement.

    ``arcs`` names the offending arc ids.
    """

    def __init__(self, message, arcs=(), code="invalid-domain"):
        self.arcs = tuple(arcs)
        self.code = code
        super().__init__(message)


class UnsupportedModeError(InputError):
    """Requested check mode is not available for this metric/domain."""


class HypothesisViolationError(DomainError):
    """The domain falls outside the hypotheses of the requested existence check."""


class EnumerationLimitError(InputError):
    """Refusal to enumerate polygons above the configured vertex cap."""


class MeshError(JSGraphError):
    """The domain could not be meshed."""


class NumericError(JSGraphError, ArithmeticError):
    """Non-finite values met during assembly or solving."""


class SingularSystemError(NumericError):
    """The Newton linear system could not be factorized."""


class NewtonStallError(NumericError):
    """Line search step fell below the minimum; carries the best iterate."""

    def __init__(self, message, iterate=None, residual_norm=None, iterations=0):
        self.iterate = iterate
        self.residual_norm = residual_norm
        self.iterations = iterations
        super().__init__(message)


class StructuralCheckError(JSGraphError):
    """Continuation refused because the structural check failed."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class ShootingError(NumericError):
    """The shooting method could not bracket the boundary condition."""

    def __init__(self, message, bracket=None):
        self.bracket = bracket
        super().__init__(message)


class OracleDomainError(InputError):
    """A closed-form oracle was evaluated outside its validity domain."""
