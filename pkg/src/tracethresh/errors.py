"""Exception types.  The CLI maps each family to an exit code."""


class TraceThreshError(Exception):
    pass


class InvalidConfig(TraceThreshError, ValueError):
    """Parameters outside their domain or an unsupported law for an operation."""


class NumericalFailure(TraceThreshError, ArithmeticError):
    pass


class NonConvergedQuadrature(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class NoBracket(NumericalFailure):
    pass


class NotFound(NumericalFailure):
    pass


class DegenerateHistogram(TraceThreshError):
    """A final-size histogram has no minor/major separation."""
