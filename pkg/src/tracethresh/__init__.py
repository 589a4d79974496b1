"""Epidemic thresholds and extinction under forward contact tracing with delays."""

__version__ = "1.0.0"

from .dist import DiffLaw, DistributionSpec, trunc_expect  # noqa: E402
from .errors import (  # noqa: E402
    DegenerateHistogram,
    InvalidConfig,
    NoBracket,
    NoConvergence,
    NonConvergedQuadrature,
    NumericalFailure,
    TraceThreshError,
)
from .params import INDEPENDENT, MUTUAL, ModelParams  # noqa: E402

__all__ = [
    "__version__",
    "DiffLaw",
    "DistributionSpec",
    "trunc_expect",
    "ModelParams",
    "INDEPENDENT",
    "MUTUAL",
    "TraceThreshError",
    "InvalidConfig",
    "NumericalFailure",
    "NonConvergedQuadrature",
    "NoConvergence",
    "NoBracket",
    "DegenerateHistogram",
]
