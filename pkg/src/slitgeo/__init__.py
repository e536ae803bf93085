"""Certified constructions of slowly divergent directions on cyclic covers
of the square torus: exact lattice enumeration, vector continued fractions,
shortest-vector profiles, density floors, and the two chain builders."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    ConstructionStalled,
    HypothesisViolated,
    PrecisionExhausted,
    SlitgeoError,
    VerificationFailure,
)
from .lattice import (
    Direction,
    IntVec2,
    SlitConfig,
    WVec,
    cross_int,
    cross_w,
    enumerate_in_strip,
    reduce_primitive,
)
from .reals import Real

__all__ = [
    "BudgetExceeded",
    "ConstructionStalled",
    "Direction",
    "HypothesisViolated",
    "IntVec2",
    "PrecisionExhausted",
    "Real",
    "SlitConfig",
    "SlitgeoError",
    "VerificationFailure",
    "WVec",
    "cross_int",
    "cross_w",
    "enumerate_in_strip",
    "reduce_primitive",
    "__version__",
]
