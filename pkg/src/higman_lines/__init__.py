"""Standard lines in Baumslag-Solitar groups and Higman-type polygonal complexes."""

from .bs_algebra import BsElement, BsParams, make_params, multiply, normalize
from .errors import (
    ChartInconsistency,
    HigmanLinesError,
    ResourceCapExceeded,
    TruncationInsufficient,
    ValidationError,
)

__all__ = [
    "BsElement",
    "BsParams",
    "ChartInconsistency",
    "HigmanLinesError",
    "ResourceCapExceeded",
    "TruncationInsufficient",
    "ValidationError",
    "make_params",
    "multiply",
    "normalize",
]
