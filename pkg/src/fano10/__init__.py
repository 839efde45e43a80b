"""Exact-arithmetic toolkit for degree-ten Fano manifolds cut out of G(2,5)."""

from .fields import GF, GF2, INTERPOLATION_PRIME, QQ, Field, field_from_json
from .linalg import Matrix

__all__ = [
    "Field",
    "GF",
    "GF2",
    "INTERPOLATION_PRIME",
    "Matrix",
    "QQ",
    "field_from_json",
]

__version__ = "0.1.0"
