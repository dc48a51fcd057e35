"""Noncommutative differential geometry over the Moyal algebra.

Layers, bottom up: ``expr`` (symbolic expressions), ``moyal`` (truncated
star-product series), ``matalg`` (matrices over the algebra),
``geometry`` (embedded spaces, connections, curvature, diagnostics) and
``cli`` (spec files and reports).
"""
__version__ = "0.1.0"

from .expr import DomainError, ParseError, SampleBox, UndeclaredSymbolError, parse
from .matalg import MoyalMatrix, NotEmbeddedError, series_inverse
from .moyal import AlgebraContext, MoyalElement, bar, star
from .geometry import DualityError, EmbeddingSpec, Geometry, build_geometry

__all__ = [
    "__version__", "DomainError", "ParseError", "SampleBox", "UndeclaredSymbolError", "parse",
    "MoyalMatrix", "NotEmbeddedError", "series_inverse", "AlgebraContext", "MoyalElement", "bar",
    "star", "DualityError", "EmbeddingSpec", "Geometry", "build_geometry",
]
