"""Connections, curvature and embedded noncommutative spaces."""
from .bundles import (LEFT, RIGHT, ConnectionData, CurvatureData, GaugeError, ModuleMembershipError,
                      bimodule_form, canonical_connection, curvature, fibre_metric, gauge_element,
                      gauge_transform, nabla_curvature, nabla_left, nabla_right)
from .embedded import (ChristoffelData, DualityError, EmbeddingSpec, Geometry, IntegrabilityWarning,
                       RiemannData, build_geometry, christoffel, riemann)
from .verdicts import Check, Verdict

__all__ = [
    "LEFT", "RIGHT", "ConnectionData", "CurvatureData", "GaugeError", "ModuleMembershipError",
    "bimodule_form", "canonical_connection", "curvature", "fibre_metric", "gauge_element",
    "gauge_transform", "nabla_curvature", "nabla_left", "nabla_right",
    "ChristoffelData", "DualityError", "EmbeddingSpec", "Geometry", "IntegrabilityWarning",
    "RiemannData", "build_geometry", "christoffel", "riemann", "Check", "Verdict",
]
