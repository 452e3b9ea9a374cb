"""Minimal flow time between diffeomorphisms for constrained families of vector fields."""

from .core1d import GridFunction, MonotonePwl, SmoothFunction, StepFunction, parse_map, smooth_map
from .errors import BudgetExceeded, DomainError, FlowDepthError, NonPositiveSlope, SolverBug
from .relu1d_metric import complexity, distance, geodesic_length, geodesic_point

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "DomainError",
    "FlowDepthError",
    "GridFunction",
    "MonotonePwl",
    "NonPositiveSlope",
    "SmoothFunction",
    "SolverBug",
    "StepFunction",
    "complexity",
    "distance",
    "geodesic_length",
    "geodesic_point",
    "parse_map",
    "smooth_map",
]
