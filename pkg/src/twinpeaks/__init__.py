"""Numerics for the two-bubble construction on twin pseudo-peaks of the scalar curvature."""

from . import bubble, peaks, polyalg, quad, reduce, sphere
from ._kernels import BACKEND as KERNEL_BACKEND
from .bubble import Bubble, BubbleConfig
from .peaks import TwinPeakModel, random_model, symmetric_model, validate
from .polyalg import HomogeneousPoly
from .reduce import NumericalFailure, ReducedPoint, construct

__version__ = "0.1.0"

__all__ = [
    "Bubble",
    "BubbleConfig",
    "HomogeneousPoly",
    "KERNEL_BACKEND",
    "NumericalFailure",
    "ReducedPoint",
    "TwinPeakModel",
    "bubble",
    "construct",
    "peaks",
    "polyalg",
    "quad",
    "random_model",
    "reduce",
    "sphere",
    "symmetric_model",
    "validate",
]
