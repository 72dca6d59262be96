"""Linearization of bounded polynomial iterations by almost-periodic
Weierstrass-Mandelbrot curves."""

from .errors import (
    ConvergenceError,
    DomainError,
    HardyViolation,
    HardyWarning,
    NoNonzeroOffset,
    ResonanceError,
)
from .polymap import PolyMap

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "HardyViolation",
    "HardyWarning",
    "NoNonzeroOffset",
    "PolyMap",
    "ResonanceError",
]
