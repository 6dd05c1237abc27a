"""Pseudo-spectral multiphase Cahn-Hilliard flows with degenerate mobilities.

The package provides two semi-implicit Fourier time steppers for multiphase
Cahn-Hilliard gradient flows (a singly degenerate mobility model and a
doubly degenerate one with a metric mobility), diagnostics for energies,
conservation and interface geometry, and a wetting application where a
liquid film evolves on a frozen solid support.
"""

from .errors import (
    AllMobilitiesZero,
    ChflowError,
    DivergenceDetected,
    EmptyLevelSet,
    GeometryTooLarge,
    InsufficientResolution,
    NoContactLine,
    NoWettingEquilibrium,
    OverlappingShapes,
    ParseError,
    TriangleInequalityViolated,
    UnbalancedDefect,
    ValidationError,
)
from .spectral import Grid, SpectralField
from .system import PhaseSystem, SchemeParams, consistent_mu

__all__ = [
    "Grid",
    "SpectralField",
    "PhaseSystem",
    "SchemeParams",
    "consistent_mu",
    "ChflowError",
    "AllMobilitiesZero",
    "TriangleInequalityViolated",
    "NoWettingEquilibrium",
    "UnbalancedDefect",
    "GeometryTooLarge",
    "NoContactLine",
    "EmptyLevelSet",
    "InsufficientResolution",
    "OverlappingShapes",
    "ParseError",
    "ValidationError",
    "DivergenceDetected",
]

__version__ = "0.1.0"
