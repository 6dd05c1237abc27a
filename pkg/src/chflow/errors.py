"""Exception types shared across the package."""


class ChflowError(Exception):
    """Base class for all package-specific errors."""


class AllMobilitiesZero(ChflowError):
    """Every per-phase mobility is zero: the partition multiplier is undefined."""


class TriangleInequalityViolated(ChflowError):
    """Pairwise surface tensions admit no non-negative per-phase decomposition."""


class NoWettingEquilibrium(ChflowError):
    """|cos(theta)| > 1: total wetting or dewetting, no equilibrium contact angle."""


class UnbalancedDefect(ChflowError):
    """Partition defect has non-zero mean: mass conservation broke upstream."""


class GeometryTooLarge(ChflowError):
    """Solid support leaves no room for the fluid phases."""


class NoContactLine(ChflowError):
    """Liquid level set does not meet the solid support."""


class EmptyLevelSet(ChflowError):
    """Requested iso-level does not intersect the field's range."""


class InsufficientResolution(ChflowError):
    """An interface-width sweep entry does not resolve the transition layer."""


class OverlappingShapes(ChflowError):
    """Two phase bodies of an initial condition overlap beyond the blending band."""


class ParseError(ChflowError):
    """Malformed run-configuration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ChflowError):
    """Well-formed configuration violating an invariant."""


class DivergenceDetected(ChflowError):
    """A field left the trusted range (NaN or |u| > 10) during a run."""
