"""Exception types raised across the package."""

from __future__ import annotations


class GeoEstError(Exception):
    """Base class for all package errors."""


class NonSkewInput(GeoEstError, ValueError):
    pass


class NearPiSingularity(GeoEstError, ValueError):
    """Logarithm requested for a rotation whose angle is too close to pi."""

    def __init__(self, angle: float):
        super().__init__(f"principal angle {angle:.12g} rad is within the pi guard")
        self.angle = angle


class DimensionMismatch(GeoEstError, ValueError):
    pass


class RankDeficientDirections(GeoEstError, ValueError):
    pass


class DegenerateEigenvalues(GeoEstError, ValueError):
    pass


class OriginSingularity(GeoEstError, ValueError):
    pass


class NewtonNonConvergence(GeoEstError, RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"Newton failed after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class CovarianceBlowup(GeoEstError, RuntimeError):
    pass


class ConfigError(GeoEstError, ValueError):
    pass


class ParseError(GeoEstError, ValueError):
    pass


class NonMonotoneTimestamps(GeoEstError, ValueError):
    pass


class IoError(GeoEstError, OSError):
    pass
