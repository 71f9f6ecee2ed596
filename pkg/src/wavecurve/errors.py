"""Exception types shared across the package."""


class WavecurveError(Exception):
    """Base class for all library errors."""


class GeometryError(WavecurveError):
    """Invalid geometric configuration (coincident points, bad frames, ...)."""


class SingularReflectionError(GeometryError):
    """Grazing incidence made the basis-alignment matrix numerically singular."""


class CausticError(GeometryError):
    """Propagation would cross a caustic (a principal radius passes through zero)."""


class OracleError(WavecurveError):
    """A validation oracle failed to converge."""


class ConfigError(WavecurveError):
    """Invalid experiment or estimator configuration."""
