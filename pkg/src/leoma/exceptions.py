"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value violates a model invariant."""


class DegenerateGeometryError(ValueError):
    """Geometry for which a direction or angle is undefined."""


class InvalidWeightsError(ValueError):
    """Beamforming weights that cannot produce a defined SINR."""


class NumericalDegeneracyError(ArithmeticError):
    """A quantity that must be strictly positive is not."""
