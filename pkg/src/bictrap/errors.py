"""Exception hierarchy shared across the package."""


class BictrapError(Exception):
    """Base class for all package errors."""


class ValidityError(BictrapError):
    """A physical-validity precondition is violated (e.g. coupling too strong)."""


class GeometryError(BictrapError):
    """Lattice geometry cannot accommodate the request (sizes, placement, horizon)."""


class ConsistencyError(BictrapError):
    """Mismatched objects passed together (basis vs. model, sector vs. state)."""


class ResourceError(BictrapError):
    """Request exceeds supported size or excitation-number limits."""


class NoBicError(ValidityError):
    """Resonance condition for a bound state in the continuum is not met."""


class ConfigError(BictrapError):
    """Configuration file is invalid; message lists every violation found."""
