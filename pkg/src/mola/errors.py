"""Exception hierarchy shared across the package."""


class MolaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MolaError):
    """Inconsistent inputs: dimension mismatches, bad parameter combinations."""


class ValidationError(MolaError):
    """A value violates its documented range or structure."""


class IngestionError(MolaError):
    """A suitability file could not be loaded; message names the offending cell."""


class UndefinedBaselineError(MolaError):
    """Loss is undefined because the zero-degradation map has no agricultural parcels."""


class StateCapExceededError(MolaError):
    """Exact enumeration refused: the state space exceeds the configured cap."""
