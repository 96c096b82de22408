"""Exception types shared across the package."""


class WfeError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(WfeError):
    """Input text could not be parsed (bad line, unknown date format, ...)."""


class DataError(WfeError):
    """Parsed input violates a data contract (duplicates, empty segment, ...)."""


class InsufficientDataError(WfeError):
    """Series or grid too short for the requested computation."""


class ScaleRangeError(WfeError):
    """A scale or cut date lies outside the admissible range."""


class DegenerateInputError(WfeError):
    """Input is degenerate for the requested fit (zero fluctuation, ...)."""


class SynthesisError(WfeError):
    """Exact noise synthesis failed a numerical validity check."""


class EstimationError(WfeError):
    """An estimation pipeline failed and could not recover."""


class ConfigError(WfeError):
    """Invalid run configuration."""
