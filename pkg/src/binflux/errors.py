"""Exception types shared across the package."""


class BinfluxError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(BinfluxError):
    """A configuration value is out of range or inconsistent.

    The message names the offending field.
    """


class ModelUnsupportedError(BinfluxError):
    """The requested computation has no closed form for this model.

    Raised when an exact calculation is asked to handle a feature that only
    the Monte Carlo path supports (history-dependent deadtime suppression,
    for example).
    """


class DegenerateEvidenceError(BinfluxError):
    """The observed data has zero probability under every candidate value."""


class MatrixFormatError(BinfluxError):
    """A response-matrix file could not be parsed.

    The message carries line and field diagnostics.
    """
