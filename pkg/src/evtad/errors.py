"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, ``DataError``
exits 2 and ``NumericalError`` exits 3.
"""


class EvtadError(Exception):
    """Base class for all package-specific errors."""


class DataError(EvtadError):
    """Invalid, missing or contract-violating input data."""


class NumericalError(EvtadError):
    """A numerical procedure failed (divergence, degenerate fit, ...)."""
