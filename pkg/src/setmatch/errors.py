"""Exception types shared across the library.

The CLI maps these onto its exit-code contract: usage problems exit 1,
data/input problems exit 2, numeric failures exit 3.
"""


class InputError(ValueError):
    """An in-process API was called with invalid arguments (shape, domain, NaN)."""


class DataError(Exception):
    """A data file is missing, malformed, or inconsistent with the model."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""
