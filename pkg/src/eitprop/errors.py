"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid parameters or configuration; maps to CLI exit code 1."""


class NumericalError(RuntimeError):
    """A computation produced non-finite or ambiguous results; exit code 2."""
