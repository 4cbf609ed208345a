"""Exception types shared across the package.

The command line maps these onto distinct exit codes, so library code
should raise ValidationError for bad inputs or mismatched geometry and
NumericsError when a computation produced non-finite or unusable values.
"""

__all__ = ["NumericsError", "ValidationError"]


class ValidationError(ValueError):
    """Input failed a structural or geometric consistency check."""


class NumericsError(ArithmeticError):
    """A numerical computation failed or produced non-finite values."""
