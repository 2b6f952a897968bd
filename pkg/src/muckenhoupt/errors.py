"""Exception types raised across the package."""


class MuckenhouptError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(MuckenhouptError, ValueError):
    def __init__(self, expected, got):
        super().__init__(f"dimension mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class InvalidParameter(MuckenhouptError, ValueError):
    pass


class NotIntegrable(MuckenhouptError, ValueError):
    """A density (or its dual weight) fails local integrability.

    ``exponent`` is the offending power and ``limit`` the threshold it must
    exceed.
    """

    def __init__(self, message, exponent=None, limit=None):
        super().__init__(message)
        self.exponent = exponent
        self.limit = limit


class LambdaUndefined(NotIntegrable):
    """The line mass diverges because a ray crosses a non-integrable singularity."""


class SingularHitError(MuckenhouptError, RuntimeError):
    """Too many samples landed on the singular set."""
