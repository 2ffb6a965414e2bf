"""Exception hierarchy.

``UsageError`` subclasses map to CLI exit code 1, ``NumericError`` subclasses
to exit code 2.
"""


class SswError(Exception):
    pass


class UsageError(SswError, ValueError):
    pass


class NumericError(SswError, ArithmeticError):
    pass


class NotPositiveDefinite(NumericError):
    pass


class InvalidDof(UsageError):
    pass


class InvalidParameter(UsageError):
    pass


class DimensionMismatch(UsageError):
    pass


class ZeroWatermark(UsageError):
    pass


class DegenerateData(NumericError):
    pass


class NonFiniteElbo(NumericError):
    pass


class NonFiniteLogJoint(NumericError):
    pass


class MalformedHeader(UsageError):
    pass


class UnsupportedMaxval(UsageError):
    pass


class TruncatedData(UsageError):
    pass


class IndivisibleDimensions(UsageError):
    pass


class LayoutMismatch(UsageError):
    pass
