"""Exception hierarchy shared by all gapdims modules."""


class GapdimsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidRatioError(GapdimsError):
    """A dissection ratio lies outside the open interval (0, 1/2)."""


class NotDecreasingError(GapdimsError):
    """An explicit gap list is not positive and non-increasing."""


class NotNormalizedError(GapdimsError):
    """An explicit gap list does not sum to 1 within tolerance."""


class InsufficientDepthError(GapdimsError):
    """A computation needs deeper levels than the sequence/profile provides."""


class OutOfDomainError(GapdimsError):
    """A dimension function was evaluated outside its domain."""


class NoAdmissibleWindowError(GapdimsError):
    """No (k, n) or (x, R, r) window satisfies the admissibility constraints."""


class DepthUnsupportedError(GapdimsError):
    """Requested truncation depth W is outside the supported range."""


class TruncationViolationError(GapdimsError):
    """A covering query asked for a scale below the truncation floor."""


class InvalidRangeError(GapdimsError):
    """A level range argument is out of bounds."""


class OutOfRegimeError(GapdimsError):
    """Statistic requested outside the parameter regime where it is defined."""


class NotLevelComparableError(GapdimsError):
    """An experiment requires a level comparable sequence and got none."""
