"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`LmarchError`
and from the closest builtin, so callers can catch either.
"""

from __future__ import annotations


class LmarchError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(LmarchError, ValueError):
    pass


class WindowTooShortError(InvalidArgumentError):
    def __init__(self, required: int, available: int, message: str | None = None):
        self.required = required
        self.available = available
        super().__init__(
            message
            or f"window too short: need {required} observations, have {available}"
        )


class DegenerateAssetError(LmarchError, ValueError):
    def __init__(self, asset, message: str | None = None):
        self.asset = asset
        super().__init__(message or f"asset {asset!r} has zero variance")


class DegenerateSeriesError(LmarchError, ValueError):
    def __init__(self, column, measure: str):
        self.column = column
        self.measure = measure
        super().__init__(f"series {column!r} has zero variance in measure {measure}")


class NumericFailureError(LmarchError, ArithmeticError):
    def __init__(self, message: str, iterations: int | None = None):
        self.iterations = iterations
        super().__init__(message)


class SingularMatrixError(LmarchError, ArithmeticError):
    """Raised when an inverse square root meets non-positive eigenvalues."""

    def __init__(self, ranks, date=None):
        self.ranks = list(ranks)
        self.date = date
        where = f" at {date}" if date is not None else ""
        super().__init__(f"non-positive eigenvalues at ranks {self.ranks}{where}")


class InvalidRankError(LmarchError, ValueError):
    def __init__(self, rank: int, message: str, date=None):
        self.rank = rank
        self.date = date
        where = f" at {date}" if date is not None else ""
        super().__init__(f"{message}{where}")


class NotPSDError(LmarchError, ValueError):
    pass


class ParseError(LmarchError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class OrderingError(LmarchError, ValueError):
    pass


class MissingDataError(LmarchError, ValueError):
    def __init__(self, date, labels):
        self.date = date
        self.labels = list(labels)
        super().__init__(f"missing values on {date} for {self.labels}")


class MappingError(LmarchError, ValueError):
    def __init__(self, date, label, value):
        self.date = date
        self.label = label
        self.value = value
        super().__init__(f"cannot map value {value!r} of {label!r} on {date}")
