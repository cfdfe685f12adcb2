"""Closed error taxonomy.

Every error carries a stable ``code`` (the class name) and the process exit
code the CLI uses for it: 2 for bad input, 1 for estimator failures.
"""

from __future__ import annotations


class RankRegError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"code": self.code, "exit": self.exit_code, "message": str(self)}


class InputError(RankRegError, ValueError):
    exit_code = 2


class InvalidInput(InputError):
    pass


class InvalidSpec(InputError):
    pass


class MissingColumn(InputError):
    pass


class NonBinaryColumn(InputError):
    pass


class ParseError(InputError):
    def __init__(self, row: int, col: str, value: str = ""):
        self.row = row
        self.col = col
        super().__init__(f"cannot parse {value!r} in column {col!r} at row {row}")

    def to_dict(self) -> dict:
        return {**super().to_dict(), "row": self.row, "col": self.col}


class EstimationError(RankRegError):
    exit_code = 1


class NoVariation(EstimationError):
    pass


class SingularDesign(EstimationError):
    def __init__(self, message: str, smallest_singular_value: float = float("nan")):
        self.smallest_singular_value = smallest_singular_value
        super().__init__(message)


class TiesPresent(EstimationError):
    pass


class DegenerateDistribution(EstimationError):
    pass


class OverlapViolation(EstimationError):
    pass


class WeakOrWrongSignedFirstStage(EstimationError):
    pass


class InsufficientCells(EstimationError):
    pass


class InsufficientLocalData(EstimationError):
    pass


class InternalError(RankRegError):
    """Wraps an unexpected exception so the CLI still reports a stable code."""


ALL_ERRORS = (
    InvalidInput,
    InvalidSpec,
    MissingColumn,
    NonBinaryColumn,
    ParseError,
    NoVariation,
    SingularDesign,
    TiesPresent,
    DegenerateDistribution,
    OverlapViolation,
    WeakOrWrongSignedFirstStage,
    InsufficientCells,
    InsufficientLocalData,
    InternalError,
)
