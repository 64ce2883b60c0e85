"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class NumRangeError(Exception):
    """Base class for errors raised by :mod:`numrange`."""

    #: exit code used by the CLI when this error escapes a command
    exit_code = 3

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class InvalidInput(NumRangeError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad parameters."""

    exit_code = 2


class DimensionMismatch(InvalidInput):
    pass


class BasisNotOrthonormal(InvalidInput):
    pass


class NoConvergence(NumRangeError):
    """The eigensolver exhausted its budget; ``residual`` is the best achieved."""

    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["residual"] = self.residual
        return d


class DegenerateNumericalRange(NumRangeError):
    """W(A) has empty interior (a point or a segment)."""


class OutsideRange(NumRangeError):
    """Target point lies outside the numerical range."""


class NotInRange(OutsideRange):
    """Target outside the numerical range of a 2x2 compression."""


class ChordSearchFailed(NumRangeError):
    pass


class BranchLost(NumRangeError):
    def __init__(self, msg: str, theta: float, overlap: float):
        super().__init__(msg)
        self.theta = theta
        self.overlap = overlap

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update(theta=self.theta, overlap=self.overlap)
        return d
