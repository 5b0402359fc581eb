"""Exception hierarchy shared by all quadplane modules."""

from __future__ import annotations


class QuadplaneError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QuadplaneError, ValueError):
    """An input value is outside the physically meaningful domain."""


class FrameError(QuadplaneError):
    """A force/moment set was supplied in the wrong reference frame."""


class EnvelopeError(QuadplaneError):
    """Query lies outside the tested envelope; extrapolation is refused."""


class StallDomainError(EnvelopeError):
    """Angle of attack is beyond the pre-stall validity range of a lift fit."""


class SingularFitError(QuadplaneError):
    """Least-squares design matrix is rank deficient."""


class SequencingError(QuadplaneError):
    """Log timestamps are not strictly increasing."""


class FormatError(QuadplaneError):
    """An input file does not match the expected schema."""


class InfeasibleError(QuadplaneError):
    """A requested solution cannot be achieved with the available actuators.

    ``reason`` is a short machine-readable tag (``stall``, ``thrust``, ...)
    and ``detail`` optionally carries numbers such as the achievable range.
    """

    def __init__(self, message: str, reason: str = "infeasible", detail: dict | None = None):
        super().__init__(message)
        self.reason = reason
        self.detail = detail or {}
