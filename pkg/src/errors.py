"""Exception types shared across dyncoh services."""

from typing import Optional


class DyncohError(Exception):
    """Base class for every error raised by dyncoh."""

    exit_code = 1


class SpecError(DyncohError, ValueError):
    """Malformed input: bad dimensions, invalid parameters, non-CPTP data."""

    exit_code = 1


class EnumerationCapError(SpecError):
    """Deterministic-channel enumeration would exceed the configured cap."""


class SolverError(DyncohError, RuntimeError):
    """A conic program did not reach an optimal status."""

    exit_code = 2

    def __init__(self, message: str, report: Optional[object] = None):
        super().__init__(message)
        self.report = report


class CertificateError(DyncohError):
    """A construction failed one of its embedded certificates."""

    exit_code = 3
