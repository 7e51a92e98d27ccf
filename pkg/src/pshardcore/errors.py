"""Exception hierarchy shared by every module.

Each error class carries the process exit code the CLI uses for it, so
scripts can tell a budget problem from a bad input without parsing text.
"""

from __future__ import annotations


class HardcoreError(Exception):
    exit_code = 1


class ValidationError(HardcoreError):
    exit_code = 2


class ConfigError(HardcoreError):
    exit_code = 3


class CapExceeded(HardcoreError):
    exit_code = 4


class WindowTooSmall(HardcoreError):
    exit_code = 5


class ActivityTooSmall(HardcoreError):
    exit_code = 6


class NonBipartite(ValidationError):
    pass


class FrameDisconnected(ValidationError):
    pass


class UnsupportedFamily(ValidationError):
    pass


class NotBasisConnected(ValidationError):
    pass


class ParityViolation(ValidationError):
    pass


class IncompatiblePair(ValidationError):
    pass


class NotIndependent(ValidationError):
    pass


class BoundaryViolation(ValidationError):
    pass


class InvalidFamily(ValidationError):
    pass


class WeightBoundViolated(ValidationError):
    def __init__(self, message: str, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class NotCertified(ActivityTooSmall):
    pass


class MissingLowerClass(ValidationError):
    pass


class NoRootInBracket(ValidationError):
    pass


class UnsupportedHost(ValidationError):
    pass
