"""Exception hierarchy shared by all engine modules.

Each class carries the CLI exit code and HTTP status it maps to, so the
operator surfaces never need their own translation tables.
"""

from __future__ import annotations


class OticError(Exception):
    exit_code = 1
    http_status = 409


class NotFound(OticError, LookupError):
    http_status = 404


class DuplicateError(OticError):
    pass


class ValidationError(OticError, ValueError):
    http_status = 422


class MediumMismatch(ValidationError):
    pass


class PortOccupied(OticError):
    pass


class PoolExhausted(OticError):
    exit_code = 4


class StillReferenced(OticError):
    pass


class L2OnlyInterface(ValidationError):
    pass


class TemplateViolation(ValidationError):
    pass


class IncompatibleProfile(ValidationError):
    pass


class PlaneOrderError(OticError):
    pass


class LifecycleError(OticError):
    pass


class PortConflict(OticError):
    pass


class ProvisionError(OticError):
    pass


class UnknownOwner(ValidationError):
    pass


class CorruptJournal(OticError):
    def __init__(self, seq: int, reason: str):
        super().__init__(f"journal entry {seq}: {reason}")
        self.seq = seq
        self.reason = reason
