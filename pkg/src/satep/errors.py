"""Error hierarchy shared by every service layer.

Each error carries a stable machine-readable code; the HTTP layer maps
codes to status numbers, everything below it stays transport-agnostic.
"""

from __future__ import annotations


class SatepError(Exception):
    """Base class for all platform errors."""

    code = "INTERNAL"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# --- validation / malformed input -------------------------------------

class MalformedJson(SatepError):
    code = "MALFORMED_JSON"


class UnknownField(SatepError):
    code = "UNKNOWN_FIELD"


class MissingField(SatepError):
    code = "MISSING_FIELD"


class InvalidField(SatepError):
    code = "INVALID_FIELD"


class InvalidQuestion(SatepError):
    code = "INVALID_QUESTION"


class InvalidSchedule(SatepError):
    code = "INVALID_SCHEDULE"


class CaptchaFailed(SatepError):
    code = "CAPTCHA_FAILED"


class EmptyBody(SatepError):
    code = "EMPTY_BODY"


class BodyTooLong(SatepError):
    code = "BODY_TOO_LONG"


class EmptyFile(SatepError):
    code = "EMPTY_FILE"


class FileTooLarge(SatepError):
    code = "FILE_TOO_LARGE"


class UnknownQuestion(SatepError):
    code = "UNKNOWN_QUESTION"


# --- authentication / authorization ------------------------------------

class NotAuthenticated(SatepError):
    code = "NOT_AUTHENTICATED"


class InvalidCredentials(SatepError):
    code = "INVALID_CREDENTIALS"


class NotAuthorized(SatepError):
    code = "NOT_AUTHORIZED"


class NotOwner(SatepError):
    code = "NOT_OWNER"


# --- missing resources --------------------------------------------------

class NotFound(SatepError):
    code = "NOT_FOUND"


# --- conflicts with current state ----------------------------------------

class DuplicateUsername(SatepError):
    code = "DUPLICATE_USERNAME"


class DuplicateEmail(SatepError):
    code = "DUPLICATE_EMAIL"


class DuplicateRegisterNumber(SatepError):
    code = "DUPLICATE_REGISTER_NUMBER"


class DuplicateTitle(SatepError):
    code = "DUPLICATE_TITLE"


class DuplicateKey(SatepError):
    code = "DUPLICATE_KEY"


class PoolTooSmall(SatepError):
    code = "POOL_TOO_SMALL"


class OutsideWindow(SatepError):
    code = "OUTSIDE_WINDOW"


class AlreadyOpen(SatepError):
    code = "ALREADY_OPEN"


class AlreadySubmitted(SatepError):
    code = "ALREADY_SUBMITTED"


class Expired(SatepError):
    code = "EXPIRED"


class NoRecipients(SatepError):
    code = "NO_RECIPIENTS"


class ReferencedByActiveExam(SatepError):
    code = "REFERENCED_BY_ACTIVE_EXAM"


# --- infrastructure -------------------------------------------------------

class ConfigError(SatepError):
    code = "CONFIG_ERROR"


class StorageUnavailable(SatepError):
    code = "STORAGE_UNAVAILABLE"


class MigrationConflict(SatepError):
    code = "MIGRATION_CONFLICT"
