"""Exception hierarchy shared by every pjkg module."""


class PJKGError(Exception):
    """Base class for all pjkg errors."""


class UnknownClass(PJKGError, KeyError):
    pass


class UnknownRelationship(PJKGError, KeyError):
    pass


class EmptySchema(PJKGError, ValueError):
    pass


class SchemaError(PJKGError, ValueError):
    """A schema document breaks one of the schema invariants."""


class UnknownNode(PJKGError, KeyError):
    pass


class UnknownPatient(UnknownNode):
    pass


class DuplicateIdConflict(PJKGError, ValueError):
    pass


class DanglingEndpoint(PJKGError, ValueError):
    pass


class ConstraintViolation(PJKGError, ValueError):
    pass


class StartUniquenessViolation(ConstraintViolation):
    pass


class MalformedJourney(PJKGError, ValueError):
    pass


class ParseFailure(PJKGError, ValueError):
    """Raised when a document cannot be parsed.

    ``offset`` is a character offset into the raw text when the failure is
    lexical, ``path`` names the offending key when it is structural.
    """

    def __init__(self, message: str, offset: int | None = None, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.offset = offset
        self.path = path


class IoFailure(PJKGError, OSError):
    pass


class BackendUnavailable(PJKGError, RuntimeError):
    pass


class RetryExhausted(PJKGError, RuntimeError):
    def __init__(self, message: str, attempts: list[str], errors: list[str]):
        super().__init__(message)
        self.attempts = attempts
        self.errors = errors


class UnparseableTimestamp(PJKGError, ValueError):
    pass


class MissingPatientId(PJKGError, ValueError):
    pass


class DuplicatePatientId(PJKGError, ValueError):
    pass


class EmptyWorkload(PJKGError, ValueError):
    pass
