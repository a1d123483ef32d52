"""Domain error types shared across modules.

Every error carries a stable ``code`` slug so the HTTP layer can map it to a
uniform ``{code, message}`` body without string matching.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all domain rule violations."""

    code = "domain_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)

    @property
    def message(self) -> str:
        return str(self)


class ValidationError(DomainError):
    """Input fails a structural or range constraint."""

    code = "validation_error"


class NotFound(DomainError):
    """A referenced aggregate does not exist."""

    code = "not_found"


class UserNotFound(NotFound):
    code = "user_not_found"


class TargetNotFound(NotFound):
    code = "target_not_found"


class Forbidden(DomainError):
    """Actor exists but is not allowed to perform the operation."""

    code = "forbidden"


class NotOwner(Forbidden):
    code = "not_owner"


class NotAuthorized(Forbidden):
    code = "not_authorized"


class NotAnOrganization(Forbidden):
    code = "not_an_organization"


class NotAParty(Forbidden):
    code = "not_a_party"


class NotATarget(Forbidden):
    code = "not_a_target"


class Conflict(DomainError):
    """Operation clashes with current aggregate state."""

    code = "conflict"


class IllegalTransition(Conflict):
    """Event is not legal in the engagement's current state."""

    code = "illegal_transition"

    def __init__(self, state, event):
        self.state = state
        self.event = event
        super().__init__(f"event {event.value!r} not legal in state {state.value!r}")


class TerminalState(IllegalTransition):
    """No events are accepted once an engagement is Closed or Cancelled."""

    code = "terminal_state"


class AlreadyTerminal(Conflict):
    code = "already_terminal"


class AlreadyEngaged(Conflict):
    code = "already_engaged"


class AlreadyRated(Conflict):
    code = "already_rated"


class AlreadyResolved(Conflict):
    code = "already_resolved"


class AlreadyIssued(Conflict):
    code = "already_issued"


class WrongState(Conflict):
    code = "wrong_state"


class NotCompleted(Conflict):
    code = "not_completed"


class DuplicateEmail(Conflict):
    code = "duplicate_email"


class TargetIsOrganization(ValidationError):
    code = "target_is_organization"


class NoLocation(ValidationError):
    code = "no_location"


class TooFewWords(ValidationError):
    code = "too_few_words"


class MalformedWord(ValidationError):
    code = "malformed_word"

    def __init__(self, line_no: int, word: str, reason: str):
        self.line_no = line_no
        self.word = word
        super().__init__(f"line {line_no}: {word!r} {reason}")


class InvalidSession(DomainError):
    """Session token is missing, unknown, or expired."""

    code = "invalid_session"


class LockedOut(DomainError):
    """Too many failed keyword attempts; engagement is flagged for review."""

    code = "locked_out"


class VersionConflict(Conflict):
    """Optimistic compare-and-set failed for an aggregate write."""

    code = "version_conflict"


class CorruptStore(Exception):
    """Persisted collection fails an integrity check; refuse to start."""

    def __init__(self, file: str, line: int, reason: str):
        self.file = file
        self.line = line
        self.reason = reason
        super().__init__(f"{file}:{line}: {reason}")
