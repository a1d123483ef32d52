"""Core domain types and the engagement lifecycle state machine.

Values are immutable; every state change returns a new instance. The service
layer is responsible for serializing writes per aggregate.
"""

from __future__ import annotations

import math
import re
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum

from .errors import (
    AlreadyTerminal,
    IllegalTransition,
    NotOwner,
    TerminalState,
    ValidationError,
)

MAX_TITLE_LEN = 120
MAX_DESCRIPTION_LEN = 2000
MAX_DISPLAY_NAME_LEN = 100

_LOCAL_RE = re.compile(r"^[a-z0-9._%+-]{1,64}$")
_LABEL_RE = re.compile(r"^[a-z0-9]([a-z0-9-]{0,61}[a-z0-9])?$")


def new_id() -> str:
    return uuid.uuid4().hex


def normalize_email(raw: str) -> str:
    return raw.strip().lower()


def validate_email(raw: str) -> bool:
    """True iff ``raw`` (trimmed, lowercased) is ``local@label(.label)+``.

    local is 1-64 chars of [a-z0-9._%+-]; each label is 1-63 chars of
    [a-z0-9-] that neither starts nor ends with "-". Deliberately simpler
    than full RFC address syntax. Total function, never raises.
    """
    if not isinstance(raw, str):
        return False
    email = normalize_email(raw)
    if email.count("@") != 1:
        return False
    local, domain = email.split("@")
    if not _LOCAL_RE.match(local):
        return False
    labels = domain.split(".")
    if len(labels) < 2:
        return False
    return all(_LABEL_RE.match(label) for label in labels)


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84-style coordinate on the matching map."""

    latitude: float
    longitude: float

    def __post_init__(self):
        if not (math.isfinite(self.latitude) and math.isfinite(self.longitude)):
            raise ValidationError("coordinates must be finite")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValidationError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude < 180.0:
            raise ValidationError(f"longitude {self.longitude} outside [-180, 180)")


@dataclass(frozen=True)
class UserAccount:
    """A platform member. Roles are not fixed: anyone may request or help.

    Organizations (``is_organization=True``) exist only to confirm profiles;
    they can neither post favor requests nor accept engagements.
    """

    id: str
    email: str
    display_name: str
    created_at: datetime
    home_location: GeoPoint | None = None
    is_organization: bool = False

    def __post_init__(self):
        if self.email != normalize_email(self.email) or not validate_email(self.email):
            raise ValidationError(f"invalid email {self.email!r}")
        name = self.display_name.strip()
        if not 1 <= len(name) <= MAX_DISPLAY_NAME_LEN:
            raise ValidationError("display_name must be 1-100 characters after trimming")


class RequestStatus(Enum):
    OPEN = "open"
    ENGAGED = "engaged"
    CLOSED = "closed"
    CANCELLED = "cancelled"
    EXPIRED = "expired"


TERMINAL_REQUEST_STATUSES = frozenset(
    {RequestStatus.CLOSED, RequestStatus.CANCELLED, RequestStatus.EXPIRED}
)


@dataclass(frozen=True)
class FavorRequest:
    """A geo-tagged ask for help, alive between created_at and expires_at."""

    id: str
    requester_id: str
    title: str
    description: str
    location: GeoPoint
    created_at: datetime
    expires_at: datetime
    status: RequestStatus = RequestStatus.OPEN

    def __post_init__(self):
        if not self.title.strip():
            raise ValidationError("title must be non-empty")
        if len(self.title) > MAX_TITLE_LEN:
            raise ValidationError(f"title longer than {MAX_TITLE_LEN} characters")
        if len(self.description) > MAX_DESCRIPTION_LEN:
            raise ValidationError(f"description longer than {MAX_DESCRIPTION_LEN} characters")
        if self.expires_at <= self.created_at:
            raise ValidationError("expires_at must be after created_at")


@dataclass(frozen=True)
class ChallengeKeyPair:
    """The two platform-generated doorstep keywords for one engagement.

    ``volunteer_word`` is what the volunteer must speak at the door,
    ``requester_word`` what the requester must speak back. Both parties can
    read both words: each needs the other's word to check it.
    """

    engagement_id: str
    volunteer_word: str
    requester_word: str
    issued_at: datetime

    def __post_init__(self):
        if self.volunteer_word == self.requester_word:
            raise ValidationError("keyword pair must use two distinct words")


class EngagementState(Enum):
    ACCEPTED = "accepted"
    KEYS_ISSUED = "keys_issued"
    AUTHENTICATED = "authenticated"
    COMPLETED = "completed"
    CLOSED = "closed"
    CANCELLED = "cancelled"


class EngagementEvent(Enum):
    ISSUE_KEYS = "issue_keys"
    VERIFY_ARRIVAL = "verify_arrival"
    COMPLETE = "complete"
    RATE_SUBMITTED = "rate_submitted"
    RATING_WINDOW_CLOSED = "rating_window_closed"
    CANCEL = "cancel"


TERMINAL_ENGAGEMENT_STATES = frozenset(
    {EngagementState.CLOSED, EngagementState.CANCELLED}
)

# Lifecycle position used for the "keys present iff state has passed
# KeysIssued" invariant. Cancelled is deliberately absent: whether a
# cancelled engagement holds keys depends on where it was cancelled from.
_LIFECYCLE_ORDER = {
    EngagementState.ACCEPTED: 0,
    EngagementState.KEYS_ISSUED: 1,
    EngagementState.AUTHENTICATED: 2,
    EngagementState.COMPLETED: 3,
    EngagementState.CLOSED: 4,
}

# Unconditional rows of the transition table. (COMPLETED, RATE_SUBMITTED)
# is handled separately: it stays in COMPLETED until both parties have
# rated, then closes.
_TRANSITIONS = {
    (EngagementState.ACCEPTED, EngagementEvent.ISSUE_KEYS): EngagementState.KEYS_ISSUED,
    (EngagementState.KEYS_ISSUED, EngagementEvent.VERIFY_ARRIVAL): EngagementState.AUTHENTICATED,
    (EngagementState.AUTHENTICATED, EngagementEvent.COMPLETE): EngagementState.COMPLETED,
    (EngagementState.COMPLETED, EngagementEvent.RATING_WINDOW_CLOSED): EngagementState.CLOSED,
    (EngagementState.ACCEPTED, EngagementEvent.CANCEL): EngagementState.CANCELLED,
    (EngagementState.KEYS_ISSUED, EngagementEvent.CANCEL): EngagementState.CANCELLED,
}


@dataclass(frozen=True)
class Engagement:
    """Binds one favor request to one accepted volunteer.

    Lifecycle: Accepted -> KeysIssued -> Authenticated -> Completed -> Closed,
    with Cancel legal from Accepted and KeysIssued only. ``timestamps`` maps
    each entered state to its entry time.
    """

    id: str
    request_id: str
    volunteer_id: str
    state: EngagementState = EngagementState.ACCEPTED
    key_pair: ChallengeKeyPair | None = None
    rating_ids: tuple[str, ...] = ()
    timestamps: dict[EngagementState, datetime] = field(default_factory=dict)
    auth_failures: int = 0
    requester_verified: bool = False

    def __post_init__(self):
        if len(self.rating_ids) > 2:
            raise ValidationError("at most two ratings per engagement")
        position = _LIFECYCLE_ORDER.get(self.state)
        if position is not None:
            has_keys = self.key_pair is not None
            if has_keys != (position >= _LIFECYCLE_ORDER[EngagementState.KEYS_ISSUED]):
                raise ValidationError(
                    f"key_pair {'present' if has_keys else 'missing'} in state {self.state.value}"
                )

    @property
    def is_terminal(self) -> bool:
        return self.state in TERMINAL_ENGAGEMENT_STATES

    @property
    def locked(self) -> bool:
        """Flagged for review after 5 consecutive failed keyword checks."""
        return self.auth_failures >= 5


def transition(
    engagement: Engagement, event: EngagementEvent, at: datetime, **updates
) -> Engagement:
    """Apply ``event`` and return the engagement in its successor state.

    Raises TerminalState from Closed/Cancelled and IllegalTransition for any
    (state, event) pair not in the table. The successor's entry timestamp is
    recorded on first entry. Extra field ``updates`` land in the same
    construction as the state change, so cross-field invariants (key_pair
    presence, rating count) are checked on the combined result.
    """
    if engagement.state in TERMINAL_ENGAGEMENT_STATES:
        raise TerminalState(engagement.state, event)

    if (engagement.state, event) == (EngagementState.COMPLETED, EngagementEvent.RATE_SUBMITTED):
        rating_ids = updates.get("rating_ids", engagement.rating_ids)
        successor = (
            EngagementState.CLOSED if len(rating_ids) >= 2 else EngagementState.COMPLETED
        )
    else:
        successor = _TRANSITIONS.get((engagement.state, event))
        if successor is None:
            raise IllegalTransition(engagement.state, event)

    timestamps = dict(engagement.timestamps)
    if successor not in timestamps:
        timestamps[successor] = at
    return replace(engagement, state=successor, timestamps=timestamps, **updates)


def cancel_request(
    request: FavorRequest,
    actor: UserAccount,
    engagement: Engagement | None = None,
    at: datetime | None = None,
) -> tuple[FavorRequest, Engagement | None]:
    """Requester-side cancellation; cascades into a live engagement.

    The cascade goes through the state machine, so a request whose volunteer
    has already authenticated at the door can no longer be cancelled.
    """
    if actor.id != request.requester_id:
        raise NotOwner(f"user {actor.id} does not own request {request.id}")
    if request.status in TERMINAL_REQUEST_STATUSES:
        raise AlreadyTerminal(f"request {request.id} is {request.status.value}")

    cancelled_engagement = None
    if engagement is not None and not engagement.is_terminal:
        if at is None:
            raise ValueError("at is required when cancelling a live engagement")
        cancelled_engagement = transition(engagement, EngagementEvent.CANCEL, at)
    return replace(request, status=RequestStatus.CANCELLED), cancelled_engagement


def expire_requests(requests, now: datetime) -> list[FavorRequest]:
    """Return expired copies of every Open request with expires_at <= now.

    Engaged requests never auto-expire: a volunteer already en route should
    not be silently cancelled.
    """
    return [
        replace(request, status=RequestStatus.EXPIRED)
        for request in requests
        if request.status is RequestStatus.OPEN and request.expires_at <= now
    ]
