"""Profile confirmation by organizations and Likert reputation scoring.

A raw sum of 1..5 grades would make every rating positive, contradicting the
red/negative color semantics, so grades map to {-2,-1,0,+1,+2} before
summing. Ratings are bidirectional and immutable once submitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Callable, Iterable

from .domain import (
    Engagement,
    EngagementEvent,
    EngagementState,
    FavorRequest,
    UserAccount,
    new_id,
    transition,
)
from .errors import (
    AlreadyRated,
    NotAnOrganization,
    NotAParty,
    NotCompleted,
    TargetIsOrganization,
    ValidationError,
)

MAX_BADGE_NOTE_LEN = 280

# Display value of each grade. Strictly monotone, zero-centered at the
# neutral level so the sign matches the color valence.
GRADE_VALUE = {1: -2, 2: -1, 3: 0, 4: 1, 5: 2}


class GradeColor(Enum):
    RED = "red"
    GRAY = "gray"
    GREEN = "green"


@dataclass(frozen=True)
class LikertGrade:
    """One of exactly five evaluation levels."""

    value: int

    def __post_init__(self):
        if self.value not in GRADE_VALUE:
            raise ValidationError(f"grade must be an integer in 1..5, got {self.value!r}")


@dataclass(frozen=True)
class VerificationBadge:
    """An organization's confirmation of a member profile."""

    user_id: str
    org_id: str
    org_name: str
    confirmed_at: datetime
    note: str | None = None

    def __post_init__(self):
        if self.note is not None and len(self.note) > MAX_BADGE_NOTE_LEN:
            raise ValidationError(f"note longer than {MAX_BADGE_NOTE_LEN} characters")


@dataclass(frozen=True)
class ReputationRecord:
    """A single rating of one engagement party by the other."""

    id: str
    engagement_id: str
    rater_id: str
    ratee_id: str
    grade: LikertGrade
    created_at: datetime

    def __post_init__(self):
        if self.rater_id == self.ratee_id:
            raise ValidationError("rater and ratee must be distinct")


@dataclass(frozen=True)
class ReputationSummary:
    """Mapped-grade total plus per-grade counts for display."""

    total: int
    counts: dict[int, int]


def grade_color(grade: LikertGrade) -> GradeColor:
    """1,2 -> Red; 3 -> Gray; 4,5 -> Green."""
    if grade.value <= 2:
        return GradeColor.RED
    if grade.value == 3:
        return GradeColor.GRAY
    return GradeColor.GREEN


def confirm_profile(
    org: UserAccount,
    target: UserAccount,
    existing: VerificationBadge | None,
    note: str | None,
    at: datetime,
) -> VerificationBadge:
    """Issue (or idempotently return) the badge for (org, target).

    Re-confirmation keeps the earliest confirmed_at.
    """
    if not org.is_organization:
        raise NotAnOrganization(f"user {org.id} is not an organization")
    if target.is_organization:
        raise TargetIsOrganization(f"cannot confirm organization account {target.id}")
    if existing is not None:
        return existing
    return VerificationBadge(
        user_id=target.id,
        org_id=org.id,
        org_name=org.display_name,
        confirmed_at=at,
        note=note,
    )


def badge_details(badges: Iterable[VerificationBadge]) -> list[VerificationBadge]:
    """A user's badges, newest first. The 'verified' marker is simply
    this list being non-empty."""
    return sorted(badges, key=lambda b: (b.confirmed_at, b.org_id), reverse=True)


def submit_rating(
    engagement: Engagement,
    request: FavorRequest,
    rater_id: str,
    grade: LikertGrade,
    at: datetime,
    existing_rater_ids: Iterable[str] = (),
    id_factory: Callable[[], str] = new_id,
) -> tuple[ReputationRecord, Engagement]:
    """Record one party's rating and fire RateSubmitted.

    Only legal while the engagement is Completed; once both parties have
    rated, the returned engagement is Closed.
    """
    if engagement.state is not EngagementState.COMPLETED:
        raise NotCompleted(
            f"engagement {engagement.id} is {engagement.state.value}, not completed"
        )
    parties = {request.requester_id, engagement.volunteer_id}
    if rater_id not in parties:
        raise NotAParty(f"user {rater_id} is not a party of engagement {engagement.id}")
    if rater_id in set(existing_rater_ids):
        raise AlreadyRated(f"user {rater_id} already rated engagement {engagement.id}")

    (ratee_id,) = parties - {rater_id}
    record = ReputationRecord(
        id=id_factory(),
        engagement_id=engagement.id,
        rater_id=rater_id,
        ratee_id=ratee_id,
        grade=grade,
        created_at=at,
    )
    return record, transition(
        engagement,
        EngagementEvent.RATE_SUBMITTED,
        at,
        rating_ids=engagement.rating_ids + (record.id,),
    )


def reputation_sum(records: Iterable[ReputationRecord]) -> ReputationSummary:
    """Mapped-grade sum plus per-grade counts over a user's received ratings."""
    counts = {grade: 0 for grade in GRADE_VALUE}
    total = 0
    for record in records:
        counts[record.grade.value] += 1
        total += GRADE_VALUE[record.grade.value]
    return ReputationSummary(total=total, counts=counts)
