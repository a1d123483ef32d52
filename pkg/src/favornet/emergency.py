"""One-tap S.O.S events: raise, dispatch to nearby verified helpers, track
acknowledgments.

Dispatch goes to verified volunteers near the event rather than to public
emergency services; wiring state emergency lines into a prototype is a legal
matter, not a technical one. Repeated presses within 60 seconds return the
existing event so a panicked user cannot cause an alert storm.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Callable, Collection, Iterable

from .domain import GeoPoint, UserAccount, new_id
from .errors import AlreadyResolved, NoLocation, NotATarget, NotAuthorized, ValidationError
from .geo import RadiusMeters, haversine_distance

DEDUP_WINDOW = timedelta(seconds=60)


class SosStatus(Enum):
    OPEN = "open"
    ACKNOWLEDGED = "acknowledged"
    RESOLVED = "resolved"


@dataclass(frozen=True)
class Acknowledgment:
    volunteer_id: str
    at: datetime


@dataclass(frozen=True)
class EmergencyEvent:
    """A raised S.O.S, terminal once resolved."""

    id: str
    user_id: str
    location: GeoPoint
    raised_at: datetime
    status: SosStatus = SosStatus.OPEN
    acknowledgments: tuple[Acknowledgment, ...] = ()

    def __post_init__(self):
        if self.status is not SosStatus.RESOLVED:
            expected = SosStatus.ACKNOWLEDGED if self.acknowledgments else SosStatus.OPEN
            if self.status is not expected:
                raise ValidationError(
                    f"status {self.status.value} inconsistent with "
                    f"{len(self.acknowledgments)} acknowledgments"
                )


def raise_sos(
    user: UserAccount,
    location: GeoPoint | None,
    now: datetime,
    recent_events: Iterable[EmergencyEvent] = (),
    id_factory: Callable[[], str] = new_id,
) -> EmergencyEvent:
    """Create an event at ``location`` (falling back to the home address).

    If the user already has a non-resolved event raised within the last 60
    seconds, that event is returned instead of creating a duplicate.
    """
    where = location or user.home_location
    if where is None:
        raise NoLocation(f"user {user.id} has no location and no home address")
    for event in recent_events:
        if (
            event.user_id == user.id
            and event.status is not SosStatus.RESOLVED
            and now - event.raised_at < DEDUP_WINDOW
        ):
            return event
    return EmergencyEvent(id=id_factory(), user_id=user.id, location=where, raised_at=now)


def dispatch_targets(
    event: EmergencyEvent,
    users: Iterable[UserAccount],
    verified_user_ids: Collection[str],
    radius: RadiusMeters,
) -> list[UserAccount]:
    """Verified, located, non-organization users within ``radius``, nearest
    first, never including the raiser. An empty list is valid (the alert is
    then undeliverable and the caller should log it)."""
    candidates = []
    for user in users:
        if user.id == event.user_id or user.is_organization:
            continue
        if user.id not in verified_user_ids or user.home_location is None:
            continue
        distance = haversine_distance(event.location, user.home_location)
        if distance <= radius.value:
            candidates.append((distance, user.id, user))
    candidates.sort(key=lambda item: item[:2])
    return [user for _, _, user in candidates]


def acknowledge(
    event: EmergencyEvent,
    volunteer: UserAccount,
    now: datetime,
    target_ids: Collection[str],
) -> EmergencyEvent:
    """Record that a dispatched volunteer is responding; idempotent per
    volunteer."""
    if event.status is SosStatus.RESOLVED:
        raise AlreadyResolved(f"event {event.id} is resolved")
    if volunteer.id not in target_ids:
        raise NotATarget(f"user {volunteer.id} was not dispatched for event {event.id}")
    if any(ack.volunteer_id == volunteer.id for ack in event.acknowledgments):
        return event
    return replace(
        event,
        status=SosStatus.ACKNOWLEDGED,
        acknowledgments=event.acknowledgments + (Acknowledgment(volunteer.id, now),),
    )


def resolve_sos(
    event: EmergencyEvent,
    actor: UserAccount,
    now: datetime,
    admin_ids: Collection[str] = (),
) -> EmergencyEvent:
    """Close the event; only the raiser or a platform admin may do so."""
    if event.status is SosStatus.RESOLVED:
        raise AlreadyResolved(f"event {event.id} is already resolved")
    if actor.id != event.user_id and actor.id not in admin_ids:
        raise NotAuthorized(f"user {actor.id} may not resolve event {event.id}")
    return replace(event, status=SosStatus.RESOLVED)
