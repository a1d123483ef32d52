"""Application service: the single writer over the store.

Every public method is one use case; multi-record writes happen inside the
store lock and are flushed to disk before returning, so an acknowledged call
is a durable one. The HTTP layer is a thin adapter over this class, which is
also what tests and the seeder drive directly.
"""

from __future__ import annotations

import logging
import random
import secrets
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from typing import Callable, Iterable

from . import domain, emergency, geo, keywords, trust
from .config import ServiceConfig
from .domain import (
    ChallengeKeyPair,
    Engagement,
    EngagementEvent,
    EngagementState,
    FavorRequest,
    GeoPoint,
    RequestStatus,
    UserAccount,
    new_id,
)
from .emergency import EmergencyEvent
from .errors import (
    AlreadyEngaged,
    AlreadyTerminal,
    Forbidden,
    InvalidSession,
    NotAParty,
    UserNotFound,
    ValidationError,
)
from .geo import NearbyResult, RadiusMeters
from .keywords import SpeakerRole, Wordlist
from .store import OutboxRecord, SessionToken, Store
from .trust import LikertGrade, ReputationRecord, ReputationSummary, VerificationBadge


logger = logging.getLogger(__name__)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def default_token() -> str:
    return secrets.token_urlsafe(32)


class Service:
    def __init__(
        self,
        store: Store,
        config: ServiceConfig,
        wordlist: Wordlist,
        clock: Callable[[], datetime] = utc_now,
        id_factory: Callable[[], str] = new_id,
        token_factory: Callable[[], str] = default_token,
        keyword_rng: random.Random | None = None,
        admin_ids: Iterable[str] = (),
    ):
        self.store = store
        self.config = config
        self.wordlist = wordlist
        self.clock = clock
        self.id_factory = id_factory
        self.token_factory = token_factory
        self.keyword_rng = keyword_rng
        self.admin_ids = frozenset(admin_ids)

    # -- accounts and sessions ---------------------------------------------

    def register_user(
        self,
        email: str,
        display_name: str,
        home_location: GeoPoint | None = None,
        is_organization: bool = False,
    ) -> UserAccount:
        if not domain.validate_email(email):
            raise ValidationError(f"invalid email {email!r}")
        user = UserAccount(
            id=self.id_factory(),
            email=domain.normalize_email(email),
            display_name=display_name.strip(),
            created_at=self.clock(),
            home_location=home_location,
            is_organization=is_organization,
        )
        with self.store.lock:
            self.store.put("users", user)
            self.store.flush()
        return user

    def create_session(self, email: str) -> SessionToken:
        """Bare email-identity login. Not production authentication; kept
        behind this one method for later replacement."""
        normalized = domain.normalize_email(email)
        user = next(
            (u for u in self.store.all("users") if u.email == normalized), None
        )
        if user is None:
            raise UserNotFound(f"no account for {normalized!r}")
        now = self.clock()
        session = SessionToken(
            token=self.token_factory(),
            user_id=user.id,
            issued_at=now,
            expires_at=now + timedelta(hours=self.config.session_ttl_hours),
        )
        with self.store.lock:
            self.store.put("sessions", session)
            self.store.flush()
        return session

    def authenticate(self, token: str | None) -> UserAccount:
        if not token:
            raise InvalidSession("missing bearer token")
        session = self.store.get("sessions", token)
        if session is None:
            raise InvalidSession("unknown session token")
        if session.expires_at <= self.clock():
            raise InvalidSession("session expired")
        return self.store.require("users", session.user_id)

    # -- trust ---------------------------------------------------------------

    def confirm_profile(
        self, org: UserAccount, target_user_id: str, note: str | None = None
    ) -> VerificationBadge:
        with self.store.lock:
            target = self.store.get("users", target_user_id)
            if target is None:
                raise UserNotFound(f"user {target_user_id!r} not found")
            existing = self.store.get("badges", f"{target_user_id}|{org.id}")
            badge = trust.confirm_profile(org, target, existing, note, self.clock())
            if existing is None:
                self.store.put("badges", badge)
                self.store.flush()
            return badge

    def badge_details(self, user_id: str) -> list[VerificationBadge]:
        user = self.store.get("users", user_id)
        if user is None:
            raise UserNotFound(f"user {user_id!r} not found")
        return trust.badge_details(
            b for b in self.store.all("badges") if b.user_id == user_id
        )

    def reputation(self, user_id: str) -> ReputationSummary:
        if self.store.get("users", user_id) is None:
            raise UserNotFound(f"user {user_id!r} not found")
        return trust.reputation_sum(
            r for r in self.store.all("ratings") if r.ratee_id == user_id
        )

    def verified_user_ids(self) -> set[str]:
        return {b.user_id for b in self.store.all("badges")}

    # -- favor requests -------------------------------------------------------

    def post_request(
        self,
        requester: UserAccount,
        title: str,
        description: str,
        location: GeoPoint,
        expires_at: datetime,
    ) -> FavorRequest:
        if requester.is_organization:
            raise Forbidden("organizations cannot post favor requests")
        request = FavorRequest(
            id=self.id_factory(),
            requester_id=requester.id,
            title=title,
            description=description,
            location=location,
            created_at=self.clock(),
            expires_at=expires_at,
        )
        with self.store.lock:
            self.store.put("requests", request)
            self.store.flush()
        return request

    def my_requests(self, user: UserAccount) -> list[FavorRequest]:
        mine = [r for r in self.store.all("requests") if r.requester_id == user.id]
        mine.sort(key=lambda r: (r.created_at, r.id), reverse=True)
        return mine

    def nearby(
        self, center: GeoPoint, radius_m: float | None = None
    ) -> list[NearbyResult]:
        radius = RadiusMeters(radius_m if radius_m is not None else self.config.nearby_radius_m)
        display_names = {u.id: u.display_name for u in self.store.all("users")}
        return geo.nearby_requests(
            self.store.all("requests"), center, radius, self.clock(), display_names
        )

    def cancel_request(self, actor: UserAccount, request_id: str) -> FavorRequest:
        with self.store.lock:
            request = self.store.require("requests", request_id)
            engagement = self._live_engagement(request_id)
            request, cancelled = domain.cancel_request(
                request, actor, engagement, self.clock()
            )
            if cancelled is not None:
                self.store.put("engagements", cancelled)
            self.store.put("requests", request)
            self.store.flush()
        return request

    def expire_requests(self, now: datetime | None = None) -> int:
        """Flip every overdue Open request to Expired; returns how many."""
        now = now or self.clock()
        with self.store.lock:
            expired = domain.expire_requests(self.store.all("requests"), now)
            for request in expired:
                self.store.put("requests", request)
            if expired:
                self.store.flush()
        return len(expired)

    # -- engagement lifecycle --------------------------------------------------

    def accept_request(self, volunteer: UserAccount, request_id: str) -> Engagement:
        if volunteer.is_organization:
            raise Forbidden("organizations cannot accept engagements")
        now = self.clock()
        with self.store.lock:
            request = self.store.require("requests", request_id)
            if volunteer.id == request.requester_id:
                raise Forbidden("cannot accept your own request")
            if request.status is RequestStatus.ENGAGED:
                raise AlreadyEngaged(f"request {request_id} already has a volunteer")
            if request.status is not RequestStatus.OPEN:
                raise AlreadyTerminal(f"request {request_id} is {request.status.value}")
            if request.expires_at <= now:
                self.store.put("requests", replace(request, status=RequestStatus.EXPIRED))
                self.store.flush()
                raise AlreadyTerminal(f"request {request_id} has expired")
            engagement = Engagement(
                id=self.id_factory(),
                request_id=request_id,
                volunteer_id=volunteer.id,
                timestamps={EngagementState.ACCEPTED: now},
            )
            self.store.put("engagements", engagement)
            self.store.put("requests", replace(request, status=RequestStatus.ENGAGED))
            self.store.flush()
        return engagement

    def get_engagement(self, actor: UserAccount, engagement_id: str) -> Engagement:
        engagement = self.store.require("engagements", engagement_id)
        self._require_party(actor, engagement)
        return engagement

    def my_engagements(self, user: UserAccount) -> list[Engagement]:
        epoch = datetime.fromtimestamp(0, timezone.utc)
        mine = [
            e
            for e in self.store.all("engagements")
            if e.volunteer_id == user.id or self._requester_id(e) == user.id
        ]
        mine.sort(key=lambda e: (e.timestamps.get(EngagementState.ACCEPTED, epoch), e.id))
        return mine

    def issue_keys(
        self, actor: UserAccount, engagement_id: str, rng_seed: int | None = None
    ) -> ChallengeKeyPair:
        """Issue the keyword pair, or hand back the stored one: both parties
        can read both words after issue."""
        with self.store.lock:
            engagement = self.store.require("engagements", engagement_id)
            self._require_party(actor, engagement)
            if engagement.key_pair is not None:
                return engagement.key_pair
            if rng_seed is None:
                source = self.keyword_rng or random.SystemRandom()
                rng_seed = source.getrandbits(64)
            pair, engagement = keywords.issue_keywords(
                engagement, self.wordlist, self.clock(), rng_seed=rng_seed
            )
            self.store.put("engagements", engagement)
            self.store.flush()
        return pair

    def verify_keyword(
        self,
        actor: UserAccount,
        engagement_id: str,
        speaker_role: SpeakerRole,
        spoken: str,
    ) -> tuple[bool, Engagement]:
        with self.store.lock:
            engagement = self.store.require("engagements", engagement_id)
            self._require_party(actor, engagement)
            ok, engagement = keywords.verify_keyword(
                engagement, speaker_role, spoken, self.clock()
            )
            self.store.put("engagements", engagement)
            self.store.flush()
        return ok, engagement

    def complete(self, actor: UserAccount, engagement_id: str) -> Engagement:
        with self.store.lock:
            engagement = self.store.require("engagements", engagement_id)
            self._require_party(actor, engagement)
            engagement = domain.transition(
                engagement, EngagementEvent.COMPLETE, self.clock()
            )
            self.store.put("engagements", engagement)
            request = self.store.require("requests", engagement.request_id)
            self.store.put("requests", replace(request, status=RequestStatus.CLOSED))
            self.store.flush()
        return engagement

    def withdraw_engagement(
        self, actor: UserAccount, engagement_id: str
    ) -> tuple[Engagement, FavorRequest]:
        """Volunteer backs out before the visit; the request reopens."""
        with self.store.lock:
            engagement = self.store.require("engagements", engagement_id)
            if actor.id != engagement.volunteer_id:
                raise Forbidden("only the volunteer can withdraw an engagement")
            engagement = domain.transition(
                engagement, EngagementEvent.CANCEL, self.clock()
            )
            self.store.put("engagements", engagement)
            request = self.store.require("requests", engagement.request_id)
            request = replace(request, status=RequestStatus.OPEN)
            self.store.put("requests", request)
            self.store.flush()
        return engagement, request

    def rate(
        self, actor: UserAccount, engagement_id: str, grade_value: int
    ) -> ReputationRecord:
        grade = LikertGrade(grade_value)
        with self.store.lock:
            engagement = self.store.require("engagements", engagement_id)
            request = self.store.require("requests", engagement.request_id)
            existing = [
                r.rater_id
                for r in self.store.all("ratings")
                if r.engagement_id == engagement_id
            ]
            record, engagement = trust.submit_rating(
                engagement,
                request,
                actor.id,
                grade,
                self.clock(),
                existing_rater_ids=existing,
                id_factory=self.id_factory,
            )
            self.store.put("ratings", record)
            self.store.put("engagements", engagement)
            self.store.flush()
        return record

    def close_rating_windows(self, now: datetime | None = None) -> int:
        """Fire RatingWindowClosed on engagements Completed for longer than
        the configured window; returns how many closed."""
        now = now or self.clock()
        window = timedelta(days=self.config.rating_window_days)
        closed = 0
        with self.store.lock:
            for engagement in self.store.all("engagements"):
                if engagement.state is not EngagementState.COMPLETED:
                    continue
                completed_at = engagement.timestamps.get(EngagementState.COMPLETED)
                if completed_at is not None and completed_at + window <= now:
                    self.store.put(
                        "engagements",
                        domain.transition(
                            engagement, EngagementEvent.RATING_WINDOW_CLOSED, now
                        ),
                    )
                    closed += 1
            if closed:
                self.store.flush()
        return closed

    def sweep(self, now: datetime | None = None) -> dict[str, int]:
        now = now or self.clock()
        return {
            "expired_requests": self.expire_requests(now),
            "closed_rating_windows": self.close_rating_windows(now),
        }

    # -- emergency ---------------------------------------------------------------

    def raise_sos(
        self, user: UserAccount, location: GeoPoint | None = None
    ) -> tuple[EmergencyEvent, int]:
        """Raise (or dedup onto) an S.O.S event; returns it plus how many
        volunteers were alerted through the outbox."""
        now = self.clock()
        with self.store.lock:
            event = emergency.raise_sos(
                user,
                location,
                now,
                recent_events=self.store.all("sos_events"),
                id_factory=self.id_factory,
            )
            existing = self.store.get("sos_events", event.id)
            if existing is not None:
                alerted = sum(
                    1 for r in self.store.all("outbox") if r.event_id == event.id
                )
                return event, alerted
            self.store.put("sos_events", event)
            targets = emergency.dispatch_targets(
                event,
                self.store.all("users"),
                self.verified_user_ids(),
                RadiusMeters(self.config.sos_radius_m),
            )
            for target in targets:
                self.store.put(
                    "outbox",
                    OutboxRecord(
                        id=self.id_factory(),
                        event_id=event.id,
                        target_user_id=target.id,
                        created_at=now,
                    ),
                )
            if not targets:
                logger.warning(
                    "sos %s by user %s is undeliverable: no verified volunteer in range",
                    event.id,
                    user.id,
                )
            self.store.flush()
        return event, len(targets)

    def get_sos(self, actor: UserAccount, event_id: str) -> EmergencyEvent:
        event = self.store.require("sos_events", event_id)
        if actor.id != event.user_id and actor.id not in self._sos_target_ids(event_id):
            raise Forbidden("only the raiser or dispatched volunteers may view an event")
        return event

    def acknowledge_sos(self, actor: UserAccount, event_id: str) -> EmergencyEvent:
        with self.store.lock:
            event = self.store.require("sos_events", event_id)
            event = emergency.acknowledge(
                event, actor, self.clock(), self._sos_target_ids(event_id)
            )
            self.store.put("sos_events", event)
            self.store.flush()
        return event

    def resolve_sos(self, actor: UserAccount, event_id: str) -> EmergencyEvent:
        with self.store.lock:
            event = self.store.require("sos_events", event_id)
            event = emergency.resolve_sos(event, actor, self.clock(), self.admin_ids)
            self.store.put("sos_events", event)
            self.store.flush()
        return event

    def drain_outbox(self, max_records: int) -> list[OutboxRecord]:
        return self.store.drain_outbox(max_records, self.clock())

    # -- helpers ---------------------------------------------------------------

    def _sos_target_ids(self, event_id: str) -> set[str]:
        return {
            r.target_user_id for r in self.store.all("outbox") if r.event_id == event_id
        }

    def _live_engagement(self, request_id: str) -> Engagement | None:
        for engagement in self.store.all("engagements"):
            if engagement.request_id == request_id and not engagement.is_terminal:
                return engagement
        return None

    def _requester_id(self, engagement: Engagement) -> str:
        return self.store.require("requests", engagement.request_id).requester_id

    def _require_party(self, actor: UserAccount, engagement: Engagement) -> None:
        if actor.id not in (engagement.volunteer_id, self._requester_id(engagement)):
            raise NotAParty(f"user {actor.id} is not a party of {engagement.id}")
