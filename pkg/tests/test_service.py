import threading
from datetime import timedelta

import pytest

from favornet.domain import EngagementState, GeoPoint, RequestStatus
from favornet.errors import (
    AlreadyEngaged,
    AlreadyRated,
    AlreadyTerminal,
    DomainError,
    Forbidden,
    IllegalTransition,
    InvalidSession,
    NotAParty,
    UserNotFound,
    ValidationError,
)
from favornet.keywords import SpeakerRole

from conftest import EPOCH

HOME_A = GeoPoint(52.2297, 21.0122)
HOME_B = GeoPoint(52.2310, 21.0150)


@pytest.fixture
def world(service):
    anna = service.register_user("anna@example.pl", "Anna", HOME_A)
    jan = service.register_user("jan@example.pl", "Jan", HOME_B)
    org = service.register_user("org@example.pl", "Centrum", is_organization=True)
    return service, anna, jan, org


def open_request(service, requester, **kwargs):
    return service.post_request(
        requester,
        kwargs.pop("title", "Zakupy"),
        kwargs.pop("description", "opis"),
        kwargs.pop("location", HOME_A),
        kwargs.pop("expires_at", EPOCH + timedelta(days=2)),
    )


def engaged_pair(service, anna, jan):
    request = open_request(service, anna)
    engagement = service.accept_request(jan, request.id)
    return request, engagement


def completed_pair(service, anna, jan):
    request, engagement = engaged_pair(service, anna, jan)
    pair = service.issue_keys(jan, engagement.id, rng_seed=3)
    service.verify_keyword(anna, engagement.id, SpeakerRole.VOLUNTEER, pair.volunteer_word)
    engagement = service.complete(jan, engagement.id)
    return request, engagement


class TestSessions:
    def test_login_and_authenticate(self, world, clock):
        service, anna, *_ = world
        session = service.create_session("  ANNA@example.pl ")
        assert service.authenticate(session.token).id == anna.id

    def test_unknown_email(self, world):
        service, *_ = world
        with pytest.raises(UserNotFound):
            service.create_session("ghost@example.pl")

    def test_expired_token_rejected(self, world, clock):
        service, *_ = world
        session = service.create_session("anna@example.pl")
        clock.advance(hours=24, seconds=1)
        with pytest.raises(InvalidSession):
            service.authenticate(session.token)

    def test_missing_token_rejected(self, world):
        service, *_ = world
        with pytest.raises(InvalidSession):
            service.authenticate(None)


class TestRequestLifecycle:
    def test_org_cannot_post(self, world):
        service, _, _, org = world
        with pytest.raises(Forbidden):
            open_request(service, org)

    def test_org_cannot_accept(self, world):
        service, anna, _, org = world
        request = open_request(service, anna)
        with pytest.raises(Forbidden):
            service.accept_request(org, request.id)

    def test_cannot_accept_own_request(self, world):
        service, anna, *_ = world
        request = open_request(service, anna)
        with pytest.raises(Forbidden):
            service.accept_request(anna, request.id)

    def test_accept_marks_request_engaged(self, world):
        service, anna, jan, _ = world
        request, engagement = engaged_pair(service, anna, jan)
        assert engagement.state is EngagementState.ACCEPTED
        assert service.store.get("requests", request.id).status is RequestStatus.ENGAGED

    def test_replayed_accept_conflicts(self, world):
        service, anna, jan, _ = world
        request, _ = engaged_pair(service, anna, jan)
        with pytest.raises(AlreadyEngaged):
            service.accept_request(jan, request.id)

    def test_accept_expired_request_conflicts_and_flips_status(self, world, clock):
        service, anna, jan, _ = world
        request = open_request(service, anna, expires_at=EPOCH + timedelta(minutes=5))
        clock.advance(minutes=6)
        with pytest.raises(AlreadyTerminal):
            service.accept_request(jan, request.id)
        assert service.store.get("requests", request.id).status is RequestStatus.EXPIRED

    def test_concurrent_accepts_create_exactly_one_engagement(self, world, wordlist):
        service, anna, jan, _ = world
        volunteers = [
            service.register_user(f"v{i}@example.pl", f"V{i}", HOME_B) for i in range(8)
        ]
        request = open_request(service, anna)
        outcomes = []

        def attempt(volunteer):
            try:
                outcomes.append(service.accept_request(volunteer, request.id))
            except DomainError as exc:
                outcomes.append(exc)

        threads = [threading.Thread(target=attempt, args=(v,)) for v in volunteers + [jan]]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        engagements = [o for o in outcomes if not isinstance(o, Exception)]
        assert len(engagements) == 1
        live = [
            e for e in service.store.all("engagements")
            if e.request_id == request.id and not e.is_terminal
        ]
        assert len(live) == 1

    def test_owner_cancel_cascades(self, world):
        service, anna, jan, _ = world
        request, engagement = engaged_pair(service, anna, jan)
        cancelled = service.cancel_request(anna, request.id)
        assert cancelled.status is RequestStatus.CANCELLED
        assert (
            service.store.get("engagements", engagement.id).state
            is EngagementState.CANCELLED
        )

    def test_cancel_blocked_once_authenticated(self, world):
        service, anna, jan, _ = world
        request, engagement = engaged_pair(service, anna, jan)
        pair = service.issue_keys(jan, engagement.id, rng_seed=1)
        service.verify_keyword(anna, engagement.id, SpeakerRole.VOLUNTEER, pair.volunteer_word)
        with pytest.raises(IllegalTransition):
            service.cancel_request(anna, request.id)

    def test_volunteer_withdraw_reopens_request(self, world):
        service, anna, jan, _ = world
        request, engagement = engaged_pair(service, anna, jan)
        dead, reopened = service.withdraw_engagement(jan, engagement.id)
        assert dead.state is EngagementState.CANCELLED
        assert reopened.status is RequestStatus.OPEN
        # another volunteer can now take it
        third = service.register_user("ola@example.pl", "Ola", HOME_B)
        assert service.accept_request(third, request.id).volunteer_id == third.id

    def test_only_volunteer_withdraws(self, world):
        service, anna, jan, _ = world
        _, engagement = engaged_pair(service, anna, jan)
        with pytest.raises(Forbidden):
            service.withdraw_engagement(anna, engagement.id)

    def test_complete_closes_request(self, world):
        service, anna, jan, _ = world
        request, engagement = completed_pair(service, anna, jan)
        assert engagement.state is EngagementState.COMPLETED
        assert service.store.get("requests", request.id).status is RequestStatus.CLOSED

    def test_expire_and_sweep(self, world, clock):
        service, anna, _, _ = world
        open_request(service, anna, expires_at=EPOCH + timedelta(hours=1))
        open_request(service, anna, expires_at=EPOCH + timedelta(days=1))
        clock.advance(hours=2)
        assert service.expire_requests() == 1
        assert service.expire_requests() == 0


class TestKeysOverService:
    def test_issue_requires_party(self, world):
        service, anna, jan, _ = world
        _, engagement = engaged_pair(service, anna, jan)
        snoop = service.register_user("x@example.pl", "X")
        with pytest.raises(NotAParty):
            service.issue_keys(snoop, engagement.id)

    def test_idempotent_read_back_for_both_parties(self, world):
        service, anna, jan, _ = world
        _, engagement = engaged_pair(service, anna, jan)
        pair = service.issue_keys(jan, engagement.id, rng_seed=5)
        again = service.issue_keys(anna, engagement.id)
        assert again == pair

    def test_lockout_flags_engagement(self, world):
        service, anna, jan, _ = world
        _, engagement = engaged_pair(service, anna, jan)
        service.issue_keys(jan, engagement.id, rng_seed=5)
        for _ in range(5):
            ok, _ = service.verify_keyword(
                anna, engagement.id, SpeakerRole.VOLUNTEER, "źle"
            )
            assert ok is False
        assert service.store.get("engagements", engagement.id).locked


class TestRatingsOverService:
    def test_both_ratings_close_engagement(self, world):
        service, anna, jan, _ = world
        _, engagement = completed_pair(service, anna, jan)
        service.rate(jan, engagement.id, 5)
        assert (
            service.store.get("engagements", engagement.id).state
            is EngagementState.COMPLETED
        )
        service.rate(anna, engagement.id, 4)
        assert (
            service.store.get("engagements", engagement.id).state
            is EngagementState.CLOSED
        )
        assert service.reputation(anna.id).total == 2
        assert service.reputation(jan.id).total == 1

    def test_double_rating_rejected(self, world):
        service, anna, jan, _ = world
        _, engagement = completed_pair(service, anna, jan)
        service.rate(jan, engagement.id, 5)
        with pytest.raises(AlreadyRated):
            service.rate(jan, engagement.id, 4)

    def test_invalid_grade(self, world):
        service, anna, jan, _ = world
        _, engagement = completed_pair(service, anna, jan)
        with pytest.raises(ValidationError):
            service.rate(jan, engagement.id, 6)

    def test_rating_window_closes_after_fourteen_days(self, world, clock):
        service, anna, jan, _ = world
        _, engagement = completed_pair(service, anna, jan)
        service.rate(jan, engagement.id, 5)
        clock.advance(days=13)
        assert service.close_rating_windows() == 0
        clock.advance(days=1)
        assert service.close_rating_windows() == 1
        closed = service.store.get("engagements", engagement.id)
        assert closed.state is EngagementState.CLOSED
        # the requester missed the window
        with pytest.raises(DomainError):
            service.rate(anna, engagement.id, 3)

    def test_concurrent_ratings_never_exceed_two(self, world):
        service, anna, jan, _ = world
        _, engagement = completed_pair(service, anna, jan)
        errors = []

        def submit(user, grade):
            try:
                service.rate(user, engagement.id, grade)
            except DomainError as exc:
                errors.append(exc)

        threads = [
            threading.Thread(target=submit, args=(user, grade))
            for user, grade in [(jan, 5), (jan, 4), (anna, 3), (anna, 2)]
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        records = [
            r for r in service.store.all("ratings") if r.engagement_id == engagement.id
        ]
        assert len(records) == 2
        assert len({r.rater_id for r in records}) == 2
        assert len(errors) == 2


class TestTrustOverService:
    def test_badges_and_profile(self, world, clock):
        service, anna, jan, org = world
        badge = service.confirm_profile(org, jan.id, note="sprawdzony")
        clock.advance(days=1)
        again = service.confirm_profile(org, jan.id)
        assert again == badge  # idempotent, earliest timestamp kept
        assert service.badge_details(jan.id) == [badge]
        assert service.badge_details(anna.id) == []
        assert service.verified_user_ids() == {jan.id}

    def test_unknown_user_profile(self, world):
        service, *_ = world
        with pytest.raises(UserNotFound):
            service.badge_details("ghost")
        with pytest.raises(UserNotFound):
            service.reputation("ghost")


class TestSosOverService:
    def test_dispatch_and_outbox(self, world):
        service, anna, jan, org = world
        service.confirm_profile(org, jan.id)
        event, alerted = service.raise_sos(anna)
        assert alerted == 1
        pending = service.drain_outbox(10)
        assert [p.target_user_id for p in pending] == [jan.id]
        assert service.drain_outbox(10) == []

    def test_dedup_within_sixty_seconds(self, world, clock):
        service, anna, jan, org = world
        service.confirm_profile(org, jan.id)
        first, _ = service.raise_sos(anna)
        clock.advance(seconds=10)
        again, alerted = service.raise_sos(anna)
        assert again.id == first.id
        assert alerted == 1  # existing outbox rows, no new fan-out
        clock.advance(seconds=51)
        fresh, _ = service.raise_sos(anna)
        assert fresh.id != first.id

    def test_ack_limited_to_dispatched_targets(self, world):
        service, anna, jan, org = world
        service.confirm_profile(org, jan.id)
        event, _ = service.raise_sos(anna)
        acked = service.acknowledge_sos(jan, event.id)
        assert acked.status.value == "acknowledged"
        outsider = service.register_user("obcy@example.pl", "Obcy", HOME_B)
        with pytest.raises(DomainError):
            service.acknowledge_sos(outsider, event.id)

    def test_resolve_authorization(self, world):
        service, anna, jan, org = world
        event, _ = service.raise_sos(anna)
        with pytest.raises(DomainError):
            service.resolve_sos(jan, event.id)
        resolved = service.resolve_sos(anna, event.id)
        assert resolved.status.value == "resolved"

    def test_no_location(self, world):
        service, *_ = world
        nomad = service.register_user("nomad@example.pl", "Nomad")
        with pytest.raises(ValidationError):
            service.raise_sos(nomad)


class TestPersistenceThroughService:
    def test_acknowledged_writes_survive_reload(self, tmp_path, make_service, wordlist):
        from favornet.store import Store

        service = make_service(data_dir=tmp_path)
        anna = service.register_user("anna@example.pl", "Anna", HOME_A)
        jan = service.register_user("jan@example.pl", "Jan", HOME_B)
        request = open_request(service, anna)
        engagement = service.accept_request(jan, request.id)
        pair = service.issue_keys(jan, engagement.id, rng_seed=9)

        reloaded = Store.load(tmp_path)
        assert reloaded.get("users", anna.id) == anna
        assert reloaded.get("requests", request.id).status is RequestStatus.ENGAGED
        stored = reloaded.get("engagements", engagement.id)
        assert stored.key_pair == pair
        assert stored.state is EngagementState.KEYS_ISSUED
