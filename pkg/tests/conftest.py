import itertools
from datetime import datetime, timedelta, timezone

import pytest

from favornet.config import ServiceConfig, default_wordlist_path
from favornet.domain import (
    ChallengeKeyPair,
    Engagement,
    EngagementState,
    FavorRequest,
    GeoPoint,
    UserAccount,
)
from favornet.keywords import load_wordlist
from favornet.service import Service
from favornet.store import Store

EPOCH = datetime(2026, 8, 1, 12, 0, 0, tzinfo=timezone.utc)


class FakeClock:
    """Manually advanced clock shared by a test's service and assertions."""

    def __init__(self, start=EPOCH):
        self.now = start

    def __call__(self):
        return self.now

    def advance(self, **kwargs):
        self.now += timedelta(**kwargs)
        return self.now


def sequential_ids(prefix="id"):
    counter = itertools.count(1)
    return lambda: f"{prefix}-{next(counter):04d}"


def sequential_tokens():
    counter = itertools.count(1)
    return lambda: f"token-{next(counter):04d}"


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture(scope="session")
def wordlist():
    return load_wordlist(
        default_wordlist_path().read_text(encoding="utf-8"), "polish_words.txt"
    )


@pytest.fixture
def make_service(clock, wordlist):
    def factory(data_dir=None, config=None, **kwargs):
        store = Store(data_dir)
        kwargs.setdefault("id_factory", sequential_ids())
        kwargs.setdefault("token_factory", sequential_tokens())
        return Service(store, config or ServiceConfig(), wordlist, clock=clock, **kwargs)

    return factory


@pytest.fixture
def service(make_service):
    return make_service()


def make_user(uid="u-1", email=None, name="Someone", home=None, org=False, at=EPOCH):
    return UserAccount(
        id=uid,
        email=email or f"{uid.replace('-', '')}@example.pl",
        display_name=name,
        created_at=at,
        home_location=home,
        is_organization=org,
    )


def make_request(
    rid="r-1",
    requester_id="u-1",
    location=None,
    created_at=EPOCH,
    lifetime=timedelta(days=7),
    **kwargs,
):
    return FavorRequest(
        id=rid,
        requester_id=requester_id,
        title=kwargs.pop("title", "Zakupy"),
        description=kwargs.pop("description", "opis"),
        location=location or GeoPoint(52.23, 21.01),
        created_at=created_at,
        expires_at=created_at + lifetime,
        **kwargs,
    )


_STATE_CHAIN = [
    EngagementState.ACCEPTED,
    EngagementState.KEYS_ISSUED,
    EngagementState.AUTHENTICATED,
    EngagementState.COMPLETED,
    EngagementState.CLOSED,
]


def make_engagement(state=EngagementState.ACCEPTED, ratings=0, eid="e-1", at=EPOCH):
    """A structurally valid engagement in any lifecycle state."""
    if state is EngagementState.CANCELLED:
        reached = [EngagementState.ACCEPTED, EngagementState.CANCELLED]
    else:
        reached = _STATE_CHAIN[: _STATE_CHAIN.index(state) + 1]
    key_pair = None
    if EngagementState.KEYS_ISSUED in reached:
        key_pair = ChallengeKeyPair(
            engagement_id=eid, volunteer_word="kot", requester_word="pies", issued_at=at
        )
    return Engagement(
        id=eid,
        request_id="r-1",
        volunteer_id="u-2",
        state=state,
        key_pair=key_pair,
        rating_ids=tuple(f"rating-{i}" for i in range(ratings)),
        timestamps={s: at for s in reached},
    )
