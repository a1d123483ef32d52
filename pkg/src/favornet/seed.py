"""Deterministic demo population: same (seed, counts) means byte-identical
store files."""

from __future__ import annotations

import random
import uuid
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .config import ServiceConfig, default_wordlist_path
from .domain import GeoPoint
from .keywords import load_wordlist
from .service import Service
from .store import Store

SEED_EPOCH = datetime(2026, 1, 1, 12, 0, 0, tzinfo=timezone.utc)
DEFAULT_CENTER = GeoPoint(latitude=52.2297, longitude=21.0122)  # Warsaw

_FIRST_NAMES = [
    "Anna", "Jan", "Maria", "Piotr", "Zofia", "Paweł", "Ewa", "Adam",
    "Helena", "Marek", "Alicja", "Tomasz", "Irena", "Karol", "Barbara",
    "Stefan", "Celina", "Robert", "Dorota", "Filip",
]

_FAVOR_TITLES = [
    "Zakupy spożywcze",
    "Spacer z psem",
    "Podlanie kwiatów",
    "Naprawa kranu",
    "Wyniesienie śmieci",
    "Odśnieżanie chodnika",
    "Pomoc z komputerem",
    "Przyniesienie leków",
    "Koszenie trawnika",
    "Mycie okien",
]


class TickingClock:
    """Deterministic clock: starts at SEED_EPOCH, advances 1s per call."""

    def __init__(self, start: datetime = SEED_EPOCH):
        self._now = start

    def __call__(self) -> datetime:
        self._now += timedelta(seconds=1)
        return self._now


def store_is_empty(data_dir: Path) -> bool:
    return not any(data_dir.glob("*.jsonl"))


def seed_store(
    data_dir: str | Path,
    n_users: int,
    n_requests: int,
    seed: int,
    center: GeoPoint = DEFAULT_CENTER,
    force: bool = False,
) -> dict[str, int]:
    """Populate ``data_dir`` with a synthetic neighborhood.

    Creates one confirming organization, ``n_users`` members (every second
    one badge-verified), and ``n_requests`` open favor requests scattered
    around ``center``. Refuses a non-empty store unless ``force``.
    """
    directory = Path(data_dir)
    directory.mkdir(parents=True, exist_ok=True)
    if not force and not store_is_empty(directory):
        raise FileExistsError(f"store at {directory} is not empty (use --force)")
    for stale in directory.glob("*.jsonl"):
        stale.unlink()

    rng = random.Random(seed)
    clock = TickingClock()
    store = Store(directory)
    wordlist = load_wordlist(
        default_wordlist_path().read_text(encoding="utf-8"), "polish_words.txt"
    )
    service = Service(
        store,
        ServiceConfig(data_dir=str(directory)),
        wordlist,
        clock=clock,
        id_factory=lambda: uuid.UUID(int=rng.getrandbits(128)).hex,
    )

    counts = {"users": 0, "badges": 0, "requests": 0}
    org = None
    if n_users > 0:
        org = service.register_user(
            email="fundacja@example.pl",
            display_name="Fundacja Sąsiedzka",
            is_organization=True,
        )

    users = []
    for i in range(n_users):
        name = _FIRST_NAMES[i % len(_FIRST_NAMES)]
        home = GeoPoint(
            latitude=center.latitude + rng.uniform(-0.03, 0.03),
            longitude=center.longitude + rng.uniform(-0.05, 0.05),
        )
        user = service.register_user(
            email=f"{name.lower().replace('ł', 'l')}{i}@example.pl",
            display_name=f"{name} {i}",
            home_location=home,
        )
        users.append(user)
        counts["users"] += 1
        if org is not None and i % 2 == 0:
            service.confirm_profile(org, user.id, note="potwierdzono na miejscu")
            counts["badges"] += 1

    for i in range(n_requests):
        if not users:
            break
        requester = users[rng.randrange(len(users))]
        location = GeoPoint(
            latitude=center.latitude + rng.uniform(-0.03, 0.03),
            longitude=center.longitude + rng.uniform(-0.05, 0.05),
        )
        title = _FAVOR_TITLES[i % len(_FAVOR_TITLES)]
        service.post_request(
            requester=requester,
            title=title,
            description=f"{title}, szczegóły do uzgodnienia.",
            location=location,
            expires_at=clock() + timedelta(days=rng.choice([1, 2, 3, 7])),
        )
        counts["requests"] += 1

    store.flush_all()
    return counts
