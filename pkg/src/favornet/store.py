"""Versioned aggregate store with optional file persistence.

All collections live in memory; when a data directory is configured, every
mutated collection is rewritten as a line-delimited JSON file via
write-temp-then-rename, so an acknowledged write survives a hard kill. Each
file starts with a header line carrying the record count, which is how
truncation is detected at startup. Record lines wrap the domain fields in
``{"version": n, "data": {...}}`` so the per-aggregate version used for
optimistic concurrency rides along without touching domain field names.

The same class with ``data_dir=None`` is the all-in-memory store that backs
tests.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Iterator

from .domain import (
    ChallengeKeyPair,
    Engagement,
    EngagementState,
    FavorRequest,
    GeoPoint,
    RequestStatus,
    UserAccount,
)
from .emergency import Acknowledgment, EmergencyEvent, SosStatus
from .errors import (
    AlreadyEngaged,
    AlreadyRated,
    CorruptStore,
    DomainError,
    DuplicateEmail,
    NotFound,
    VersionConflict,
)
from .trust import LikertGrade, ReputationRecord, VerificationBadge

FORMAT_VERSION = 1

# Load order matters: every collection only references earlier ones, except
# engagement.rating_ids, which is re-checked by validate_integrity at the end.
COLLECTIONS = (
    "users",
    "requests",
    "engagements",
    "badges",
    "ratings",
    "sos_events",
    "outbox",
    "sessions",
)


@dataclass(frozen=True)
class OutboxRecord:
    """One pending (or delivered) emergency notification."""

    id: str
    event_id: str
    target_user_id: str
    created_at: datetime
    delivered_at: datetime | None = None


@dataclass(frozen=True)
class SessionToken:
    """Bearer credential for one logged-in user; expires 24h after issue."""

    token: str
    user_id: str
    issued_at: datetime
    expires_at: datetime


def _iso(dt: datetime) -> str:
    return dt.isoformat()


def _parse_dt(raw: str) -> datetime:
    return datetime.fromisoformat(raw)


def _geo_doc(point: GeoPoint | None) -> dict | None:
    if point is None:
        return None
    return {"latitude": point.latitude, "longitude": point.longitude}


def _geo_from(doc: dict | None) -> GeoPoint | None:
    if doc is None:
        return None
    return GeoPoint(latitude=doc["latitude"], longitude=doc["longitude"])


def _user_doc(u: UserAccount) -> dict:
    return {
        "id": u.id,
        "email": u.email,
        "display_name": u.display_name,
        "created_at": _iso(u.created_at),
        "home_location": _geo_doc(u.home_location),
        "is_organization": u.is_organization,
    }


def _user_from(d: dict) -> UserAccount:
    return UserAccount(
        id=d["id"],
        email=d["email"],
        display_name=d["display_name"],
        created_at=_parse_dt(d["created_at"]),
        home_location=_geo_from(d["home_location"]),
        is_organization=d["is_organization"],
    )


def _request_doc(r: FavorRequest) -> dict:
    return {
        "id": r.id,
        "requester_id": r.requester_id,
        "title": r.title,
        "description": r.description,
        "location": _geo_doc(r.location),
        "created_at": _iso(r.created_at),
        "expires_at": _iso(r.expires_at),
        "status": r.status.value,
    }


def _request_from(d: dict) -> FavorRequest:
    return FavorRequest(
        id=d["id"],
        requester_id=d["requester_id"],
        title=d["title"],
        description=d["description"],
        location=_geo_from(d["location"]),
        created_at=_parse_dt(d["created_at"]),
        expires_at=_parse_dt(d["expires_at"]),
        status=RequestStatus(d["status"]),
    )


def _key_pair_doc(p: ChallengeKeyPair | None) -> dict | None:
    if p is None:
        return None
    return {
        "engagement_id": p.engagement_id,
        "volunteer_word": p.volunteer_word,
        "requester_word": p.requester_word,
        "issued_at": _iso(p.issued_at),
    }


def _key_pair_from(d: dict | None) -> ChallengeKeyPair | None:
    if d is None:
        return None
    return ChallengeKeyPair(
        engagement_id=d["engagement_id"],
        volunteer_word=d["volunteer_word"],
        requester_word=d["requester_word"],
        issued_at=_parse_dt(d["issued_at"]),
    )


def _engagement_doc(e: Engagement) -> dict:
    return {
        "id": e.id,
        "request_id": e.request_id,
        "volunteer_id": e.volunteer_id,
        "state": e.state.value,
        "key_pair": _key_pair_doc(e.key_pair),
        "rating_ids": list(e.rating_ids),
        "timestamps": {state.value: _iso(at) for state, at in e.timestamps.items()},
        "auth_failures": e.auth_failures,
        "requester_verified": e.requester_verified,
    }


def _engagement_from(d: dict) -> Engagement:
    return Engagement(
        id=d["id"],
        request_id=d["request_id"],
        volunteer_id=d["volunteer_id"],
        state=EngagementState(d["state"]),
        key_pair=_key_pair_from(d["key_pair"]),
        rating_ids=tuple(d["rating_ids"]),
        timestamps={
            EngagementState(state): _parse_dt(at) for state, at in d["timestamps"].items()
        },
        auth_failures=d["auth_failures"],
        requester_verified=d["requester_verified"],
    )


def _badge_doc(b: VerificationBadge) -> dict:
    return {
        "user_id": b.user_id,
        "org_id": b.org_id,
        "org_name": b.org_name,
        "confirmed_at": _iso(b.confirmed_at),
        "note": b.note,
    }


def _badge_from(d: dict) -> VerificationBadge:
    return VerificationBadge(
        user_id=d["user_id"],
        org_id=d["org_id"],
        org_name=d["org_name"],
        confirmed_at=_parse_dt(d["confirmed_at"]),
        note=d["note"],
    )


def _rating_doc(r: ReputationRecord) -> dict:
    return {
        "id": r.id,
        "engagement_id": r.engagement_id,
        "rater_id": r.rater_id,
        "ratee_id": r.ratee_id,
        "grade": r.grade.value,
        "created_at": _iso(r.created_at),
    }


def _rating_from(d: dict) -> ReputationRecord:
    return ReputationRecord(
        id=d["id"],
        engagement_id=d["engagement_id"],
        rater_id=d["rater_id"],
        ratee_id=d["ratee_id"],
        grade=LikertGrade(d["grade"]),
        created_at=_parse_dt(d["created_at"]),
    )


def _sos_doc(e: EmergencyEvent) -> dict:
    return {
        "id": e.id,
        "user_id": e.user_id,
        "location": _geo_doc(e.location),
        "raised_at": _iso(e.raised_at),
        "status": e.status.value,
        "acknowledgments": [
            {"volunteer_id": a.volunteer_id, "at": _iso(a.at)} for a in e.acknowledgments
        ],
    }


def _sos_from(d: dict) -> EmergencyEvent:
    return EmergencyEvent(
        id=d["id"],
        user_id=d["user_id"],
        location=_geo_from(d["location"]),
        raised_at=_parse_dt(d["raised_at"]),
        status=SosStatus(d["status"]),
        acknowledgments=tuple(
            Acknowledgment(volunteer_id=a["volunteer_id"], at=_parse_dt(a["at"]))
            for a in d["acknowledgments"]
        ),
    )


def _outbox_doc(o: OutboxRecord) -> dict:
    return {
        "id": o.id,
        "event_id": o.event_id,
        "target_user_id": o.target_user_id,
        "created_at": _iso(o.created_at),
        "delivered_at": None if o.delivered_at is None else _iso(o.delivered_at),
    }


def _outbox_from(d: dict) -> OutboxRecord:
    return OutboxRecord(
        id=d["id"],
        event_id=d["event_id"],
        target_user_id=d["target_user_id"],
        created_at=_parse_dt(d["created_at"]),
        delivered_at=None if d["delivered_at"] is None else _parse_dt(d["delivered_at"]),
    )


def _session_doc(s: SessionToken) -> dict:
    return {
        "token": s.token,
        "user_id": s.user_id,
        "issued_at": _iso(s.issued_at),
        "expires_at": _iso(s.expires_at),
    }


def _session_from(d: dict) -> SessionToken:
    return SessionToken(
        token=d["token"],
        user_id=d["user_id"],
        issued_at=_parse_dt(d["issued_at"]),
        expires_at=_parse_dt(d["expires_at"]),
    )


_CODECS: dict[str, tuple[Callable[[Any], dict], Callable[[dict], Any]]] = {
    "users": (_user_doc, _user_from),
    "requests": (_request_doc, _request_from),
    "engagements": (_engagement_doc, _engagement_from),
    "badges": (_badge_doc, _badge_from),
    "ratings": (_rating_doc, _rating_from),
    "sos_events": (_sos_doc, _sos_from),
    "outbox": (_outbox_doc, _outbox_from),
    "sessions": (_session_doc, _session_from),
}


def record_key(collection: str, record: Any) -> str:
    if collection == "badges":
        return f"{record.user_id}|{record.org_id}"
    if collection == "sessions":
        return record.token
    return record.id


class Store:
    """Keyed, versioned collections with single-file-per-collection
    persistence. Writers must hold ``lock``; ``put`` takes it on its own for
    single-record writes."""

    def __init__(self, data_dir: str | Path | None = None):
        self.lock = threading.RLock()
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self._data: dict[str, dict[str, Any]] = {name: {} for name in COLLECTIONS}
        self._versions: dict[str, dict[str, int]] = {name: {} for name in COLLECTIONS}
        self._dirty: set[str] = set()

    # -- reads ------------------------------------------------------------

    def get(self, collection: str, key: str) -> Any | None:
        return self._data[collection].get(key)

    def require(self, collection: str, key: str) -> Any:
        record = self.get(collection, key)
        if record is None:
            raise NotFound(f"{collection[:-1]} {key!r} not found")
        return record

    def all(self, collection: str) -> list[Any]:
        return list(self._data[collection].values())

    def version(self, collection: str, key: str) -> int:
        return self._versions[collection].get(key, 0)

    # -- writes -----------------------------------------------------------

    def put(self, collection: str, record: Any, expected_version: int | None = None) -> int:
        """Insert or replace one record; returns its new version.

        ``expected_version`` enables compare-and-set: 0 means "must be new".
        """
        with self.lock:
            key = record_key(collection, record)
            current = self._versions[collection].get(key, 0)
            if expected_version is not None and expected_version != current:
                raise VersionConflict(
                    f"{collection}/{key}: expected version {expected_version}, have {current}"
                )
            self._check_write(collection, key, record)
            self._data[collection][key] = record
            new_version = current + 1
            self._versions[collection][key] = new_version
            self._dirty.add(collection)
            return new_version

    def _check_write(self, collection: str, key: str, record: Any) -> None:
        # Uniqueness + backward references. rating_ids point forward and are
        # covered by validate_integrity on load.
        if collection == "users":
            for other in self._data["users"].values():
                if other.id != record.id and other.email == record.email:
                    raise DuplicateEmail(f"email {record.email!r} already registered")
        elif collection == "requests":
            self._require_ref("users", record.requester_id)
        elif collection == "engagements":
            request = self._require_ref("requests", record.request_id)
            self._require_ref("users", record.volunteer_id)
            if record.volunteer_id == request.requester_id:
                raise DomainError("volunteer cannot engage with their own request")
            if record.state not in (EngagementState.CLOSED, EngagementState.CANCELLED):
                for other in self._data["engagements"].values():
                    if (
                        other.id != record.id
                        and other.request_id == record.request_id
                        and other.state
                        not in (EngagementState.CLOSED, EngagementState.CANCELLED)
                    ):
                        raise AlreadyEngaged(
                            f"request {record.request_id} already has a live engagement"
                        )
        elif collection == "badges":
            self._require_ref("users", record.user_id)
            org = self._require_ref("users", record.org_id)
            if not org.is_organization:
                raise DomainError(f"badge issuer {record.org_id} is not an organization")
        elif collection == "ratings":
            self._require_ref("engagements", record.engagement_id)
            self._require_ref("users", record.rater_id)
            self._require_ref("users", record.ratee_id)
            for other in self._data["ratings"].values():
                if (
                    other.id != record.id
                    and other.engagement_id == record.engagement_id
                    and other.rater_id == record.rater_id
                ):
                    raise AlreadyRated(
                        f"engagement {record.engagement_id} already rated by {record.rater_id}"
                    )
        elif collection == "sos_events":
            self._require_ref("users", record.user_id)
        elif collection == "outbox":
            self._require_ref("sos_events", record.event_id)
            self._require_ref("users", record.target_user_id)
        elif collection == "sessions":
            self._require_ref("users", record.user_id)

    def _require_ref(self, collection: str, key: str) -> Any:
        record = self._data[collection].get(key)
        if record is None:
            raise NotFound(f"dangling reference: {collection}/{key}")
        return record

    # -- outbox -----------------------------------------------------------

    def drain_outbox(self, max_records: int, now: datetime) -> list[OutboxRecord]:
        """Mark up to ``max_records`` pending notifications delivered, oldest
        first, each exactly once."""
        with self.lock:
            pending = sorted(
                (r for r in self._data["outbox"].values() if r.delivered_at is None),
                key=lambda r: (r.created_at, r.id),
            )
            delivered = []
            for record in pending[:max_records]:
                updated = OutboxRecord(
                    id=record.id,
                    event_id=record.event_id,
                    target_user_id=record.target_user_id,
                    created_at=record.created_at,
                    delivered_at=now,
                )
                self.put("outbox", updated)
                delivered.append(updated)
            if delivered:
                self.flush()
            return delivered

    # -- persistence ------------------------------------------------------

    def snapshot(self) -> dict[str, dict[str, Any]]:
        with self.lock:
            return {name: dict(records) for name, records in self._data.items()}

    def flush(self) -> None:
        """Atomically rewrite every collection touched since the last flush."""
        if self.data_dir is None:
            self._dirty.clear()
            return
        with self.lock:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            for collection in sorted(self._dirty):
                self._write_collection(collection)
            self._dirty.clear()

    def flush_all(self) -> None:
        with self.lock:
            self._dirty.update(COLLECTIONS)
            self.flush()

    def _write_collection(self, collection: str) -> None:
        encode = _CODECS[collection][0]
        path = self.data_dir / f"{collection}.jsonl"
        records = self._data[collection]
        header = {
            "collection": collection,
            "format": FORMAT_VERSION,
            "count": len(records),
        }
        lines = [json.dumps(header, sort_keys=True, ensure_ascii=False)]
        for key in sorted(records):
            doc = {
                "version": self._versions[collection][key],
                "data": encode(records[key]),
            }
            lines.append(json.dumps(doc, sort_keys=True, ensure_ascii=False))
        fd, tmp_path = tempfile.mkstemp(dir=self.data_dir, prefix=f".{collection}.")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write("\n".join(lines) + "\n")
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise

    @classmethod
    def load(cls, data_dir: str | Path) -> "Store":
        """Reconstruct a store from disk, refusing anything inconsistent."""
        store = cls(data_dir)
        directory = Path(data_dir)
        for collection in COLLECTIONS:
            path = directory / f"{collection}.jsonl"
            if not path.exists():
                continue
            store._read_collection(collection, path)
        validate_integrity(store)
        return store

    def _read_collection(self, collection: str, path: Path) -> None:
        decode = _CODECS[collection][1]
        file_name = path.name
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
        if not lines:
            raise CorruptStore(file_name, 0, "empty file (missing header)")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise CorruptStore(file_name, 1, f"unreadable header: {exc}") from exc
        if header.get("collection") != collection or "count" not in header:
            raise CorruptStore(file_name, 1, "header does not describe this collection")
        body = lines[1:]
        if header["count"] != len(body):
            raise CorruptStore(
                file_name,
                len(lines),
                f"expected {header['count']} records, found {len(body)} (truncated?)",
            )
        for offset, line in enumerate(body, start=2):
            try:
                doc = json.loads(line)
                record = decode(doc["data"])
                version = doc["version"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, DomainError) as exc:
                raise CorruptStore(file_name, offset, f"bad record: {exc}") from exc
            try:
                self.put(collection, record)
            except DomainError as exc:
                raise CorruptStore(file_name, offset, f"integrity violation: {exc}") from exc
            self._versions[collection][record_key(collection, record)] = version
        self._dirty.discard(collection)


def validate_integrity(store: Store) -> None:
    """Full-snapshot referential check, including forward references that
    put-time checks skip."""
    for engagement in store.all("engagements"):
        for rating_id in engagement.rating_ids:
            if store.get("ratings", rating_id) is None:
                raise CorruptStore(
                    "engagements.jsonl",
                    0,
                    f"engagement {engagement.id} references missing rating {rating_id}",
                )
        if engagement.key_pair is not None and engagement.key_pair.engagement_id != engagement.id:
            raise CorruptStore(
                "engagements.jsonl",
                0,
                f"engagement {engagement.id} carries a foreign key pair",
            )
    for rating in store.all("ratings"):
        engagement = store.get("engagements", rating.engagement_id)
        request = store.get("requests", engagement.request_id)
        parties = {request.requester_id, engagement.volunteer_id}
        if {rating.rater_id, rating.ratee_id} != parties:
            raise CorruptStore(
                "ratings.jsonl",
                0,
                f"rating {rating.id} parties do not match engagement {engagement.id}",
            )


def iter_user_events(store: Store, user_id: str) -> Iterator[EmergencyEvent]:
    for event in store.all("sos_events"):
        if event.user_id == user_id:
            yield event
