"""JSON-over-HTTP boundary: one API serving the web client and any future
mobile client.

Handlers are deliberately thin: parse, call the service, serialize. All
errors, including body-shape failures, come back as a uniform
``{"code": ..., "message": ...}`` object.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any

from fastapi import Depends, FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .domain import Engagement, FavorRequest, GeoPoint, UserAccount
from .emergency import EmergencyEvent
from .errors import (
    Conflict,
    DomainError,
    Forbidden,
    InvalidSession,
    LockedOut,
    NotFound,
    ValidationError,
)
from .geo import NearbyResult
from .keywords import SpeakerRole
from .service import Service
from .store import OutboxRecord
from .trust import GRADE_VALUE, VerificationBadge, grade_color, LikertGrade

_STATUS_BY_ERROR = (
    (LockedOut, 423),
    (InvalidSession, 401),
    (ValidationError, 422),
    (NotFound, 404),
    (Forbidden, 403),
    (Conflict, 409),
)


def _status_for(error: DomainError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(error, cls):
            return status
    return 500


class GeoPointBody(BaseModel):
    latitude: float
    longitude: float

    def to_domain(self) -> GeoPoint:
        return GeoPoint(latitude=self.latitude, longitude=self.longitude)


class UserCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")
    email: str
    display_name: str
    home_location: GeoPointBody | None = None


class OrgCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")
    email: str
    display_name: str


class SessionCreate(BaseModel):
    email: str


class VerifyProfileBody(BaseModel):
    note: str | None = None


class RequestCreate(BaseModel):
    model_config = ConfigDict(extra="forbid")
    title: str
    description: str = ""
    location: GeoPointBody
    expires_at: datetime


class VerifyKeywordBody(BaseModel):
    speaker_role: str
    spoken: str


class RateBody(BaseModel):
    grade: int


class SosBody(BaseModel):
    location: GeoPointBody | None = None


def _iso(dt: datetime) -> str:
    return dt.isoformat()


def user_doc(user: UserAccount) -> dict[str, Any]:
    return {
        "id": user.id,
        "email": user.email,
        "display_name": user.display_name,
        "home_location": None
        if user.home_location is None
        else {
            "latitude": user.home_location.latitude,
            "longitude": user.home_location.longitude,
        },
        "is_organization": user.is_organization,
        "created_at": _iso(user.created_at),
    }


def request_doc(request: FavorRequest) -> dict[str, Any]:
    return {
        "id": request.id,
        "requester_id": request.requester_id,
        "title": request.title,
        "description": request.description,
        "location": {
            "latitude": request.location.latitude,
            "longitude": request.location.longitude,
        },
        "created_at": _iso(request.created_at),
        "expires_at": _iso(request.expires_at),
        "status": request.status.value,
    }


def engagement_doc(engagement: Engagement) -> dict[str, Any]:
    return {
        "id": engagement.id,
        "request_id": engagement.request_id,
        "volunteer_id": engagement.volunteer_id,
        "state": engagement.state.value,
        "rating_ids": list(engagement.rating_ids),
        "keys_issued": engagement.key_pair is not None,
        "locked": engagement.locked,
        "requester_verified": engagement.requester_verified,
        "timestamps": {s.value: _iso(at) for s, at in engagement.timestamps.items()},
    }


def badge_doc(badge: VerificationBadge) -> dict[str, Any]:
    return {
        "user_id": badge.user_id,
        "org_id": badge.org_id,
        "org_name": badge.org_name,
        "confirmed_at": _iso(badge.confirmed_at),
        "note": badge.note,
    }


def nearby_doc(result: NearbyResult) -> dict[str, Any]:
    return {
        "request_id": result.request_id,
        "distance_m": result.distance_m,
        "title": result.title,
        "requester_id": result.requester_id,
        "requester_display_name": result.requester_display_name,
        "location": {
            "latitude": result.location.latitude,
            "longitude": result.location.longitude,
        },
    }


def sos_doc(event: EmergencyEvent) -> dict[str, Any]:
    return {
        "id": event.id,
        "user_id": event.user_id,
        "location": {
            "latitude": event.location.latitude,
            "longitude": event.location.longitude,
        },
        "raised_at": _iso(event.raised_at),
        "status": event.status.value,
        "acknowledgments": [
            {"volunteer_id": a.volunteer_id, "at": _iso(a.at)}
            for a in event.acknowledgments
        ],
    }


def outbox_doc(record: OutboxRecord) -> dict[str, Any]:
    return {
        "id": record.id,
        "event_id": record.event_id,
        "target_user_id": record.target_user_id,
        "created_at": _iso(record.created_at),
        "delivered_at": None if record.delivered_at is None else _iso(record.delivered_at),
    }


def _ensure_aware(dt: datetime) -> datetime:
    # Naive timestamps in request bodies are taken as UTC.
    return dt.replace(tzinfo=timezone.utc) if dt.tzinfo is None else dt


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="favornet", docs_url=None, redoc_url=None)

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, error: DomainError):
        return JSONResponse(
            status_code=_status_for(error),
            content={"code": error.code, "message": error.message},
        )

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(_request: Request, error: RequestValidationError):
        first = error.errors()[0] if error.errors() else {}
        where = ".".join(str(part) for part in first.get("loc", ()))
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": f"{where}: {first.get('msg', 'invalid request body')}",
            },
        )

    def current_user(authorization: str | None = Header(default=None)) -> UserAccount:
        if authorization is None:
            raise InvalidSession("missing Authorization header")
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise InvalidSession("expected 'Authorization: Bearer <token>'")
        return service.authenticate(token.strip())

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    # -- accounts ---------------------------------------------------------

    @app.post("/api/users", status_code=201)
    def create_user(body: UserCreate):
        user = service.register_user(
            email=body.email,
            display_name=body.display_name,
            home_location=body.home_location.to_domain() if body.home_location else None,
        )
        return {"user": user_doc(user)}

    @app.post("/api/orgs", status_code=201)
    def create_org(body: OrgCreate):
        user = service.register_user(
            email=body.email, display_name=body.display_name, is_organization=True
        )
        return {"user": user_doc(user)}

    @app.post("/api/sessions", status_code=201)
    def create_session(body: SessionCreate):
        session = service.create_session(body.email)
        return {"token": session.token, "user_id": session.user_id}

    @app.get("/api/users/me")
    def whoami(user: UserAccount = Depends(current_user)):
        return {"user": user_doc(user)}

    @app.post("/api/users/{user_id}/verify", status_code=201)
    def verify_profile(
        user_id: str,
        body: VerifyProfileBody | None = None,
        org: UserAccount = Depends(current_user),
    ):
        note = body.note if body else None
        badge = service.confirm_profile(org, user_id, note)
        return {"badge": badge_doc(badge)}

    @app.get("/api/users/{user_id}/profile")
    def profile(user_id: str, _viewer: UserAccount = Depends(current_user)):
        badges = service.badge_details(user_id)
        user = service.store.require("users", user_id)
        summary = service.reputation(user_id)
        return {
            "user_id": user_id,
            "display_name": user.display_name,
            "verified": bool(badges),
            "badges": [badge_doc(b) for b in badges],
            "reputation_sum": summary.total,
            "grade_counts": {str(grade): n for grade, n in sorted(summary.counts.items())},
            "grade_colors": {
                str(grade): grade_color(LikertGrade(grade)).value for grade in GRADE_VALUE
            },
        }

    # -- favor requests -----------------------------------------------------

    @app.post("/api/requests", status_code=201)
    def post_request(body: RequestCreate, user: UserAccount = Depends(current_user)):
        request = service.post_request(
            requester=user,
            title=body.title,
            description=body.description,
            location=body.location.to_domain(),
            expires_at=_ensure_aware(body.expires_at),
        )
        return {"request": request_doc(request)}

    @app.get("/api/requests/nearby")
    def nearby(
        lat: float,
        lon: float,
        radius_m: float | None = None,
        _user: UserAccount = Depends(current_user),
    ):
        center = GeoPoint(latitude=lat, longitude=lon)
        return [nearby_doc(r) for r in service.nearby(center, radius_m)]

    @app.get("/api/users/me/requests")
    def my_requests(user: UserAccount = Depends(current_user)):
        return [request_doc(r) for r in service.my_requests(user)]

    @app.get("/api/requests/{request_id}")
    def get_request(request_id: str, _user: UserAccount = Depends(current_user)):
        request = service.store.require("requests", request_id)
        requester = service.store.require("users", request.requester_id)
        return {
            "request": request_doc(request),
            "requester": {
                "id": requester.id,
                "display_name": requester.display_name,
                "verified": bool(service.badge_details(requester.id)),
            },
        }

    @app.post("/api/requests/{request_id}/accept", status_code=201)
    def accept(request_id: str, user: UserAccount = Depends(current_user)):
        engagement = service.accept_request(user, request_id)
        return {"engagement": engagement_doc(engagement)}

    @app.post("/api/requests/{request_id}/cancel")
    def cancel(request_id: str, user: UserAccount = Depends(current_user)):
        request = service.cancel_request(user, request_id)
        return {"request": request_doc(request)}

    # -- engagements ---------------------------------------------------------

    @app.get("/api/users/me/engagements")
    def my_engagements(user: UserAccount = Depends(current_user)):
        return [engagement_doc(e) for e in service.my_engagements(user)]

    @app.get("/api/engagements/{engagement_id}")
    def get_engagement(engagement_id: str, user: UserAccount = Depends(current_user)):
        return {"engagement": engagement_doc(service.get_engagement(user, engagement_id))}

    @app.post("/api/engagements/{engagement_id}/keys")
    def issue_keys(engagement_id: str, user: UserAccount = Depends(current_user)):
        pair = service.issue_keys(user, engagement_id)
        return {
            "volunteer_word": pair.volunteer_word,
            "requester_word": pair.requester_word,
            "issued_at": _iso(pair.issued_at),
        }

    @app.post("/api/engagements/{engagement_id}/verify")
    def verify_keyword(
        engagement_id: str,
        body: VerifyKeywordBody,
        user: UserAccount = Depends(current_user),
    ):
        try:
            role = SpeakerRole(body.speaker_role.strip().lower())
        except ValueError:
            raise ValidationError(
                f"speaker_role must be volunteer or requester, got {body.speaker_role!r}"
            )
        ok, engagement = service.verify_keyword(user, engagement_id, role, body.spoken)
        return {"ok": ok, "state": engagement.state.value}

    @app.post("/api/engagements/{engagement_id}/complete")
    def complete(engagement_id: str, user: UserAccount = Depends(current_user)):
        return {"engagement": engagement_doc(service.complete(user, engagement_id))}

    @app.post("/api/engagements/{engagement_id}/cancel")
    def withdraw(engagement_id: str, user: UserAccount = Depends(current_user)):
        engagement, request = service.withdraw_engagement(user, engagement_id)
        return {"engagement": engagement_doc(engagement), "request": request_doc(request)}

    @app.post("/api/engagements/{engagement_id}/rate", status_code=201)
    def rate(
        engagement_id: str, body: RateBody, user: UserAccount = Depends(current_user)
    ):
        record = service.rate(user, engagement_id, body.grade)
        return {
            "record": {
                "id": record.id,
                "engagement_id": record.engagement_id,
                "rater_id": record.rater_id,
                "ratee_id": record.ratee_id,
                "grade": record.grade.value,
                "created_at": _iso(record.created_at),
            }
        }

    # -- emergency -------------------------------------------------------------

    @app.post("/api/sos", status_code=201)
    def raise_sos(body: SosBody | None = None, user: UserAccount = Depends(current_user)):
        location = body.location.to_domain() if body and body.location else None
        event, alerted = service.raise_sos(user, location)
        return {"event": sos_doc(event), "alerted": alerted}

    @app.get("/api/sos/{event_id}")
    def get_sos(event_id: str, user: UserAccount = Depends(current_user)):
        return {"event": sos_doc(service.get_sos(user, event_id))}

    @app.post("/api/sos/{event_id}/ack")
    def ack_sos(event_id: str, user: UserAccount = Depends(current_user)):
        return {"event": sos_doc(service.acknowledge_sos(user, event_id))}

    @app.post("/api/sos/{event_id}/resolve")
    def resolve_sos(event_id: str, user: UserAccount = Depends(current_user)):
        return {"event": sos_doc(service.resolve_sos(user, event_id))}

    return app
