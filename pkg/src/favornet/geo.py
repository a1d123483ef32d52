"""Great-circle distance and nearby-request search for the map views.

Spherical Earth, R = 6,371,000 m. City-scale matching does not need an
ellipsoidal model. Search is a linear scan behind a bounding-box prefilter;
a spatial index is a future optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping

from .domain import FavorRequest, GeoPoint, RequestStatus
from .errors import ValidationError

EARTH_RADIUS_M = 6_371_000.0
MAX_RADIUS_M = 100_000.0

# Absolute padding (degrees) absorbing float rounding in the bbox math so the
# prefilter stays strictly over-inclusive.
_PAD_EPS_DEG = 1e-9


@dataclass(frozen=True)
class RadiusMeters:
    """Search radius, capped at 100 km: the platform is city-scale."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or not 0 < self.value <= MAX_RADIUS_M:
            raise ValidationError(f"radius must be in (0, {MAX_RADIUS_M:.0f}] m")


@dataclass(frozen=True)
class NearbyResult:
    """One map hit: a request plus its distance from the query center."""

    request_id: str
    distance_m: float
    title: str
    requester_id: str
    requester_display_name: str
    location: GeoPoint


@dataclass(frozen=True)
class BoundingBox:
    """Latitude/longitude bounds; wraps the antimeridian when lon_min > lon_max."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, point: GeoPoint) -> bool:
        if not self.lat_min <= point.latitude <= self.lat_max:
            return False
        if self.lon_min <= self.lon_max:
            return self.lon_min <= point.longitude <= self.lon_max
        return point.longitude >= self.lon_min or point.longitude <= self.lon_max


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points."""
    phi1 = math.radians(a.latitude)
    phi2 = math.radians(b.latitude)
    dphi = math.radians(b.latitude - a.latitude)
    dlam = math.radians(b.longitude - a.longitude)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def prefilter_bbox(center: GeoPoint, radius: RadiusMeters) -> BoundingBox:
    """Bounds provably containing every point within ``radius`` of ``center``.

    Latitude pads by the angular radius. The longitude pad is the exact
    meridian-tangent bound asin(sin(r/R) / cos(lat)) rather than the linear
    (r/R)/cos(lat), which falls a few meters short at the tangent points.
    Near the poles, where the circle can enclose one, longitude is clamped
    to the full range. Over-inclusion is fine: this is only a prefilter.
    """
    angular = radius.value / EARTH_RADIUS_M
    lat_pad = math.degrees(angular) + _PAD_EPS_DEG
    lat_min = max(-90.0, center.latitude - lat_pad)
    lat_max = min(90.0, center.latitude + lat_pad)

    cos_lat = math.cos(math.radians(center.latitude))
    sin_angular = math.sin(angular)
    if sin_angular >= cos_lat:
        # Circle reaches (or encloses) a pole: every longitude qualifies.
        return BoundingBox(lat_min, lat_max, -180.0, 180.0)

    lon_pad = math.degrees(math.asin(sin_angular / cos_lat)) + _PAD_EPS_DEG
    lon_min = center.longitude - lon_pad
    lon_max = center.longitude + lon_pad
    if lon_max - lon_min >= 360.0:
        return BoundingBox(lat_min, lat_max, -180.0, 180.0)
    # Wrap across the antimeridian instead of clamping.
    if lon_min < -180.0:
        lon_min += 360.0
    if lon_max >= 180.0:
        lon_max -= 360.0
    return BoundingBox(lat_min, lat_max, lon_min, lon_max)


def nearby_requests(
    requests: Iterable[FavorRequest],
    center: GeoPoint,
    radius: RadiusMeters,
    now: datetime,
    display_names: Mapping[str, str],
) -> list[NearbyResult]:
    """Open, non-expired requests within ``radius``, nearest first.

    Ties break by older created_at, then request id, so results are stable
    across runs.
    """
    bbox = prefilter_bbox(center, radius)
    hits: list[tuple[float, datetime, str, FavorRequest]] = []
    for request in requests:
        if request.status is not RequestStatus.OPEN or request.expires_at <= now:
            continue
        if not bbox.contains(request.location):
            continue
        distance = haversine_distance(center, request.location)
        if distance <= radius.value:
            hits.append((distance, request.created_at, request.id, request))
    hits.sort(key=lambda item: item[:3])
    return [
        NearbyResult(
            request_id=request.id,
            distance_m=distance,
            title=request.title,
            requester_id=request.requester_id,
            requester_display_name=display_names.get(request.requester_id, ""),
            location=request.location,
        )
        for distance, _, _, request in hits
    ]
