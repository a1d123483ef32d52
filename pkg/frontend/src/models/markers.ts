// View model for map markers: one per NearbyResult, positions untouched.

import type { GeoPoint, NearbyResult } from "../api/types.js";

export interface MarkerModel {
  requestId: string;
  position: GeoPoint;
  title: string;
  requesterName: string;
  distanceLabel: string;
}

export function formatDistance(meters: number): string {
  if (meters < 1000) return `${Math.round(meters)} m`;
  return `${(meters / 1000).toFixed(1)} km`;
}

export function toMarker(result: NearbyResult): MarkerModel {
  return {
    requestId: result.request_id,
    position: result.location,
    title: result.title,
    requesterName: result.requester_display_name,
    distanceLabel: formatDistance(result.distance_m),
  };
}
