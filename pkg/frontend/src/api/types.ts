// Wire types, exactly as the JSON API serves them.

export interface GeoPoint {
  latitude: number;
  longitude: number;
}

export interface User {
  id: string;
  email: string;
  display_name: string;
  home_location: GeoPoint | null;
  is_organization: boolean;
  created_at: string;
}

export interface FavorRequest {
  id: string;
  requester_id: string;
  title: string;
  description: string;
  location: GeoPoint;
  created_at: string;
  expires_at: string;
  status: string;
}

export interface NearbyResult {
  request_id: string;
  distance_m: number;
  title: string;
  requester_id: string;
  requester_display_name: string;
  location: GeoPoint;
}

export interface RequestDetail {
  request: FavorRequest;
  requester: { id: string; display_name: string; verified: boolean };
}

export interface Badge {
  user_id: string;
  org_id: string;
  org_name: string;
  confirmed_at: string;
  note: string | null;
}

export interface Profile {
  user_id: string;
  display_name: string;
  verified: boolean;
  badges: Badge[];
  reputation_sum: number;
  grade_counts: Record<string, number>;
  grade_colors: Record<string, string>;
}

export type EngagementState =
  | "accepted"
  | "keys_issued"
  | "authenticated"
  | "completed"
  | "closed"
  | "cancelled";

export interface Engagement {
  id: string;
  request_id: string;
  volunteer_id: string;
  state: EngagementState;
  rating_ids: string[];
  keys_issued: boolean;
  locked: boolean;
  requester_verified: boolean;
  timestamps: Record<string, string>;
}

export interface KeywordPair {
  volunteer_word: string;
  requester_word: string;
  issued_at: string;
}

export interface VerifyOutcome {
  ok: boolean;
  state: EngagementState;
}

export interface SosEvent {
  id: string;
  user_id: string;
  location: GeoPoint;
  raised_at: string;
  status: "open" | "acknowledged" | "resolved";
  acknowledgments: { volunteer_id: string; at: string }[];
}

export interface SosRaised {
  event: SosEvent;
  alerted: number;
}

export type SpeakerRole = "volunteer" | "requester";
