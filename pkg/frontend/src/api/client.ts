// Thin fetch wrapper over the platform API. Components depend on the `Api`
// interface so tests can hand them fixtures instead of a server.

import type {
  Engagement,
  GeoPoint,
  KeywordPair,
  NearbyResult,
  Profile,
  FavorRequest,
  RequestDetail,
  SosRaised,
  SpeakerRole,
  User,
  VerifyOutcome,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface Api {
  signup(email: string, displayName: string, home?: GeoPoint): Promise<User>;
  login(email: string): Promise<{ token: string; user_id: string }>;
  me(): Promise<User>;
  nearby(center: GeoPoint, radiusM?: number): Promise<NearbyResult[]>;
  requestDetail(requestId: string): Promise<RequestDetail>;
  postRequest(body: {
    title: string;
    description: string;
    location: GeoPoint;
    expires_at: string;
  }): Promise<FavorRequest>;
  myRequests(): Promise<FavorRequest[]>;
  myEngagements(): Promise<Engagement[]>;
  accept(requestId: string): Promise<Engagement>;
  engagement(engagementId: string): Promise<Engagement>;
  keys(engagementId: string): Promise<KeywordPair>;
  verify(engagementId: string, role: SpeakerRole, spoken: string): Promise<VerifyOutcome>;
  complete(engagementId: string): Promise<Engagement>;
  rate(engagementId: string, grade: number): Promise<void>;
  profile(userId: string): Promise<Profile>;
  raiseSos(location?: GeoPoint): Promise<SosRaised>;
}

export class HttpApi implements Api {
  token: string | null = null;

  constructor(readonly baseUrl: string) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiFailure(
        response.status,
        payload.code ?? "unknown",
        payload.message ?? response.statusText,
      );
    }
    return payload as T;
  }

  async signup(email: string, displayName: string, home?: GeoPoint): Promise<User> {
    const body: Record<string, unknown> = { email, display_name: displayName };
    if (home) body.home_location = home;
    const { user } = await this.call<{ user: User }>("POST", "/api/users", body);
    return user;
  }

  async login(email: string): Promise<{ token: string; user_id: string }> {
    const session = await this.call<{ token: string; user_id: string }>(
      "POST",
      "/api/sessions",
      { email },
    );
    this.token = session.token;
    return session;
  }

  async me(): Promise<User> {
    return (await this.call<{ user: User }>("GET", "/api/users/me")).user;
  }

  nearby(center: GeoPoint, radiusM?: number): Promise<NearbyResult[]> {
    const params = new URLSearchParams({
      lat: String(center.latitude),
      lon: String(center.longitude),
    });
    if (radiusM !== undefined) params.set("radius_m", String(radiusM));
    return this.call("GET", `/api/requests/nearby?${params}`);
  }

  requestDetail(requestId: string): Promise<RequestDetail> {
    return this.call("GET", `/api/requests/${requestId}`);
  }

  async postRequest(body: {
    title: string;
    description: string;
    location: GeoPoint;
    expires_at: string;
  }): Promise<FavorRequest> {
    const { request } = await this.call<{ request: FavorRequest }>(
      "POST",
      "/api/requests",
      body,
    );
    return request;
  }

  myRequests(): Promise<FavorRequest[]> {
    return this.call("GET", "/api/users/me/requests");
  }

  myEngagements(): Promise<Engagement[]> {
    return this.call("GET", "/api/users/me/engagements");
  }

  async accept(requestId: string): Promise<Engagement> {
    const { engagement } = await this.call<{ engagement: Engagement }>(
      "POST",
      `/api/requests/${requestId}/accept`,
    );
    return engagement;
  }

  async engagement(engagementId: string): Promise<Engagement> {
    const { engagement } = await this.call<{ engagement: Engagement }>(
      "GET",
      `/api/engagements/${engagementId}`,
    );
    return engagement;
  }

  keys(engagementId: string): Promise<KeywordPair> {
    return this.call("POST", `/api/engagements/${engagementId}/keys`);
  }

  verify(engagementId: string, role: SpeakerRole, spoken: string): Promise<VerifyOutcome> {
    return this.call("POST", `/api/engagements/${engagementId}/verify`, {
      speaker_role: role,
      spoken,
    });
  }

  async complete(engagementId: string): Promise<Engagement> {
    const { engagement } = await this.call<{ engagement: Engagement }>(
      "POST",
      `/api/engagements/${engagementId}/complete`,
    );
    return engagement;
  }

  async rate(engagementId: string, grade: number): Promise<void> {
    await this.call("POST", `/api/engagements/${engagementId}/rate`, { grade });
  }

  profile(userId: string): Promise<Profile> {
    return this.call("GET", `/api/users/${userId}/profile`);
  }

  raiseSos(location?: GeoPoint): Promise<SosRaised> {
    return this.call("POST", "/api/sos", location ? { location } : {});
  }
}
