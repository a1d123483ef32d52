// Wire-contract check against a real backend. Start one with
//   favornet serve --port 8080
// then run
//   FAVORNET_API_URL=http://127.0.0.1:8080 npm test
// Skipped when no server address is configured.

import { describe, expect, it } from "vitest";

import { HttpApi } from "../src/api/client.js";

const BASE_URL = process.env.FAVORNET_API_URL;

describe.skipIf(!BASE_URL)("live API contract", () => {
  it("runs signup, request, nearby, and profile against the real server", async () => {
    const api = new HttpApi(BASE_URL!);
    const nonce = Math.random().toString(36).slice(2, 10);
    const home = { latitude: 52.2297, longitude: 21.0122 };

    const user = await api.signup(`it-${nonce}@example.pl`, "Integracja", home);
    expect(user.email).toBe(`it-${nonce}@example.pl`);
    await api.login(user.email);

    const request = await api.postRequest({
      title: "Test integracyjny",
      description: "sprawdzenie kontraktu",
      location: home,
      expires_at: "2030-01-01T00:00:00+00:00",
    });
    expect(request.status).toBe("open");

    const nearby = await api.nearby(home, 5000);
    expect(nearby.some((r) => r.request_id === request.id)).toBe(true);
    const mine = nearby.find((r) => r.request_id === request.id)!;
    expect(mine.requester_display_name).toBe("Integracja");
    expect(mine.location).toEqual(home);

    const profile = await api.profile(user.id);
    expect(profile.verified).toBe(false);
    expect(profile.reputation_sum).toBe(0);
    expect(profile.grade_colors).toEqual({
      "1": "red", "2": "red", "3": "gray", "4": "green", "5": "green",
    });

    const sos = await api.raiseSos();
    expect(sos.event.status).toBe("open");
    const again = await api.raiseSos();
    expect(again.event.id).toBe(sos.event.id); // 60s dedup
  });
});
