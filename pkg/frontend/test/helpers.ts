import type { Api } from "../src/api/client.js";
import type { Engagement, Profile } from "../src/api/types.js";

export function stubApi(overrides: Partial<Api>): Api {
  const unstubbed =
    (name: string) =>
    async (): Promise<never> => {
      throw new Error(`api.${name} not stubbed in this test`);
    };
  const base: Record<keyof Api, unknown> = {
    signup: unstubbed("signup"),
    login: unstubbed("login"),
    me: unstubbed("me"),
    nearby: unstubbed("nearby"),
    requestDetail: unstubbed("requestDetail"),
    postRequest: unstubbed("postRequest"),
    myRequests: unstubbed("myRequests"),
    myEngagements: unstubbed("myEngagements"),
    accept: unstubbed("accept"),
    engagement: unstubbed("engagement"),
    keys: unstubbed("keys"),
    verify: unstubbed("verify"),
    complete: unstubbed("complete"),
    rate: unstubbed("rate"),
    profile: unstubbed("profile"),
    raiseSos: unstubbed("raiseSos"),
  };
  return { ...base, ...overrides } as Api;
}

export function container(): HTMLElement {
  const element = document.createElement("div");
  document.body.append(element);
  return element;
}

export async function tick(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function makeEngagement(overrides: Partial<Engagement> = {}): Engagement {
  return {
    id: "e-1",
    request_id: "r-1",
    volunteer_id: "u-vol",
    state: "accepted",
    rating_ids: [],
    keys_issued: false,
    locked: false,
    requester_verified: false,
    timestamps: { accepted: "2026-08-01T12:00:00+00:00" },
    ...overrides,
  };
}

export function makeProfile(overrides: Partial<Profile> = {}): Profile {
  return {
    user_id: "u-1",
    display_name: "Jan",
    verified: false,
    badges: [],
    reputation_sum: 0,
    grade_counts: { "1": 0, "2": 0, "3": 0, "4": 0, "5": 0 },
    grade_colors: { "1": "red", "2": "red", "3": "gray", "4": "green", "5": "green" },
    ...overrides,
  };
}
