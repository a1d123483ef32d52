// Step gating for the guided engagement flow. Each step is enabled only in
// its matching lifecycle state; everything else is shown disabled.

import type { Engagement, EngagementState } from "../api/types.js";

export type FlowStep = "keywords" | "verify" | "complete" | "rate";

export interface StepStates {
  keywords: boolean;
  verify: boolean;
  complete: boolean;
  rate: boolean;
}

export function enabledSteps(state: EngagementState): StepStates {
  return {
    // keyword screen: request the pair in accepted, read it back afterwards
    keywords: state === "accepted" || state === "keys_issued",
    verify: state === "keys_issued",
    complete: state === "authenticated",
    rate: state === "completed",
  };
}

export function isOver(state: EngagementState): boolean {
  return state === "closed" || state === "cancelled";
}

export function viewerRole(
  engagement: Engagement,
  viewerId: string,
): "volunteer" | "requester" {
  return viewerId === engagement.volunteer_id ? "volunteer" : "requester";
}
