// Guided steps for one engagement: keywords, doorstep check, completion,
// rating. Every step is rendered, but only the one matching the current
// state is enabled, so users always see where they are in the process.

import { Api, ApiFailure } from "../api/client.js";
import type { Engagement, KeywordPair } from "../api/types.js";
import { enabledSteps, isOver, viewerRole } from "../models/engagement.js";
import { clear, h } from "./dom.js";
import { renderRatingWidget } from "./ratingWidget.js";

export class EngagementFlow {
  engagement: Engagement | null = null;
  keywords: KeywordPair | null = null;
  notice = "";

  constructor(
    readonly api: Api,
    readonly container: HTMLElement,
    readonly viewerId: string,
  ) {}

  async load(engagementId: string): Promise<void> {
    try {
      this.engagement = await this.api.engagement(engagementId);
      if (this.engagement.keys_issued) {
        this.keywords = await this.api.keys(engagementId);
      }
    } catch (error) {
      clear(this.container);
      const message = error instanceof ApiFailure ? error.message : "Engagement unavailable.";
      this.container.append(h("p", { class: "error-banner", role: "alert" }, message));
      return;
    }
    this.render();
  }

  render(): void {
    const engagement = this.engagement;
    if (!engagement) return;
    clear(this.container);

    if (engagement.locked) {
      this.container.append(
        h(
          "section",
          { class: "lockout-screen", role: "alert" },
          h("h3", {}, "Too many failed keyword checks"),
          h(
            "p",
            {},
            "This engagement is locked for everyone's safety. " +
              "Please contact support to continue.",
          ),
        ),
      );
      return;
    }

    const steps = enabledSteps(engagement.state);
    const role = viewerRole(engagement, this.viewerId);
    const flow = h("div", { class: "engagement-flow", "data-state": engagement.state });

    if (this.notice) {
      flow.append(h("p", { class: "flow-notice", role: "status" }, this.notice));
    }

    // step 1: keywords
    const keywordSection = h("section", {
      class: "step step-keywords",
      "data-enabled": String(steps.keywords),
    });
    keywordSection.append(h("h3", {}, "Step 1: doorstep keywords"));
    if (this.keywords) {
      const mine = role === "volunteer" ? this.keywords.volunteer_word : this.keywords.requester_word;
      const theirs = role === "volunteer" ? this.keywords.requester_word : this.keywords.volunteer_word;
      keywordSection.append(
        h("p", { class: "keyword keyword-mine" }, h("strong", {}, "You say: "), h("span", { class: "keyword-large" }, mine)),
        h("p", { class: "keyword keyword-theirs" }, h("strong", {}, "They say: "), h("span", { class: "keyword-large" }, theirs)),
      );
    } else {
      keywordSection.append(
        h(
          "button",
          {
            type: "button",
            class: "get-keywords",
            disabled: !steps.keywords,
            onclick: () => void this.issueKeywords(),
          },
          "Get the keywords",
        ),
      );
    }

    // step 2: verify at the door
    const verifyInput = h("input", {
      type: "text",
      id: "spoken-word",
      class: "verify-input",
      disabled: !steps.verify,
    }) as HTMLInputElement;
    const verifySection = h(
      "section",
      { class: "step step-verify", "data-enabled": String(steps.verify) },
      h("h3", {}, "Step 2: check the word at the door"),
      h("label", { for: "spoken-word" }, "Word the volunteer spoke:"),
      verifyInput,
      h(
        "button",
        {
          type: "button",
          class: "verify-button",
          disabled: !steps.verify,
          onclick: () => void this.verify(verifyInput.value),
        },
        "Check",
      ),
    );

    // step 3: completion
    const completeSection = h(
      "section",
      { class: "step step-complete", "data-enabled": String(steps.complete) },
      h("h3", {}, "Step 3: favor done"),
      h(
        "button",
        {
          type: "button",
          class: "complete-button",
          disabled: !steps.complete,
          onclick: () => void this.complete(),
        },
        "Mark as completed",
      ),
    );

    // step 4: rating
    const rateSection = h(
      "section",
      { class: "step step-rate", "data-enabled": String(steps.rate) },
      h("h3", {}, "Step 4: rate each other"),
      renderRatingWidget((grade) => void this.rate(grade), steps.rate),
    );

    flow.append(keywordSection, verifySection, completeSection, rateSection);
    if (isOver(engagement.state)) {
      flow.append(
        h("p", { class: "flow-finished", role: "status" }, `This engagement is ${engagement.state}.`),
      );
    }
    this.container.append(flow);
  }

  private async issueKeywords(): Promise<void> {
    if (!this.engagement) return;
    try {
      this.keywords = await this.api.keys(this.engagement.id);
      this.engagement = await this.api.engagement(this.engagement.id);
      this.notice = "";
    } catch (error) {
      this.notice = error instanceof ApiFailure ? error.message : "Could not get keywords.";
    }
    this.render();
  }

  private async verify(spoken: string): Promise<void> {
    if (!this.engagement) return;
    try {
      const outcome = await this.api.verify(this.engagement.id, "volunteer", spoken);
      this.engagement = await this.api.engagement(this.engagement.id);
      this.notice = outcome.ok
        ? "Word correct. It is safe to open the door."
        : "That word does not match. Do not open the door.";
    } catch (error) {
      if (error instanceof ApiFailure && error.status === 423) {
        this.engagement = { ...this.engagement, locked: true };
      } else {
        this.notice = error instanceof ApiFailure ? error.message : "Check failed.";
      }
    }
    this.render();
  }

  private async complete(): Promise<void> {
    if (!this.engagement) return;
    try {
      this.engagement = await this.api.complete(this.engagement.id);
      this.notice = "Favor completed. Please rate each other.";
    } catch (error) {
      this.notice = error instanceof ApiFailure ? error.message : "Could not complete.";
    }
    this.render();
  }

  private async rate(grade: number): Promise<void> {
    if (!this.engagement) return;
    try {
      await this.api.rate(this.engagement.id, grade);
      this.engagement = await this.api.engagement(this.engagement.id);
      this.notice = "Thank you, your rating is saved.";
    } catch (error) {
      if (error instanceof ApiFailure && error.code === "already_rated") {
        this.notice = "You already rated this favor.";
      } else {
        this.notice = error instanceof ApiFailure ? error.message : "Rating failed.";
      }
    }
    this.render();
  }
}
