// One-tap emergency button. A successful press shows the event id and how
// many helpers were alerted; pressing again inside the dedup window simply
// shows the same event. Without any usable location we prompt instead of
// hammering the API.

import { Api, ApiFailure } from "../api/client.js";
import type { GeoPoint } from "../api/types.js";
import { clear, h } from "./dom.js";

export class SosButton {
  lastEventId: string | null = null;

  constructor(
    readonly api: Api,
    readonly container: HTMLElement,
    readonly getLocation: () => Promise<GeoPoint | undefined> = async () => undefined,
  ) {}

  render(): void {
    clear(this.container);
    this.container.append(
      h(
        "button",
        {
          type: "button",
          class: "sos-button",
          "aria-label": "S.O.S: alert nearby volunteers",
          onclick: () => void this.press(),
        },
        "S.O.S",
      ),
      h("div", { class: "sos-status", "aria-live": "assertive" }),
    );
  }

  private status(): HTMLElement {
    return this.container.querySelector(".sos-status") as HTMLElement;
  }

  async press(): Promise<void> {
    const panel = this.status();
    clear(panel);
    let location: GeoPoint | undefined;
    try {
      location = await this.getLocation();
    } catch {
      location = undefined; // sharing denied; the profile home address may still work
    }
    try {
      const raised = await this.api.raiseSos(location);
      this.lastEventId = raised.event.id;
      panel.append(
        h(
          "section",
          { class: "sos-confirmation" },
          h("h3", {}, "Help alerted"),
          h("p", { class: "sos-event-id" }, `Event ${raised.event.id}`),
          h("p", { class: "sos-alerted" }, `${raised.alerted} nearby helpers notified.`),
        ),
      );
    } catch (error) {
      if (error instanceof ApiFailure && error.code === "no_location") {
        panel.append(
          h(
            "section",
            { class: "sos-location-prompt", role: "alert" },
            h("p", {}, "We do not know where you are."),
            h("p", {}, "Share your location or set a home address in your profile, then press again."),
          ),
        );
      } else {
        const message = error instanceof ApiFailure ? error.message : "Could not reach the server.";
        panel.append(h("p", { class: "error-banner", role: "alert" }, message));
      }
    }
  }
}
