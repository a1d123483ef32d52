// Map of nearby favor requests. Markers are keyboard-reachable buttons laid
// out on a plain projected pane; selecting one opens the request detail.
// The marker contract is MarkerModel; swapping in a tile map later only
// replaces the pane, not the data flow.

import { Api, ApiFailure } from "../api/client.js";
import type { GeoPoint } from "../api/types.js";
import { MarkerModel, toMarker } from "../models/markers.js";
import { clear, h } from "./dom.js";

export class MapView {
  markers: MarkerModel[] = [];

  constructor(
    readonly api: Api,
    readonly container: HTMLElement,
    readonly onError: (message: string) => void = () => {},
  ) {}

  async render(center: GeoPoint, radiusM?: number): Promise<void> {
    clear(this.container);
    this.container.append(h("p", { class: "pending", role: "status" }, "Loading map…"));
    try {
      const results = await this.api.nearby(center, radiusM);
      this.markers = results.map(toMarker);
      this.renderPane(center, radiusM ?? 5000);
    } catch (error) {
      this.renderFailure(error, center, radiusM);
    }
  }

  private renderFailure(error: unknown, center: GeoPoint, radiusM?: number): void {
    clear(this.container);
    const message =
      error instanceof ApiFailure ? error.message : "Could not reach the server.";
    const banner = h(
      "div",
      { class: "error-banner", role: "alert" },
      `Map failed to load: ${message} `,
      h("button", { type: "button", onclick: () => void this.render(center, radiusM) }, "Retry"),
    );
    if (error instanceof ApiFailure && error.status === 422) {
      banner.classList.add("radius-error");
    }
    this.container.append(banner);
    this.onError(message);
  }

  private renderPane(center: GeoPoint, radiusM: number): void {
    clear(this.container);
    if (this.markers.length === 0) {
      this.container.append(
        h("p", { class: "empty-notice", role: "status" }, "No requests nearby."),
      );
      return;
    }
    const pane = h("div", { class: "map-pane", role: "list" });
    const detail = h("section", { class: "request-detail", "aria-live": "polite" });
    const degPerMeterLat = 1 / 111_320;
    const cosLat = Math.cos((center.latitude * Math.PI) / 180);
    for (const marker of this.markers) {
      // equirectangular projection: radius maps to half the pane
      const dx = (marker.position.longitude - center.longitude) * cosLat;
      const dy = marker.position.latitude - center.latitude;
      const x = 50 + (dx / (radiusM * degPerMeterLat)) * 50;
      const y = 50 - (dy / (radiusM * degPerMeterLat)) * 50;
      const button = h(
        "button",
        {
          type: "button",
          class: "marker",
          role: "listitem",
          "data-request-id": marker.requestId,
          "aria-label": `${marker.title}, ${marker.distanceLabel}`,
          style: `left:${x.toFixed(2)}%;top:${y.toFixed(2)}%;`,
          onclick: () => void this.openDetail(marker, detail),
        },
        "📍",
      );
      pane.append(button);
    }
    this.container.append(pane, detail);
  }

  async openDetail(marker: MarkerModel, panel: HTMLElement): Promise<void> {
    clear(panel);
    try {
      const detail = await this.api.requestDetail(marker.requestId);
      panel.append(
        h("h3", {}, detail.request.title),
        h("p", { class: "detail-description" }, detail.request.description),
        h(
          "p",
          { class: "detail-requester" },
          `Asked by ${detail.requester.display_name}` +
            (detail.requester.verified ? " ✔ verified" : ""),
        ),
        h("p", { class: "detail-distance" }, marker.distanceLabel),
      );
    } catch (error) {
      const message = error instanceof ApiFailure ? error.message : "Request unavailable.";
      panel.append(h("p", { class: "error-banner", role: "alert" }, message));
    }
  }
}
