// App shell: sign in with an email, then switch between the map, your own
// activity, and the S.O.S button. One responsive client serves requesters
// and volunteers alike; nothing here re-implements server rules.

import { HttpApi } from "./api/client.js";
import type { GeoPoint } from "./api/types.js";
import { clear, h } from "./ui/dom.js";
import { EngagementFlow } from "./ui/engagementFlow.js";
import { MapView } from "./ui/mapView.js";
import { showProfilePopup } from "./ui/profilePopup.js";
import { SosButton } from "./ui/sosButton.js";

const DEFAULT_CENTER: GeoPoint = { latitude: 52.2297, longitude: 21.0122 };

function browserLocation(): Promise<GeoPoint | undefined> {
  return new Promise((resolve) => {
    if (!navigator.geolocation) return resolve(undefined);
    navigator.geolocation.getCurrentPosition(
      (pos) => resolve({ latitude: pos.coords.latitude, longitude: pos.coords.longitude }),
      () => resolve(undefined),
      { timeout: 5000 },
    );
  });
}

async function boot(root: HTMLElement): Promise<void> {
  const api = new HttpApi(
    new URLSearchParams(location.search).get("api") ?? "",
  );

  const loginPanel = h("section", { class: "login-panel" });
  const appPanel = h("main", { class: "app-panel", hidden: true });
  root.append(loginPanel, appPanel);

  const email = h("input", {
    type: "email",
    id: "login-email",
    autocomplete: "email",
  }) as HTMLInputElement;
  const loginError = h("p", { class: "error-banner", role: "alert", hidden: true });
  loginPanel.append(
    h("h1", {}, "favornet"),
    h("p", {}, "Neighbors helping neighbors, safely."),
    h("label", { for: "login-email" }, "Your email address"),
    email,
    h(
      "button",
      {
        type: "button",
        onclick: () => void signIn(),
      },
      "Sign in",
    ),
    loginError,
  );

  async function signIn(): Promise<void> {
    loginError.hidden = true;
    try {
      const session = await api.login(email.value);
      loginPanel.hidden = true;
      appPanel.hidden = false;
      await showApp(session.user_id);
    } catch (error) {
      loginError.textContent =
        error instanceof Error ? error.message : "Sign in failed.";
      loginError.hidden = false;
    }
  }

  async function showApp(userId: string): Promise<void> {
    clear(appPanel);
    const me = await api.me();
    const center = me.home_location ?? DEFAULT_CENTER;

    const mapContainer = h("section", { class: "tab tab-map" });
    const mineContainer = h("section", { class: "tab tab-mine", hidden: true });
    const sosContainer = h("section", { class: "tab tab-sos", hidden: true });
    const popup = h("aside", { class: "profile-popup" });
    const tabs: Record<string, HTMLElement> = {
      map: mapContainer,
      mine: mineContainer,
      sos: sosContainer,
    };

    const nav = h("nav", { class: "tabs", role: "tablist" });
    for (const [key, label] of [
      ["map", "Map"],
      ["mine", "My activity"],
      ["sos", "S.O.S"],
    ] as const) {
      nav.append(
        h(
          "button",
          {
            type: "button",
            role: "tab",
            onclick: () => {
              for (const [name, panel] of Object.entries(tabs)) {
                panel.hidden = name !== key;
              }
            },
          },
          label,
        ),
      );
    }
    appPanel.append(
      h("header", {}, h("h1", {}, "favornet"), h("p", {}, `Signed in as ${me.display_name}`)),
      nav,
      mapContainer,
      mineContainer,
      sosContainer,
      popup,
    );

    const mapView = new MapView(api, mapContainer);
    await mapView.render(center);

    const myRequests = await api.myRequests();
    const myEngagements = await api.myEngagements();
    mineContainer.append(h("h2", {}, "My requests"));
    for (const request of myRequests) {
      mineContainer.append(h("p", {}, `${request.title} (${request.status})`));
    }
    mineContainer.append(h("h2", {}, "My engagements"));
    for (const engagement of myEngagements) {
      const slot = h("details", {}, h("summary", {}, `${engagement.id} (${engagement.state})`));
      const body = h("div", {});
      slot.append(body);
      mineContainer.append(slot);
      const flow = new EngagementFlow(api, body, userId);
      void flow.load(engagement.id);
    }
    mineContainer.append(
      h(
        "button",
        {
          type: "button",
          onclick: () => void showProfilePopup(api, popup, userId),
        },
        "Show my public profile",
      ),
    );

    new SosButton(api, sosContainer, browserLocation).render();
  }
}

const rootElement = document.getElementById("app");
if (rootElement) void boot(rootElement);
