// Pop-up card showing who confirmed a profile and how past favors went.

import { Api, ApiFailure } from "../api/client.js";
import { toProfileCard } from "../models/profile.js";
import { clear, h } from "./dom.js";

export async function showProfilePopup(
  api: Api,
  container: HTMLElement,
  userId: string,
): Promise<void> {
  clear(container);
  let card;
  try {
    card = toProfileCard(await api.profile(userId));
  } catch (error) {
    const notFound = error instanceof ApiFailure && error.status === 404;
    container.append(
      h(
        "p",
        { class: "error-banner", role: "alert" },
        notFound ? "User not found." : "Profile unavailable, try again.",
      ),
    );
    return;
  }

  const header = h("h3", {}, card.displayName);
  if (card.verified) {
    header.append(
      " ",
      h("span", { class: "verified-mark", title: "Profile confirmed" }, "✔ verified"),
    );
  }
  const badges = h("ul", { class: "badge-list" });
  for (const badge of card.badges) {
    badges.append(
      h("li", {}, `${badge.orgName}, confirmed ${badge.date}` + (badge.note ? ` (${badge.note})` : "")),
    );
  }
  const chips = h("div", { class: "grade-chips" });
  for (const chip of card.chips) {
    chips.append(
      h(
        "span",
        {
          class: `chip chip-${chip.color}`,
          "data-grade": String(chip.grade),
          "aria-label": `grade ${chip.grade}: ${chip.count}`,
        },
        `${chip.grade}: ${chip.count}`,
      ),
    );
  }
  container.append(
    h(
      "article",
      { class: "profile-card" },
      header,
      h("p", { class: "reputation-sum" }, `Reputation ${card.sumLabel}`),
      card.badges.length ? badges : h("p", { class: "no-badges" }, "No confirmations yet."),
      chips,
    ),
  );
}
