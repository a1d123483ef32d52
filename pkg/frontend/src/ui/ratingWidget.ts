// Five-level rating widget: two red, one gray, two green, large targets.

import { GRADE_COLORS } from "../models/profile.js";
import { h } from "./dom.js";

export function renderRatingWidget(
  onRate: (grade: number) => void,
  enabled = true,
): HTMLElement {
  const widget = h("div", {
    class: "rating-widget",
    role: "group",
    "aria-label": "Rate this favor from 1 (bad) to 5 (great)",
  });
  for (const grade of [1, 2, 3, 4, 5]) {
    widget.append(
      h(
        "button",
        {
          type: "button",
          class: `rating-level rating-${GRADE_COLORS[grade]}`,
          "data-grade": String(grade),
          "aria-label": `grade ${grade}`,
          disabled: !enabled,
          onclick: () => onRate(grade),
        },
        String(grade),
      ),
    );
  }
  return widget;
}
