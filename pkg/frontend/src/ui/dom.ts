// Tiny DOM construction helper; no framework, no virtual DOM.

export function h(
  tag: string,
  attrs: Record<string, string | boolean | ((event: Event) => void)> = {},
  ...children: (Node | string)[]
): HTMLElement {
  const element = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      element.addEventListener(name.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (name in element) {
        (element as unknown as Record<string, boolean>)[name] = value;
      } else if (value) {
        element.setAttribute(name, "");
      }
    } else {
      element.setAttribute(name, value);
    }
  }
  element.append(...children);
  return element;
}

export function clear(container: HTMLElement): void {
  container.replaceChildren();
}
