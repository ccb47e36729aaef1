/** Minimal DOM helpers. The active Document is injected so tests can run
 * against a jsdom instance without touching globals. */

let activeDoc: Document | null = null;

export function setDocument(doc: Document): void {
  activeDoc = doc;
}

export function getDocument(): Document {
  if (!activeDoc) throw new Error("setDocument() must be called before building UI");
  return activeDoc;
}

type Attrs = Record<string, string | boolean | ((ev: Event) => void)>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = getDocument().createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
      else node.removeAttribute(key);
      if (key === "disabled") (node as unknown as { disabled: boolean }).disabled = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

/** Render an API figure exactly as received; no client-side rounding. */
export function show(value: number | string | null | undefined): string {
  if (value === null || value === undefined) return "";
  return String(value);
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}
