import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { JSDOM } from "jsdom";

import { ApiClient } from "../src/api.js";
import { setDocument } from "../src/dom.js";
import { ViewModel, createViewModel } from "../src/state.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", `${name}.json`), "utf-8")) as T;
}

export function makeDom(): { dom: JSDOM; root: HTMLElement } {
  const dom = new JSDOM('<!doctype html><html><body><div id="app"></div></body></html>', {
    url: "http://localhost/",
  });
  setDocument(dom.window.document);
  const root = dom.window.document.getElementById("app") as HTMLElement;
  return { dom, root };
}

/** View model preloaded from fixtures; the client is only used on actions. */
export function fixtureViewModel(client?: ApiClient): ViewModel {
  const vm = createViewModel(client ?? new ApiClient("http://unused", (() => {
    throw new Error("no network in contract tests");
  }) as unknown as typeof fetch));
  vm.projectId = "fixture";
  return vm;
}

export async function until(predicate: () => boolean, timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error("condition not reached in time");
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

export function texts(rootEl: Element, selector: string): string[] {
  return Array.from(rootEl.querySelectorAll(selector)).map((n) => n.textContent ?? "");
}
