/** Tabbed shell: Project | Matrices | Plan & Choose | Outcome & Trail. */

import { ApiClient } from "./api.js";
import { clear, el, setDocument } from "./dom.js";
import { renderImporter } from "./screens/importer.js";
import { renderMatrices } from "./screens/matrices.js";
import { renderOutcome } from "./screens/outcome.js";
import { renderPlan } from "./screens/plan.js";
import { ViewModel, createViewModel } from "./state.js";

type TabName = "project" | "matrices" | "plan" | "outcome";

export interface App {
  vm: ViewModel;
  showTab(tab: TabName): void;
  activeTab: TabName;
}

export function bootstrap(root: HTMLElement, baseUrl = "", fetchFn?: typeof fetch): App {
  setDocument(root.ownerDocument);
  const client = new ApiClient(baseUrl, fetchFn ?? root.ownerDocument.defaultView?.fetch ?? globalThis.fetch);
  const vm = createViewModel(client);

  const header = el("header", {}, el("h1", {}, "relplan"), el("span", { class: "project-label" }));
  const nav = el("nav", {});
  const content = el("main", { class: "content" });
  clear(root);
  root.append(header, nav, content);

  const app: App = {
    vm,
    activeTab: "project",
    showTab(tab: TabName) {
      app.activeTab = tab;
      for (const btn of Array.from(nav.children)) {
        btn.classList.toggle("active", btn.getAttribute("data-tab") === tab);
      }
      const label = header.querySelector(".project-label");
      if (label) label.textContent = vm.projectId ? `project ${vm.projectId}` : "no project open";
      render();
    },
  };

  const rerender = () => app.showTab(app.activeTab);

  function render(): void {
    clear(content);
    if (app.activeTab === "project") renderImporter(content, vm, () => app.showTab("matrices"));
    else if (app.activeTab === "matrices") renderMatrices(content, vm, rerender);
    else if (app.activeTab === "plan") renderPlan(content, vm, rerender);
    else renderOutcome(content, vm, rerender);
  }

  const tabs: [TabName, string][] = [
    ["project", "Project"],
    ["matrices", "Matrices"],
    ["plan", "Plan & Choose"],
    ["outcome", "Outcome & Trail"],
  ];
  for (const [tab, title] of tabs) {
    const btn = el("button", { "data-tab": tab, class: "tab" }, title);
    btn.addEventListener("click", () => app.showTab(tab));
    nav.append(btn);
  }

  app.showTab("project");
  return app;
}
