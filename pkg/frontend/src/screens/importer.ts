/** Project selection: pick an existing project or create one by pasting its
 * JSON document. */

import { clear, el } from "../dom.js";
import { ViewModel, refresh } from "../state.js";

export function renderImporter(container: HTMLElement, vm: ViewModel, onOpened: () => void): void {
  clear(container);
  const banner = el("div", { class: "banner hidden" });

  const select = el("select", { class: "project-select" }) as HTMLSelectElement;
  select.append(el("option", { value: "" }, "choose a project"));
  const openBtn = el("button", { class: "open-project" }, "Open") as HTMLButtonElement;
  openBtn.addEventListener("click", () => {
    void (async () => {
      if (!select.value) return;
      vm.projectId = select.value;
      vm.status = "";
      await refresh(vm);
      onOpened();
    })();
  });

  void (async () => {
    try {
      for (const id of await vm.client.listProjects()) {
        select.append(el("option", { value: id }, id));
      }
    } catch (err) {
      banner.textContent = err instanceof Error ? err.message : String(err);
      banner.classList.remove("hidden");
    }
  })();

  const textarea = el("textarea", {
    class: "import-json",
    rows: "14",
    placeholder: "paste a project document (JSON)",
  }) as HTMLTextAreaElement;
  const createBtn = el("button", { class: "create-project" }, "Create project") as HTMLButtonElement;
  createBtn.addEventListener("click", () => {
    void (async () => {
      banner.classList.add("hidden");
      let doc: unknown;
      try {
        doc = JSON.parse(textarea.value);
      } catch {
        banner.textContent = "not valid JSON";
        banner.classList.remove("hidden");
        return;
      }
      try {
        const created = await vm.client.createProject(doc);
        vm.projectId = created.id;
        vm.status = `created project ${created.id}`;
        await refresh(vm);
        onOpened();
      } catch (err) {
        banner.textContent = err instanceof Error ? err.message : String(err);
        banner.classList.remove("hidden");
      }
    })();
  });

  container.append(
    banner,
    el("section", {}, el("h3", {}, "Open existing"), el("div", { class: "actions" }, select, openBtn)),
    el("section", {}, el("h3", {}, "Create from JSON"), textarea, el("div", { class: "actions" }, createBtn)),
  );
}
