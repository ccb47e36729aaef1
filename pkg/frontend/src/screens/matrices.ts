/** Rating and comparison matrix editor. Edits go into text buffers; Save
 * PUTs the whole document back and the server re-validates and recomputes
 * the stakeholder weights shown in the lambda column. */

import { ProjectDoc } from "../api.js";
import { clear, el, show } from "../dom.js";
import { ViewModel, buffersFromDoc, refresh } from "../state.js";

function isNumeric(text: string): boolean {
  return text.trim() !== "" && !Number.isNaN(Number(text));
}

interface EditorState {
  save: HTMLButtonElement;
  note: HTMLElement;
  vm: ViewModel;
}

function updateSaveState(state: EditorState): void {
  const buffers = state.vm.buffers;
  if (!buffers) return;
  const cells = [...buffers.comparison.flat(), ...buffers.prio.flat(), ...buffers.value.flat()];
  const blank = cells.some((c) => c.trim() === "");
  const invalid = cells.some((c) => c.trim() !== "" && !isNumeric(c));
  state.save.disabled = blank || invalid || cells.length === 0;
  state.note.textContent = invalid
    ? "some cells are not numbers"
    : blank
      ? "fill every cell to enable saving"
      : "";
}

function matrixTable(
  title: string,
  rows: string[],
  cols: string[],
  buffer: string[][],
  state: EditorState,
  extraHeader?: string,
  extraCell?: (rowIndex: number) => string,
): HTMLElement {
  const head = el("tr", {}, el("th", {}, title));
  for (const c of cols) head.append(el("th", {}, c));
  if (extraHeader) head.append(el("th", { class: "lambda-col" }, extraHeader));
  const table = el("table", { class: "matrix" }, head);
  rows.forEach((rowLabel, r) => {
    const tr = el("tr", {}, el("th", {}, rowLabel));
    cols.forEach((_, c) => {
      const input = el("input", { value: buffer[r][c], class: "cell" }) as HTMLInputElement;
      input.value = buffer[r][c];
      input.addEventListener("input", () => {
        buffer[r][c] = input.value;
        input.classList.toggle("invalid", input.value.trim() !== "" && !isNumeric(input.value));
        updateSaveState(state);
      });
      tr.append(el("td", {}, input));
    });
    if (extraCell) tr.append(el("td", { class: "lambda-col" }, extraCell(r)));
    table.append(tr);
  });
  return table;
}

export function renderMatrices(container: HTMLElement, vm: ViewModel, onSaved: () => void): void {
  clear(container);
  const doc = vm.doc;
  if (!doc || !vm.projectId) {
    container.append(el("p", {}, "open a project first"));
    return;
  }
  if (!vm.buffers) vm.buffers = buffersFromDoc(doc);
  const stakeholderIds = doc.stakeholders.map((s) => s.id);
  const requirementIds = doc.requirements.map((r) => r.id);

  const note = el("span", { class: "form-note" });
  const save = el("button", {}, "Save matrices") as HTMLButtonElement;
  const state: EditorState = { save, note, vm };

  container.append(
    el(
      "section",
      {},
      el("h3", {}, "Stakeholder comparison"),
      matrixTable(
        "comparison",
        stakeholderIds,
        stakeholderIds,
        vm.buffers.comparison,
        state,
        "λ",
        (r) => show(vm.weights ? vm.weights.lambda[r] : null),
      ),
    ),
    el(
      "section",
      {},
      el("h3", {}, "Priorities (1 = highest)"),
      matrixTable("prio", stakeholderIds, requirementIds, vm.buffers.prio, state),
    ),
    el(
      "section",
      {},
      el("h3", {}, "Business values"),
      matrixTable("value", stakeholderIds, requirementIds, vm.buffers.value, state),
    ),
  );

  save.addEventListener("click", () => {
    void (async () => {
      const buffers = vm.buffers;
      if (!doc || !buffers || !vm.projectId) return;
      const toNumbers = (m: string[][]) => m.map((row) => row.map((cell) => Number(cell)));
      const updated: ProjectDoc = {
        ...doc,
        comparison: toNumbers(buffers.comparison),
        matrices: { ...doc.matrices, prio: toNumbers(buffers.prio), value: toNumbers(buffers.value) },
      };
      try {
        await vm.client.putProject(vm.projectId, updated);
        vm.status = "matrices saved";
        await refresh(vm);
        onSaved();
      } catch (err) {
        note.textContent = err instanceof Error ? err.message : String(err);
      }
    })();
  });
  updateSaveState(state);
  container.append(el("div", { class: "actions" }, save, note));
}
