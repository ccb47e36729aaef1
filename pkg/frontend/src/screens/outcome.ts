/** Outcome entry for the chosen solution plus the feedback-factor trail.
 * Failed requirements are ticked off the chosen set; new defects can be
 * rated inline for every stakeholder. */

import { NewDefectJson } from "../api.js";
import { ffTrailSvg } from "../chart.js";
import { clear, el, show } from "../dom.js";
import { ViewModel, openIteration, refresh } from "../state.js";

interface DefectRow {
  id: HTMLInputElement;
  title: HTMLInputElement;
  cluster: HTMLInputElement;
  prio: HTMLInputElement[];
  value: HTMLInputElement[];
}

export function renderOutcome(container: HTMLElement, vm: ViewModel, onChanged: () => void): void {
  clear(container);
  const doc = vm.doc;
  if (!doc || !vm.projectId) {
    container.append(el("p", {}, "open a project first"));
    return;
  }

  const open = openIteration(doc);
  const banner = el("div", { class: "banner hidden" });
  container.append(banner);

  if (open && open.chosen !== null) {
    const chosen = open.solutions[open.chosen];
    const form = el("section", { class: "outcome-form" }, el("h3", {}, `Iteration ${open.index} outcome`));

    const actual = el("input", { class: "actual-hours", placeholder: "actual hours" }) as HTMLInputElement;
    const estimated = el("input", { class: "estimated-hours" }) as HTMLInputElement;
    estimated.value = show(chosen.total_hours);

    const upValue = el("span", { class: "up-value" }, "1");
    const up = el("input", { type: "range", min: "0", max: "1", step: "0.01", class: "up-slider" }) as HTMLInputElement;
    up.value = "1";
    up.addEventListener("input", () => {
      upValue.textContent = up.value;
    });

    const failedBoxes = new Map<string, HTMLInputElement>();
    const failedList = el("div", { class: "failed-list" });
    for (const rid of chosen.selected) {
      const box = el("input", { type: "checkbox", class: "failed-box" }) as HTMLInputElement;
      failedBoxes.set(rid, box);
      failedList.append(el("label", { class: "failed-item" }, box, ` ${rid}`));
    }

    const defectRows: DefectRow[] = [];
    const defectsContainer = el("div", { class: "defects" });
    const addDefect = el("button", { class: "add-defect" }, "Add defect") as HTMLButtonElement;
    addDefect.addEventListener("click", () => {
      const row: DefectRow = {
        id: el("input", { placeholder: "id", class: "defect-id" }) as HTMLInputElement,
        title: el("input", { placeholder: "title", class: "defect-title" }) as HTMLInputElement,
        cluster: el("input", { placeholder: "cluster", class: "defect-cluster" }) as HTMLInputElement,
        prio: [],
        value: [],
      };
      const wrapper = el("div", { class: "defect-row" }, row.id, row.title, row.cluster);
      for (const s of doc.stakeholders) {
        const p = el("input", { placeholder: `prio ${s.id}`, class: "defect-prio" }) as HTMLInputElement;
        const v = el("input", { placeholder: `value ${s.id}`, class: "defect-value" }) as HTMLInputElement;
        row.prio.push(p);
        row.value.push(v);
        wrapper.append(p, v);
      }
      defectRows.push(row);
      defectsContainer.append(wrapper);
    });

    const submit = el("button", { class: "submit-outcome" }, "Record outcome") as HTMLButtonElement;
    submit.addEventListener("click", () => {
      void (async () => {
        banner.classList.add("hidden");
        if (actual.value.trim() === "" || !isFinite(Number(actual.value))) {
          banner.textContent = "enter the actual hours";
          banner.classList.remove("hidden");
          return;
        }
        const failedIds = [...failedBoxes.entries()].filter(([, box]) => box.checked).map(([rid]) => rid);
        const defects: NewDefectJson[] = defectRows
          .filter((row) => row.id.value.trim() !== "")
          .map((row) => ({
            id: row.id.value.trim(),
            title: row.title.value,
            cluster: row.cluster.value.trim(),
            prio_column: row.prio.map((i) => Number(i.value)),
            value_column: row.value.map((i) => Number(i.value)),
          }));
        try {
          const result = await vm.client.outcome(
            vm.projectId as string,
            open.index,
            {
              actual_hours: Number(actual.value),
              estimated_hours: Number(estimated.value),
              user_perception: Number(up.value),
            },
            failedIds,
            defects,
          );
          vm.status = `feedback factor ${show(result.ff)}`;
          await refresh(vm);
          onChanged();
        } catch (err) {
          banner.textContent = err instanceof Error ? err.message : String(err);
          banner.classList.remove("hidden");
        }
      })();
    });

    form.append(
      el("p", {}, `chosen: ${chosen.selected.join(", ")} (${show(chosen.total_hours)} hours)`),
      el("label", {}, "actual hours ", actual),
      el("label", {}, "estimated hours ", estimated),
      el("label", {}, "user perception ", up, upValue),
      el("h4", {}, "failed requirements"),
      failedList,
      el("h4", {}, "new defects"),
      defectsContainer,
      addDefect,
      el("div", { class: "actions" }, submit),
    );
    container.append(form);
  } else if (open) {
    container.append(el("p", {}, `iteration ${open.index} has no chosen solution yet`));
  } else if (doc.iterations.length) {
    container.append(el("p", {}, "project complete; outcomes recorded for every iteration"));
  } else {
    container.append(el("p", {}, "plan the first iteration before recording outcomes"));
  }

  if (vm.status) container.append(el("p", { class: "status" }, vm.status));

  const nextOpen = openIteration(doc);
  if (nextOpen && nextOpen.chosen === null && nextOpen.index > 1) {
    container.append(
      el("p", { class: "next-candidates" }, `next candidates: ${nextOpen.candidates.join(", ")}`),
    );
  }

  container.append(el("h3", {}, "feedback factor trail"), ffTrailSvg(vm.timeline));

  const rows = vm.timeline.filter((r) => r.outcome_ff !== null);
  if (rows.length) {
    const table = el(
      "table",
      { class: "trail-table" },
      el("tr", {}, el("th", {}, "iteration"), el("th", {}, "chosen"), el("th", {}, "cycle hours"), el("th", {}, "ff")),
    );
    for (const row of rows) {
      table.append(
        el(
          "tr",
          {},
          el("td", {}, String(row.index)),
          el("td", {}, row.chosen ? row.chosen.join(", ") : ""),
          el("td", { class: "num cycle" }, show(row.cycle_hours)),
          el("td", { class: "num ff" }, show(row.outcome_ff)),
        ),
      );
    }
    container.append(table);
  }
}
