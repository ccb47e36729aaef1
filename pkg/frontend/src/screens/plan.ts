/** Plan-and-choose: run the optimizer for the open iteration and compare the
 * ranked solutions side by side. Every figure in the table is rendered
 * verbatim from the API response. */

import { ApiFailure, IterationJson, SolutionJson } from "../api.js";
import { clear, el, show } from "../dom.js";
import { ViewModel, openIteration, refresh } from "../state.js";

function alphaKeys(solutions: SolutionJson[]): string[] {
  return solutions.length ? Object.keys(solutions[0].objective_by_alpha) : [];
}

function solutionsTable(
  iteration: IterationJson,
  onChoose: ((index: number) => void) | null,
): HTMLElement {
  const alphas = alphaKeys(iteration.solutions);
  const head = el(
    "tr",
    {},
    el("th", {}, "#"),
    el("th", {}, "selected"),
    el("th", {}, "hours"),
    el("th", {}, "A"),
    el("th", {}, "B"),
    ...alphas.map((a) => el("th", {}, `C(${a})`)),
    el("th", {}, ""),
  );
  const table = el("table", { class: "solutions" }, head);
  iteration.solutions.forEach((sol, i) => {
    const chooseCell = el("td", {});
    if (onChoose) {
      const btn = el("button", { class: "choose" }, "Choose") as HTMLButtonElement;
      btn.addEventListener("click", () => onChoose(i));
      chooseCell.append(btn);
    } else if (iteration.chosen === i) {
      chooseCell.append(el("span", { class: "chosen-mark" }, "chosen"));
    }
    const row = el(
      "tr",
      { class: iteration.chosen === i ? "chosen-row" : "" },
      el("td", {}, String(i)),
      el("td", { class: "ids" }, sol.selected.join(", ")),
      el("td", { class: "num hours" }, show(sol.total_hours)),
      el("td", { class: "num penalty" }, show(sol.A)),
      el("td", { class: "num benefit" }, show(sol.B)),
      ...alphas.map((a) => el("td", { class: "num objective" }, show(sol.objective_by_alpha[a]))),
      chooseCell,
    );
    table.append(row);
  });
  return table;
}

export function renderPlan(container: HTMLElement, vm: ViewModel, onChanged: () => void): void {
  clear(container);
  const doc = vm.doc;
  if (!doc || !vm.projectId) {
    container.append(el("p", {}, "open a project first"));
    return;
  }
  const open = openIteration(doc);
  const banner = el("div", { class: "banner hidden" });
  container.append(banner);

  if (!open && doc.iterations.length > 0) {
    container.append(el("p", {}, "all iterations are closed; the project is complete"));
    renderHistory(container, doc.iterations);
    return;
  }

  const iterationIndex = open ? open.index : 1;
  const candidates = open ? open.candidates : doc.requirements.map((r) => r.id);
  container.append(
    el("h3", {}, `Iteration ${iterationIndex}`),
    el(
      "p",
      { class: "candidates" },
      `candidates (ff ${show(open ? open.ff_applied : 1)}): ${candidates.join(", ")}`,
    ),
  );

  const tMax = el("input", { class: "t-max", placeholder: "deadline hours" }) as HTMLInputElement;
  if (open && open.t_max !== null) tMax.value = String(open.t_max);
  const kBest = el("input", { class: "k-best", placeholder: "solutions (1-10)" }) as HTMLInputElement;
  const planBtn = el("button", { class: "run-plan" }, "Plan") as HTMLButtonElement;
  const reason = el("span", { class: "form-note" });

  const alreadyPlanned = Boolean(open && open.solutions.length > 0 && open.chosen === null);
  const alreadyChosen = Boolean(open && open.chosen !== null);
  if (alreadyPlanned) {
    planBtn.disabled = true;
    reason.textContent = "already planned; choose a solution below";
  }
  if (alreadyChosen) {
    planBtn.disabled = true;
    reason.textContent = "a solution was already chosen for this iteration";
  }

  planBtn.addEventListener("click", () => {
    void (async () => {
      banner.classList.add("hidden");
      if (!isFinite(Number(tMax.value)) || tMax.value.trim() === "") {
        banner.textContent = "enter a numeric deadline";
        banner.classList.remove("hidden");
        return;
      }
      try {
        const fitness = kBest.value.trim() === "" ? undefined : { k_best: Number(kBest.value) };
        await vm.client.plan(vm.projectId as string, iterationIndex, Number(tMax.value), fitness);
        await refresh(vm);
        onChanged();
      } catch (err) {
        if (err instanceof ApiFailure) {
          const bound = err.details["min_feasible_hours"];
          banner.textContent =
            bound === undefined || bound === null
              ? err.message
              : `${err.message} (cheapest feasible subset: ${show(bound as number)} hours)`;
        } else {
          banner.textContent = err instanceof Error ? err.message : String(err);
        }
        banner.classList.remove("hidden");
      }
    })();
  });

  container.append(
    el(
      "div",
      { class: "plan-controls" },
      el("label", {}, "deadline ", tMax),
      el("label", {}, "k-best ", kBest),
      planBtn,
      reason,
    ),
  );

  if (open && open.solutions.length > 0) {
    const chooseHandler =
      open.chosen === null
        ? (index: number) => {
            void (async () => {
              try {
                await vm.client.choose(vm.projectId as string, iterationIndex, index);
                await refresh(vm);
                onChanged();
              } catch (err) {
                banner.textContent = err instanceof Error ? err.message : String(err);
                banner.classList.remove("hidden");
              }
            })();
          }
        : null;
    container.append(solutionsTable(open, chooseHandler));
    if (open.chosen !== null) {
      const chosen = open.solutions[open.chosen];
      container.append(
        el(
          "p",
          { class: "cycle-hours" },
          `release cycle time: ${show(chosen.total_hours)} hours (${chosen.selected.join(", ")})`,
        ),
      );
    }
  }

  renderHistory(container, doc.iterations.filter((it) => it.outcome !== null));
}

function renderHistory(container: HTMLElement, closed: IterationJson[]): void {
  if (!closed.length) return;
  const section = el("section", { class: "history" }, el("h4", {}, "closed iterations"));
  for (const it of closed) {
    const chosen = it.chosen !== null ? it.solutions[it.chosen] : null;
    section.append(
      el(
        "p",
        {},
        `iteration ${it.index}: ${chosen ? chosen.selected.join(", ") : "(none)"}` +
          (it.outcome ? ` | ff ${show(it.outcome.ff)}` : ""),
      ),
    );
  }
  container.append(section);
}
