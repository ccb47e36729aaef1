/** Contract tests: screens rendered from recorded API fixtures must show
 * every figure verbatim (byte-equal to the JSON value). No business logic
 * happens client-side, so no network is involved here. */

import { describe, expect, it } from "vitest";

import {
  ApiClient,
  ApiFailure,
  PlanResponse,
  ProjectDoc,
  TimelineRowJson,
  WeightsJson,
} from "../src/api.js";
import { renderImporter } from "../src/screens/importer.js";
import { renderMatrices } from "../src/screens/matrices.js";
import { renderOutcome } from "../src/screens/outcome.js";
import { renderPlan } from "../src/screens/plan.js";
import { buffersFromDoc } from "../src/state.js";
import { fixture, fixtureViewModel, makeDom, texts, until } from "./helpers.js";

const planned = fixture<ProjectDoc>("project_planned");
const chosen = fixture<ProjectDoc>("project_chosen");
const done = fixture<ProjectDoc>("project_done");
const weights = fixture<WeightsJson>("weights");
const timeline = fixture<TimelineRowJson[]>("timeline");
const planResponse = fixture<PlanResponse>("plan");
const infeasible = fixture<{ code: string; message: string; details: Record<string, unknown> }>("infeasible");

describe("plan screen", () => {
  it("renders every solution figure byte-equal to the response", () => {
    const { root } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = planned;
    renderPlan(root, vm, () => {});

    const hours = texts(root, "td.hours");
    const penalties = texts(root, "td.penalty");
    const benefits = texts(root, "td.benefit");
    expect(hours).toEqual(planResponse.solutions.map((s) => String(s.total_hours)));
    expect(penalties).toEqual(planResponse.solutions.map((s) => String(s.A)));
    expect(benefits).toEqual(planResponse.solutions.map((s) => String(s.B)));

    const alphas = Object.keys(planResponse.solutions[0].objective_by_alpha);
    const objectiveCells = texts(root, "td.objective");
    const expected = planResponse.solutions.flatMap((s) => alphas.map((a) => String(s.objective_by_alpha[a])));
    expect(objectiveCells).toEqual(expected);
  });

  it("disables replanning while a plan awaits a choice", () => {
    const { root } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = planned;
    renderPlan(root, vm, () => {});
    const button = root.querySelector("button.run-plan") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    expect(root.textContent).toContain("choose a solution");
  });

  it("disables replanning after a choice, with the cycle hours shown", () => {
    const { root } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = chosen;
    renderPlan(root, vm, () => {});
    const button = root.querySelector("button.run-plan") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    expect(root.textContent).toContain("already chosen");
    const record = chosen.iterations[0];
    const sol = record.solutions[record.chosen as number];
    expect(root.querySelector(".cycle-hours")?.textContent).toContain(String(sol.total_hours));
    expect(root.querySelectorAll("button.choose")).toHaveLength(0);
  });

  it("shows an error banner with the violated budget on infeasible plans", async () => {
    const { root } = makeDom();
    const failing = new ApiClient("http://unused", (async () => {
      throw new ApiFailure(infeasible.code, infeasible.message, infeasible.details, 422);
    }) as unknown as typeof fetch);
    failing.plan = async () => {
      throw new ApiFailure(infeasible.code, infeasible.message, infeasible.details, 422);
    };
    const vm = fixtureViewModel(failing);
    vm.doc = done;
    renderPlan(root, vm, () => {});
    const tMax = root.querySelector("input.t-max") as HTMLInputElement;
    tMax.value = "50";
    (root.querySelector("button.run-plan") as HTMLButtonElement).click();
    await until(() => !(root.querySelector(".banner") as HTMLElement).classList.contains("hidden"));
    const banner = root.querySelector(".banner") as HTMLElement;
    expect(banner.textContent).toContain(infeasible.message);
    expect(banner.textContent).toContain(String(infeasible.details["min_feasible_hours"]));
  });
});

describe("matrix editor", () => {
  it("shows the stakeholder weights verbatim", () => {
    const { root } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = planned;
    vm.weights = weights;
    vm.buffers = buffersFromDoc(planned);
    renderMatrices(root, vm, () => {});
    const cells = texts(root, "td.lambda-col");
    expect(cells).toEqual(weights.lambda.map((x) => String(x)));
  });

  it("flags non-numeric cells and blocks saving", () => {
    const { root, dom } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = planned;
    vm.weights = weights;
    vm.buffers = buffersFromDoc(planned);
    renderMatrices(root, vm, () => {});
    const cell = root.querySelector("input.cell") as HTMLInputElement;
    cell.value = "abc";
    cell.dispatchEvent(new dom.window.Event("input"));
    const save = Array.from(root.querySelectorAll("button")).find((b) => b.textContent?.includes("Save"));
    expect((save as HTMLButtonElement).disabled).toBe(true);
    expect(cell.classList.contains("invalid")).toBe(true);
  });

  it("blocks saving while any cell is blank", () => {
    const { root, dom } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = planned;
    vm.weights = weights;
    vm.buffers = buffersFromDoc(planned);
    renderMatrices(root, vm, () => {});
    const cell = root.querySelector("input.cell") as HTMLInputElement;
    cell.value = "";
    cell.dispatchEvent(new dom.window.Event("input"));
    const save = Array.from(root.querySelectorAll("button")).find((b) => b.textContent?.includes("Save"));
    expect((save as HTMLButtonElement).disabled).toBe(true);
    expect(root.textContent).toContain("fill every cell");
  });
});

describe("outcome screen", () => {
  it("lists a failed checkbox for each implemented requirement", () => {
    const { root } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = chosen;
    renderOutcome(root, vm, () => {});
    const record = chosen.iterations[0];
    const sol = record.solutions[record.chosen as number];
    expect(root.querySelectorAll("input.failed-box")).toHaveLength(sol.selected.length);
    expect(root.textContent).toContain(sol.selected.join(", "));
  });

  it("renders the trail figures byte-equal to the timeline response", () => {
    const { root } = makeDom();
    const vm = fixtureViewModel();
    vm.doc = done;
    vm.timeline = timeline;
    renderOutcome(root, vm, () => {});
    const closed = timeline.filter((r) => r.outcome_ff !== null);
    expect(texts(root, "td.cycle")).toEqual(closed.map((r) => String(r.cycle_hours)));
    expect(texts(root, "td.ff")).toEqual(closed.map((r) => String(r.outcome_ff)));
    expect(texts(root, ".ff-trail .trail-label")).toEqual(closed.map((r) => String(r.outcome_ff)));
  });
});

describe("project screen", () => {
  it("rejects unparseable JSON before any request", async () => {
    const { root } = makeDom();
    const vm = fixtureViewModel(new ApiClient("http://unused", (async () => ({
      ok: true,
      json: async () => [],
    })) as unknown as typeof fetch));
    renderImporter(root, vm, () => {});
    const area = root.querySelector("textarea.import-json") as HTMLTextAreaElement;
    area.value = "{broken";
    (root.querySelector("button.create-project") as HTMLButtonElement).click();
    await until(() => !(root.querySelector(".banner") as HTMLElement).classList.contains("hidden"));
    expect(root.querySelector(".banner")?.textContent).toContain("not valid JSON");
  });
});
