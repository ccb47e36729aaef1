/** View model: a mirror of the server's JSON plus edit buffers. Never the
 * source of truth; every mutation round-trips through the API and reloads. */

import { ApiClient, IterationJson, ProjectDoc, TimelineRowJson, WeightsJson } from "./api.js";

export interface MatrixBuffers {
  comparison: string[][];
  prio: string[][];
  value: string[][];
}

export interface ViewModel {
  client: ApiClient;
  projectId: string | null;
  doc: ProjectDoc | null;
  weights: WeightsJson | null;
  timeline: TimelineRowJson[];
  buffers: MatrixBuffers | null;
  status: string;
}

export function createViewModel(client: ApiClient): ViewModel {
  return { client, projectId: null, doc: null, weights: null, timeline: [], buffers: null, status: "" };
}

export function buffersFromDoc(doc: ProjectDoc): MatrixBuffers {
  const toText = (m: number[][]) => m.map((row) => row.map((x) => String(x)));
  return {
    comparison: toText(doc.comparison),
    prio: toText(doc.matrices.prio),
    value: toText(doc.matrices.value),
  };
}

export async function refresh(vm: ViewModel): Promise<void> {
  if (!vm.projectId) return;
  vm.doc = await vm.client.getProject(vm.projectId);
  vm.weights = await vm.client.weights(vm.projectId);
  vm.timeline = await vm.client.timeline(vm.projectId);
  vm.buffers = buffersFromDoc(vm.doc);
}

export function openIteration(doc: ProjectDoc): IterationJson | null {
  for (const it of doc.iterations) {
    if (it.outcome === null) return it;
  }
  return null;
}

export function nextIterationIndex(doc: ProjectDoc): number {
  const open = openIteration(doc);
  return open ? open.index : doc.iterations.length + 1;
}
