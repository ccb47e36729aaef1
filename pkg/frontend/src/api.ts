/** Typed client for the planning API. The UI never computes figures itself;
 * everything it shows comes straight out of these responses. */

export interface RequirementJson {
  id: string;
  title: string;
  cluster: string;
  estimated_hours: number | null;
  origin: string;
  reimplemented: boolean;
}

export interface SolutionJson {
  selected: string[];
  total_hours: number;
  A: number;
  B: number;
  objective_by_alpha: Record<string, number>;
}

export interface OutcomeJson {
  actual_hours: number;
  estimated_hours: number;
  failed_count: number;
  implemented_count: number;
  user_perception: number;
  ff: number | null;
}

export interface IterationJson {
  index: number;
  candidates: string[];
  ff_applied: number;
  t_max: number | null;
  solutions: SolutionJson[];
  chosen: number | null;
  outcome: OutcomeJson | null;
  failed_ids: string[];
}

export interface ProjectDoc {
  schema_version: number;
  rng_seed: number;
  requirements: RequirementJson[];
  stakeholders: { id: string; name: string }[];
  comparison: number[][];
  matrices: { prio: number[][]; value: number[][]; value_scale_max: number };
  constraints: { precedence: [string, string][]; coupling: [string, string][] };
  estimation: unknown;
  optimizer: unknown;
  iterations: IterationJson[];
}

export interface WeightsJson {
  stakeholders: string[];
  lambda: number[];
}

export interface TimelineRowJson {
  index: number;
  candidates: string[];
  planned: boolean;
  chosen: string[] | null;
  cycle_hours: number | null;
  ff_applied: number;
  outcome_ff: number | null;
}

export interface PlanResponse {
  iteration: number;
  ff_applied: number;
  t_max: number;
  solutions: SolutionJson[];
}

export interface ChooseResponse {
  iteration: number;
  chosen_index: number;
  selected: string[];
  cycle_hours: number;
}

export interface OutcomeResponse {
  iteration: number;
  ff: number;
  next_iteration: { index: number; candidates: string[]; ff_applied: number } | null;
}

export interface NewDefectJson {
  id: string;
  title: string;
  cluster: string;
  prio_column: number[];
  value_column: number[];
}

export class ApiFailure extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly details: Record<string, unknown>,
    readonly status: number,
  ) {
    super(message);
  }
}

type FetchFn = typeof globalThis.fetch;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchFn = globalThis.fetch?.bind(globalThis),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}/api/v1${path}`, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      const err = payload as { code?: string; message?: string; details?: Record<string, unknown> };
      throw new ApiFailure(err.code ?? "error", err.message ?? resp.statusText, err.details ?? {}, resp.status);
    }
    return payload as T;
  }

  listProjects(): Promise<string[]> {
    return this.request("GET", "/projects");
  }

  createProject(doc: unknown): Promise<{ id: string; project: ProjectDoc }> {
    return this.request("POST", "/projects", doc);
  }

  getProject(id: string): Promise<ProjectDoc> {
    return this.request("GET", `/projects/${id}`);
  }

  putProject(id: string, doc: ProjectDoc): Promise<ProjectDoc> {
    return this.request("PUT", `/projects/${id}`, doc);
  }

  weights(id: string): Promise<WeightsJson> {
    return this.request("GET", `/projects/${id}/weights`);
  }

  timeline(id: string): Promise<TimelineRowJson[]> {
    return this.request("GET", `/projects/${id}/timeline`);
  }

  plan(
    id: string,
    iteration: number,
    tMax: number,
    fitness?: Record<string, unknown>,
  ): Promise<PlanResponse> {
    const body: Record<string, unknown> = { t_max: tMax };
    if (fitness) body.fitness = fitness;
    return this.request("POST", `/projects/${id}/iterations/${iteration}/plan`, body);
  }

  choose(id: string, iteration: number, solutionIndex: number): Promise<ChooseResponse> {
    return this.request("POST", `/projects/${id}/iterations/${iteration}/choose`, {
      solution_index: solutionIndex,
    });
  }

  outcome(
    id: string,
    iteration: number,
    fields: { actual_hours: number; estimated_hours: number; user_perception: number },
    failedIds: string[],
    newDefects: NewDefectJson[],
  ): Promise<OutcomeResponse> {
    return this.request("POST", `/projects/${id}/iterations/${iteration}/outcome`, {
      ...fields,
      failed_ids: failedIds,
      new_defects: newDefects,
    });
  }
}
