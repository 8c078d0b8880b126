import type {
  AsrListing,
  CheckResult,
  ErrorPayload,
  LedgerEntry,
  ModelRevision,
  ProjectStatus,
  RefinementOp,
  ReportPayload,
  Scenario,
  Story,
  Transcript,
  Turn,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** A non-2xx reply, carrying the server's error payload. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, payload: ErrorPayload) {
    super(payload.message);
    this.status = status;
    this.code = payload.code;
    this.detail = payload.detail;
  }
}

async function asApiError(response: Response): Promise<ApiError> {
  let payload: ErrorPayload;
  try {
    payload = (await response.json()) as ErrorPayload;
  } catch {
    payload = { code: "unreadable_error", message: response.statusText };
  }
  return new ApiError(response.status, payload);
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw await asApiError(response);
    }
    return (await response.json()) as T;
  }

  createProject(id: string): Promise<ProjectStatus & { seq: number }> {
    return this.request("POST", "/projects", { id });
  }

  status(projectId: string): Promise<ProjectStatus> {
    return this.request("GET", `/projects/${projectId}`);
  }

  importStory(
    projectId: string,
    story: Omit<Story, "schema_version">,
  ): Promise<{ story: Story; seq: number }> {
    return this.request("POST", `/projects/${projectId}/story`, story);
  }

  story(projectId: string): Promise<{ story: Story }> {
    return this.request("GET", `/projects/${projectId}/story`);
  }

  analyze(
    projectId: string,
  ): Promise<{ transcript: string; turns: Turn[]; seq: number } & AsrListing> {
    return this.request("POST", `/projects/${projectId}/turns`, {
      activity: "analysis",
    });
  }

  freeform(
    projectId: string,
    content: string,
  ): Promise<{ transcript: string; turns: Turn[]; seq: number }> {
    return this.request("POST", `/projects/${projectId}/turns`, {
      activity: "freeform",
      content,
    });
  }

  asrs(projectId: string): Promise<AsrListing> {
    return this.request("GET", `/projects/${projectId}/asrs`);
  }

  refine(
    projectId: string,
    op: RefinementOp,
  ): Promise<{ seq: number } & AsrListing> {
    return this.request("POST", `/projects/${projectId}/refinements`, op);
  }

  accept(
    projectId: string,
    ids: string[],
  ): Promise<{ seq: number } & AsrListing> {
    return this.request("POST", `/projects/${projectId}/accept`, { ids });
  }

  synthesize(
    projectId: string,
    diagramKind: string,
  ): Promise<{ revision: { id: string }; seq: number }> {
    return this.request("POST", `/projects/${projectId}/synthesize`, {
      diagram_kind: diagramKind,
    });
  }

  modelRevision(projectId: string, revisionId: string): Promise<ModelRevision> {
    return this.request("GET", `/projects/${projectId}/models/${revisionId}`);
  }

  check(
    projectId: string,
    pattern: string,
    element: string,
  ): Promise<CheckResult> {
    return this.request(
      "GET",
      `/projects/${projectId}/checks/${pattern}/${element}`,
    );
  }

  transcripts(projectId: string): Promise<{ transcripts: Transcript[] }> {
    return this.request("GET", `/projects/${projectId}/transcripts`);
  }

  scenarios(projectId: string): Promise<{ scenarios: Scenario[] }> {
    return this.request("GET", `/projects/${projectId}/scenarios`);
  }

  elicitScenarios(
    projectId: string,
    focus: string | null,
  ): Promise<{ scenarios: Scenario[]; seq: number }> {
    return this.request("POST", `/projects/${projectId}/scenarios`, { focus });
  }

  evaluate(
    projectId: string,
  ): Promise<{ report_id: string; seq: number }> {
    return this.request("POST", `/projects/${projectId}/evaluate`);
  }

  report(projectId: string): Promise<ReportPayload> {
    return this.request("GET", `/projects/${projectId}/report`);
  }

  ledger(projectId: string): Promise<LedgerEntry[]> {
    return this.request("GET", `/projects/${projectId}/ledger`);
  }
}
