import { ApiClient, ApiError } from "./api.js";
import type {
  Asr,
  CheckResult,
  LedgerEntry,
  LintFinding,
  ModelRevision,
  ProjectStatus,
  ReportPayload,
  Scenario,
  Story,
  Transcript,
} from "./types.js";

// Annotation keys the server can check; anything else renders as a
// plain annotation without a badge.
export const CHECKABLE = ["singleton", "cached", "data_minimized", "encrypted"];

/** Everything the panels render, assembled from read endpoints only. */
export interface ProjectSnapshot {
  status: ProjectStatus;
  story: Story | null;
  transcripts: Transcript[];
  asrs: Asr[];
  lintFindings: LintFinding[];
  model: ModelRevision | null;
  checks: CheckResult[];
  scenarios: Scenario[];
  report: ReportPayload | null;
  ledger: LedgerEntry[];
}

export async function fetchSnapshot(
  api: ApiClient,
  projectId: string,
): Promise<ProjectSnapshot> {
  const status = await api.status(projectId);

  const story = status.story_imported
    ? (await api.story(projectId)).story
    : null;
  const [{ transcripts }, listing, { scenarios }, ledger] = await Promise.all([
    api.transcripts(projectId),
    api.asrs(projectId),
    api.scenarios(projectId),
    api.ledger(projectId),
  ]);

  const latestRevision = status.model_revisions.at(-1);
  const model = latestRevision
    ? await api.modelRevision(projectId, latestRevision)
    : null;
  const checks = model ? await runChecks(api, projectId, model) : [];

  const report =
    status.reports.length > 0 ? await api.report(projectId) : null;

  return {
    status,
    story,
    transcripts,
    asrs: listing.asrs,
    lintFindings: listing.lint_findings,
    model,
    checks,
    scenarios,
    report,
    ledger,
  };
}

async function runChecks(
  api: ApiClient,
  projectId: string,
  model: ModelRevision,
): Promise<CheckResult[]> {
  const pairs: Array<{ check: string; element: string }> = [];
  for (const element of model.graph.elements) {
    for (const annotation of element.annotations) {
      if (CHECKABLE.includes(annotation.key)) {
        pairs.push({ check: annotation.key, element: element.name });
      }
    }
  }
  return Promise.all(
    pairs.map(({ check, element }) => api.check(projectId, check, element)),
  );
}

/** True when the error is the server saying "nothing there yet". */
export function isMissing(error: unknown): boolean {
  return error instanceof ApiError && error.status === 404;
}
