// Wire types for the coarch HTTP API. Field names and enum values match
// the server's JSON exactly; see docs/api/openapi.json in the repo root.

export type Phase =
  | "story_capture"
  | "analysis"
  | "synthesis"
  | "evaluation"
  | "reported";

export type Origin = "architect" | "bot" | "merged";

export interface ProjectStatus {
  id: string;
  phase: Phase;
  revision: number;
  story_imported: boolean;
  asr_count: number;
  model_revisions: string[];
  scenario_count: number;
  reports: string[];
  transcripts: string[];
  ledger_length: number;
}

export interface ScenarioSketch {
  title: string;
  description: string;
}

export interface Story {
  schema_version: string;
  id: string;
  narrative: string;
  scenarios: ScenarioSketch[];
  domain_tags: string[];
}

export interface Criterion {
  metric: string;
  comparator: "le" | "ge" | "eq";
  value: number;
}

export type AsrKind = "functionality" | "quality" | "constraint";
export type AsrStatus = "proposed" | "refined" | "accepted" | "rejected";

export interface Asr {
  schema_version: string;
  id: string;
  kind: AsrKind;
  statement: string;
  criterion: Criterion | null;
  tags: string[];
  status: AsrStatus;
}

export interface LintFinding {
  asr_id: string;
  code: string;
  detail: string;
  triggering_term: string | null;
}

export interface AsrListing {
  asrs: Asr[];
  lint_findings: LintFinding[];
}

export interface Turn {
  id: number;
  role: "architect" | "bot";
  content: string;
  activity: string;
  created_at: string;
}

export interface Transcript {
  id: string;
  turns: Turn[];
}

export interface Member {
  name: string;
  kind: "attribute" | "operation";
  visibility: "public" | "private";
  static: boolean;
}

export interface Annotation {
  key: string;
  note: string | null;
}

export interface GraphElement {
  name: string;
  kind: "class" | "component" | "interface";
  members: Member[];
  annotations: Annotation[];
}

export interface GraphRelation {
  source: string;
  target: string;
  kind: "association" | "dependency" | "realization" | "composition";
  label: string | null;
}

export interface ModelGraph {
  schema_version: string;
  diagram_kind: string;
  elements: GraphElement[];
  relations: GraphRelation[];
}

export interface ModelRevision {
  id: string;
  diagram_kind: string;
  script: string;
  graph: ModelGraph;
}

export interface CheckReason {
  code: string;
  field: string | null;
}

export interface CheckResult {
  element: string;
  check: string;
  passed: boolean;
  reasons: CheckReason[];
}

export type Classification = "direct" | "indirect" | "unclassified";

export interface Scenario {
  schema_version: string;
  id: string;
  text: string;
  kind: "individual" | "interacting";
  classification: Classification;
  affected_elements: string[];
  source_asrs: string[];
}

export type Verdict = "satisfied" | "partial" | "unsatisfied" | "unknown";

export interface MatrixMark {
  scenario_id: string;
  element: string;
  marker: "D" | "I";
}

export interface Report {
  schema_version: string;
  per_asr_verdicts: Record<string, Verdict>;
  interaction_matrix: MatrixMark[];
  hotspots: string[];
  summary: string;
}

export interface ReportPayload {
  report_id: string;
  report: Report;
  markdown: string;
}

export interface ArtifactRef {
  kind: string;
  id: string;
  field: string | null;
}

export interface LedgerEntry {
  schema_version: string;
  seq: number;
  artifact_ref: ArtifactRef;
  origin: Origin;
  turn_ref: number | null;
  timestamp: string;
  prev_digest: string;
  digest: string;
}

export interface RefinementOp {
  op: "update" | "add" | "remove";
  target?: string;
  payload?: {
    kind?: AsrKind;
    statement?: string;
    criterion?: Criterion | null;
    tags?: string[];
  };
}

export interface ErrorPayload {
  code: string;
  message: string;
  detail?: unknown;
}
