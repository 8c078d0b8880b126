import type { ProjectStatus } from "./types.js";

export const PANELS = [
  "dialog",
  "requirements",
  "model",
  "evaluation",
  "ledger",
] as const;

export type Panel = (typeof PANELS)[number];

export interface ViewState {
  projectId: string;
  panel: Panel;
}

/**
 * Whether a panel can be opened given the project's phase. The rules
 * mirror the server's workflow gates; the server still enforces them,
 * this only keeps dead tabs from being clickable.
 */
export function panelAvailable(status: ProjectStatus, panel: Panel): boolean {
  switch (panel) {
    case "dialog":
    case "ledger":
      return true;
    case "requirements":
      return status.asr_count > 0 || status.phase !== "story_capture";
    case "model":
      return status.model_revisions.length > 0;
    case "evaluation":
      return status.phase === "evaluation" || status.phase === "reported";
  }
}

/** The panel to land on when the current one just became unavailable. */
export function fallbackPanel(status: ProjectStatus, panel: Panel): Panel {
  return panelAvailable(status, panel) ? panel : "dialog";
}
