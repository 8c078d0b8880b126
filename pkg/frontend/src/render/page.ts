import { esc, lines } from "./html.js";
import { renderDialog, renderStoryForm, type PendingTurn } from "./dialog.js";
import { renderRequirements } from "./requirements.js";
import { renderModel } from "./model.js";
import { renderEvaluation } from "./evaluation.js";
import { renderLedger } from "./ledger.js";
import { PANELS, panelAvailable, type Panel } from "../state.js";
import type { ProjectSnapshot } from "../snapshot.js";

export interface PageView {
  snapshot: ProjectSnapshot;
  panel: Panel;
  pending: PendingTurn[];
  editing: string | null;
  rowErrors: Record<string, string>;
  banner: string | null;
  syntaxError: { line: number; expected: string } | null;
  streamState: "open" | "retrying" | "stopped" | "off";
  busy: boolean;
}

const PANEL_LABELS: Record<Panel, string> = {
  dialog: "Dialog",
  requirements: "Requirements",
  model: "Model",
  evaluation: "Evaluation",
  ledger: "Ledger",
};

function tabs(view: PageView): string {
  const items = PANELS.map((panel) => {
    const available = panelAvailable(view.snapshot.status, panel);
    const active = panel === view.panel ? " active" : "";
    return (
      `<button type="button" class="tab${active}" data-action="open-panel"` +
      ` data-panel="${panel}"${available ? "" : " disabled"}>` +
      PANEL_LABELS[panel] +
      `</button>`
    );
  });
  return `<nav class="tabs">${items.join("")}</nav>`;
}

function activePanel(view: PageView): string {
  const { snapshot } = view;
  switch (view.panel) {
    case "dialog":
      if (!snapshot.status.story_imported) {
        return renderStoryForm(snapshot.status.id, view.busy);
      }
      return renderDialog(snapshot.transcripts, view.pending, view.busy);
    case "requirements":
      return renderRequirements({
        asrs: snapshot.asrs,
        lintFindings: snapshot.lintFindings,
        editing: view.editing,
        rowErrors: view.rowErrors,
        busy: view.busy,
      });
    case "model":
      if (!snapshot.model) return `<p class="empty">No model revision yet.</p>`;
      return renderModel({
        revisionIds: snapshot.status.model_revisions,
        model: snapshot.model,
        checks: snapshot.checks,
        syntaxError: view.syntaxError,
        busy: view.busy,
      });
    case "evaluation":
      return renderEvaluation({
        scenarios: snapshot.scenarios,
        report: snapshot.report,
        busy: view.busy,
      });
    case "ledger":
      return renderLedger(snapshot.ledger, view.streamState);
  }
}

export function renderPage(view: PageView): string {
  const status = view.snapshot.status;
  return lines(
    `<div class="console" data-project="${esc(status.id)}" data-phase="${status.phase}">`,
    `<header class="masthead">`,
    `<h1>${esc(status.id)}</h1>`,
    `<span class="chip phase" data-phase="${status.phase}">${status.phase}</span>`,
    `<span class="revision">rev ${status.revision}</span>`,
    `</header>`,
    view.banner
      ? `<div class="banner banner-error" role="alert">${esc(view.banner)}` +
        `<button type="button" data-action="dismiss-banner">Dismiss</button></div>`
      : "",
    tabs(view),
    `<main>`,
    activePanel(view),
    `</main>`,
    `</div>`,
  );
}
