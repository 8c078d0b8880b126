import { esc, lines } from "./html.js";
import { lintFlag } from "./badges.js";
import type { Asr, LintFinding } from "../types.js";

export interface RequirementsView {
  asrs: Asr[];
  lintFindings: LintFinding[];
  editing: string | null;
  rowErrors: Record<string, string>;
  busy: boolean;
}

function criterionText(asr: Asr): string {
  if (!asr.criterion) return "";
  const { metric, comparator, value } = asr.criterion;
  return `${metric} ${comparator} ${value}`;
}

function editorRow(asr: Asr): string {
  const c = asr.criterion;
  return lines(
    `<tr class="asr-editor" data-asr-id="${esc(asr.id)}">`,
    `<td colspan="7">`,
    `<form class="asr-edit-form" data-action="save-asr" data-asr-id="${esc(asr.id)}">`,
    `<label>Statement`,
    `<textarea name="statement">${esc(asr.statement)}</textarea></label>`,
    `<fieldset class="criterion-fields"><legend>Criterion</legend>`,
    `<label>Metric <input name="metric" value="${esc(c?.metric ?? "")}"></label>`,
    `<label>Comparator <select name="comparator">` +
      ["le", "ge", "eq"]
        .map(
          (op) =>
            `<option value="${op}"${c?.comparator === op ? " selected" : ""}>${op}</option>`,
        )
        .join("") +
      `</select></label>`,
    `<label>Value <input name="value" type="number" step="any" value="${esc(c?.value ?? "")}"></label>`,
    `</fieldset>`,
    `<label>Tags <input name="tags" value="${esc(asr.tags.join(", "))}"></label>`,
    `<button type="submit">Save</button>`,
    `<button type="button" data-action="cancel-edit">Cancel</button>`,
    `</form>`,
    `</td>`,
    `</tr>`,
  );
}

function displayRow(
  asr: Asr,
  findings: LintFinding[],
  error: string | undefined,
  busy: boolean,
): string {
  const tombstone = asr.status === "rejected";
  const needsCriterion = asr.kind === "quality" && asr.criterion === null;
  const classes = [
    "asr-row",
    tombstone ? "tombstone" : "",
    needsCriterion ? "needs-criterion" : "",
  ]
    .filter(Boolean)
    .join(" ");
  const disabled = busy || tombstone ? " disabled" : "";
  return lines(
    `<tr class="${classes}" data-asr-id="${esc(asr.id)}" data-status="${asr.status}">`,
    `<td class="asr-id">${esc(asr.id)}</td>`,
    `<td class="asr-kind">${esc(asr.kind)}</td>`,
    `<td class="asr-statement">${esc(asr.statement)}</td>`,
    `<td class="asr-criterion" data-criterion="${esc(criterionText(asr))}">${esc(criterionText(asr))}</td>`,
    `<td class="asr-tags">${asr.tags.map((t) => `<span class="tag" data-tag="${esc(t)}">${esc(t)}</span>`).join(" ")}</td>`,
    `<td class="asr-status"><span class="chip status-${asr.status}" data-status="${asr.status}">${asr.status}</span>` +
      findings.map(lintFlag).join("") +
      `</td>`,
    `<td class="asr-actions">` +
      `<input type="checkbox" name="accept" value="${esc(asr.id)}"${disabled}>` +
      `<button type="button" data-action="edit-asr" data-asr-id="${esc(asr.id)}"${disabled}>Edit</button>` +
      `<button type="button" data-action="remove-asr" data-asr-id="${esc(asr.id)}"${disabled}>Remove</button>` +
      `</td>`,
    `</tr>`,
    error
      ? `<tr class="row-error" data-asr-id="${esc(asr.id)}"><td colspan="7">${esc(error)}</td></tr>`
      : "",
  );
}

function addForm(): string {
  return lines(
    `<form class="asr-add-form" data-action="save-new-asr">`,
    `<label>Kind <select name="kind">` +
      ["functionality", "quality", "constraint"]
        .map((k) => `<option value="${k}">${k}</option>`)
        .join("") +
      `</select></label>`,
    `<label>Statement <textarea name="statement"></textarea></label>`,
    `<label>Tags <input name="tags" placeholder="comma separated"></label>`,
    `<button type="submit">Add</button>`,
    `<button type="button" data-action="cancel-edit">Cancel</button>`,
    `</form>`,
  );
}

export function renderRequirements(view: RequirementsView): string {
  const byAsr = new Map<string, LintFinding[]>();
  for (const finding of view.lintFindings) {
    const list = byAsr.get(finding.asr_id) ?? [];
    list.push(finding);
    byAsr.set(finding.asr_id, list);
  }
  const rows = view.asrs.map((asr) =>
    view.editing === asr.id
      ? editorRow(asr)
      : displayRow(
          asr,
          byAsr.get(asr.id) ?? [],
          view.rowErrors[asr.id],
          view.busy,
        ),
  );
  const disabled = view.busy ? " disabled" : "";
  return lines(
    `<div class="panel panel-requirements">`,
    `<form data-action="accept">`,
    `<table class="asr-table">`,
    `<thead><tr><th>Id</th><th>Kind</th><th>Statement</th><th>Criterion</th><th>Tags</th><th>Status</th><th></th></tr></thead>`,
    `<tbody>`,
    ...rows,
    `</tbody>`,
    `</table>`,
    `<button type="submit"${disabled}>Accept selected</button>`,
    `<button type="button" data-action="add-asr"${disabled}>Add requirement</button>`,
    `</form>`,
    view.editing === "+new" ? addForm() : "",
    `</div>`,
  );
}
