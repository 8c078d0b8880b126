import { esc, lines } from "./html.js";
import { checkBadge } from "./badges.js";
import type { CheckResult, GraphElement, ModelRevision } from "../types.js";

export interface ModelView {
  revisionIds: string[];
  model: ModelRevision;
  checks: CheckResult[];
  syntaxError: { line: number; expected: string } | null;
  busy: boolean;
}

function memberLine(member: GraphElement["members"][number]): string {
  const marker = member.visibility === "public" ? "+" : "-";
  const suffix = member.kind === "operation" ? "()" : "";
  const staticPrefix = member.static ? "{static} " : "";
  return (
    `<li class="member member-${member.kind}" data-member="${esc(member.name)}">` +
    esc(`${staticPrefix}${marker}${member.name}${suffix}`) +
    `</li>`
  );
}

function elementCard(element: GraphElement): string {
  return lines(
    `<article class="element element-${element.kind}" data-element="${esc(element.name)}">`,
    `<header><span class="element-kind">${esc(element.kind)}</span> <strong>${esc(element.name)}</strong></header>`,
    element.annotations.length > 0
      ? `<p class="annotations">` +
          element.annotations
            .map(
              (a) =>
                `<span class="annotation" data-annotation="${esc(a.key)}">&laquo;${esc(a.key)}${a.note ? `: ${esc(a.note)}` : ""}&raquo;</span>`,
            )
            .join(" ") +
          `</p>`
      : "",
    element.members.length > 0
      ? `<ul class="members">${element.members.map(memberLine).join("")}</ul>`
      : "",
    `</article>`,
  );
}

// A box-and-line sketch of the parsed structure. Purely presentational:
// it draws what the server parsed and feeds nothing back.
function sketch(model: ModelRevision): string {
  const elements = model.graph.elements;
  if (elements.length === 0) return "";
  const perRow = 3;
  const boxW = 170;
  const boxH = 48;
  const gapX = 60;
  const gapY = 70;
  const position = new Map<string, { x: number; y: number }>();
  elements.forEach((element, i) => {
    position.set(element.name, {
      x: (i % perRow) * (boxW + gapX) + 10,
      y: Math.floor(i / perRow) * (boxH + gapY) + 10,
    });
  });
  const rows = Math.ceil(elements.length / perRow);
  const width = Math.min(elements.length, perRow) * (boxW + gapX) + 20;
  const height = rows * (boxH + gapY) + 20;

  const boxes = elements.map((element) => {
    const p = position.get(element.name)!;
    return (
      `<g><rect x="${p.x}" y="${p.y}" width="${boxW}" height="${boxH}" rx="4" class="sketch-box"></rect>` +
      `<text x="${p.x + boxW / 2}" y="${p.y + boxH / 2 + 4}" text-anchor="middle">${esc(element.name)}</text></g>`
    );
  });
  const edges = model.graph.relations.map((relation) => {
    const a = position.get(relation.source);
    const b = position.get(relation.target);
    if (!a || !b) return "";
    const dashed =
      relation.kind === "dependency" || relation.kind === "realization";
    return (
      `<line x1="${a.x + boxW / 2}" y1="${a.y + boxH / 2}"` +
      ` x2="${b.x + boxW / 2}" y2="${b.y + boxH / 2}"` +
      ` class="sketch-edge edge-${relation.kind}"${dashed ? ' stroke-dasharray="6 4"' : ""}></line>`
    );
  });
  return lines(
    `<svg class="sketch" viewBox="0 0 ${width} ${height}" role="img" aria-label="diagram sketch">`,
    ...edges,
    ...boxes,
    `</svg>`,
  );
}

export function renderModel(view: ModelView): string {
  const disabled = view.busy ? " disabled" : "";
  const { model } = view;
  return lines(
    `<div class="panel panel-model">`,
    view.syntaxError
      ? `<div class="banner banner-error" data-error-line="${view.syntaxError.line}">` +
        `Synthesis failed at line ${view.syntaxError.line}: expected ${esc(view.syntaxError.expected)}. No revision was created.` +
        `</div>`
      : "",
    `<div class="model-toolbar">`,
    `<label>Revision <select data-action="select-revision">` +
      view.revisionIds
        .map(
          (id) =>
            `<option value="${esc(id)}"${id === model.id ? " selected" : ""}>${esc(id)}</option>`,
        )
        .join("") +
      `</select></label>`,
    `<button type="button" data-action="synthesize" data-kind="${esc(model.diagram_kind)}"${disabled}>Re-synthesize</button>`,
    `</div>`,
    sketch(model),
    `<section class="structure">`,
    ...model.graph.elements.map(elementCard),
    model.graph.relations.length > 0
      ? `<ul class="relations">` +
        model.graph.relations
          .map(
            (r) =>
              `<li data-relation="${esc(`${r.source}->${r.target}`)}">${esc(r.source)} ${esc(r.kind)} ${esc(r.target)}${r.label ? ` : ${esc(r.label)}` : ""}</li>`,
          )
          .join("") +
        `</ul>`
      : "",
    `</section>`,
    `<section class="checks">`,
    `<h3>Checks</h3>`,
    view.checks.length === 0 ? `<p class="empty">No checkable annotations in this revision.</p>` : "",
    ...view.checks.map(
      (result) =>
        checkBadge(result) +
        `<button type="button" data-action="recheck" data-check="${esc(result.check)}" data-element="${esc(result.element)}"${disabled}>Re-check</button>`,
    ),
    `</section>`,
    `<details class="script"><summary>Script</summary>`,
    `<pre class="uml-script">${esc(model.script)}</pre>`,
    `</details>`,
    `</div>`,
  );
}
