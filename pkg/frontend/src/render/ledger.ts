import { esc, lines } from "./html.js";
import { originBadge } from "./badges.js";
import type { LedgerEntry } from "../types.js";

function entryRow(entry: LedgerEntry): string {
  const ref = entry.artifact_ref;
  const target = ref.field ? `${ref.id} (${ref.field})` : ref.id;
  return (
    `<tr class="ledger-entry" data-seq="${entry.seq}" data-origin="${entry.origin}">` +
    `<td class="seq">${entry.seq}</td>` +
    `<td>${originBadge(entry.origin)}</td>` +
    `<td class="artifact"><span class="artifact-kind">${esc(ref.kind)}</span> ${esc(target)}</td>` +
    `<td class="turn-ref">${entry.turn_ref ?? ""}</td>` +
    `<td class="timestamp">${esc(entry.timestamp)}</td>` +
    `<td class="digest" title="${esc(entry.digest)}">${esc(entry.digest.slice(0, 12))}</td>` +
    `</tr>`
  );
}

export function renderLedger(
  entries: LedgerEntry[],
  streamState: "open" | "retrying" | "stopped" | "off",
): string {
  return lines(
    `<div class="panel panel-ledger">`,
    `<p class="stream-state" data-stream="${streamState}">stream: ${streamState}</p>`,
    `<table class="ledger">`,
    `<thead><tr><th>#</th><th>Origin</th><th>Artifact</th><th>Turn</th><th>Time</th><th>Digest</th></tr></thead>`,
    `<tbody>`,
    ...entries.map(entryRow),
    `</tbody>`,
    `</table>`,
    `</div>`,
  );
}
