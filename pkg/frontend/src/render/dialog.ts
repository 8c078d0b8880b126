import { esc, lines } from "./html.js";
import { originBadge } from "./badges.js";
import type { Origin, Transcript, Turn } from "../types.js";

export interface PendingTurn {
  content: string;
}

function roleOrigin(role: Turn["role"]): Origin {
  return role === "architect" ? "architect" : "bot";
}

function renderTurn(turn: Turn): string {
  return (
    `<li class="turn turn-${turn.role}" data-role="${turn.role}"` +
    ` data-turn-id="${turn.id}" data-activity="${esc(turn.activity)}">` +
    originBadge(roleOrigin(turn.role)) +
    `<span class="activity-tag">${esc(turn.activity)}</span>` +
    `<p class="turn-content">${esc(turn.content)}</p>` +
    `</li>`
  );
}

function renderTranscript(transcript: Transcript): string {
  return lines(
    `<section class="transcript" data-transcript="${esc(transcript.id)}">`,
    `<h3>${esc(transcript.id)}</h3>`,
    `<ol class="turns">`,
    ...transcript.turns.map(renderTurn),
    `</ol>`,
    `</section>`,
  );
}

function renderPending(pending: PendingTurn, index: number): string {
  return (
    `<li class="turn turn-architect pending" data-pending="true"` +
    ` data-pending-index="${index}">` +
    originBadge("architect") +
    `<span class="activity-tag">freeform</span>` +
    `<p class="turn-content">${esc(pending.content)}</p>` +
    `<span class="pending-note">sending</span>` +
    `</li>`
  );
}

export function renderStoryForm(projectId: string, busy: boolean): string {
  const disabled = busy ? " disabled" : "";
  return lines(
    `<form class="story-form" data-action="import-story">`,
    `<h3>Import the architecture story for ${esc(projectId)}</h3>`,
    `<label>Narrative <textarea name="narrative" rows="6"></textarea></label>`,
    `<label>Scenarios, one per line as "Title: description"`,
    `<textarea name="scenarios" rows="4"></textarea></label>`,
    `<label>Tags <input name="tags" placeholder="comma separated"></label>`,
    `<button type="submit"${disabled}>Import story</button>`,
    `</form>`,
  );
}

export function renderDialog(
  transcripts: Transcript[],
  pending: PendingTurn[],
  busy: boolean,
): string {
  const disabled = busy ? " disabled" : "";
  return lines(
    `<div class="panel panel-dialog">`,
    transcripts.length === 0 && pending.length === 0
      ? `<p class="empty">No conversation yet. Ask something, or run analysis once a story is imported.</p>`
      : "",
    ...transcripts.map(renderTranscript),
    pending.length > 0
      ? lines(
          `<ol class="turns pending-turns">`,
          ...pending.map(renderPending),
          `</ol>`,
        )
      : "",
    `<form class="turn-form" data-action="freeform">`,
    `<textarea name="content" placeholder="Message the bot"${disabled}></textarea>`,
    `<button type="submit"${disabled}>Send</button>`,
    `<button type="button" data-action="analyze"${disabled}>Run analysis</button>`,
    `</form>`,
    `</div>`,
  );
}
