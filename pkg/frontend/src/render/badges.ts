import { esc } from "./html.js";
import type { CheckResult, LintFinding, Origin, Verdict } from "../types.js";

// Every badge carries the raw payload value in a data attribute, so
// tests (and curious users) can compare the page against the API
// without scraping display text.

export function originBadge(origin: Origin): string {
  const label = { architect: "Architect", bot: "Bot", merged: "Merged" }[
    origin
  ];
  return `<span class="badge origin-${origin}" data-origin="${origin}">${label}</span>`;
}

export function verdictChip(asrId: string, verdict: Verdict): string {
  return (
    `<span class="chip verdict-${verdict}" data-asr="${esc(asrId)}"` +
    ` data-verdict="${verdict}">${verdict}</span>`
  );
}

export function lintFlag(finding: LintFinding): string {
  const term = finding.triggering_term;
  const title = term ? `${finding.detail} ("${term}")` : finding.detail;
  return (
    `<span class="flag" data-lint-asr="${esc(finding.asr_id)}"` +
    ` data-lint-code="${esc(finding.code)}"` +
    ` title="${esc(title)}">${esc(finding.code)}</span>`
  );
}

// Presentation copy for passing checks; which rules a check enforces is
// the server's business, these strings only say why green is green.
const PASS_CONDITIONS: Record<string, string[]> = {
  singleton: [
    "singleton annotation present",
    "no public constructor",
    "public static accessor",
  ],
  cached: ["cached annotation present"],
  data_minimized: ["data_minimized annotation present"],
  encrypted: ["encrypted annotation present"],
};

export function checkBadge(result: CheckResult): string {
  const codes = result.reasons.map((r) => r.code);
  const state = result.passed ? "pass" : "fail";
  const body = result.passed
    ? (PASS_CONDITIONS[result.check] ?? [])
        .map((c) => `<li>${esc(c)}</li>`)
        .join("")
    : result.reasons
        .map(
          (r) =>
            `<li data-reason-code="${esc(r.code)}">${esc(r.code)}` +
            (r.field ? `: ${esc(r.field)}` : "") +
            `</li>`,
        )
        .join("");
  return (
    `<div class="check check-${state}" data-check="${esc(result.check)}"` +
    ` data-element="${esc(result.element)}" data-passed="${result.passed}"` +
    ` data-reason-codes="${esc(codes.join(","))}">` +
    `<span class="check-name">${esc(result.check)}</span>` +
    `<span class="check-element">${esc(result.element)}</span>` +
    `<span class="check-state">${state}</span>` +
    `<ul class="check-conditions">${body}</ul>` +
    `</div>`
  );
}
