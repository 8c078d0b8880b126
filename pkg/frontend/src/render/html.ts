const REPLACEMENTS: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function esc(value: string | number | null | undefined): string {
  if (value === null || value === undefined) return "";
  return String(value).replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch] ?? ch);
}

/** Join non-empty fragments with newlines; keeps renderers declarative. */
export function lines(...fragments: Array<string | false | null>): string {
  return fragments.filter((f): f is string => Boolean(f)).join("\n");
}
