// Tiny display helpers shared by the views. Rendering only; every value
// shown comes straight from an API payload.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Fixed 3-decimal rendering for scores; counts stay as-is. */
export function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined) return "-";
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(3);
}

export function labelName(label: number): string {
  return label === 1 ? "trusted" : "untrusted";
}
