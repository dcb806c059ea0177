// Pure formatting helpers shared by the renderer and the store.

/** The one serialization used for the DSL panel: rendered bytes equal
 *  JSON.stringify of the server's dsl value, key order as received. */
export function prettyDsl(dsl: unknown): string {
  return JSON.stringify(dsl, null, 2);
}

export function formatScore(value: number | null): string {
  return value === null ? "n/a" : value.toFixed(4);
}

export function formatPercent(fraction: number): string {
  return `${Math.round(fraction * 1000) / 10}%`;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function unescapeHtml(text: string): string {
  return text
    .replaceAll("&quot;", '"')
    .replaceAll("&gt;", ">")
    .replaceAll("&lt;", "<")
    .replaceAll("&amp;", "&");
}
