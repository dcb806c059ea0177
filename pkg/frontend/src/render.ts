// Pure HTML renderers over the app state. Every function returns a string;
// the browser shell assigns them to container elements. Result text is
// never composed client-side: snippets are verbatim slices of server
// payload strings, so nothing rendered inside a snippet span exists
// anywhere but in a server response.

import { escapeHtml, formatPercent, formatScore, prettyDsl } from "./format.js";
import type { AppState, SessionView } from "./state.js";
import type { Coverage, DocumentRecord, Hit, SessionRecord } from "./types.js";

export const SNIPPET_CHARS = 240;

/** Verbatim slice of the best-matching segment (or the body for purely
 *  lexical hits). A slice keeps the substring-of-payload property. */
export function snippetFor(hit: Hit, doc: DocumentRecord | undefined): string {
  if (doc === undefined) {
    return "";
  }
  if (hit.best_segment_ordinal !== null) {
    const segment = doc.segments[hit.best_segment_ordinal];
    if (segment !== undefined) {
      return segment.segment_text.slice(0, SNIPPET_CHARS);
    }
  }
  const body = doc.fields["body"];
  return typeof body === "string" ? body.slice(0, SNIPPET_CHARS) : "";
}

export function renderCorrections(session: SessionRecord): string {
  if (session.corrections.length === 0) {
    return '<p class="muted">no corrections: draft executed as translated</p>';
  }
  const items = session.corrections
    .map(
      (c) =>
        `<li><span class="badge rule">${escapeHtml(c.rule_id)}</span> ` +
        `<code>${escapeHtml(c.json_path)}</code> ${escapeHtml(c.note)}</li>`,
    )
    .join("");
  return `<ul class="corrections">${items}</ul>`;
}

export function renderDslPanel(state: AppState): string {
  const edited = state.dslEdited ? " edited" : "";
  const label = state.dslEdited ? "edited, not yet executed" : "as executed";
  return (
    `<div class="dsl-label${edited}">${label}</div>` +
    `<textarea class="dsl-buffer${edited}" spellcheck="false">` +
    `${escapeHtml(state.dslBuffer)}</textarea>`
  );
}

export function renderHit(hit: Hit, doc: DocumentRecord | undefined): string {
  const subject = doc && typeof doc.fields["subject"] === "string"
    ? (doc.fields["subject"] as string)
    : "";
  const reviewed = doc?.review.reviewed ?? false;
  const note = doc?.review.note ?? "";
  const snippet = snippetFor(hit, doc);
  return (
    `<li class="hit${reviewed ? " reviewed" : ""}" data-doc="${escapeHtml(hit.doc_id)}">` +
    `<span class="rank">${hit.rank}</span> ` +
    `<span class="doc-id">${escapeHtml(hit.doc_id)}</span> ` +
    `<span class="subject">${escapeHtml(subject)}</span>` +
    `<span class="scores">fused ${formatScore(hit.fused_score)}` +
    ` / lex ${formatScore(hit.lexical_score)}` +
    ` / sem ${formatScore(hit.semantic_score)}</span>` +
    `<span class="snippet">${escapeHtml(snippet)}</span>` +
    `<label><input type="checkbox" class="review-toggle" data-doc="${escapeHtml(hit.doc_id)}"` +
    `${reviewed ? " checked" : ""}> reviewed</label>` +
    (note ? `<span class="note">${escapeHtml(note)}</span>` : "") +
    `</li>`
  );
}

export function renderResults(view: SessionView): string {
  const rows = view.session.hits
    .map((hit) => renderHit(hit, view.documents.get(hit.doc_id)))
    .join("");
  return (
    `<p class="totals">${view.session.total} documents, ` +
    `showing ${view.session.hits.length} ` +
    `(config ${escapeHtml(view.session.config)}, ` +
    `translator ${escapeHtml(view.session.translator)})</p>` +
    `<ol class="results">${rows}</ol>`
  );
}

export function renderError(state: AppState): string {
  const error = state.error;
  if (error === null) {
    return "";
  }
  const parts = [`<div class="error ${error.kind}">`];
  if (error.code !== undefined) {
    parts.push(`<span class="badge code">${escapeHtml(error.code)}</span>`);
  }
  if (error.ruleId !== undefined) {
    parts.push(`<span class="badge rule">${escapeHtml(error.ruleId)}</span>`);
  }
  parts.push(`<span class="message">${escapeHtml(error.message)}</span>`);
  if (error.jsonPath !== undefined) {
    parts.push(`<code class="json-path">at ${escapeHtml(error.jsonPath)}</code>`);
  }
  if (error.canRetry) {
    parts.push('<button class="retry">retry</button>');
  }
  parts.push("</div>");
  return parts.join(" ");
}

export function renderCoverage(coverage: Coverage | null): string {
  if (coverage === null) {
    return "";
  }
  // rendered straight from the coverage payload; never recomputed from
  // whatever subset of documents happens to be on screen
  const percent = formatPercent(coverage.review_fraction);
  return (
    `<span class="counts">${coverage.retrieved_reviewed} of ` +
    `${coverage.documents_retrieved} retrieved documents reviewed (${percent})</span>` +
    `<div class="bar"><div class="bar-fill" style="width: ${percent}"></div></div>`
  );
}

export function renderHistory(state: AppState): string {
  const items = state.sessions
    .map((s) => {
      const label = s.query_text !== null && s.query_text !== "" ? s.query_text : "(dsl)";
      const active = state.current?.session.session_id === s.session_id;
      return (
        `<li class="${active ? "active" : ""}" data-session="${escapeHtml(s.session_id)}">` +
        `${escapeHtml(s.session_id)} ${escapeHtml(label)}</li>`
      );
    })
    .join("");
  return `<ul class="history">${items}</ul>`;
}

export function renderSession(state: AppState): string {
  if (state.error !== null && state.error.kind === "api") {
    // an audit rejection or parse error replaces the results section
    return renderError(state);
  }
  if (state.current === null) {
    return state.error !== null ? renderError(state) : "";
  }
  const view = state.current;
  const head =
    view.session.query_text !== null && view.session.query_text !== ""
      ? `<p class="nl-query">${escapeHtml(view.session.query_text)}</p>`
      : '<p class="nl-query muted">(direct DSL)</p>';
  return (
    (state.error !== null ? renderError(state) : "") +
    head +
    renderCorrections(view.session) +
    renderResults(view)
  );
}

export { prettyDsl };
