import { describe, expect, it } from "vitest";

import { escapeHtml, formatPercent, formatScore, unescapeHtml } from "../src/format.js";
import { SNIPPET_CHARS, renderCoverage, renderHit, snippetFor } from "../src/render.js";
import { coverage, document, session } from "./helpers.js";

describe("formatting", () => {
  it("escapes markup and round-trips through unescape", () => {
    const raw = 'a <b> & "c"';
    expect(escapeHtml(raw)).toBe("a &lt;b&gt; &amp; &quot;c&quot;");
    expect(unescapeHtml(escapeHtml(raw))).toBe(raw);
  });

  it("formats missing channel scores as n/a", () => {
    expect(formatScore(null)).toBe("n/a");
    expect(formatScore(0.5)).toBe("0.5000");
  });

  it("renders fractions as percentages", () => {
    expect(formatPercent(0.5)).toBe("50%");
    expect(formatPercent(2 / 3)).toBe("66.7%");
    expect(formatPercent(0)).toBe("0%");
  });
});

describe("snippets", () => {
  it("slices the best-matching segment verbatim", () => {
    const hit = session().hits[0];
    const doc = document("m1", "short body");
    expect(snippetFor(hit, doc)).toBe("short body");
  });

  it("caps the slice without appending anything", () => {
    const long = "word ".repeat(200).trim();
    const hit = session().hits[0];
    const doc = document("m1", long);
    const snippet = snippetFor(hit, doc);
    expect(snippet.length).toBe(SNIPPET_CHARS);
    expect(long.startsWith(snippet)).toBe(true);
  });

  it("falls back to the body when the hit has no best segment", () => {
    const lexicalHit = session().hits[1];
    expect(lexicalHit.best_segment_ordinal).toBeNull();
    const doc = document("m2", "body only match");
    expect(snippetFor(lexicalHit, doc)).toBe("body only match");
  });

  it("renders an empty snippet when the document is not loaded", () => {
    const hit = session().hits[0];
    expect(snippetFor(hit, undefined)).toBe("");
  });
});

describe("hit rows", () => {
  it("shows rank, scores, and the review state", () => {
    const hit = session().hits[0];
    const doc = document("m1", "The raptor hedge unwound.");
    doc.review = { reviewed: true, note: "seen it" };

    const html = renderHit(hit, doc);

    expect(html).toContain('class="hit reviewed"');
    expect(html).toContain('<span class="rank">1</span>');
    expect(html).toContain("fused 1.0000");
    expect(html).toContain("sem 0.4900");
    expect(html).toContain(" checked");
    expect(html).toContain("seen it");
  });

  it("marks missing channels instead of inventing scores", () => {
    const hit = session().hits[1];
    const html = renderHit(hit, document("m2", "x"));
    expect(html).toContain("sem n/a");
  });
});

describe("coverage panel", () => {
  it("renders nothing before a case has coverage", () => {
    expect(renderCoverage(null)).toBe("");
  });

  it("uses only the numbers the server sent", () => {
    // deliberately inconsistent numbers: the panel must echo, not recompute
    const html = renderCoverage(
      coverage({
        documents_retrieved: 57,
        retrieved_reviewed: 19,
        review_fraction: 1 / 3,
      }),
    );
    expect(html).toContain("19 of 57 retrieved documents reviewed (33.3%)");
    expect(html).toContain('style="width: 33.3%"');
  });
});
