// In-memory stand-in for the review service: exact-path routing, a log of
// every request, and a log of every payload served so tests can check that
// rendered text exists somewhere in a server response.

import type { FetchLike } from "../src/api.js";
import type {
  Coverage,
  DocumentRecord,
  SessionRecord,
} from "../src/types.js";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export interface MockResponse {
  status: number;
  body: unknown;
}

type Handler = (body: unknown) => MockResponse;

export class MockServer {
  readonly requests: RecordedRequest[] = [];
  readonly served: unknown[] = [];
  private readonly handlers = new Map<string, Handler>();

  on(method: string, path: string, handler: Handler | MockResponse): void {
    this.handlers.set(
      `${method} ${path}`,
      typeof handler === "function" ? handler : () => handler,
    );
  }

  readonly fetch: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const body =
      typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    this.requests.push({ method, path: input, body });
    const handler = this.handlers.get(`${method} ${input}`);
    if (handler === undefined) {
      throw new Error(`no handler for ${method} ${input}`);
    }
    const result = handler(body);
    this.served.push(result.body);
    return new Response(JSON.stringify(result.body), {
      status: result.status,
      headers: { "Content-Type": "application/json" },
    });
  };

  /** Every string value in every payload this server has sent. */
  servedStrings(): string[] {
    const out: string[] = [];
    const walk = (value: unknown): void => {
      if (typeof value === "string") {
        out.push(value);
      } else if (Array.isArray(value)) {
        value.forEach(walk);
      } else if (value !== null && typeof value === "object") {
        Object.values(value).forEach(walk);
      }
    };
    this.served.forEach(walk);
    return out;
  }

  countRequests(method: string, path: string): number {
    return this.requests.filter((r) => r.method === method && r.path === path)
      .length;
  }
}

// -- fixtures mirroring real service payloads -----------------------------------

export const CASE_ID = "case-0001";

export function caseRecord() {
  return { case_id: CASE_ID, name: "raptor review", created_at: 1000.5 };
}

export function coverage(overrides: Partial<Coverage> = {}): Coverage {
  return {
    case_id: CASE_ID,
    documents_indexed: 4,
    documents_retrieved: 2,
    documents_reviewed: 0,
    retrieved_reviewed: 0,
    review_fraction: 0.0,
    ...overrides,
  };
}

export function hybridDsl(text: string): unknown {
  return {
    from: 0,
    query: {
      bool: {
        should: [
          { match: { body: text } },
          {
            nested: {
              path: "segments",
              query: {
                knn: {
                  "segments.segment_vector": { k: 100, query_text: text },
                },
              },
            },
          },
        ],
      },
    },
    size: 10,
  };
}

export function session(overrides: Partial<SessionRecord> = {}): SessionRecord {
  return {
    case_id: CASE_ID,
    session_id: "s-0001",
    parent_session_id: null,
    created_at: 1001.25,
    query_text: "raptor hedge",
    translator: "rules",
    config: "hybrid",
    draft_dsl: hybridDsl("raptor hedge"),
    corrections: [],
    dsl: hybridDsl("raptor hedge"),
    total: 2,
    hits: [
      {
        rank: 1,
        doc_id: "m1",
        fused_score: 1.0,
        lexical_score: 0.58,
        semantic_score: 0.49,
        best_segment_ordinal: 0,
      },
      {
        rank: 2,
        doc_id: "m2",
        fused_score: 0.31,
        lexical_score: 0.2,
        semantic_score: null,
        best_segment_ordinal: null,
      },
    ],
    trace: { expansions: [], knns: [], candidate_count: 2 },
    ...overrides,
  };
}

export function document(
  docId: string,
  body: string,
  overrides: Partial<DocumentRecord> = {},
): DocumentRecord {
  return {
    doc_id: docId,
    fields: {
      message_id: docId,
      sender: "kim.ward@enron.com",
      recipients: ["jeff.dasovich@enron.com"],
      people: ["Kim Ward", "kim.ward@enron.com"],
      subject: `about ${docId}`,
      body,
      sent_date: "2001-10-02T14:05:00Z",
      folder: "inbox",
      x_headers: ["X-Origin: fixtures"],
    },
    segments: [
      {
        segment_ordinal: 0,
        segment_text: body,
        char_span: [0, body.length],
      },
    ],
    source_uri: `mail/${docId}.eml`,
    review: { reviewed: false, note: "" },
    ...overrides,
  };
}

export function errorEnvelope(
  code: string,
  message: string,
  details: Record<string, unknown> = {},
) {
  return { error: { code, message, details } };
}
