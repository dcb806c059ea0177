// Typed fetch client for the review service. The server is the sole
// authority: this module parses envelopes and never rewrites payloads.

import type {
  CaseRecord,
  Coverage,
  DocumentRecord,
  ErrorEnvelope,
  QueryBody,
  ReviewRecord,
  SessionRecord,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** A non-2xx response, carrying the server's error envelope when present. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: Record<string, unknown>;

  constructor(status: number, envelope: ErrorEnvelope | null) {
    super(envelope ? envelope.error.message : `http ${status}`);
    this.status = status;
    this.code = envelope ? envelope.error.code : "http_error";
    this.details = envelope ? envelope.error.details : {};
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let envelope: ErrorEnvelope | null = null;
      try {
        const parsed = (await response.json()) as ErrorEnvelope;
        if (parsed && typeof parsed === "object" && "error" in parsed) {
          envelope = parsed;
        }
      } catch {
        envelope = null;
      }
      throw new ApiError(response.status, envelope);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string; documents: number }> {
    return this.request("GET", "/healthz");
  }

  createCase(name: string): Promise<CaseRecord> {
    return this.request("POST", "/cases", { name });
  }

  listCases(): Promise<{ cases: CaseRecord[] }> {
    return this.request("GET", "/cases");
  }

  runQuery(caseId: string, body: QueryBody): Promise<SessionRecord> {
    return this.request("POST", `/cases/${caseId}/queries`, body);
  }

  listSessions(caseId: string): Promise<{ sessions: SessionRecord[] }> {
    return this.request("GET", `/cases/${caseId}/sessions`);
  }

  getSession(caseId: string, sessionId: string): Promise<SessionRecord> {
    return this.request("GET", `/cases/${caseId}/sessions/${sessionId}`);
  }

  getDocument(caseId: string, docId: string): Promise<DocumentRecord> {
    return this.request("GET", `/cases/${caseId}/documents/${encodeURIComponent(docId)}`);
  }

  setReview(
    caseId: string,
    docId: string,
    reviewed: boolean,
    note: string,
  ): Promise<ReviewRecord> {
    return this.request(
      "PUT",
      `/cases/${caseId}/documents/${encodeURIComponent(docId)}/review`,
      { reviewed, note },
    );
  }

  getCoverage(caseId: string): Promise<Coverage> {
    return this.request("GET", `/cases/${caseId}/coverage`);
  }
}
