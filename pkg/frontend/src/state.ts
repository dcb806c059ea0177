// Application state and transitions. All mutation flows through the REST
// client passed in; the store keeps exactly what the server said plus the
// investigator's in-progress edits (typed query, DSL buffer).

import { ApiClient, ApiError } from "./api.js";
import { prettyDsl } from "./format.js";
import type {
  Coverage,
  DocumentRecord,
  FusionConfigName,
  QueryBody,
  SessionRecord,
} from "./types.js";

export interface AppError {
  kind: "api" | "network" | "local_parse";
  message: string;
  code?: string;
  ruleId?: string;
  jsonPath?: string;
  canRetry: boolean;
}

export interface SessionView {
  session: SessionRecord;
  documents: Map<string, DocumentRecord>;
}

export interface AppState {
  caseId: string | null;
  caseName: string;
  queryText: string;
  config: FusionConfigName;
  sessions: SessionRecord[];
  current: SessionView | null;
  dslBuffer: string;
  dslEdited: boolean;
  coverage: Coverage | null;
  error: AppError | null;
  busy: boolean;
}

function initialState(): AppState {
  return {
    caseId: null,
    caseName: "",
    queryText: "",
    config: "hybrid",
    sessions: [],
    current: null,
    dslBuffer: "",
    dslEdited: false,
    coverage: null,
    error: null,
    busy: false,
  };
}

function toAppError(exc: unknown): AppError {
  if (exc instanceof ApiError) {
    return {
      kind: "api",
      message: exc.message,
      code: exc.code,
      ruleId: typeof exc.details.rule_id === "string" ? exc.details.rule_id : undefined,
      jsonPath: typeof exc.details.json_path === "string" ? exc.details.json_path : undefined,
      canRetry: false,
    };
  }
  const message = exc instanceof Error ? exc.message : String(exc);
  return { kind: "network", message, canRetry: true };
}

export class Store {
  readonly state: AppState;
  private readonly api: ApiClient;
  private readonly onChange: () => void;
  private lastAction: (() => Promise<void>) | null = null;

  constructor(api: ApiClient, onChange: () => void = () => {}) {
    this.api = api;
    this.onChange = onChange;
    this.state = initialState();
  }

  private notify(): void {
    this.onChange();
  }

  // -- case lifecycle ----------------------------------------------------------

  async openCase(name: string): Promise<void> {
    const record = await this.api.createCase(name);
    this.state.caseId = record.case_id;
    this.state.caseName = record.name;
    this.state.sessions = [];
    this.state.current = null;
    this.state.coverage = await this.api.getCoverage(record.case_id);
    this.state.error = null;
    this.notify();
  }

  // -- local edits -------------------------------------------------------------

  setQueryText(text: string): void {
    this.state.queryText = text;
    this.notify();
  }

  setConfig(config: FusionConfigName): void {
    this.state.config = config;
    this.notify();
  }

  setDslBuffer(text: string): void {
    this.state.dslBuffer = text;
    const executed = this.state.current
      ? prettyDsl(this.state.current.session.dsl)
      : "";
    this.state.dslEdited = text !== executed;
    this.notify();
  }

  // -- query flows -------------------------------------------------------------

  async submitQuery(): Promise<void> {
    const text = this.state.queryText;
    await this.runBody({ query_text: text, config: this.state.config });
  }

  async executeDsl(): Promise<void> {
    let parsed: unknown;
    try {
      parsed = JSON.parse(this.state.dslBuffer);
    } catch (exc) {
      // structural check only; nothing is sent and the buffer is kept
      this.state.error = {
        kind: "local_parse",
        message: exc instanceof Error ? exc.message : String(exc),
        canRetry: false,
      };
      this.notify();
      return;
    }
    const body: QueryBody = { dsl: parsed, config: this.state.config };
    if (this.state.current) {
      body.parent_session_id = this.state.current.session.session_id;
    }
    await this.runBody(body);
  }

  async retry(): Promise<void> {
    if (this.lastAction) {
      await this.lastAction();
    }
  }

  private async runBody(body: QueryBody): Promise<void> {
    const caseId = this.state.caseId;
    if (caseId === null) {
      return;
    }
    this.lastAction = () => this.runBody(body);
    this.state.busy = true;
    this.notify();
    try {
      const session = await this.api.runQuery(caseId, body);
      const documents = await this.fetchHitDocuments(caseId, session);
      this.state.sessions = [...this.state.sessions, session];
      this.state.current = { session, documents };
      this.state.dslBuffer = prettyDsl(session.dsl);
      this.state.dslEdited = false;
      this.state.error = null;
      this.state.coverage = await this.api.getCoverage(caseId);
      this.lastAction = null;
    } catch (exc) {
      // the typed query and the edited buffer both survive a failure
      this.state.error = toAppError(exc);
      this.state.current = this.state.error.kind === "api" ? null : this.state.current;
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }

  private async fetchHitDocuments(
    caseId: string,
    session: SessionRecord,
  ): Promise<Map<string, DocumentRecord>> {
    const documents = new Map<string, DocumentRecord>();
    const records = await Promise.all(
      session.hits.map((hit) =>
        this.api.getDocument(caseId, hit.doc_id).catch(() => null),
      ),
    );
    for (const record of records) {
      if (record !== null) {
        documents.set(record.doc_id, record);
      }
    }
    return documents;
  }

  async openSession(sessionId: string): Promise<void> {
    const caseId = this.state.caseId;
    if (caseId === null) {
      return;
    }
    const session = await this.api.getSession(caseId, sessionId);
    const documents = await this.fetchHitDocuments(caseId, session);
    this.state.current = { session, documents };
    this.state.dslBuffer = prettyDsl(session.dsl);
    this.state.dslEdited = false;
    this.state.error = null;
    this.notify();
  }

  // -- review ------------------------------------------------------------------

  async toggleReview(docId: string, note?: string): Promise<void> {
    const caseId = this.state.caseId;
    const view = this.state.current;
    if (caseId === null || view === null) {
      return;
    }
    const doc = view.documents.get(docId);
    if (doc === undefined) {
      return;
    }
    const previous = { ...doc.review };
    const next = {
      reviewed: !previous.reviewed,
      note: note !== undefined ? note : previous.note,
    };
    doc.review = next; // optimistic
    this.notify();
    try {
      const record = await this.api.setReview(caseId, docId, next.reviewed, next.note);
      doc.review = { reviewed: record.reviewed, note: record.note };
      this.state.coverage = await this.api.getCoverage(caseId);
      this.state.error = null;
    } catch (exc) {
      doc.review = previous; // reconcile: the server refused
      this.state.error = toAppError(exc);
    }
    this.notify();
  }
}
