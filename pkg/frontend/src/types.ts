// Wire types for the casework review service. Field names and shapes mirror
// the JSON the server actually sends; nothing here is invented client-side.

export interface CaseRecord {
  case_id: string;
  name: string;
  created_at: number;
}

export interface Correction {
  rule_id: string;
  json_path: string;
  replacement: unknown;
  note: string;
}

export interface Hit {
  rank: number;
  doc_id: string;
  fused_score: number;
  lexical_score: number | null;
  semantic_score: number | null;
  best_segment_ordinal: number | null;
}

export interface KnnTraceEntry {
  json_path: string;
  field: string;
  k: number;
  matched: number;
}

export interface Trace {
  expansions: unknown[];
  knns: KnnTraceEntry[];
  candidate_count: number;
}

export interface SessionRecord {
  case_id: string;
  session_id: string;
  parent_session_id: string | null;
  created_at: number;
  query_text: string | null;
  translator: string;
  config: string;
  draft_dsl: unknown | null;
  corrections: Correction[];
  dsl: unknown;
  total: number;
  hits: Hit[];
  trace: Trace;
}

export interface Segment {
  segment_ordinal: number;
  segment_text: string;
  char_span: [number, number];
}

export interface ReviewState {
  reviewed: boolean;
  note: string;
}

export interface DocumentRecord {
  doc_id: string;
  fields: Record<string, unknown>;
  segments: Segment[];
  source_uri: string;
  review: ReviewState;
}

export interface ReviewRecord {
  case_id: string;
  doc_id: string;
  reviewed: boolean;
  note: string;
  updated_at: number;
}

export interface Coverage {
  case_id: string;
  documents_indexed: number;
  documents_retrieved: number;
  documents_reviewed: number;
  retrieved_reviewed: number;
  review_fraction: number;
}

export interface ErrorEnvelope {
  error: {
    code: string;
    message: string;
    details: Record<string, unknown>;
  };
}

export interface QueryBody {
  query_text?: string;
  dsl?: unknown;
  config?: string;
  size?: number;
  from?: number;
  parent_session_id?: string;
}

export const FUSION_CONFIGS = ["lexical_only", "semantic_only", "hybrid"] as const;
export type FusionConfigName = (typeof FUSION_CONFIGS)[number];
