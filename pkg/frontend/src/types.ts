// Payload shapes of the review service HTTP API.

export type StrategyKind =
  | "none"
  | "rocchio"
  | "sum"
  | "average"
  | "keyword-expansion";

export interface Strategy {
  kind: StrategyKind;
  cumulative?: boolean;
  amplify?: boolean;
  alpha?: number;
  beta?: number;
  keywords_per_doc?: number;
  average_mode?: "sequential" | "global";
}

export interface Card {
  doc_id: string;
  para_id: string;
  snippet: string;
  score: number;
}

export interface Progress {
  accepted: number;
  reviewed: number;
  recall: number | null; // null when the corpus carries no topic labels
}

export interface CreateSessionRequest {
  query_doc_id?: string;
  query_text?: string;
  strategy: Strategy;
}

export interface CreateSessionResponse {
  session_id: string;
  batch: Card[];
  progress: Progress;
}

export interface FeedbackResponse {
  batch: Card[];
  progress: Progress;
}

export interface SessionInfo {
  config: {
    strategy: Required<Strategy>;
    batch_size: number;
    backend: string;
    rank_mode: string;
    ef_search: number;
    query_doc_id: string | null;
    query_text: string | null;
  };
  progress: Progress;
  iteration: number;
  batch: Card[];
}

export interface TraceEntry {
  iteration: number;
  batch: string[];
  accepted: string[];
  declined: string[];
  recall: number | null;
  accepted_total: number;
  reviewed_total: number;
}

export interface TraceResponse {
  session_id: string;
  iterations: TraceEntry[];
}
