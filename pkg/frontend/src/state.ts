/**
 * Session state machine. Everything here is pure: the UI renders a
 * SessionState and every event maps old state to new state, so a reload
 * can rebuild the exact same view from the service plus saved markings.
 *
 * The whole-batch contract lives here: feedback can only be built once
 * every card is marked, and a document that was ever displayed is never
 * displayed again within the session.
 */
import type { Card, Progress, SessionInfo, Strategy } from "./types.js";

export type Marking = "accept" | "decline";

export interface HistoryPoint {
  iteration: number;
  acceptedTotal: number;
  recall: number | null;
}

export interface SessionState {
  sessionId: string;
  strategy: Strategy;
  batch: Card[];
  markings: Record<string, Marking>; // doc_id -> unsent local marking
  cursor: number; // focused card index for keyboard review
  seenDocs: string[]; // every doc ever displayed, in first-seen order
  history: HistoryPoint[];
  iteration: number;
  progress: Progress;
  conflict: boolean; // a 409 told us this batch was already submitted
  finished: boolean; // service had no further candidates
  error: string | null;
}

function dedupeAgainst(seen: string[], batch: Card[]): { fresh: Card[]; repeats: string[] } {
  const known = new Set(seen);
  const fresh: Card[] = [];
  const repeats: string[] = [];
  for (const card of batch) {
    if (known.has(card.doc_id)) {
      repeats.push(card.doc_id);
    } else {
      known.add(card.doc_id);
      fresh.push(card);
    }
  }
  return { fresh, repeats };
}

export function startSession(
  sessionId: string,
  strategy: Strategy,
  batch: Card[],
  progress: Progress,
): SessionState {
  const { fresh, repeats } = dedupeAgainst([], batch);
  return {
    sessionId,
    strategy,
    batch: fresh,
    markings: {},
    cursor: 0,
    seenDocs: fresh.map((c) => c.doc_id),
    history: [],
    iteration: 0,
    progress,
    conflict: false,
    finished: fresh.length === 0,
    error: repeats.length ? `duplicate cards in batch: ${repeats.join(", ")}` : null,
  };
}

export function mark(state: SessionState, docId: string, marking: Marking): SessionState {
  if (!state.batch.some((c) => c.doc_id === docId)) return state;
  return { ...state, markings: { ...state.markings, [docId]: marking } };
}

export function clearMark(state: SessionState, docId: string): SessionState {
  if (!(docId in state.markings)) return state;
  const markings = { ...state.markings };
  delete markings[docId];
  return { ...state, markings };
}

export function moveCursor(state: SessionState, delta: number): SessionState {
  if (state.batch.length === 0) return state;
  const cursor = Math.min(state.batch.length - 1, Math.max(0, state.cursor + delta));
  return cursor === state.cursor ? state : { ...state, cursor };
}

/** Mark the focused card and advance, the one-key review path. */
export function markAtCursor(state: SessionState, marking: Marking): SessionState {
  const card = state.batch[state.cursor];
  if (!card) return state;
  return moveCursor(mark(state, card.doc_id, marking), 1);
}

export function unresolvedCount(state: SessionState): number {
  return state.batch.filter((c) => !(c.doc_id in state.markings)).length;
}

export function canSubmit(state: SessionState): boolean {
  return (
    state.batch.length > 0 &&
    !state.conflict &&
    !state.finished &&
    unresolvedCount(state) === 0
  );
}

/** Accepted/declined doc ids in batch order; only valid when canSubmit. */
export function feedbackPayload(state: SessionState): { accepted: string[]; declined: string[] } {
  if (!canSubmit(state)) {
    throw new Error(`batch not fully resolved: ${unresolvedCount(state)} cards left`);
  }
  const accepted: string[] = [];
  const declined: string[] = [];
  for (const card of state.batch) {
    (state.markings[card.doc_id] === "accept" ? accepted : declined).push(card.doc_id);
  }
  return { accepted, declined };
}

/** Fold a submitted batch's response into the state. */
export function applyBatch(
  state: SessionState,
  batch: Card[],
  progress: Progress,
): SessionState {
  const { fresh, repeats } = dedupeAgainst(state.seenDocs, batch);
  const iteration = state.iteration + 1;
  return {
    ...state,
    batch: fresh,
    markings: {},
    cursor: 0,
    seenDocs: state.seenDocs.concat(fresh.map((c) => c.doc_id)),
    history: state.history.concat([
      { iteration, acceptedTotal: progress.accepted, recall: progress.recall },
    ]),
    iteration,
    progress,
    conflict: false,
    finished: fresh.length === 0,
    error: repeats.length ? `service re-sent reviewed documents: ${repeats.join(", ")}` : null,
  };
}

export function markConflict(state: SessionState): SessionState {
  return { ...state, conflict: true };
}

export function setError(state: SessionState, message: string | null): SessionState {
  return { ...state, error: message };
}

/**
 * Rebuild from the authoritative session fetch: after a reload, or after a
 * stale-batch conflict. Saved markings are kept only where they still name
 * a card of the current batch; `seenBefore` (normally the union of trace
 * batches) keeps the no-reappear guard intact across reloads.
 */
export function restoreSession(
  info: SessionInfo,
  sessionId: string,
  options: {
    savedMarkings?: Record<string, Marking>;
    history?: HistoryPoint[];
    seenBefore?: string[];
  } = {},
): SessionState {
  const batchDocs = new Set(info.batch.map((c) => c.doc_id));
  const markings: Record<string, Marking> = {};
  for (const [docId, marking] of Object.entries(options.savedMarkings ?? {})) {
    if (batchDocs.has(docId)) markings[docId] = marking;
  }
  const { fresh, repeats } = dedupeAgainst(options.seenBefore ?? [], info.batch);
  return {
    sessionId,
    strategy: info.config.strategy,
    batch: fresh,
    markings,
    cursor: 0,
    seenDocs: (options.seenBefore ?? []).concat(fresh.map((c) => c.doc_id)),
    history: options.history ?? [],
    iteration: info.iteration,
    progress: info.progress,
    conflict: false,
    finished: fresh.length === 0,
    error: repeats.length ? `service re-sent reviewed documents: ${repeats.join(", ")}` : null,
  };
}
