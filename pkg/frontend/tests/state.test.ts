import { describe, expect, it } from "vitest";
import {
  applyBatch,
  canSubmit,
  clearMark,
  feedbackPayload,
  mark,
  markAtCursor,
  markConflict,
  moveCursor,
  restoreSession,
  startSession,
  unresolvedCount,
} from "../src/state.js";
import type { SessionState } from "../src/state.js";
import type { Card, Progress, SessionInfo } from "../src/types.js";

function cards(...docIds: string[]): Card[] {
  return docIds.map((docId, i) => ({
    doc_id: docId,
    para_id: `${docId}#0`,
    snippet: `text of ${docId}`,
    score: 1 - i * 0.05,
  }));
}

const ZERO: Progress = { accepted: 0, reviewed: 0, recall: 0 };

function fresh(...docIds: string[]): SessionState {
  return startSession("s1", { kind: "sum", cumulative: true }, cards(...docIds), ZERO);
}

describe("whole-batch submission contract", () => {
  it("blocks submission until every card is marked", () => {
    let state = fresh("d1", "d2", "d3");
    expect(canSubmit(state)).toBe(false);
    expect(unresolvedCount(state)).toBe(3);

    state = mark(state, "d1", "accept");
    state = mark(state, "d2", "decline");
    expect(canSubmit(state)).toBe(false);
    expect(() => feedbackPayload(state)).toThrow(/not fully resolved/);

    state = mark(state, "d3", "accept");
    expect(canSubmit(state)).toBe(true);
    expect(feedbackPayload(state)).toEqual({
      accepted: ["d1", "d3"],
      declined: ["d2"],
    });
  });

  it("keeps payload in batch order regardless of marking order", () => {
    let state = fresh("d1", "d2", "d3", "d4");
    for (const doc of ["d4", "d2", "d1", "d3"]) state = mark(state, doc, "accept");
    expect(feedbackPayload(state).accepted).toEqual(["d1", "d2", "d3", "d4"]);
  });

  it("remarking a card overwrites, clearing reopens the batch", () => {
    let state = fresh("d1");
    state = mark(state, "d1", "accept");
    state = mark(state, "d1", "decline");
    expect(feedbackPayload(state)).toEqual({ accepted: [], declined: ["d1"] });
    state = clearMark(state, "d1");
    expect(canSubmit(state)).toBe(false);
  });

  it("ignores markings for documents not in the batch", () => {
    const state = mark(fresh("d1"), "ghost", "accept");
    expect(state.markings).toEqual({});
  });
});

describe("no-reappear invariant", () => {
  it("never displays a document from an earlier batch again", () => {
    let state = fresh("d1", "d2");
    state = mark(mark(state, "d1", "accept"), "d2", "decline");
    state = applyBatch(state, cards("d2", "d3"), { accepted: 1, reviewed: 2, recall: 0.5 });
    expect(state.batch.map((c) => c.doc_id)).toEqual(["d3"]);
    expect(state.error).toMatch(/d2/);
    expect(state.seenDocs).toEqual(["d1", "d2", "d3"]);
  });

  it("clean batches pass through untouched", () => {
    let state = fresh("d1");
    state = applyBatch(state, cards("d2", "d3"), ZERO);
    expect(state.batch.map((c) => c.doc_id)).toEqual(["d2", "d3"]);
    expect(state.error).toBeNull();
    expect(state.iteration).toBe(1);
  });

  it("an empty next batch finishes the session", () => {
    let state = fresh("d1");
    state = applyBatch(state, [], { accepted: 1, reviewed: 1, recall: 1 });
    expect(state.finished).toBe(true);
    expect(canSubmit(state)).toBe(false);
  });
});

describe("history for the progress chart", () => {
  it("appends one point per applied batch", () => {
    let state = fresh("d1");
    state = applyBatch(state, cards("d2"), { accepted: 1, reviewed: 1, recall: null });
    state = applyBatch(state, cards("d3"), { accepted: 2, reviewed: 2, recall: null });
    expect(state.history).toEqual([
      { iteration: 1, acceptedTotal: 1, recall: null },
      { iteration: 2, acceptedTotal: 2, recall: null },
    ]);
  });
});

describe("keyboard cursor", () => {
  it("marks the focused card and advances", () => {
    let state = fresh("d1", "d2", "d3");
    state = markAtCursor(state, "accept");
    state = markAtCursor(state, "decline");
    expect(state.markings).toEqual({ d1: "accept", d2: "decline" });
    expect(state.cursor).toBe(2);
  });

  it("cursor clamps to the batch bounds", () => {
    let state = fresh("d1", "d2");
    state = moveCursor(state, -5);
    expect(state.cursor).toBe(0);
    state = moveCursor(state, 7);
    expect(state.cursor).toBe(1);
  });
});

describe("conflict and restore", () => {
  const info: SessionInfo = {
    config: {
      strategy: {
        kind: "sum",
        cumulative: true,
        amplify: false,
        alpha: 0.5,
        beta: 0.5,
        keywords_per_doc: 3,
        average_mode: "sequential",
      },
      batch_size: 10,
      backend: "exact",
      rank_mode: "first",
      ef_search: 100,
      query_doc_id: "q1",
      query_text: null,
    },
    progress: { accepted: 3, reviewed: 10, recall: 0.3 },
    iteration: 1,
    batch: cards("d7", "d8"),
  };

  it("a stale-batch conflict blocks submission until refreshed", () => {
    let state = fresh("d1");
    state = mark(state, "d1", "accept");
    state = markConflict(state);
    expect(canSubmit(state)).toBe(false);
    expect(state.conflict).toBe(true);
  });

  it("restore rebuilds the unresolved batch and keeps only valid markings", () => {
    const state = restoreSession(info, "s1", {
      savedMarkings: { d7: "accept", gone: "decline" },
      history: [{ iteration: 1, acceptedTotal: 3, recall: 0.3 }],
      seenBefore: ["d1", "d2"],
    });
    expect(state.batch.map((c) => c.doc_id)).toEqual(["d7", "d8"]);
    expect(state.markings).toEqual({ d7: "accept" });
    expect(state.iteration).toBe(1);
    expect(state.seenDocs).toEqual(["d1", "d2", "d7", "d8"]);
    expect(state.conflict).toBe(false);
  });

  it("restore drops a current card that the trace already showed", () => {
    const state = restoreSession(info, "s1", { seenBefore: ["d7"] });
    expect(state.batch.map((c) => c.doc_id)).toEqual(["d8"]);
    expect(state.error).toMatch(/d7/);
  });
});
