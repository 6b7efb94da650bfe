import { ApiError, ReviewApi, isStaleBatch } from "./api.js";
import { progressChartSvg } from "./chart.js";
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
  setError,
  startSession,
  unresolvedCount,
} from "./state.js";
import type { HistoryPoint, Marking, SessionState } from "./state.js";
import type { CreateSessionRequest, TraceEntry } from "./types.js";

const STORAGE_KEY = "review-ui:v1";

interface SavedSession {
  sessionId: string;
  markings: Record<string, Marking>;
}

function historyFromTrace(entries: TraceEntry[]): HistoryPoint[] {
  return entries.map((e) => ({
    iteration: e.iteration,
    acceptedTotal: e.accepted_total,
    recall: e.recall,
  }));
}

function seenFromTrace(entries: TraceEntry[]): string[] {
  const seen: string[] = [];
  for (const entry of entries) seen.push(...entry.batch);
  return seen;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ReviewApp {
  private state: SessionState | null = null;

  constructor(
    private api: ReviewApi,
    private root: HTMLElement,
    private storage: Storage,
  ) {}

  async start(req: CreateSessionRequest): Promise<void> {
    const res = await this.api.createSession(req);
    this.state = startSession(res.session_id, req.strategy, res.batch, res.progress);
    this.persist();
    this.render();
  }

  /** Pick up the stored session after a reload; false when none is stored. */
  async resume(): Promise<boolean> {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return false;
    let saved: SavedSession;
    try {
      saved = JSON.parse(raw);
    } catch {
      this.storage.removeItem(STORAGE_KEY);
      return false;
    }
    try {
      const info = await this.api.getSession(saved.sessionId);
      const trace = await this.api.getTrace(saved.sessionId);
      this.state = restoreSession(info, saved.sessionId, {
        savedMarkings: saved.markings,
        history: historyFromTrace(trace.iterations),
        seenBefore: seenFromTrace(trace.iterations),
      });
      this.render();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.storage.removeItem(STORAGE_KEY);
        return false;
      }
      throw err;
    }
  }

  async endSession(): Promise<void> {
    if (this.state) {
      await this.api.deleteSession(this.state.sessionId).catch(() => undefined);
    }
    this.state = null;
    this.storage.removeItem(STORAGE_KEY);
    this.render();
  }

  private update(next: SessionState): void {
    this.state = next;
    this.persist();
    this.render();
  }

  private persist(): void {
    if (!this.state) return;
    const saved: SavedSession = {
      sessionId: this.state.sessionId,
      markings: this.state.markings,
    };
    this.storage.setItem(STORAGE_KEY, JSON.stringify(saved));
  }

  private async submit(): Promise<void> {
    if (!this.state || !canSubmit(this.state)) return;
    const { accepted, declined } = feedbackPayload(this.state);
    try {
      const res = await this.api.submitFeedback(this.state.sessionId, accepted, declined);
      this.update(applyBatch(this.state, res.batch, res.progress));
    } catch (err) {
      if (isStaleBatch(err)) {
        this.update(markConflict(this.state));
      } else if (err instanceof ApiError) {
        this.update(setError(this.state, `${err.code}: ${err.message}`));
      } else {
        throw err;
      }
    }
  }

  /** Conflict recovery: drop local markings, trust the service. */
  private async refresh(): Promise<void> {
    if (!this.state) return;
    const info = await this.api.getSession(this.state.sessionId);
    const trace = await this.api.getTrace(this.state.sessionId);
    this.update(
      restoreSession(info, this.state.sessionId, {
        history: historyFromTrace(trace.iterations),
        seenBefore: seenFromTrace(trace.iterations),
      }),
    );
  }

  handleKey(event: KeyboardEvent): void {
    if (!this.state) return;
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "SELECT")) return;
    switch (event.key) {
      case "j":
      case "ArrowDown":
        this.update(moveCursor(this.state, 1));
        break;
      case "k":
      case "ArrowUp":
        this.update(moveCursor(this.state, -1));
        break;
      case "a":
        this.update(markAtCursor(this.state, "accept"));
        break;
      case "d":
        this.update(markAtCursor(this.state, "decline"));
        break;
      case "u": {
        const card = this.state.batch[this.state.cursor];
        if (card) this.update(clearMark(this.state, card.doc_id));
        break;
      }
      case "Enter":
        void this.submit();
        break;
      default:
        return;
    }
    event.preventDefault();
  }

  render(): void {
    this.root.replaceChildren();
    const state = this.state;
    if (!state) {
      this.root.appendChild(el("p", "hint", "Create a session to start reviewing."));
      return;
    }

    const head = el("div", "session-head");
    head.appendChild(el("span", "session-id", `session ${state.sessionId.slice(0, 8)}`));
    head.appendChild(
      el("span", "strategy-tag", describeStrategy(state.strategy)),
    );
    const progress = el("span", "progress");
    const recall =
      state.progress.recall === null
        ? ""
        : `, recall ${(state.progress.recall * 100).toFixed(1)}%`;
    progress.textContent =
      `iteration ${state.iteration}: ${state.progress.accepted} accepted / ` +
      `${state.progress.reviewed} reviewed${recall}`;
    head.appendChild(progress);
    this.root.appendChild(head);

    if (state.conflict) {
      const banner = el("div", "banner conflict");
      banner.appendChild(
        el("span", undefined, "This batch was already submitted elsewhere."),
      );
      const btn = el("button", undefined, "Refresh");
      btn.addEventListener("click", () => void this.refresh());
      banner.appendChild(btn);
      this.root.appendChild(banner);
    }
    if (state.error) {
      this.root.appendChild(el("div", "banner error", state.error));
    }

    const chart = el("div", "chart-box");
    chart.innerHTML = progressChartSvg(state.history);
    this.root.appendChild(chart);

    if (state.finished) {
      this.root.appendChild(
        el("p", "hint", "No more candidates to review in this session."),
      );
      return;
    }

    const list = el("ul", "cards");
    state.batch.forEach((card, index) => {
      const item = el("li", "card");
      if (index === state.cursor) item.classList.add("focused");
      const marking = state.markings[card.doc_id];
      if (marking) item.classList.add(marking);

      const meta = el("div", "card-meta");
      meta.appendChild(el("span", "doc-id", card.doc_id));
      meta.appendChild(el("span", "score", card.score.toFixed(4)));
      item.appendChild(meta);
      item.appendChild(el("p", "snippet", card.snippet));

      const actions = el("div", "card-actions");
      const acceptBtn = el("button", "accept-btn", marking === "accept" ? "Accepted" : "Accept");
      acceptBtn.addEventListener("click", () => this.update(mark(state, card.doc_id, "accept")));
      const declineBtn = el(
        "button",
        "decline-btn",
        marking === "decline" ? "Declined" : "Decline",
      );
      declineBtn.addEventListener("click", () =>
        this.update(mark(state, card.doc_id, "decline")),
      );
      actions.appendChild(acceptBtn);
      actions.appendChild(declineBtn);
      item.appendChild(actions);
      item.addEventListener("click", () => {
        if (state.cursor !== index) this.update({ ...state, cursor: index });
      });
      list.appendChild(item);
    });
    this.root.appendChild(list);

    const footer = el("div", "footer");
    const left = unresolvedCount(state);
    const submitBtn = el(
      "button",
      "submit-btn",
      left === 0 ? "Submit batch" : `Submit batch (${left} unmarked)`,
    );
    submitBtn.disabled = !canSubmit(state);
    submitBtn.addEventListener("click", () => void this.submit());
    footer.appendChild(submitBtn);
    footer.appendChild(
      el("span", "hint", "keys: j/k move, a accept, d decline, u undo, Enter submit"),
    );
    this.root.appendChild(footer);
  }
}

function describeStrategy(strategy: CreateSessionRequest["strategy"]): string {
  const parts: string[] = [strategy.kind];
  if (strategy.cumulative) parts.push("cumulative");
  if (strategy.amplify) parts.push("amplified");
  if (strategy.kind === "average") parts.push(strategy.average_mode ?? "sequential");
  if (strategy.kind === "rocchio") {
    parts.push(`a=${strategy.alpha ?? 0.5}`, `b=${strategy.beta ?? 0.5}`);
  }
  return parts.join(" ");
}
