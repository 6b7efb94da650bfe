import { ReviewApi } from "./api.js";
import { ReviewApp } from "./ui.js";
import type { CreateSessionRequest, Strategy, StrategyKind } from "./types.js";

function readStrategy(form: HTMLFormElement): Strategy {
  const data = new FormData(form);
  const kind = (data.get("kind") as StrategyKind) || "none";
  const strategy: Strategy = { kind };
  if (data.get("cumulative") === "on") strategy.cumulative = true;
  if (data.get("amplify") === "on") strategy.amplify = true;
  if (kind === "average") {
    strategy.average_mode = data.get("average_mode") === "global" ? "global" : "sequential";
  }
  return strategy;
}

function readRequest(form: HTMLFormElement): CreateSessionRequest {
  const data = new FormData(form);
  const queryDoc = String(data.get("query_doc_id") ?? "").trim();
  const queryText = String(data.get("query_text") ?? "").trim();
  const req: CreateSessionRequest = { strategy: readStrategy(form) };
  if (queryDoc) req.query_doc_id = queryDoc;
  else if (queryText) req.query_text = queryText;
  return req;
}

function boot(): void {
  const root = document.getElementById("app");
  const form = document.getElementById("create-form") as HTMLFormElement | null;
  const status = document.getElementById("form-status");
  if (!root || !form) return;

  const app = new ReviewApp(new ReviewApi(""), root, window.sessionStorage);
  document.addEventListener("keydown", (event) => app.handleKey(event));

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (status) status.textContent = "";
    app.start(readRequest(form)).catch((err) => {
      if (status) status.textContent = err instanceof Error ? err.message : String(err);
    });
  });

  const endBtn = document.getElementById("end-session");
  endBtn?.addEventListener("click", () => void app.endSession());

  void app.resume().catch(() => {
    // stale storage or unreachable service; the create form still works
  });
}

boot();
