"""HTTP session service for interactive review over the retrieval engine.

Each session wraps the same batch stepper the simulator uses, so an
interactive session and a simulated one given identical decisions walk
through identical batches. Sessions persist in a write-ahead-logged
sqlite store and survive restarts; per-session operations serialize on
an in-process lock while index reads stay lock-free.
"""
from __future__ import annotations

import json
import logging
import sqlite3
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from .corpus import CorpusStore
from .errors import FeedbackError, WorkbenchError
from .feedback import QueryState, Signal, StrategyConfig, apply_feedback, init_state
from .ranking import RANK_FIRST
from .simulator import BatchItem, RetrievalEngine, SessionConfig

log = logging.getLogger(__name__)

SNIPPET_CHARS = 240


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def state_to_dict(state: QueryState) -> dict:
    return {
        "q0": state.q0.tolist(),
        "q_cur": state.q_cur.tolist(),
        "signals": [
            {"embedding": s.embedding.tolist(), "amplified": s.amplified}
            for s in state.signals
        ],
        "accepted_docs": sorted(state.accepted_docs),
        "declined_docs": sorted(state.declined_docs),
        "keywords": sorted(state.keywords),
    }


def state_from_dict(data: dict) -> QueryState:
    def vec(values) -> np.ndarray:
        array = np.asarray(values, dtype=np.float64)
        array.flags.writeable = False
        return array

    return QueryState(
        q0=vec(data["q0"]),
        q_cur=vec(data["q_cur"]),
        signals=tuple(
            Signal(embedding=vec(s["embedding"]), amplified=bool(s["amplified"]))
            for s in data["signals"]
        ),
        accepted_docs=frozenset(data["accepted_docs"]),
        declined_docs=frozenset(data["declined_docs"]),
        keywords=frozenset(data["keywords"]),
    )


class SessionRepo:
    """Sqlite-backed session blobs with write-ahead durability."""

    def __init__(self, path: str | Path = ":memory:"):
        self._path = str(path)
        self._memory = self._path == ":memory:"
        self._conn = (
            sqlite3.connect(":memory:", check_same_thread=False) if self._memory else None
        )
        self._lock = threading.Lock()
        with self._connect() as conn:
            if not self._memory:
                conn.execute("PRAGMA journal_mode=WAL")
            conn.execute(
                "CREATE TABLE IF NOT EXISTS sessions ("
                "id TEXT PRIMARY KEY, data TEXT NOT NULL, "
                "created TEXT NOT NULL, updated TEXT NOT NULL)"
            )

    def _connect(self) -> sqlite3.Connection:
        if self._memory:
            return self._conn
        return sqlite3.connect(self._path, timeout=30)

    def _run(self, query: str, params: tuple = ()) -> list[tuple]:
        with self._lock:
            conn = self._connect()
            try:
                rows = list(conn.execute(query, params))
                conn.commit()
                return rows
            finally:
                if not self._memory:
                    conn.close()

    def save(self, session_id: str, data: dict) -> None:
        blob = json.dumps(data)
        self._run(
            "INSERT INTO sessions (id, data, created, updated) VALUES (?, ?, ?, ?) "
            "ON CONFLICT(id) DO UPDATE SET data = excluded.data, updated = excluded.updated",
            (session_id, blob, data["created"], data["updated"]),
        )

    def load(self, session_id: str) -> dict | None:
        rows = self._run("SELECT data FROM sessions WHERE id = ?", (session_id,))
        if not rows:
            return None
        return json.loads(rows[0][0])

    def delete(self, session_id: str) -> bool:
        existed = bool(self._run("SELECT 1 FROM sessions WHERE id = ?", (session_id,)))
        self._run("DELETE FROM sessions WHERE id = ?", (session_id,))
        return existed

    def ids(self) -> list[str]:
        return [row[0] for row in self._run("SELECT id FROM sessions ORDER BY created")]


class _SessionLocks:
    def __init__(self):
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def get(self, session_id: str) -> threading.Lock:
        with self._guard:
            lock = self._locks.get(session_id)
            if lock is None:
                lock = threading.Lock()
                self._locks[session_id] = lock
            return lock


def create_app(
    engine: RetrievalEngine,
    corpus: CorpusStore | None = None,
    db_path: str | Path = ":memory:",
    embedder: Callable[[str], np.ndarray] | None = None,
    batch_size: int = 10,
    rank_mode: str = RANK_FIRST,
    backend: str = "exact",
    ef_search: int = 100,
) -> FastAPI:
    """Build the session API over one immutable engine."""
    app = FastAPI(title="recallkit review service")
    repo = SessionRepo(db_path)
    locks = _SessionLocks()
    snippets: dict[str, str] = {}
    if corpus is not None:
        for para in corpus.paragraphs():
            snippets[para.para_id] = para.text

    def snippet(para_id: str) -> str:
        text = snippets.get(para_id, para_id)
        if len(text) > SNIPPET_CHARS:
            return text[: SNIPPET_CHARS - 3] + "..."
        return text

    def batch_payload(batch: list[BatchItem]) -> list[dict]:
        return [
            {
                "doc_id": item.doc_id,
                "para_id": item.para_id,
                "snippet": snippet(item.para_id),
                "score": item.score,
            }
            for item in batch
        ]

    def progress_payload(data: dict) -> dict:
        state_accepted = data["state"]["accepted_docs"]
        state_declined = data["state"]["declined_docs"]
        recall = None
        if data["relevant"]:
            relevant = set(data["relevant"])
            recall = len(set(state_accepted) & relevant) / len(relevant)
        return {
            "accepted": len(state_accepted),
            "reviewed": len(state_accepted) + len(state_declined),
            "recall": recall,
        }

    def session_config(data: dict) -> SessionConfig:
        return SessionConfig(
            query_id=data["query_para_id"] or "",
            strategy=StrategyConfig.from_dict(data["strategy"]),
            batch_size=data["batch_size"],
            backend=data["backend"],
            rank_mode=data["rank_mode"],
            ef_search=data["ef_search"],
        )

    def fetch_batch(data: dict, state: QueryState) -> list[BatchItem]:
        config = session_config(data)
        extra = {data["query_doc_id"]} if data["query_doc_id"] else set()
        return engine.next_batch(state, config, extra_excluded=extra)

    def load_or_404(session_id: str) -> dict:
        data = repo.load(session_id)
        if data is None:
            raise ServiceError(404, "unknown_session", f"no session {session_id!r}")
        return data

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422, content={"code": "invalid_request", "message": str(exc.errors()[:3])}
        )

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict) -> dict:
        if not isinstance(body, dict):
            raise ServiceError(422, "invalid_request", "body must be a JSON object")
        query_doc_id = body.get("query_doc_id")
        query_text = body.get("query_text")
        if bool(query_doc_id) == bool(query_text):
            raise ServiceError(
                422, "invalid_request", "provide exactly one of query_doc_id or query_text"
            )
        try:
            strategy = StrategyConfig.from_dict(body.get("strategy") or {})
        except FeedbackError as exc:
            raise ServiceError(422, "invalid_strategy", str(exc)) from exc

        relevant: list[str] = []
        if query_doc_id:
            paragraphs = engine.paragraph_ids(query_doc_id)
            if not paragraphs:
                raise ServiceError(404, "unknown_document", f"no document {query_doc_id!r}")
            query_para_id = paragraphs[0]
            q0 = engine.embedding(query_para_id)
            if corpus is not None and query_doc_id in corpus:
                labeled = set()
                for topic in corpus.get(query_doc_id).topics:
                    labeled.update(corpus.topic_docs(topic))
                labeled.discard(query_doc_id)
                relevant = sorted(labeled)
        else:
            if embedder is None:
                raise ServiceError(422, "text_queries_disabled", "no embedder configured")
            try:
                q0 = embedder(query_text)
            except WorkbenchError as exc:
                raise ServiceError(422, "invalid_query", str(exc)) from exc
            query_para_id = None

        state = init_state(q0)
        data = {
            "strategy": strategy.to_dict(),
            "batch_size": batch_size,
            "backend": backend,
            "rank_mode": rank_mode,
            "ef_search": ef_search,
            "query_doc_id": query_doc_id,
            "query_para_id": query_para_id,
            "query_text": query_text,
            "state": state_to_dict(state),
            "relevant": relevant,
            "iteration": 0,
            "batch": [],
            "prev_batch_docs": [],
            "trace": [],
            "created": _now(),
            "updated": _now(),
        }
        batch = fetch_batch(data, state)
        if not batch:
            raise ServiceError(422, "no_candidates", "no retrievable documents for this query")
        data["batch"] = batch_payload(batch)
        session_id = uuid.uuid4().hex
        repo.save(session_id, data)
        return {
            "session_id": session_id,
            "batch": data["batch"],
            "progress": progress_payload(data),
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        data = load_or_404(session_id)
        return {
            "config": {
                "strategy": data["strategy"],
                "batch_size": data["batch_size"],
                "backend": data["backend"],
                "rank_mode": data["rank_mode"],
                "ef_search": data["ef_search"],
                "query_doc_id": data["query_doc_id"],
                "query_text": data["query_text"],
            },
            "progress": progress_payload(data),
            "iteration": data["iteration"],
            "batch": data["batch"],
        }

    @app.post("/api/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, body: dict) -> dict:
        with locks.get(session_id):
            data = load_or_404(session_id)
            if not data["batch"]:
                raise ServiceError(409, "stale_batch", "session has no open batch")
            accepted_ids = body.get("accepted")
            declined_ids = body.get("declined")
            if not isinstance(accepted_ids, list) or not isinstance(declined_ids, list):
                raise ServiceError(
                    422, "invalid_feedback", "accepted and declined must be doc-id lists"
                )
            accepted_set = set(accepted_ids)
            declined_set = set(declined_ids)
            if len(accepted_set) != len(accepted_ids) or len(declined_set) != len(declined_ids):
                raise ServiceError(422, "invalid_feedback", "duplicate document ids")
            if accepted_set & declined_set:
                raise ServiceError(
                    422, "invalid_feedback", "a document cannot be both accepted and declined"
                )
            submitted = accepted_set | declined_set
            batch_docs = {item["doc_id"] for item in data["batch"]}
            if submitted != batch_docs:
                if data["prev_batch_docs"] and submitted == set(data["prev_batch_docs"]):
                    raise ServiceError(
                        409, "stale_batch", "this batch was already resolved; reload the session"
                    )
                raise ServiceError(
                    422,
                    "invalid_feedback",
                    "feedback must cover the current batch exactly",
                )

            state = state_from_dict(data["state"])
            accepted_pairs = [
                (item["para_id"], engine.embedding(item["para_id"]))
                for item in data["batch"]
                if item["doc_id"] in accepted_set
            ]
            declined_docs = [
                item["doc_id"] for item in data["batch"] if item["doc_id"] in declined_set
            ]
            try:
                state = apply_feedback(
                    state,
                    accepted_pairs,
                    declined_docs,
                    StrategyConfig.from_dict(data["strategy"]),
                    siblings=engine.sibling_embeddings,
                    keywords_lookup=engine.keyword_lookup,
                )
            except (FeedbackError, WorkbenchError) as exc:
                raise ServiceError(422, "invalid_feedback", str(exc)) from exc

            data["state"] = state_to_dict(state)
            data["iteration"] += 1
            data["prev_batch_docs"] = sorted(batch_docs)
            progress = progress_payload(data)
            data["trace"].append(
                {
                    "iteration": data["iteration"],
                    "batch": [item["doc_id"] for item in data["batch"]],
                    "accepted": sorted(accepted_set),
                    "declined": sorted(declined_set),
                    "recall": progress["recall"],
                    "accepted_total": progress["accepted"],
                    "reviewed_total": progress["reviewed"],
                }
            )
            next_batch = fetch_batch(data, state)
            data["batch"] = batch_payload(next_batch)
            data["updated"] = _now()
            repo.save(session_id, data)
            return {"batch": data["batch"], "progress": progress}

    @app.get("/api/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> dict:
        data = load_or_404(session_id)
        return {"session_id": session_id, "iterations": data["trace"]}

    @app.delete("/api/sessions/{session_id}", status_code=204, response_class=Response)
    def delete_session(session_id: str) -> Response:
        if not repo.delete(session_id):
            raise ServiceError(404, "unknown_session", f"no session {session_id!r}")
        return Response(status_code=204)

    return app
