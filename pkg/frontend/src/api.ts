import type {
  CreateSessionRequest,
  CreateSessionResponse,
  FeedbackResponse,
  SessionInfo,
  TraceResponse,
} from "./types.js";

/** Error body of the service is always {code, message}. */
export class ApiError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export function isStaleBatch(err: unknown): boolean {
  return err instanceof ApiError && err.status === 409;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  if (!res.ok) {
    let code = "http_error";
    let message = `${res.status} ${res.statusText}`;
    try {
      const body = await res.json();
      if (body && typeof body.code === "string") code = body.code;
      if (body && typeof body.message === "string") message = body.message;
    } catch {
      // non-JSON error body, keep the status line
    }
    throw new ApiError(res.status, code, message);
  }
  if (res.status === 204) return undefined as T;
  return (await res.json()) as T;
}

export class ReviewApi {
  constructor(private base: string = "") {}

  createSession(body: CreateSessionRequest): Promise<CreateSessionResponse> {
    return request(`${this.base}/api/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionInfo> {
    return request(`${this.base}/api/sessions/${sessionId}`);
  }

  submitFeedback(
    sessionId: string,
    accepted: string[],
    declined: string[],
  ): Promise<FeedbackResponse> {
    return request(`${this.base}/api/sessions/${sessionId}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ accepted, declined }),
    });
  }

  getTrace(sessionId: string): Promise<TraceResponse> {
    return request(`${this.base}/api/sessions/${sessionId}/trace`);
  }

  deleteSession(sessionId: string): Promise<void> {
    return request(`${this.base}/api/sessions/${sessionId}`, { method: "DELETE" });
  }
}
