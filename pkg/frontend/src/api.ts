/** Typed client for the specsynth HTTP API. */

export interface SessionInfo {
  session_id: string;
  disclaimer: string;
}

export interface AnswerRecord {
  query: string;
  response_text: string;
  citations: string[];
  context_ids: string[];
  scores: number[];
  prompt_words: number;
  model_name: string;
  turn_index: number;
}

export interface HealthInfo {
  status: string;
  corpus_chunks: number;
  index_size: number;
}

export type Verdict = "like" | "dislike";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  stage?: string;

  constructor(status: number, message: string, stage?: string) {
    super(message);
    this.status = status;
    this.stage = stage;
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let message = `HTTP ${response.status}`;
  let stage: string | undefined;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") message = body.error;
    if (body && typeof body.stage === "string") stage = body.stage;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, message, stage);
}

export class ApiClient {
  private baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    // bind so jsdom/node implementations keep their receiver
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async post(path: string, body?: unknown): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? "{}" : JSON.stringify(body),
    });
    await raiseForStatus(response);
    return response;
  }

  async createSession(): Promise<SessionInfo> {
    const response = await this.post("/api/session");
    return (await response.json()) as SessionInfo;
  }

  async query(sessionId: string, query: string): Promise<AnswerRecord> {
    const response = await this.post("/api/query", {
      session_id: sessionId,
      query,
    });
    return (await response.json()) as AnswerRecord;
  }

  async feedback(
    sessionId: string,
    turnIndex: number,
    verdict: Verdict,
  ): Promise<void> {
    await this.post("/api/feedback", {
      session_id: sessionId,
      turn_index: turnIndex,
      verdict,
    });
  }

  async expertRequest(sessionId: string, turnIndex: number): Promise<string> {
    const response = await this.post("/api/expert-request", {
      session_id: sessionId,
      turn_index: turnIndex,
    });
    const body = (await response.json()) as { request_id: string };
    return body.request_id;
  }

  async health(): Promise<HealthInfo> {
    const response = await this.fetchImpl(this.baseUrl + "/api/health");
    await raiseForStatus(response);
    return (await response.json()) as HealthInfo;
  }
}
