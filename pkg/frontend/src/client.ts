// REST client for the session service. Transport is injectable so tests can
// stub it; the default is the global fetch.

import type {
  ClassificationStatus,
  RolloutRecord,
  RolloutResult,
  RolloutTrailer,
  WorldPoint,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function jsonOrThrow(response: Response): Promise<unknown> {
  const text = await response.text();
  if (!response.ok) {
    let code = "http_error";
    let message = text || response.statusText;
    try {
      const body = JSON.parse(text);
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body: keep raw text
    }
    throw new ServiceError(response.status, code, message);
  }
  return text ? JSON.parse(text) : null;
}

export class SessionClient {
  sessionId: string | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post(path: string, body?: unknown): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return jsonOrThrow(response);
  }

  async createSession(): Promise<string> {
    const body = (await this.post("/sessions")) as { id: string };
    this.sessionId = body.id;
    return body.id;
  }

  private session(): string {
    if (this.sessionId === null) throw new Error("no session; createSession first");
    return this.sessionId;
  }

  async submitDemonstration(
    points: WorldPoint[],
    label: string,
  ): Promise<string> {
    const body = (await this.post(
      `/sessions/${this.session()}/demonstration`,
      { label, points },
    )) as { skill_id: string };
    return body.skill_id;
  }

  async sendPromptPoints(points: WorldPoint[]): Promise<ClassificationStatus> {
    return (await this.post(`/sessions/${this.session()}/prompt/points`, {
      points,
    })) as ClassificationStatus;
  }

  async finalizePrompt(): Promise<RolloutResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/sessions/${this.session()}/prompt/finalize`,
      { method: "POST" },
    );
    if (!response.ok) {
      await jsonOrThrow(response);
    }
    const text = await response.text();
    return parseRolloutStream(text);
  }
}

/** Parse the NDJSON rollout stream: records followed by one trailer line. */
export function parseRolloutStream(text: string): RolloutResult {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) throw new Error("empty rollout stream");
  const records: RolloutRecord[] = [];
  let trailer: RolloutTrailer | null = null;
  for (const line of lines) {
    const parsed = JSON.parse(line);
    if ("stop_reason" in parsed) {
      trailer = parsed as RolloutTrailer;
    } else {
      records.push(parsed as RolloutRecord);
    }
  }
  if (trailer === null) throw new Error("rollout stream missing trailer");
  return { records, trailer };
}
