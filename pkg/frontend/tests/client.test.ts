import { describe, expect, it } from "vitest";

import { parseRolloutStream, ServiceError, SessionClient } from "../src/client.js";

const ndjson = [
  '{"h": 30, "x": 0.1, "y": 0.2, "sigma_norm": 0.05}',
  '{"h": 31, "x": 0.11, "y": 0.21, "sigma_norm": 0.06}',
  '{"stop_reason": "triggered", "l": 31, "lambda": 1.5, "rotation": 0.1}',
].join("\n");

describe("rollout stream parsing", () => {
  it("splits records from the trailer", () => {
    const result = parseRolloutStream(ndjson + "\n");
    expect(result.records).toHaveLength(2);
    expect(result.records[1].h).toBe(31);
    expect(result.trailer.stop_reason).toBe("triggered");
    expect(result.trailer.lambda).toBe(1.5);
  });

  it("rejects a stream without a trailer", () => {
    expect(() =>
      parseRolloutStream('{"h": 1, "x": 0, "y": 0, "sigma_norm": 0}'),
    ).toThrow("trailer");
  });

  it("rejects an empty stream", () => {
    expect(() => parseRolloutStream("")).toThrow("empty");
  });
});

function fakeFetch(
  routes: Record<string, { status: number; body: string }>,
) {
  const calls: { url: string; body?: string }[] = [];
  const impl = async (url: string, init?: RequestInit) => {
    calls.push({ url, body: init?.body as string | undefined });
    const route = routes[new URL(url).pathname];
    if (!route) throw new Error(`no route for ${url}`);
    return new Response(route.body, { status: route.status });
  };
  return { impl, calls };
}

describe("session client", () => {
  it("creates a session and scopes later calls to it", async () => {
    const { impl, calls } = fakeFetch({
      "/sessions": { status: 201, body: '{"id": "abc"}' },
      "/sessions/abc/demonstration": {
        status: 200,
        body: '{"skill_id": "sketch_1"}',
      },
    });
    const client = new SessionClient("http://svc", impl);
    expect(await client.createSession()).toBe("abc");
    const skill = await client.submitDemonstration(
      [{ t: 0, x: 0, y: 0 }],
      "sketch_1",
    );
    expect(skill).toBe("sketch_1");
    expect(calls[1].url).toBe("http://svc/sessions/abc/demonstration");
    expect(JSON.parse(calls[1].body!)).toHaveProperty("points");
  });

  it("surfaces structured service errors", async () => {
    const { impl } = fakeFetch({
      "/sessions": { status: 201, body: '{"id": "abc"}' },
      "/sessions/abc/prompt/points": {
        status: 422,
        body: '{"code": "invalid_input", "message": "too short", "detail": null}',
      },
    });
    const client = new SessionClient("http://svc", impl);
    await client.createSession();
    const failure = client.sendPromptPoints([{ t: 0, x: 0, y: 0 }]);
    await expect(failure).rejects.toThrowError(ServiceError);
    await expect(failure).rejects.toMatchObject({
      code: "invalid_input",
      status: 422,
    });
  });

  it("requires a session before prompt calls", async () => {
    const client = new SessionClient("http://svc", async () => {
      throw new Error("unreachable");
    });
    await expect(client.sendPromptPoints([])).rejects.toThrow("no session");
  });
});
