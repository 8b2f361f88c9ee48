import { describe, expect, it } from "vitest";

import { ApiError, MastApi } from "../src/api.js";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function stub(status: number, payload: unknown) {
  const calls: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { calls, fetchFn };
}

describe("api client", () => {
  it("posts impacts to create a model", async () => {
    const { calls, fetchFn } = stub(201, { model_id: "m", factors: [], revision: 0 });
    const api = new MastApi("http://svc", fetchFn);
    const created = await api.createModel([6, 9, 2, 4]);
    expect(created.model_id).toBe("m");
    expect(calls).toEqual([
      { url: "http://svc/api/models", method: "POST", body: { impacts: [6, 9, 2, 4] } },
    ]);
  });

  it("uses PUT and DELETE for evidence", async () => {
    const { calls, fetchFn } = stub(200, { revision: 1 });
    const api = new MastApi("", fetchFn);
    await api.setEvidence("m", "software", "Possible");
    await api.clearEvidence("m", "software");
    expect(calls[0]).toEqual({
      url: "/api/models/m/evidence/software",
      method: "PUT",
      body: { state: "Possible" },
    });
    expect(calls[1]?.method).toBe("DELETE");
  });

  it("surfaces string error details", async () => {
    const { fetchFn } = stub(422, { detail: "unknown state 'Maybe'" });
    const api = new MastApi("", fetchFn);
    await expect(api.setEvidence("m", "software", "Maybe")).rejects.toThrowError(
      /unknown state 'Maybe'/,
    );
  });

  it("flattens field-level error details", async () => {
    const { fetchFn } = stub(422, {
      detail: [{ loc: ["body", "impacts", 3], msg: "less than or equal to 10" }],
    });
    const api = new MastApi("", fetchFn);
    try {
      await api.createModel([6, 9, 4, 11]);
      expect.unreachable("should have thrown");
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).status).toBe(422);
      expect((error as ApiError).message).toContain("impacts.3");
    }
  });

  it("builds export urls without fetching", () => {
    const api = new MastApi("http://svc");
    expect(api.exportUrl("m", "xdsl")).toBe("http://svc/api/models/m/export?format=xdsl");
  });
});
