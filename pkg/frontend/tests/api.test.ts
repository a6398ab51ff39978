import { describe, expect, it } from "vitest";

import { ApiError, LmapClient } from "../src/api.js";

type Call = { url: string; init?: RequestInit };

function mockFetch(
  handler: (url: string, init?: RequestInit) => Response,
): { fetchFn: typeof fetch; calls: Call[] } {
  const calls: Call[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    return handler(url, init);
  }) as typeof fetch;
  return { fetchFn, calls };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("LmapClient", () => {
  it("uploads a mesh and parses stats", async () => {
    const { fetchFn, calls } = mockFetch(() =>
      jsonResponse({ id: "m1", v: 4, e: 6, f: 4, chi: 2, boundary_loops: 0 }, 201),
    );
    const client = new LmapClient("http://x:1", fetchFn);
    const stats = await client.uploadMesh("v 0 0 0\n...");
    expect(stats.id).toBe("m1");
    expect(calls[0].url).toBe("http://x:1/mesh");
    expect(calls[0].init?.method).toBe("POST");
  });

  it("posts ROI vertices as json", async () => {
    const { fetchFn, calls } = mockFetch(() =>
      jsonResponse({ size: 3, interior_count: 1, rim_count: 2 }),
    );
    const client = new LmapClient("http://x:1", fetchFn);
    const stats = await client.submitRoi("m1", [2, 0, 1]);
    expect(stats.interior_count).toBe(1);
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ vertices: [2, 0, 1] });
  });

  it("surfaces the server detail on errors", async () => {
    const { fetchFn } = mockFetch(() =>
      jsonResponse({ detail: "ROI interior is empty" }, 422),
    );
    const client = new LmapClient("http://x:1", fetchFn);
    await expect(client.flatten("m1", { steps: 5 })).rejects.toMatchObject({
      name: "ApiError",
      status: 422,
      message: "ROI interior is empty",
    });
  });

  it("keeps raw result text verbatim", async () => {
    const raw = '{"positions": [1.0, 2.0], "faces": [0],   "report": {}}';
    const { fetchFn } = mockFetch(() => new Response(raw, { status: 200 }));
    const client = new LmapClient("http://x:1", fetchFn);
    expect(await client.resultText("m1")).toBe(raw);
  });

  it("wraps non-json error bodies", async () => {
    const { fetchFn } = mockFetch(() => new Response("boom", { status: 500 }));
    const client = new LmapClient("http://x:1", fetchFn);
    try {
      await client.status("m1");
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(500);
    }
  });
});
