import type {
  FlattenConfig,
  JobStatus,
  MeshPayload,
  MeshStats,
  OverlayPayload,
  RoiStats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function fail(response: Response): Promise<never> {
  let detail = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

/** Thin typed client; raw text accessors exist so the UI can keep the
 * exact payload bytes it renders from. */
export class LmapClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  private async getJson<T>(path: string): Promise<T> {
    const r = await this.fetchFn(this.url(path));
    if (!r.ok) await fail(r);
    return (await r.json()) as T;
  }

  async uploadMesh(body: string): Promise<MeshStats> {
    const r = await this.fetchFn(this.url("/mesh"), { method: "POST", body });
    if (!r.ok) await fail(r);
    return (await r.json()) as MeshStats;
  }

  meshJson(id: string): Promise<MeshPayload> {
    return this.getJson(`/mesh/${id}`);
  }

  curvature(id: string): Promise<OverlayPayload> {
    return this.getJson(`/mesh/${id}/curvature`);
  }

  async submitRoi(id: string, vertices: number[]): Promise<RoiStats> {
    const r = await this.fetchFn(this.url(`/mesh/${id}/roi`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ vertices }),
    });
    if (!r.ok) await fail(r);
    return (await r.json()) as RoiStats;
  }

  async flatten(id: string, config: FlattenConfig): Promise<void> {
    const r = await this.fetchFn(this.url(`/mesh/${id}/flatten`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (!r.ok) await fail(r);
  }

  status(id: string): Promise<JobStatus> {
    return this.getJson(`/mesh/${id}/status`);
  }

  /** Raw body of /result, byte-for-byte what the view will parse. */
  async resultText(id: string): Promise<string> {
    const r = await this.fetchFn(this.url(`/mesh/${id}/result`));
    if (!r.ok) await fail(r);
    return r.text();
  }

  /** Raw body of /metrics for the histogram widget. */
  async metricsText(id: string): Promise<string> {
    const r = await this.fetchFn(this.url(`/mesh/${id}/metrics`));
    if (!r.ok) await fail(r);
    return r.text();
  }
}
