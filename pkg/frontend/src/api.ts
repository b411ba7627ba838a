import type {
  BatchResponse,
  ConfigPatch,
  ConflictsResponse,
  HealthResponse,
  LabelResult,
  LabelRow,
  MetricsResponse,
  ServiceConfig,
  UserScore,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the service endpoints. No caching, no retries;
 * callers decide how to poll. */
export class ApiClient {
  private fetchFn: FetchLike;

  constructor(private base = "", fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const rsp = await this.fetchFn(this.base + path, init);
    let body: unknown = null;
    try {
      body = await rsp.json();
    } catch {
      body = null;
    }
    if (!rsp.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : rsp.statusText || `HTTP ${rsp.status}`;
      throw new ApiError(rsp.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request("/api/health");
  }

  userScore(userId: string): Promise<UserScore> {
    return this.request(`/api/users/${encodeURIComponent(userId)}/score`);
  }

  nextBatch(opts: { strategy?: string; batch?: number } = {}): Promise<BatchResponse> {
    const query = new URLSearchParams();
    if (opts.strategy) query.set("strategy", opts.strategy);
    if (opts.batch) query.set("batch", String(opts.batch));
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    return this.request(`/api/annotation/next${suffix}`);
  }

  submitLabels(rows: LabelRow[]): Promise<LabelResult> {
    return this.post("/api/annotation/labels", rows);
  }

  conflicts(): Promise<ConflictsResponse> {
    return this.request("/api/annotation/conflicts");
  }

  adjudicate(row: LabelRow): Promise<LabelResult> {
    return this.post("/api/annotation/conflicts", row);
  }

  metrics(): Promise<MetricsResponse> {
    return this.request("/api/model/metrics");
  }

  retrain(): Promise<{ round_index: number }> {
    return this.post("/api/model/retrain", {});
  }

  getConfig(): Promise<ServiceConfig> {
    return this.request("/api/config");
  }

  patchConfig(patch: ConfigPatch): Promise<ServiceConfig> {
    return this.post("/api/config", patch);
  }
}
