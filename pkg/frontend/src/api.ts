// Typed client for the service API. fetch is injectable so tests can feed
// recorded fixture bodies without a running server.

import type {
  ConfigResponse,
  HistoryResponse,
  LeaderboardResponse,
  ModelsResponse,
  VintagesResponse,
} from "./types.js";
import { isErrorResponse } from "./types.js";
import type { ViewState } from "./viewstate.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function getJson<T>(fetchFn: FetchLike, url: string): Promise<T> {
  const resp = await fetchFn(url);
  const body: unknown = await resp.json().catch(() => null);
  if (!resp.ok) {
    const message = isErrorResponse(body) ? body.error : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, message);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private url(path: string, params?: Record<string, string>): string {
    const q = params ? new URLSearchParams(params).toString() : "";
    return `${this.baseUrl}${path}${q ? `?${q}` : ""}`;
  }

  config(): Promise<ConfigResponse> {
    return getJson(this.fetchFn, this.url("/api/config"));
  }

  models(): Promise<ModelsResponse> {
    return getJson(this.fetchFn, this.url("/api/models"));
  }

  vintages(): Promise<VintagesResponse> {
    return getJson(this.fetchFn, this.url("/api/vintages"));
  }

  leaderboard(state: ViewState): Promise<LeaderboardResponse> {
    const params: Record<string, string> = {
      metric: state.metric,
      horizon: String(state.horizon),
    };
    if (state.vintage !== null) params.vintage = state.vintage;
    return getJson(this.fetchFn, this.url("/api/leaderboard", params));
  }

  history(state: ViewState): Promise<HistoryResponse> {
    const params: Record<string, string> = {
      metric: state.metric,
      horizon: String(state.horizon),
      window: String(state.window),
    };
    if (state.vintage !== null) params.vintage = state.vintage;
    return getJson(this.fetchFn, this.url("/api/history", params));
  }
}

// At most one live request per view: responses that arrive after a newer
// request was issued are dropped on the floor.
export class LatestOnly<T> {
  private seq = 0;

  async run(task: () => Promise<T>): Promise<T | undefined> {
    const ticket = ++this.seq;
    const result = await task();
    return ticket === this.seq ? result : undefined;
  }
}
