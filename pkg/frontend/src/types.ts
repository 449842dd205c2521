// Payload shapes for the service API. Field names are the wire names;
// every piece of rendered data comes from one of these.

export interface LeaderboardRow {
  model_id: string;
  metric_name: string;
  horizon: number;
  score: number;
  n_records: number;
  rank: number;
}

export interface LeaderboardResponse {
  metric: string;
  horizon: number;
  vintage: string | null;
  rows: LeaderboardRow[];
}

export interface HistoryPoint {
  model_id: string;
  metric_name: string;
  horizon: number;
  window_end_origin: number;
  trailing_rank: number;
  trailing_score: number;
}

export interface HistoryResponse {
  metric: string;
  horizon: number;
  vintage: string | null;
  window: number;
  points: HistoryPoint[];
  warning?: string;
}

export interface ModelDescriptor {
  model_id: string;
  kind: string;
  display_name: string;
  model_type: string;
}

export interface ModelsResponse {
  models: ModelDescriptor[];
}

export interface VintageInfo {
  id: string;
  fetched_at: string;
  content_hash: string;
  source_url: string;
}

export interface VintagesResponse {
  vintages: VintageInfo[];
}

export interface EvalConfigDoc {
  lookback: number;
  horizons: number[];
  stride: number;
  metrics: string[];
  primary_metric: string;
  season: number;
  space: string;
  seed: number;
}

export interface ConfigResponse {
  config: EvalConfigDoc;
}

export interface ErrorResponse {
  error: string;
}

export function isErrorResponse(body: unknown): body is ErrorResponse {
  return typeof body === "object" && body !== null && "error" in body;
}
