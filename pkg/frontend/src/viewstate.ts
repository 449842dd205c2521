// Filter state for the whole app. It round-trips through the URL query
// string so any view is shareable as a link.

export type SortColumn = "rank" | "model_id" | "score" | "n_records";
export type SortDirection = "asc" | "desc";

export interface ViewState {
  metric: string;
  horizon: number;
  vintage: string | null;
  window: number;
  sortColumn: SortColumn;
  sortDirection: SortDirection;
}

export const DEFAULT_WINDOW = 24;

const SORT_COLUMNS: SortColumn[] = ["rank", "model_id", "score", "n_records"];

export function defaultViewState(metric: string, horizon: number): ViewState {
  return {
    metric,
    horizon,
    vintage: null,
    window: DEFAULT_WINDOW,
    sortColumn: "rank",
    sortDirection: "asc",
  };
}

export function stateToQuery(state: ViewState): string {
  const q = new URLSearchParams();
  q.set("metric", state.metric);
  q.set("horizon", String(state.horizon));
  if (state.vintage !== null) q.set("vintage", state.vintage);
  if (state.window !== DEFAULT_WINDOW) q.set("window", String(state.window));
  if (state.sortColumn !== "rank") q.set("sort", state.sortColumn);
  if (state.sortDirection !== "asc") q.set("dir", state.sortDirection);
  return q.toString();
}

export function stateFromQuery(
  query: string,
  fallback: ViewState,
): ViewState {
  const q = new URLSearchParams(query);
  const state = { ...fallback };
  const metric = q.get("metric");
  if (metric !== null) state.metric = metric;
  const horizon = q.get("horizon");
  if (horizon !== null && /^\d+$/.test(horizon)) state.horizon = Number(horizon);
  const vintage = q.get("vintage");
  if (vintage !== null) state.vintage = vintage;
  const window = q.get("window");
  if (window !== null && /^\d+$/.test(window) && Number(window) >= 1) {
    state.window = Number(window);
  }
  const sort = q.get("sort");
  if (sort !== null && (SORT_COLUMNS as string[]).includes(sort)) {
    state.sortColumn = sort as SortColumn;
  }
  const dir = q.get("dir");
  if (dir === "asc" || dir === "desc") state.sortDirection = dir;
  return state;
}

// Selections must stay within what the API reports as available; anything
// else snaps back to the configured defaults.
export function clampToAvailable(
  state: ViewState,
  metrics: string[],
  horizons: number[],
  vintageIds: string[],
  primaryMetric: string,
): ViewState {
  const out = { ...state };
  if (!metrics.includes(out.metric)) out.metric = primaryMetric;
  if (!horizons.includes(out.horizon)) out.horizon = horizons[0] ?? out.horizon;
  if (out.vintage !== null && !vintageIds.includes(out.vintage)) out.vintage = null;
  return out;
}
