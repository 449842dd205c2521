// View controller: owns the ViewState, talks to the API, and pushes
// rendered HTML plus URL updates through an injected sink. No direct DOM
// access here, so the whole flow is testable against fixture bodies.

import { ApiClient, ApiError, LatestOnly } from "./api.js";
import { renderHistory } from "./history.js";
import { renderLeaderboard } from "./leaderboard.js";
import type { ConfigResponse, LeaderboardResponse, ModelsResponse, VintagesResponse } from "./types.js";
import {
  clampToAvailable,
  defaultViewState,
  stateFromQuery,
  stateToQuery,
  type SortColumn,
  type ViewState,
} from "./viewstate.js";

export type ViewName = "leaderboard" | "history";

export interface Sink {
  leaderboard(html: string): void;
  history(html: string): void;
  banner(message: string | null): void;
  url(query: string): void;
}

export class App {
  state!: ViewState;
  view: ViewName = "leaderboard";
  config: ConfigResponse["config"] | null = null;
  models: ModelsResponse["models"] = [];
  vintages: VintagesResponse["vintages"] = [];
  lastGoodLeaderboard: LeaderboardResponse | null = null;

  private readonly leaderboardGate = new LatestOnly<LeaderboardResponse | null>();
  private readonly historyGate = new LatestOnly<string | null>();

  constructor(
    private readonly client: ApiClient,
    private readonly sink: Sink,
  ) {}

  async init(initialQuery = ""): Promise<void> {
    const [config, models, vintages] = await Promise.all([
      this.client.config(),
      this.client.models(),
      this.client.vintages(),
    ]);
    this.config = config.config;
    this.models = models.models;
    this.vintages = vintages.vintages;
    const fallback = defaultViewState(
      this.config.primary_metric,
      this.config.horizons[0] ?? 12,
    );
    this.state = clampToAvailable(
      stateFromQuery(initialQuery, fallback),
      this.config.metrics,
      this.config.horizons,
      this.vintages.map((v) => v.id),
      this.config.primary_metric,
    );
    await this.refreshActiveView();
  }

  // Filter changes re-query only the visible view; sort changes re-render
  // the cached payload without touching the network.
  async setFilter(
    patch: Partial<Pick<ViewState, "metric" | "horizon" | "vintage" | "window">>,
  ): Promise<void> {
    this.state = { ...this.state, ...patch };
    this.sink.url(stateToQuery(this.state));
    await this.refreshActiveView();
  }

  setSort(column: SortColumn): void {
    if (this.state.sortColumn === column) {
      this.state = {
        ...this.state,
        sortDirection: this.state.sortDirection === "asc" ? "desc" : "asc",
      };
    } else {
      this.state = { ...this.state, sortColumn: column, sortDirection: "asc" };
    }
    this.sink.url(stateToQuery(this.state));
    if (this.lastGoodLeaderboard !== null) {
      this.sink.leaderboard(renderLeaderboard(this.lastGoodLeaderboard, this.state));
    }
  }

  async setView(view: ViewName): Promise<void> {
    if (view === this.view) return;
    this.view = view;
    await this.refreshActiveView();
  }

  private async refreshActiveView(): Promise<void> {
    if (this.view === "leaderboard") {
      await this.loadLeaderboard();
    } else {
      await this.loadHistory();
    }
  }

  private async loadLeaderboard(): Promise<void> {
    const result = await this.leaderboardGate.run(async () => {
      try {
        return await this.client.leaderboard(this.state);
      } catch (e) {
        this.sink.banner(e instanceof ApiError ? e.message : String(e));
        return null;
      }
    });
    if (result === undefined || result === null) return; // stale or failed: table untouched
    this.lastGoodLeaderboard = result;
    this.sink.banner(null);
    this.sink.leaderboard(renderLeaderboard(result, this.state));
  }

  private async loadHistory(): Promise<void> {
    const html = await this.historyGate.run(async () => {
      try {
        return renderHistory(await this.client.history(this.state));
      } catch (e) {
        this.sink.banner(e instanceof ApiError ? e.message : String(e));
        return null;
      }
    });
    if (html === undefined || html === null) return;
    this.sink.banner(null);
    this.sink.history(html);
  }
}
