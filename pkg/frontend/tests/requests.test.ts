import { describe, expect, it } from "vitest";

import { ApiClient, type FetchLike } from "../src/api.js";
import { App, type Sink } from "../src/app.js";
import type { ErrorResponse, LeaderboardResponse } from "../src/types.js";

import { FakeFetch, bootstrapRoutes, loadFixture } from "./fixtures.js";

const LEADERBOARD = loadFixture<LeaderboardResponse>("leaderboard.json");
const LEADERBOARD_ALT = loadFixture<LeaderboardResponse>("leaderboard_alt.json");
const API_ERROR = loadFixture<ErrorResponse>("error_bad_metric.json");

interface Captured {
  leaderboard: string[];
  history: string[];
  banner: (string | null)[];
  url: string[];
}

function makeSink(): { sink: Sink; captured: Captured } {
  const captured: Captured = { leaderboard: [], history: [], banner: [], url: [] };
  return {
    captured,
    sink: {
      leaderboard: (html) => captured.leaderboard.push(html),
      history: (html) => captured.history.push(html),
      banner: (message) => captured.banner.push(message),
      url: (query) => captured.url.push(query),
    },
  };
}

async function startApp(extraRoutes = [] as ConstructorParameters<typeof FakeFetch>[0]) {
  const fetch = new FakeFetch([
    ...bootstrapRoutes(),
    ...extraRoutes,
    { pattern: /\/api\/leaderboard/, body: LEADERBOARD },
    { pattern: /\/api\/history/, body: loadFixture("history_rank_flip.json") },
  ]);
  const { sink, captured } = makeSink();
  const app = new App(new ApiClient("", fetch.fn), sink);
  await app.init("");
  return { app, fetch, captured };
}

describe("request behaviour", () => {
  it("issues exactly one leaderboard request on startup", async () => {
    const { fetch, captured } = await startApp();
    expect(fetch.requestsTo("/api/leaderboard")).toHaveLength(1);
    expect(captured.leaderboard).toHaveLength(1);
  });

  it("a horizon change fires exactly one new request, parameterized with the new horizon", async () => {
    const { app, fetch } = await startApp();
    const before = fetch.log.length;
    await app.setFilter({ horizon: 24 });
    expect(fetch.log.length - before).toBe(1);
    const url = fetch.log.at(-1)!;
    expect(url).toContain("/api/leaderboard");
    expect(url).toContain("horizon=24");
    expect(url).toContain("metric=MASE");
  });

  it("a metric change carries the new metric", async () => {
    const { app, fetch } = await startApp();
    await app.setFilter({ metric: "RMSE" });
    expect(fetch.log.at(-1)).toContain("metric=RMSE");
  });

  it("sorting re-renders from the cached payload without any request", async () => {
    const { app, fetch, captured } = await startApp();
    const before = fetch.log.length;
    app.setSort("score");
    expect(fetch.log.length).toBe(before);
    expect(captured.leaderboard).toHaveLength(2);
    expect(app.state.sortColumn).toBe("score");
  });

  it("an API failure raises the banner and keeps the last good table", async () => {
    const { app, fetch, captured } = await startApp();
    const goodHtml = captured.leaderboard.at(-1);

    fetch.routes.unshift({
      pattern: /\/api\/leaderboard.*metric=sMAPE/,
      status: 400,
      body: API_ERROR,
    });
    await app.setFilter({ metric: "sMAPE" });

    expect(captured.banner.at(-1)).toBe(API_ERROR.error);
    expect(captured.leaderboard).toHaveLength(1); // not re-rendered
    expect(captured.leaderboard.at(-1)).toBe(goodHtml);
    expect(app.lastGoodLeaderboard?.rows).toEqual(LEADERBOARD.rows);

    // recovery clears the banner
    await app.setFilter({ metric: "MASE" });
    expect(captured.banner.at(-1)).toBeNull();
    expect(captured.leaderboard).toHaveLength(2);
  });

  it("discards a stale response when a newer request superseded it", async () => {
    const pending: { url: string; resolve: (body: unknown) => void }[] = [];
    const deferredFetch: FetchLike = (url) => {
      return Promise.resolve({
        ok: true,
        status: 200,
        json: () =>
          new Promise<unknown>((resolve) => {
            pending.push({ url, resolve });
          }),
      });
    };
    const bootstrap = new FakeFetch(bootstrapRoutes());
    const routed: FetchLike = (url) =>
      url.startsWith("/api/leaderboard") ? deferredFetch(url) : bootstrap.fn(url);

    const { sink, captured } = makeSink();
    const app = new App(new ApiClient("", routed), sink);
    const initDone = app.init("");
    // settle the bootstrap requests, leaving the first leaderboard call parked
    while (pending.length === 0) await Promise.resolve();
    const first = app.setFilter({ horizon: 24 });
    const second = app.setFilter({ horizon: 36 });
    while (pending.length < 3) await Promise.resolve();

    // newest answer lands first, the two stale ones afterwards
    pending[2]!.resolve(LEADERBOARD_ALT);
    await second;
    pending[0]!.resolve(LEADERBOARD);
    pending[1]!.resolve(LEADERBOARD);
    await first;
    await initDone;

    expect(captured.leaderboard).toHaveLength(1);
    expect(app.lastGoodLeaderboard?.metric).toBe(LEADERBOARD_ALT.metric);
    expect(app.lastGoodLeaderboard?.horizon).toBe(LEADERBOARD_ALT.horizon);
  });
});
