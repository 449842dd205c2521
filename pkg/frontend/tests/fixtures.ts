// Recorded API bodies (see scripts/record_ui_fixtures.py in the repo
// root). Tests run entirely against these; no server is involved.

import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const FIXTURE_DIR = path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

export function loadFixture<T>(name: string): T {
  return JSON.parse(fs.readFileSync(path.join(FIXTURE_DIR, name), "utf-8")) as T;
}

export interface Route {
  pattern: RegExp;
  status?: number;
  body: unknown;
}

// Minimal fetch stand-in: first matching route wins, every call is logged.
export class FakeFetch {
  readonly log: string[] = [];

  constructor(readonly routes: Route[]) {}

  fn: FetchLike = (url) => {
    this.log.push(url);
    const route = this.routes.find((r) => r.pattern.test(url));
    if (!route) return Promise.reject(new Error(`unrouted url ${url}`));
    const status = route.status ?? 200;
    return Promise.resolve({
      ok: status < 400,
      status,
      json: () => Promise.resolve(route.body),
    });
  };

  requestsTo(pathPrefix: string): string[] {
    return this.log.filter((u) => u.startsWith(pathPrefix));
  }
}

export function bootstrapRoutes(): Route[] {
  return [
    { pattern: /\/api\/config/, body: loadFixture("config.json") },
    { pattern: /\/api\/models/, body: loadFixture("models.json") },
    { pattern: /\/api\/vintages/, body: loadFixture("vintages.json") },
  ];
}
