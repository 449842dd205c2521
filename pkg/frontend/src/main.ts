// Browser bootstrap: the only module that touches the document.

import { ApiClient } from "./api.js";
import { App, type Sink, type ViewName } from "./app.js";
import { manifestFileText, validateManifestForm, type ManifestForm } from "./manifest.js";
import type { SortColumn } from "./viewstate.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function option(value: string, selected: boolean): string {
  const sel = selected ? " selected" : "";
  return `<option value="${value}"${sel}>${value}</option>`;
}

function readManifestForm(): ManifestForm {
  return {
    modelId: el<HTMLInputElement>("reg-model-id").value,
    displayName: el<HTMLInputElement>("reg-display-name").value,
    modelType: el<HTMLInputElement>("reg-model-type").value,
    command: el<HTMLTextAreaElement>("reg-command").value,
    inputWindowLen: el<HTMLInputElement>("reg-window").value,
    horizonsSupported: el<HTMLInputElement>("reg-horizons").value,
    timeoutSeconds: el<HTMLInputElement>("reg-timeout").value,
  };
}

async function start(): Promise<void> {
  const sink: Sink = {
    leaderboard: (html) => {
      el("leaderboard-view").innerHTML = html;
      for (const th of el("leaderboard-view").querySelectorAll<HTMLElement>("th[data-sort]")) {
        th.addEventListener("click", () => app.setSort(th.dataset.sort as SortColumn));
      }
    },
    history: (html) => {
      el("history-view").innerHTML = html;
    },
    banner: (message) => {
      const banner = el("banner");
      banner.textContent = message ?? "";
      banner.hidden = message === null;
    },
    url: (query) => {
      history.replaceState(null, "", query ? `?${query}` : location.pathname);
    },
  };

  const app = new App(new ApiClient(""), sink);
  await app.init(location.search.replace(/^\?/, ""));

  const cfg = app.config!;
  el("metric").innerHTML = cfg.metrics.map((m) => option(m, m === app.state.metric)).join("");
  el("horizon").innerHTML = cfg.horizons
    .map((h) => option(String(h), h === app.state.horizon))
    .join("");
  el("vintage").innerHTML =
    option("latest", app.state.vintage === null) +
    app.vintages.map((v) => option(v.id, v.id === app.state.vintage)).join("");
  el<HTMLInputElement>("window").value = String(app.state.window);
  el<HTMLInputElement>("reg-window").value = String(cfg.lookback);

  el("metric").addEventListener("change", (e) => {
    void app.setFilter({ metric: (e.target as HTMLSelectElement).value });
  });
  el("horizon").addEventListener("change", (e) => {
    void app.setFilter({ horizon: Number((e.target as HTMLSelectElement).value) });
  });
  el("vintage").addEventListener("change", (e) => {
    const value = (e.target as HTMLSelectElement).value;
    void app.setFilter({ vintage: value === "latest" ? null : value });
  });
  el("window").addEventListener("change", (e) => {
    const value = Number((e.target as HTMLInputElement).value);
    if (Number.isInteger(value) && value >= 1) void app.setFilter({ window: value });
  });

  for (const tab of document.querySelectorAll<HTMLElement>("[data-view]")) {
    tab.addEventListener("click", () => {
      const view = tab.dataset.view as ViewName;
      for (const t of document.querySelectorAll("[data-view]")) t.classList.toggle("active", t === tab);
      el("leaderboard-view").hidden = view !== "leaderboard";
      el("history-view").hidden = view !== "history";
      void app.setView(view);
    });
  }

  el("reg-form").addEventListener("submit", (e) => {
    e.preventDefault();
    const { errors, manifest } = validateManifestForm(
      readManifestForm(),
      cfg.lookback,
      cfg.horizons,
    );
    for (const field of document.querySelectorAll<HTMLElement>("[data-error-for]")) {
      const key = field.dataset.errorFor as keyof typeof errors;
      field.textContent = errors[key] ?? "";
    }
    if (manifest) {
      const blob = new Blob([manifestFileText(manifest)], { type: "application/json" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "manifest";
      a.click();
      URL.revokeObjectURL(a.href);
    }
  });
}

void start();
