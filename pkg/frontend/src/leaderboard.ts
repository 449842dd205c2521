// Leaderboard table rendering: pure payload -> HTML string.

import type { LeaderboardResponse, LeaderboardRow } from "./types.js";
import type { SortColumn, SortDirection, ViewState } from "./viewstate.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatScore(score: number): string {
  if (score === 0) return "0";
  const abs = Math.abs(score);
  if (abs >= 1e6 || abs < 1e-4) return score.toExponential(4);
  return score.toPrecision(6);
}

export function sortRows(
  rows: LeaderboardRow[],
  column: SortColumn,
  direction: SortDirection,
): LeaderboardRow[] {
  const sign = direction === "desc" ? -1 : 1;
  return [...rows].sort((a, b) => {
    const x = a[column];
    const y = b[column];
    if (x < y) return -sign;
    if (x > y) return sign;
    return a.model_id < b.model_id ? -1 : 1;
  });
}

const COLUMNS: { key: SortColumn; label: string }[] = [
  { key: "rank", label: "rank" },
  { key: "model_id", label: "model" },
  { key: "score", label: "score" },
  { key: "n_records", label: "records" },
];

export function renderLeaderboard(
  payload: LeaderboardResponse,
  state: ViewState,
): string {
  if (payload.rows.length === 0) {
    return `<p class="empty">no results for ${escapeHtml(payload.metric)} at horizon ${payload.horizon}</p>`;
  }
  const rows = sortRows(payload.rows, state.sortColumn, state.sortDirection);
  const head = COLUMNS.map((c) => {
    const active = c.key === state.sortColumn ? ` class="sorted-${state.sortDirection}"` : "";
    return `<th${active} data-sort="${c.key}">${c.label}</th>`;
  }).join("");
  const body = rows
    .map(
      (r) => `<tr>
  <td class="rank">${r.rank}</td>
  <td class="model">${escapeHtml(r.model_id)}</td>
  <td class="score">${formatScore(r.score)}</td>
  <td class="n">${r.n_records}</td>
</tr>`,
    )
    .join("\n");
  const context = `${escapeHtml(payload.metric)} @ h=${payload.horizon}` +
    (payload.vintage ? `, vintage ${escapeHtml(payload.vintage)}` : "");
  return `<table class="leaderboard" aria-label="${context}">
<thead><tr>${head}</tr></thead>
<tbody>
${body}
</tbody>
</table>`;
}
