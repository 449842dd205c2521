// Rank-trend chart: one polyline per model, rank 1 at the top of the
// y-axis. Rendered as an SVG string; circle titles carry the exact
// trailing scores for hover inspection.

import type { HistoryPoint, HistoryResponse } from "./types.js";
import { escapeHtml, formatScore } from "./leaderboard.js";

export const CHART = {
  width: 640,
  height: 320,
  left: 48,
  right: 120,
  top: 16,
  bottom: 32,
};

const PALETTE = [
  "#2563eb",
  "#dc2626",
  "#16a34a",
  "#9333ea",
  "#ea580c",
  "#0891b2",
  "#be185d",
  "#65a30d",
];

export interface ChartLine {
  modelId: string;
  color: string;
  // [x, y] pixel pairs, one per history point, in origin order
  points: [number, number][];
  ranks: number[];
  scores: number[];
  origins: number[];
}

export function chartLines(points: HistoryPoint[]): ChartLine[] {
  const byModel = new Map<string, HistoryPoint[]>();
  for (const p of points) {
    const list = byModel.get(p.model_id) ?? [];
    list.push(p);
    byModel.set(p.model_id, list);
  }
  const models = [...byModel.keys()].sort();
  const origins = points.map((p) => p.window_end_origin);
  const ranks = points.map((p) => p.trailing_rank);
  const xMin = Math.min(...origins);
  const xMax = Math.max(...origins);
  const rankMax = Math.max(...ranks, 2);
  const plotW = CHART.width - CHART.left - CHART.right;
  const plotH = CHART.height - CHART.top - CHART.bottom;
  const x = (o: number) =>
    xMax === xMin ? CHART.left + plotW / 2 : CHART.left + ((o - xMin) / (xMax - xMin)) * plotW;
  // rank 1 maps to the top edge, larger (worse) ranks move down
  const y = (r: number) => CHART.top + ((r - 1) / (rankMax - 1)) * plotH;

  return models.map((modelId, i) => {
    const pts = [...byModel.get(modelId)!].sort(
      (a, b) => a.window_end_origin - b.window_end_origin,
    );
    return {
      modelId,
      color: PALETTE[i % PALETTE.length]!,
      points: pts.map((p) => [x(p.window_end_origin), y(p.trailing_rank)]),
      ranks: pts.map((p) => p.trailing_rank),
      scores: pts.map((p) => p.trailing_score),
      origins: pts.map((p) => p.window_end_origin),
    };
  });
}

export function renderHistory(payload: HistoryResponse): string {
  if (payload.points.length === 0) {
    const reason = payload.warning
      ? `not enough evaluation origins yet (${escapeHtml(payload.warning)})`
      : "no rank history for this selection";
    return `<p class="empty">${reason}</p>`;
  }
  const lines = chartLines(payload.points);
  const rankMax = Math.max(...payload.points.map((p) => p.trailing_rank), 2);

  const axis: string[] = [];
  for (let r = 1; r <= rankMax; r++) {
    const yy = lines[0] ? CHART.top + ((r - 1) / (rankMax - 1)) * (CHART.height - CHART.top - CHART.bottom) : 0;
    axis.push(
      `<text class="tick" x="${CHART.left - 8}" y="${yy.toFixed(1)}" text-anchor="end" dominant-baseline="middle">${r}</text>`,
      `<line class="grid" x1="${CHART.left}" y1="${yy.toFixed(1)}" x2="${CHART.width - CHART.right}" y2="${yy.toFixed(1)}"/>`,
    );
  }

  const body = lines
    .map((line) => {
      const attr = line.points.map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`).join(" ");
      const dots = line.points
        .map(([px, py], j) => {
          const title = `${line.modelId} @ origin ${line.origins[j]}: rank ${line.ranks[j]}, score ${formatScore(line.scores[j]!)}`;
          return `<circle cx="${px.toFixed(1)}" cy="${py.toFixed(1)}" r="3" fill="${line.color}"><title>${escapeHtml(title)}</title></circle>`;
        })
        .join("");
      return `<g class="model" data-model="${escapeHtml(line.modelId)}">
<polyline fill="none" stroke="${line.color}" stroke-width="2" points="${attr}"/>
${dots}
</g>`;
    })
    .join("\n");

  const legend = lines
    .map((line, i) => {
      const yy = CHART.top + 14 * i;
      return (
        `<rect x="${CHART.width - CHART.right + 10}" y="${yy - 8}" width="10" height="10" fill="${line.color}"/>` +
        `<text class="legend" x="${CHART.width - CHART.right + 26}" y="${yy}" dominant-baseline="middle">${escapeHtml(line.modelId)}</text>`
      );
    })
    .join("\n");

  return `<svg class="history" viewBox="0 0 ${CHART.width} ${CHART.height}" role="img" aria-label="trailing rank by origin">
${axis.join("\n")}
${body}
${legend}
</svg>`;
}
