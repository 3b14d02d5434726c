/** Deterministic log-log SVG rendering: no timestamps, no randomness,
 * fixed styling, so the same input always yields the same bytes. */

import { BenchRow } from "./csv";

export interface PlotFilter {
  option: string;
  model: string;
  k: number;
}

export interface Series {
  method: string;
  points: { cost: number; mse: number }[];
}

export class RenderError extends Error {}

const WIDTH = 860;
const HEIGHT = 560;
const MARGIN = { top: 50, right: 40, bottom: 60, left: 90 };

const SERIES_COLORS: Record<string, string> = {
  pf: "#1f77b4",
  mlpf: "#d62728",
  mc: "#2ca02c",
};

/** Filter rows, drop non-plottable points (log axes), group per method. */
export function buildSeries(
  rows: BenchRow[],
  filter: PlotFilter
): { series: Series[]; warnings: string[] } {
  const warnings: string[] = [];
  const kept: BenchRow[] = [];
  for (const row of rows) {
    if (row.option !== filter.option || row.model !== filter.model || row.k !== filter.k) {
      continue;
    }
    if (!(row.mse > 0) || !(row.cost > 0)) {
      warnings.push(
        `excluded ${row.method}@L${row.level}: non-positive mse/cost on log axes`
      );
      continue;
    }
    kept.push(row);
  }
  if (kept.length === 0) {
    throw new RenderError(
      `no rows match option=${filter.option} model=${filter.model} k=${filter.k}`
    );
  }
  const methods = [...new Set(kept.map((r) => r.method))].sort();
  const series = methods.map((method) => ({
    method,
    points: kept
      .filter((r) => r.method === method)
      .map((r) => ({ cost: r.cost, mse: r.mse }))
      .sort((a, b) => a.cost - b.cost),
  }));
  return { series, warnings };
}

function decadeTicks(lo: number, hi: number): number[] {
  const start = Math.floor(lo);
  const end = Math.ceil(hi);
  const step = Math.max(1, Math.ceil((end - start) / 8));
  const ticks: number[] = [];
  for (let e = start; e <= end; e += step) {
    ticks.push(e);
  }
  return ticks;
}

const fmt = (x: number) => x.toFixed(2);

export function renderSvg(series: Series[], filter: PlotFilter): string {
  const costs = series.flatMap((s) => s.points.map((p) => Math.log10(p.cost)));
  const mses = series.flatMap((s) => s.points.map((p) => Math.log10(p.mse)));
  let xLo = Math.floor(Math.min(...costs));
  let xHi = Math.ceil(Math.max(...costs));
  let yLo = Math.floor(Math.min(...mses));
  let yHi = Math.ceil(Math.max(...mses));
  if (xLo === xHi) xHi += 1;
  if (yLo === yHi) yHi += 1;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (logc: number) => MARGIN.left + ((logc - xLo) / (xHi - xLo)) * plotW;
  const sy = (logm: number) => MARGIN.top + plotH - ((logm - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-size="18">` +
      `${filter.option} / ${filter.model}, k=${filter.k}</text>`
  );

  for (const e of decadeTicks(xLo, xHi)) {
    const x = fmt(sx(e));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" ` +
        `stroke="#dddddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 22}" text-anchor="middle" ` +
        `font-size="12">1e${e}</text>`
    );
  }
  for (const e of decadeTicks(yLo, yHi)) {
    const y = fmt(sy(e));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" ` +
        `stroke="#dddddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle" ` +
        `font-size="12">1e${e}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
      `font-size="14">cost (Euler steps)</text>`
  );
  parts.push(
    `<text x="22" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="14" ` +
      `transform="rotate(-90 22 ${MARGIN.top + plotH / 2})">MSE</text>`
  );

  series.forEach((s) => {
    const color = SERIES_COLORS[s.method] ?? "#7f7f7f";
    const coords = s.points.map(
      (p) => `${fmt(sx(Math.log10(p.cost)))},${fmt(sy(Math.log10(p.mse)))}`
    );
    parts.push(
      `<polyline class="series-${s.method}" points="${coords.join(" ")}" fill="none" ` +
        `stroke="${color}" stroke-width="2"/>`
    );
    for (const c of coords) {
      const [x, y] = c.split(",");
      parts.push(
        `<circle class="marker-${s.method}" cx="${x}" cy="${y}" r="4" fill="${color}"/>`
      );
    }
  });

  const legendX = MARGIN.left + plotW - 130;
  series.forEach((s, i) => {
    const y = MARGIN.top + 16 + i * 20;
    const color = SERIES_COLORS[s.method] ?? "#7f7f7f";
    parts.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 26}" y2="${y}" ` +
        `stroke="${color}" stroke-width="2"/>`
    );
    parts.push(
      `<circle cx="${legendX + 13}" cy="${y}" r="4" fill="${color}"/>`
    );
    parts.push(
      `<text x="${legendX + 34}" y="${y + 4}" font-size="13">${s.method}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
