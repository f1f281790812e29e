// Chart models and SVG renderers for posterior summaries. Bars come straight
// from the engine's raw bins; no smoothing happens client-side, so the chart
// is exactly what the sampler computed.

import type {
  BooleanSummaryData,
  CategoricalSummaryData,
  GenericSummaryData,
  NumericSummaryData,
  PosteriorSummary,
} from './types.js';

export type ChartKind = 'probability-bar' | 'histogram' | 'frequency-table';

export interface ChartModel {
  kind: ChartKind;
  n: number;
  acceptanceRate: number;
  // probability-bar
  p?: number;
  stderr?: number;
  // histogram
  binEdges?: number[];
  counts?: number[];
  mean?: number;
  stdev?: number;
  // frequency-table
  rows?: Array<{ label: string; count: number; share: number }>;
}

export function chartModel(summary: PosteriorSummary): ChartModel {
  const base = { n: summary.n, acceptanceRate: summary.acceptance_rate };
  if (summary.kind === 'boolean-probability') {
    const data = summary.data as BooleanSummaryData;
    return { kind: 'probability-bar', p: data.p, stderr: data.stderr, ...base };
  }
  if (summary.kind === 'numeric') {
    const data = summary.data as NumericSummaryData;
    return {
      kind: 'histogram',
      binEdges: data.bin_edges,
      counts: data.counts,
      mean: data.mean,
      stdev: data.stdev,
      ...base,
    };
  }
  const counts =
    summary.kind === 'categorical'
      ? (summary.data as CategoricalSummaryData).counts
      : (summary.data as GenericSummaryData).counts;
  const total = Object.values(counts).reduce((a, b) => a + b, 0) || 1;
  const rows = Object.entries(counts)
    .sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]))
    .map(([label, count]) => ({ label, count, share: count / total }));
  return { kind: 'frequency-table', rows, ...base };
}

export function totalCount(model: ChartModel): number {
  if (model.kind === 'probability-bar') return model.n;
  if (model.kind === 'histogram') return (model.counts ?? []).reduce((a, b) => a + b, 0);
  return (model.rows ?? []).reduce((a, row) => a + row.count, 0);
}

const W = 420;

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');
}

export function chartSvg(model: ChartModel): string {
  if (model.kind === 'probability-bar') return probabilityBarSvg(model);
  if (model.kind === 'histogram') return histogramSvg(model);
  return frequencyTableSvg(model);
}

function probabilityBarSvg(model: ChartModel): string {
  const p = model.p ?? 0;
  const stderr = model.stderr ?? 0;
  const barWidth = Math.round(p * (W - 120));
  const label = `P(true) = ${p.toFixed(3)} ± ${stderr.toFixed(3)}`;
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} 56" class="chart chart-probability">`,
    `<rect x="10" y="18" width="${W - 120}" height="20" fill="#e8e8ef" rx="4"/>`,
    `<rect x="10" y="18" width="${barWidth}" height="20" fill="#4466cc" rx="4"/>`,
    `<text x="10" y="12" font-size="12">${esc(label)} · n=${model.n}</text>`,
    `<text x="${W - 100}" y="33" font-size="12">${(100 * p).toFixed(1)}%</text>`,
    `</svg>`,
  ].join('');
}

function histogramSvg(model: ChartModel): string {
  const counts = model.counts ?? [];
  const edges = model.binEdges ?? [];
  const peak = Math.max(1, ...counts);
  const plotH = 90;
  const barW = (W - 40) / Math.max(1, counts.length);
  const bars = counts
    .map((count, i) => {
      const h = Math.round((count / peak) * plotH);
      const x = 20 + i * barW;
      return `<rect x="${x.toFixed(1)}" y="${(12 + plotH - h).toFixed(1)}" width="${Math.max(1, barW - 1).toFixed(1)}" height="${h}" fill="#4466cc"><title>[${edges[i]?.toFixed(2)}, ${edges[i + 1]?.toFixed(2)}): ${count}</title></rect>`;
    })
    .join('');
  const caption = `mean=${model.mean?.toFixed(2)} sd=${model.stdev?.toFixed(2)} n=${model.n}`;
  const lo = edges[0]?.toFixed(1) ?? '';
  const hi = edges[edges.length - 1]?.toFixed(1) ?? '';
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} 130" class="chart chart-histogram">`,
    `<text x="20" y="10" font-size="12">${esc(caption)}</text>`,
    bars,
    `<line x1="20" y1="${12 + plotH}" x2="${W - 20}" y2="${12 + plotH}" stroke="#555"/>`,
    `<text x="20" y="${plotH + 26}" font-size="11">${esc(lo)}</text>`,
    `<text x="${W - 50}" y="${plotH + 26}" font-size="11">${esc(hi)}</text>`,
    `</svg>`,
  ].join('');
}

function frequencyTableSvg(model: ChartModel): string {
  const rows = model.rows ?? [];
  const rowH = 20;
  const height = 16 + rows.length * rowH;
  const body = rows
    .map((row, i) => {
      const y = 14 + i * rowH;
      const barWidth = Math.round(row.share * (W - 220));
      return [
        `<text x="10" y="${y + 12}" font-size="12">${esc(row.label)}</text>`,
        `<rect x="150" y="${y}" width="${barWidth}" height="14" fill="#4466cc"/>`,
        `<text x="${155 + barWidth}" y="${y + 12}" font-size="11">${row.count} (${(100 * row.share).toFixed(1)}%)</text>`,
      ].join('');
    })
    .join('');
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${height}" class="chart chart-frequency">`,
    body,
    `</svg>`,
  ].join('');
}
