// ---------------------------------------------------------------------------
// SVG plot builders for the Monte Carlo tables: pivot PP plots, coverage and
// width curves across experiment cells, rate bars, and a field heatmap.
// Each builder returns a complete SVG document string.
// ---------------------------------------------------------------------------

import type { CoverageRow, FieldRow, PivotRow, RateRow } from './schema.js';
import {
  Frame, PALETTE, axes, circle, legend, line, linearScale, log10Scale,
  polyline, rect, svgDocument, text, ticks,
} from './svg.js';

export class PlotError extends Error {}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 30, right: 150, bottom: 44, left: 56 };

function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  logY = false,
): Frame {
  const x = linearScale(xDomain, [MARGIN.left, WIDTH - MARGIN.right]);
  const yRange: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const y = logY ? log10Scale(yDomain, yRange) : linearScale(yDomain, yRange);
  return { width: WIDTH, height: HEIGHT, margin: MARGIN, x, y };
}

const fmtTick = (v: number): string =>
  Math.abs(v) >= 1000 || (v !== 0 && Math.abs(v) < 0.01)
    ? v.toExponential(0)
    : Number(v.toPrecision(4)).toString();

function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}

/** Order of first appearance, which the harness writes in config order. */
function cellOrder(names: string[]): string[] {
  return [...new Set(names)];
}

export interface PpOptions {
  statistic: string;
  experiment?: string;
}

/**
 * Probability-probability plot: sorted pivot values against uniform plotting
 * positions.  A well-calibrated pivot hugs the diagonal.
 */
export function ppPlot(rows: PivotRow[], opts: PpOptions): string {
  let kept = rows.filter((r) => r.statistic === opts.statistic);
  if (opts.experiment) kept = kept.filter((r) => r.experiment === opts.experiment);
  if (kept.length === 0) {
    const stats = [...new Set(rows.map((r) => r.statistic))].sort().join(', ');
    throw new PlotError(
      `no pivot rows for statistic "${opts.statistic}"` +
      (opts.experiment ? ` in experiment "${opts.experiment}"` : '') +
      `; available statistics: ${stats}`,
    );
  }
  const frame = makeFrame([0, 1], [0, 1]);
  const { x, y } = frame;
  const parts: string[] = [];
  parts.push(line(x(0), y(0), x(1), y(1),
    'stroke="#999" stroke-width="1" stroke-dasharray="4 3"'));
  const series = groupBy(kept, (r) => `${r.experiment}/${r.method}`);
  const entries: Array<[string, string]> = [];
  let i = 0;
  for (const [name, data] of series) {
    const color = PALETTE[i % PALETTE.length];
    i += 1;
    const values = data.map((r) => r.value).sort((a, b) => a - b);
    const pts: Array<[number, number]> = values.map((v, j) => [
      x((j + 0.5) / values.length), y(Math.min(1, Math.max(0, v))),
    ]);
    parts.push(polyline(pts, `stroke="${color}" stroke-width="1.5"`));
    entries.push([`${name} (n=${values.length})`, color]);
  }
  const tickPairs: Array<[number, string]> = ticks(0, 1, 5).map((t) => [t, fmtTick(t)]);
  parts.push(axes(frame, {
    xTicks: tickPairs, yTicks: tickPairs,
    xLabel: 'uniform quantile', yLabel: 'pivot value',
    title: `pivot calibration: ${opts.statistic}`,
  }));
  parts.push(legend(entries, WIDTH - MARGIN.right + 8, MARGIN.top));
  return svgDocument(WIDTH, HEIGHT, parts.join('\n'));
}

export interface CoverageOptions {
  target?: string;
  nominal?: number;
}

/**
 * Conditional coverage per experiment cell with +-2se whiskers, one series
 * per method, against the nominal level.
 */
export function coverageCurve(rows: CoverageRow[], opts: CoverageOptions = {}): string {
  const target = opts.target ?? 'height';
  const nominal = opts.nominal ?? 0.9;
  const kept = rows.filter((r) => r.target === target);
  if (kept.length === 0) {
    const targets = [...new Set(rows.map((r) => r.target))].sort().join(', ');
    throw new PlotError(`no coverage rows for target "${target}"; available: ${targets}`);
  }
  const cells = cellOrder(kept.map((r) => r.experiment));
  const values = kept.map((r) => r.coverage);
  const los = kept.map((r) => r.coverage - 2 * (Number.isFinite(r.se) ? r.se : 0));
  const his = kept.map((r) => r.coverage + 2 * (Number.isFinite(r.se) ? r.se : 0));
  const yLo = Math.min(nominal - 0.05, ...los) - 0.01;
  const yHi = Math.min(1.0, Math.max(nominal + 0.05, ...his) + 0.01);
  const frame = makeFrame([-0.5, cells.length - 0.5], [yLo, yHi]);
  const { x, y } = frame;
  const parts: string[] = [];
  parts.push(line(x(-0.5), y(nominal), x(cells.length - 0.5), y(nominal),
    'stroke="#999" stroke-width="1" stroke-dasharray="4 3"'));
  const series = groupBy(kept, (r) => r.method);
  const entries: Array<[string, string]> = [];
  let i = 0;
  for (const [method, data] of series) {
    const color = PALETTE[i % PALETTE.length];
    i += 1;
    const pts: Array<[number, number]> = [];
    for (const row of data) {
      const cx = x(cells.indexOf(row.experiment));
      const cy = y(row.coverage);
      pts.push([cx, cy]);
      if (Number.isFinite(row.se)) {
        parts.push(line(cx, y(row.coverage - 2 * row.se), cx,
          y(row.coverage + 2 * row.se), `stroke="${color}" stroke-width="1"`));
      }
      parts.push(circle(cx, cy, 3, `fill="${color}"`));
    }
    pts.sort((a, b) => a[0] - b[0]);
    parts.push(polyline(pts, `stroke="${color}" stroke-width="1.5"`));
    entries.push([method, color]);
  }
  parts.push(axes(frame, {
    xTicks: cells.map((name, j) => [j, name] as [number, string]),
    yTicks: ticks(yLo, yHi, 6).map((t) => [t, fmtTick(t)] as [number, string]),
    yLabel: 'conditional coverage',
    title: `coverage of ${target} (nominal ${nominal})`,
  }));
  parts.push(legend(entries, WIDTH - MARGIN.right + 8, MARGIN.top));
  return svgDocument(WIDTH, HEIGHT, parts.join('\n'));
}

/**
 * Mean interval/region width per experiment cell, one series per method.
 * Switches to a log axis when widths span more than a factor of 25.
 */
export function widthCurve(rows: CoverageRow[], opts: { target?: string } = {}): string {
  const target = opts.target ?? 'height';
  const kept = rows.filter((r) => r.target === target && Number.isFinite(r.meanWidth));
  if (kept.length === 0) {
    throw new PlotError(`no width data for target "${target}"`);
  }
  const cells = cellOrder(kept.map((r) => r.experiment));
  const widths = kept.map((r) => r.meanWidth);
  const wLo = Math.min(...widths);
  const wHi = Math.max(...widths);
  const logY = wLo > 0 && wHi / wLo > 25;
  const pad = logY ? 1.3 : 1.08;
  const frame = makeFrame(
    [-0.5, cells.length - 0.5],
    logY ? [wLo / pad, wHi * pad] : [0, wHi * pad],
    logY,
  );
  const { x, y } = frame;
  const parts: string[] = [];
  const series = groupBy(kept, (r) => r.method);
  const entries: Array<[string, string]> = [];
  let i = 0;
  for (const [method, data] of series) {
    const color = PALETTE[i % PALETTE.length];
    i += 1;
    const pts: Array<[number, number]> = data
      .map((row) => [x(cells.indexOf(row.experiment)), y(row.meanWidth)] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    for (const [cx, cy] of pts) parts.push(circle(cx, cy, 3, `fill="${color}"`));
    parts.push(polyline(pts, `stroke="${color}" stroke-width="1.5"`));
    entries.push([method, color]);
  }
  const yTickVals = logY
    ? ticks(Math.ceil(Math.log10(wLo / pad)), Math.floor(Math.log10(wHi * pad)), 5)
        .map((e) => Math.pow(10, e))
    : ticks(0, wHi * pad, 6);
  parts.push(axes(frame, {
    xTicks: cells.map((name, j) => [j, name] as [number, string]),
    yTicks: yTickVals.map((t) => [t, fmtTick(t)] as [number, string]),
    yLabel: logY ? `mean ${target} width (log)` : `mean ${target} width`,
    title: `interval width: ${target}`,
  }));
  parts.push(legend(entries, WIDTH - MARGIN.right + 8, MARGIN.top));
  return svgDocument(WIDTH, HEIGHT, parts.join('\n'));
}

/**
 * Bars for the error-rate and count summaries, +-2se whiskers, optional
 * substring filter on the criterion name.
 */
export function rateBars(rows: RateRow[], opts: { criterion?: string } = {}): string {
  let kept = rows.filter((r) => Number.isFinite(r.value));
  if (opts.criterion) {
    kept = kept.filter((r) => r.criterion.includes(opts.criterion as string));
  }
  if (kept.length === 0) {
    throw new PlotError(
      opts.criterion
        ? `no finite rate rows matching criterion "${opts.criterion}"`
        : 'no finite rate rows',
    );
  }
  const experiments = cellOrder(kept.map((r) => r.experiment));
  const multiExp = experiments.length > 1;
  const labels = kept.map((r) => (multiExp ? `${r.experiment}:${r.criterion}` : r.criterion));
  const his = kept.map((r) => r.value + 2 * (Number.isFinite(r.se) ? r.se : 0));
  const yHi = Math.max(...his) * 1.1 || 1;
  const frame = makeFrame([-0.6, kept.length - 0.4], [0, yHi]);
  const { x, y } = frame;
  const parts: string[] = [];
  const barHalf = Math.min(18, (x(1) - x(0)) * 0.35 || 18);
  kept.forEach((row, j) => {
    const color = PALETTE[experiments.indexOf(row.experiment) % PALETTE.length];
    const cx = x(j);
    parts.push(rect(cx - barHalf, y(row.value), 2 * barHalf, y(0) - y(row.value),
      `fill="${color}" fill-opacity="0.75"`));
    if (Number.isFinite(row.se)) {
      parts.push(line(cx, y(Math.max(0, row.value - 2 * row.se)), cx,
        y(row.value + 2 * row.se), 'stroke="#333" stroke-width="1"'));
    }
  });
  const xTicks = labels.map((label, j) => [j, label] as [number, string]);
  parts.push(axes(frame, {
    xTicks,
    yTicks: ticks(0, yHi, 6).map((t) => [t, fmtTick(t)] as [number, string]),
    yLabel: 'rate',
    title: opts.criterion ? `rates: ${opts.criterion}` : 'error rates',
  }));
  if (multiExp) {
    parts.push(legend(
      experiments.map((e, j) => [e, PALETTE[j % PALETTE.length]] as [string, string]),
      WIDTH - MARGIN.right + 8, MARGIN.top));
  }
  return svgDocument(WIDTH, HEIGHT, parts.join('\n'));
}

/** Grayscale heatmap of one simulated field (dark = high). */
export function fieldHeatmap(rows: FieldRow[]): string {
  const t0s = [...new Set(rows.map((r) => r.t0))].sort((a, b) => a - b);
  const t1s = [...new Set(rows.map((r) => r.t1))].sort((a, b) => a - b);
  if (t0s.length < 2 || t1s.length < 2 || rows.length !== t0s.length * t1s.length) {
    throw new PlotError(
      `field is not a full grid: ${rows.length} rows for ` +
      `${t0s.length} x ${t1s.length} coordinates`,
    );
  }
  const vLo = Math.min(...rows.map((r) => r.value));
  const vHi = Math.max(...rows.map((r) => r.value));
  const size = 520;
  const margin = 50;
  const cw = (size - 2 * margin) / t0s.length;
  const ch = (size - 2 * margin) / t1s.length;
  const shade = (v: number): string => {
    const u = vHi > vLo ? (v - vLo) / (vHi - vLo) : 0.5;
    const g = Math.round(240 - 210 * u);
    return `rgb(${g},${g},${g})`;
  };
  const parts: string[] = [];
  for (const row of rows) {
    const ix = t0s.indexOf(row.t0);
    const iy = t1s.indexOf(row.t1);
    parts.push(rect(
      margin + ix * cw, size - margin - (iy + 1) * ch, cw + 0.5, ch + 0.5,
      `fill="${shade(row.value)}"`,
    ));
  }
  parts.push(text(size / 2, 24,
    `simulated field (min ${vLo.toFixed(2)}, max ${vHi.toFixed(2)})`,
    'text-anchor="middle" font-size="13" font-weight="bold"'));
  parts.push(rect(margin, margin, size - 2 * margin, size - 2 * margin,
    'fill="none" stroke="#333"'));
  return svgDocument(size, size, parts.join('\n'));
}
