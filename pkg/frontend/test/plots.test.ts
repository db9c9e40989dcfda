import { readFileSync } from 'node:fs';
import { fileURLToPath } from 'node:url';

import { describe, expect, test } from 'vitest';

import {
  PlotError, coverageCurve, fieldHeatmap, ppPlot, rateBars, widthCurve,
} from '../src/plots.js';
import type { CoverageRow, FieldRow, RateRow } from '../src/schema.js';
import { readCoverage, readField, readPivots, readRates } from '../src/schema.js';

const fixture = (rel: string): string =>
  readFileSync(fileURLToPath(new URL(`./fixtures/${rel}`, import.meta.url)), 'utf8');

const coverageRow = (over: Partial<CoverageRow>): CoverageRow => ({
  experiment: 'cell-a', method: 'standard', target: 'height', n: 100,
  coverage: 0.9, se: 0.03, meanWidth: 1.0, seWidth: 0.05, ...over,
});

const rateRow = (over: Partial<RateRow>): RateRow => ({
  experiment: 'nine-bumps', criterion: 'eps-pcer', value: 0.05,
  se: 0.01, numerator: 5, denominator: 100, replicates: 50, ...over,
});

describe('ppPlot', () => {
  const pivots = readPivots(fixture('exp1/pivots.csv'));

  test('draws one curve per experiment/method with the diagonal', () => {
    const svg = ppPlot(pivots, { statistic: 'height-tg' });
    expect(svg.startsWith('<svg ')).toBe(true);
    expect(svg).toContain('stroke-dasharray="4 3"');
    expect(svg).toContain('pivot calibration: height-tg');
    const curves = (svg.match(/<polyline /g) ?? []).length;
    const cells = new Set(pivots.map((r) => r.experiment)).size;
    expect(curves).toBe(cells);
    expect(svg).toContain('(n=');
  });

  test('experiment filter keeps a single curve', () => {
    const svg = ppPlot(pivots, { statistic: 'height-tg', experiment: 'bump-mu7-u5' });
    expect((svg.match(/<polyline /g) ?? []).length).toBe(1);
  });

  test('unknown statistic lists what is available', () => {
    expect(() => ppPlot(pivots, { statistic: 'no-such' }))
      .toThrow(/available statistics: .*height-tg/);
    expect(() => ppPlot(pivots, { statistic: 'no-such' })).toThrow(PlotError);
  });
});

describe('coverageCurve', () => {
  const coverage = readCoverage(fixture('exp1/coverage.csv'));

  test('plots points, whiskers and the nominal line', () => {
    const svg = coverageCurve(coverage, { target: 'height' });
    expect(svg).toContain('coverage of height (nominal 0.9)');
    const points = (svg.match(/<circle /g) ?? []).length;
    expect(points).toBe(coverage.filter((r) => r.target === 'height').length);
    expect(svg).toContain('bump-mu7-u5');
    expect(svg).toContain('bump-mu11-u13');
  });

  test('rejects a target that is not in the table', () => {
    expect(() => coverageCurve(coverage, { target: 'volume' }))
      .toThrow(/no coverage rows for target "volume"; available: .*height/);
  });
});

describe('widthCurve', () => {
  test('narrow spread stays on a linear axis', () => {
    const rows = [
      coverageRow({ experiment: 'a', meanWidth: 1.0 }),
      coverageRow({ experiment: 'b', meanWidth: 2.0 }),
    ];
    const svg = widthCurve(rows);
    expect(svg).toContain('mean height width');
    expect(svg).not.toContain('(log)');
  });

  test('wide spread switches to a log axis', () => {
    const rows = [
      coverageRow({ experiment: 'a', meanWidth: 0.1 }),
      coverageRow({ experiment: 'b', meanWidth: 10.0 }),
    ];
    expect(widthCurve(rows)).toContain('mean height width (log)');
  });

  test('draws one series per method on a randomized-comparison table', () => {
    const rows = readCoverage(fixture('exp2/coverage.csv'));
    const svg = widthCurve(rows, { target: 'height' });
    for (const method of ['standard', 'split', 'carve']) {
      expect(svg).toContain(method);
    }
    const curves = (svg.match(/<polyline /g) ?? []).length;
    expect(curves).toBe(3);
  });

  test('non-finite widths are dropped, empty selection is an error', () => {
    const rows = [
      coverageRow({ experiment: 'a', meanWidth: NaN }),
      coverageRow({ experiment: 'b', meanWidth: 3.0 }),
    ];
    expect(widthCurve(rows)).toContain('interval width: height');
    expect(() => widthCurve([coverageRow({ meanWidth: NaN })]))
      .toThrow(/no width data for target "height"/);
  });
});

describe('rateBars', () => {
  test('renders real rate tables', () => {
    const rates = readRates(fixture('exp3/rates.csv'));
    const svg = rateBars(rates);
    expect(svg.startsWith('<svg ')).toBe(true);
    expect(svg).toContain('error rates');
  });

  test('criterion substring filter and nan skipping', () => {
    const rows = [
      rateRow({ criterion: 'eps-pcer', value: 0.04 }),
      rateRow({ criterion: 'pcmr-height', value: NaN }),
      rateRow({ criterion: 'pcmr-location', value: 0.08 }),
    ];
    const svg = rateBars(rows, { criterion: 'pcmr' });
    expect(svg).toContain('pcmr-location');
    expect(svg).not.toContain('pcmr-height');
    expect(svg).not.toContain('eps-pcer');
  });

  test('a filter that matches nothing is an error', () => {
    expect(() => rateBars([rateRow({})], { criterion: 'zzz' }))
      .toThrow(/no finite rate rows matching criterion "zzz"/);
  });
});

describe('fieldHeatmap', () => {
  test('draws one shaded cell per grid point', () => {
    const rows = readField(fixture('sim/field.csv'));
    const svg = fieldHeatmap(rows);
    const rects = (svg.match(/<rect /g) ?? []).length;
    expect(rects).toBe(rows.length + 2); // cells + border + background
    expect(svg).toContain('simulated field (min ');
  });

  test('rejects a ragged grid', () => {
    const grid: FieldRow[] = [];
    for (const t0 of [0, 1, 2]) {
      for (const t1 of [0, 1]) {
        grid.push({ t0, t1, mu: 0, value: t0 + t1 });
      }
    }
    expect(fieldHeatmap(grid)).toContain('<svg ');
    expect(() => fieldHeatmap(grid.slice(1))).toThrow(/field is not a full grid/);
  });
});
