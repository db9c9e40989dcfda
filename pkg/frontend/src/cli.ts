#!/usr/bin/env node
// ---------------------------------------------------------------------------
// Render one SVG plot from a Monte Carlo CSV table.
//
//   peakpost-plots --kind pp       --in results/exp1/pivots.csv   --out pp.svg
//   peakpost-plots --kind coverage --in results/exp2/coverage.csv --out cov.svg
//
// The SVG is written only after a successful render, so a schema mismatch or
// empty table never leaves a partial image behind.
// ---------------------------------------------------------------------------

import { readFileSync, realpathSync, writeFileSync } from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';

import {
  PlotError, coverageCurve, fieldHeatmap, ppPlot, rateBars, widthCurve,
} from './plots.js';
import {
  SchemaError, readCoverage, readField, readPivots, readRates,
} from './schema.js';

export const KINDS = ['pp', 'coverage', 'width', 'rates', 'field'] as const;
export type Kind = (typeof KINDS)[number];

export interface RenderOptions {
  statistic?: string;
  experiment?: string;
  target?: string;
  nominal?: number;
  criterion?: string;
}

export function render(kind: string, content: string, opts: RenderOptions = {}): string {
  switch (kind as Kind) {
    case 'pp':
      return ppPlot(readPivots(content), {
        statistic: opts.statistic ?? 'height-tg',
        experiment: opts.experiment,
      });
    case 'coverage':
      return coverageCurve(readCoverage(content), {
        target: opts.target, nominal: opts.nominal,
      });
    case 'width':
      return widthCurve(readCoverage(content), { target: opts.target });
    case 'rates':
      return rateBars(readRates(content), { criterion: opts.criterion });
    case 'field':
      return fieldHeatmap(readField(content));
    default:
      throw new PlotError(`unknown kind "${kind}" (expected ${KINDS.join('|')})`);
  }
}

const USAGE =
  'usage: peakpost-plots --kind pp|coverage|width|rates|field ' +
  '--in table.csv --out plot.svg\n' +
  '       [--statistic height-tg] [--experiment name] ' +
  '[--target height|location] [--nominal 0.9] [--criterion filter]';

export function run(argv: string[]): number {
  let parsed: ReturnType<typeof parseArgs>;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        kind: { type: 'string' },
        in: { type: 'string' },
        out: { type: 'string' },
        statistic: { type: 'string' },
        experiment: { type: 'string' },
        target: { type: 'string' },
        nominal: { type: 'string' },
        criterion: { type: 'string' },
      },
    });
  } catch (err) {
    console.error((err as Error).message);
    console.error(USAGE);
    return 2;
  }
  const values = parsed.values as Record<string, string | undefined>;
  const kind = values.kind;
  const input = values.in;
  const out = values.out;
  if (!kind || !input || !out) {
    console.error(USAGE);
    return 2;
  }
  let nominal: number | undefined;
  if (values.nominal !== undefined) {
    nominal = Number(values.nominal);
    if (!Number.isFinite(nominal) || nominal <= 0 || nominal >= 1) {
      console.error(`--nominal must be a probability in (0, 1), got "${values.nominal}"`);
      return 2;
    }
  }

  let content: string;
  try {
    content = readFileSync(input, 'utf8');
  } catch (err) {
    console.error(`cannot read ${input}: ${(err as Error).message}`);
    return 1;
  }

  let svg: string;
  try {
    svg = render(kind, content, {
      statistic: values.statistic,
      experiment: values.experiment,
      target: values.target,
      nominal,
      criterion: values.criterion,
    });
  } catch (err) {
    if (err instanceof SchemaError || err instanceof PlotError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
  return 0;
}

let invokedDirectly = false;
try {
  invokedDirectly = process.argv[1] !== undefined &&
    pathToFileURL(realpathSync(process.argv[1])).href === import.meta.url;
} catch {
  invokedDirectly = false;
}
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
