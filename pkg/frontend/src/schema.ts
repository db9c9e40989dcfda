// ---------------------------------------------------------------------------
// Typed readers for the Monte Carlo CSV outputs.  Every file starts with a
// "# schema: <name>/<version>" line followed by a fixed header; anything
// else is rejected so plots never render from the wrong table.
// ---------------------------------------------------------------------------

import Papa from 'papaparse';

export type SchemaName =
  | 'peakpost.pivots/1'
  | 'peakpost.coverage/1'
  | 'peakpost.rates/1'
  | 'peakpost.field/1';

export const EXPECTED_COLUMNS: Record<SchemaName, readonly string[]> = {
  'peakpost.pivots/1': ['experiment', 'method', 'statistic', 'replicate', 'value'],
  'peakpost.coverage/1': [
    'experiment', 'method', 'target', 'n', 'coverage', 'se', 'mean_width', 'se_width',
  ],
  'peakpost.rates/1': [
    'experiment', 'criterion', 'value', 'se', 'numerator', 'denominator', 'replicates',
  ],
  'peakpost.field/1': ['t0', 't1', 'mu', 'value'],
};

export class SchemaError extends Error {}

export interface PivotRow {
  experiment: string;
  method: string;
  statistic: string;
  replicate: number;
  value: number;
}

export interface CoverageRow {
  experiment: string;
  method: string;
  target: string;
  n: number;
  coverage: number;
  se: number;
  meanWidth: number;
  seWidth: number;
}

export interface RateRow {
  experiment: string;
  criterion: string;
  value: number;
  se: number;
  numerator: number;
  denominator: number;
  replicates: number;
}

export interface FieldRow {
  t0: number;
  t1: number;
  mu: number;
  value: number;
}

type RawRow = Record<string, string>;

/** Split off and check the schema line, then parse the remaining CSV. */
export function parseTable(content: string, schema: SchemaName): RawRow[] {
  const firstBreak = content.indexOf('\n');
  const schemaLine = (firstBreak < 0 ? content : content.slice(0, firstBreak)).trim();
  const want = `# schema: ${schema}`;
  if (schemaLine !== want) {
    throw new SchemaError(`schema mismatch: expected "${want}", found "${schemaLine}"`);
  }
  const body = firstBreak < 0 ? '' : content.slice(firstBreak + 1).trim();
  if (body === '') {
    throw new SchemaError(`no header or rows after the schema line (${schema})`);
  }
  const parsed = Papa.parse<RawRow>(body, { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`malformed csv: ${e.message} (row ${e.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  const expected = EXPECTED_COLUMNS[schema];
  if (
    columns.length !== expected.length ||
    expected.some((name, i) => columns[i] !== name)
  ) {
    throw new SchemaError(
      `column mismatch: expected [${expected.join(', ')}], found [${columns.join(', ')}]`,
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`no data rows (${schema})`);
  }
  return parsed.data;
}

function requireNumber(row: RawRow, key: string): number {
  const x = Number(row[key]);
  if (!Number.isFinite(x)) {
    throw new SchemaError(`non-numeric ${key}: "${row[key]}"`);
  }
  return x;
}

/** Standard errors may legitimately be "nan" (single-replicate cells). */
function numberOrNaN(row: RawRow, key: string): number {
  const raw = (row[key] ?? '').trim().toLowerCase();
  if (raw === 'nan' || raw === '') return NaN;
  return requireNumber(row, key);
}

export function readPivots(content: string): PivotRow[] {
  return parseTable(content, 'peakpost.pivots/1').map((row) => ({
    experiment: row.experiment,
    method: row.method,
    statistic: row.statistic,
    replicate: requireNumber(row, 'replicate'),
    value: requireNumber(row, 'value'),
  }));
}

export function readCoverage(content: string): CoverageRow[] {
  return parseTable(content, 'peakpost.coverage/1').map((row) => ({
    experiment: row.experiment,
    method: row.method,
    target: row.target,
    n: requireNumber(row, 'n'),
    coverage: requireNumber(row, 'coverage'),
    se: numberOrNaN(row, 'se'),
    meanWidth: numberOrNaN(row, 'mean_width'),
    seWidth: numberOrNaN(row, 'se_width'),
  }));
}

export function readRates(content: string): RateRow[] {
  return parseTable(content, 'peakpost.rates/1').map((row) => ({
    experiment: row.experiment,
    criterion: row.criterion,
    value: numberOrNaN(row, 'value'),
    se: numberOrNaN(row, 'se'),
    numerator: requireNumber(row, 'numerator'),
    denominator: requireNumber(row, 'denominator'),
    replicates: requireNumber(row, 'replicates'),
  }));
}

export function readField(content: string): FieldRow[] {
  return parseTable(content, 'peakpost.field/1').map((row) => ({
    t0: requireNumber(row, 't0'),
    t1: requireNumber(row, 't1'),
    mu: requireNumber(row, 'mu'),
    value: requireNumber(row, 'value'),
  }));
}
