// ---------------------------------------------------------------------------
// Minimal SVG plotting primitives: linear/log scales, tick generation, and
// string-built SVG elements.  No DOM, no canvas -- output is a plain string.
// ---------------------------------------------------------------------------

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const f = ((x: number) =>
    span === 0 ? (r0 + r1) / 2 : r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function log10Scale(domain: [number, number], range: [number, number]): Scale {
  if (domain[0] <= 0 || domain[1] <= 0) {
    throw new Error(`log scale needs a positive domain, got [${domain}]`);
  }
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const f = ((x: number) => inner(Math.log10(x))) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Round tick positions covering [lo, hi], roughly `count` of them. */
export function ticks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo) || count <= 0) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let t = start; t <= hi + step * 1e-9; t += step) {
    out.push(Math.abs(t) < step * 1e-9 ? 0 : Number(t.toPrecision(12)));
  }
  return out;
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

const fmt = (x: number): string => Number(x.toFixed(2)).toString();

export function line(x1: number, y1: number, x2: number, y2: number, style: string): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${style}/>`;
}

export function polyline(pts: Array<[number, number]>, style: string): string {
  const d = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
  return `<polyline points="${d}" fill="none" ${style}/>`;
}

export function circle(cx: number, cy: number, r: number, style: string): string {
  return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" ${style}/>`;
}

export function rect(x: number, y: number, w: number, h: number, style: string): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ${style}/>`;
}

export function text(x: number, y: number, s: string, style = ''): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" ${style}>${escapeXml(s)}</text>`;
}

export const PALETTE = [
  '#1b6ca8', '#d1495b', '#66a182', '#edae49', '#7d5ba6', '#50514f',
  '#2e86ab', '#a23b72', '#0a8754',
];

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  x: Scale;
  y: Scale;
}

/** Axis lines, ticks and labels for a plot frame. */
export function axes(frame: Frame, opts: {
  xTicks: Array<[number, string]>;
  yTicks: Array<[number, string]>;
  xLabel?: string;
  yLabel?: string;
  title?: string;
}): string {
  const { margin, width, height, x, y } = frame;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const y1 = margin.top;
  const stroke = 'stroke="#333" stroke-width="1"';
  const parts = [line(x0, y0, x1, y0, stroke), line(x0, y0, x0, y1, stroke)];
  for (const [v, label] of opts.xTicks) {
    const px = x(v);
    parts.push(line(px, y0, px, y0 + 4, stroke));
    parts.push(text(px, y0 + 16, label, 'text-anchor="middle" font-size="10"'));
  }
  for (const [v, label] of opts.yTicks) {
    const py = y(v);
    parts.push(line(x0 - 4, py, x0, py, stroke));
    parts.push(text(x0 - 6, py + 3, label, 'text-anchor="end" font-size="10"'));
  }
  if (opts.xLabel) {
    parts.push(text((x0 + x1) / 2, height - 6, opts.xLabel,
      'text-anchor="middle" font-size="11"'));
  }
  if (opts.yLabel) {
    parts.push(`<text x="12" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" ` +
      `font-size="11" transform="rotate(-90 12 ${fmt((y0 + y1) / 2)})">` +
      `${escapeXml(opts.yLabel)}</text>`);
  }
  if (opts.title) {
    parts.push(text(width / 2, 16, opts.title,
      'text-anchor="middle" font-size="13" font-weight="bold"'));
  }
  return parts.join('\n');
}

export function legend(entries: Array<[string, string]>, x: number, y: number): string {
  return entries
    .map(([label, color], i) =>
      rect(x, y + i * 16, 10, 10, `fill="${color}"`) +
      text(x + 14, y + i * 16 + 9, label, 'font-size="10"'))
    .join('\n');
}

export function svgDocument(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    rect(0, 0, width, height, 'fill="white"'),
    body,
    '</svg>',
    '',
  ].join('\n');
}
