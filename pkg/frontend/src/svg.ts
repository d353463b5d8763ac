/** Minimal deterministic SVG building blocks: no dates, no randomness, so a
 * given input always renders to identical bytes. */

export interface Scale {
  (value: number): number;
  ticks(): number[];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.ticks = () => {
    const out: number[] = [];
    for (let i = 0; i <= 5; i++) out.push(d0 + (span * i) / 5);
    return out;
  };
  return fn;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const d0 = Math.log10(domain[0]);
  const d1 = Math.log10(domain[1]);
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((Math.log10(v) - d0) / span) * (r1 - r0)) as Scale;
  fn.ticks = () => {
    const out: number[] = [];
    for (let p = Math.ceil(d0); p <= Math.floor(d1); p++) out.push(10 ** p);
    if (out.length < 2) return [domain[0], domain[1]];
    return out;
  };
  return fn;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function fmt(value: number): string {
  if (!isFinite(value)) return String(value);
  const abs = Math.abs(value);
  if (abs !== 0 && (abs >= 1e4 || abs < 1e-3)) return value.toExponential(2);
  return String(Math.round(value * 1e6) / 1e6);
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 760,
  height: 520,
  margin: { top: 48, right: 24, bottom: 56, left: 72 },
};

export function axes(
  frame: Frame,
  x: Scale,
  y: Scale,
  xLabel: string,
  yLabel: string,
  title: string
): string {
  const { width, height, margin } = frame;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const y1 = margin.top;
  const parts: string[] = [];
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="24" text-anchor="middle" font-size="16" font-family="sans-serif">${esc(title)}</text>`
  );
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
  for (const t of x.ticks()) {
    const px = x(t);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle" font-size="11" font-family="sans-serif">${fmt(t)}</text>`
    );
  }
  for (const t of y.ticks()) {
    const py = y(t);
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${py + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${height - 12}" text-anchor="middle" font-size="13" font-family="sans-serif">${esc(xLabel)}</text>`
  );
  parts.push(
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 18 ${(y0 + y1) / 2})">${esc(yLabel)}</text>`
  );
  return parts.join("\n");
}

export function document(frame: Frame, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">\n` +
    body +
    "\n</svg>\n"
  );
}
