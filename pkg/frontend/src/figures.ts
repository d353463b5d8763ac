import { num, OtalinkTable, requireColumns, requireRows } from "./csv";
import {
  axes,
  DEFAULT_FRAME,
  document,
  esc,
  fmt,
  linearScale,
  logScale,
  PALETTE,
  Scale,
} from "./svg";

export type AxisScale = "linear" | "log_y";

const EVM_SINR_COLUMNS = [
  "order",
  "evm_kind",
  "sinr_linear",
  "sinr_db",
  "inv_sqrt_sinr",
  "evm_pct",
  "fit_a",
  "fit_r2",
];

const POWER_COLUMNS = [
  "sweep_value",
  "metric",
  "n",
  "mean",
  "std",
  "expanded_k2",
];

const GRADIENT_COLUMNS = ["order", "evm_kind", "a", "r_squared", "n_points"];
const BUDGET_COLUMNS = ["sweep_value", "mean", "std", "repeatability_db", "total_db"];

interface Series {
  key: string;
  points: { x: number; y: number }[];
  fitA: number | null;
  fitR2: number | null;
}

function yScaleFor(kind: AxisScale, lo: number, hi: number, range: [number, number]): Scale {
  if (kind === "log_y") {
    return logScale([Math.max(lo, 1e-12), hi], range);
  }
  return linearScale([Math.min(0, lo), hi], range);
}

/** EVM against 1/sqrt(SINR), one series per (order, EVM convention), with the
 * through-origin fit line and its A / R-squared annotation per series. */
export function renderEvmSinr(table: OtalinkTable, path: string, axis: AxisScale): string {
  requireColumns(table, EVM_SINR_COLUMNS, path);
  requireRows(table, path);

  const series = new Map<string, Series>();
  for (const row of table.rows) {
    const key = `order ${row.order} (${row.evm_kind})`;
    let s = series.get(key);
    if (!s) {
      const fitA = num(row, "fit_a");
      const fitR2 = num(row, "fit_r2");
      s = {
        key,
        points: [],
        fitA: isNaN(fitA) ? null : fitA,
        fitR2: isNaN(fitR2) ? null : fitR2,
      };
      series.set(key, s);
    }
    const x = num(row, "inv_sqrt_sinr");
    const y = num(row, "evm_pct");
    if (!isNaN(x) && !isNaN(y)) s.points.push({ x, y });
  }

  const all = [...series.values()].flatMap((s) => s.points);
  const usable = axis === "log_y" ? all.filter((p) => p.y > 0) : all;
  if (usable.length === 0) throw new Error(`${path}: no plottable points`);
  const xMax = Math.max(...usable.map((p) => p.x));
  const yMin = Math.min(...usable.map((p) => p.y));
  const yMax = Math.max(...usable.map((p) => p.y));

  const frame = DEFAULT_FRAME;
  const x = linearScale([0, xMax * 1.05], [frame.margin.left, frame.width - frame.margin.right]);
  const y = yScaleFor(axis, yMin, yMax * 1.05, [frame.height - frame.margin.bottom, frame.margin.top]);

  const parts: string[] = [
    axes(
      frame,
      x,
      y,
      "1 / sqrt(SINR)",
      axis === "log_y" ? "RMS EVM (%)  [log]" : "RMS EVM (%)",
      "RMS EVM vs 1/sqrt(SINR)"
    ),
  ];

  let idx = 0;
  const keys = [...series.keys()].sort();
  for (const key of keys) {
    const s = series.get(key)!;
    const color = PALETTE[idx % PALETTE.length];
    for (const p of s.points) {
      if (axis === "log_y" && p.y <= 0) continue;
      parts.push(`<circle cx="${x(p.x)}" cy="${y(p.y)}" r="2.5" fill="${color}" fill-opacity="0.7"/>`);
    }
    if (s.fitA !== null) {
      // through-origin line y = A x, clipped to the frame by sampling
      const steps = 64;
      const pts: string[] = [];
      for (let i = 1; i <= steps; i++) {
        const vx = (xMax * 1.05 * i) / steps;
        const vy = s.fitA * vx;
        if (axis === "log_y" && vy <= 0) continue;
        if (vy > yMax * 1.05) break;
        pts.push(`${x(vx)},${y(vy)}`);
      }
      if (pts.length > 1) {
        parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
      }
    }
    const label =
      s.fitA !== null && s.fitR2 !== null
        ? `${key}: A=${s.fitA.toFixed(3)}, R²=${s.fitR2.toFixed(3)}`
        : key;
    const ly = frame.margin.top + 16 + idx * 16;
    parts.push(`<rect x="${frame.margin.left + 10}" y="${ly - 9}" width="10" height="10" fill="${color}"/>`);
    parts.push(
      `<text x="${frame.margin.left + 26}" y="${ly}" font-size="12" font-family="sans-serif">${esc(label)}</text>`
    );
    idx += 1;
  }
  return document(frame, parts.join("\n"));
}

/** Channel power per sweep point with k=2 expanded error bars per metric. */
export function renderPowerErrorbar(table: OtalinkTable, path: string, axis: AxisScale): string {
  requireColumns(table, POWER_COLUMNS, path);
  requireRows(table, path);

  const series = new Map<string, { x: number; y: number; half: number; budget: number }[]>();
  for (const row of table.rows) {
    const metric = row.metric;
    if (!series.has(metric)) series.set(metric, []);
    series.get(metric)!.push({
      x: num(row, "sweep_value"),
      y: num(row, "mean"),
      half: num(row, "expanded_k2"),
      budget: num(row, "budget_total_db"),
    });
  }

  const all = [...series.values()].flat().filter((p) => !isNaN(p.y));
  if (all.length === 0) throw new Error(`${path}: no plottable points`);
  const xLo = Math.min(...all.map((p) => p.x));
  const xHi = Math.max(...all.map((p) => p.x));
  const yLo = Math.min(...all.map((p) => p.y - (p.half || 0)));
  const yHi = Math.max(...all.map((p) => p.y + (p.half || 0)));

  const frame = DEFAULT_FRAME;
  const pad = (xHi - xLo || 1) * 0.05;
  const x = linearScale([xLo - pad, xHi + pad], [frame.margin.left, frame.width - frame.margin.right]);
  const y = yScaleFor(axis, Math.max(yLo, 1e-15), yHi * 1.05, [
    frame.height - frame.margin.bottom,
    frame.margin.top,
  ]);

  const parts: string[] = [
    axes(frame, x, y, "sweep value", "channel power (W)", "Channel power with k=2 error bars"),
  ];
  let idx = 0;
  for (const key of [...series.keys()].sort()) {
    const color = PALETTE[idx % PALETTE.length];
    const pts = series.get(key)!.filter((p) => !isNaN(p.y));
    pts.sort((a, b) => a.x - b.x);
    for (const p of pts) {
      if (axis === "log_y" && p.y <= 0) continue;
      const cx = x(p.x);
      parts.push(`<circle cx="${cx}" cy="${y(p.y)}" r="3" fill="${color}"/>`);
      if (p.half > 0) {
        const lo = axis === "log_y" ? Math.max(p.y - p.half, 1e-15) : p.y - p.half;
        const yTop = y(p.y + p.half);
        const yBot = y(lo);
        parts.push(`<line x1="${cx}" y1="${yTop}" x2="${cx}" y2="${yBot}" stroke="${color}"/>`);
        parts.push(`<line x1="${cx - 4}" y1="${yTop}" x2="${cx + 4}" y2="${yTop}" stroke="${color}"/>`);
        parts.push(`<line x1="${cx - 4}" y1="${yBot}" x2="${cx + 4}" y2="${yBot}" stroke="${color}"/>`);
      }
    }
    const budgets = pts.map((p) => p.budget).filter((b) => !isNaN(b));
    let label = key;
    if (budgets.length > 0) {
      const avg = budgets.reduce((a, b) => a + b, 0) / budgets.length;
      label += `: U(k=2)=${avg.toFixed(3)} dB`;
    }
    const ly = frame.margin.top + 16 + idx * 16;
    parts.push(`<rect x="${frame.margin.left + 10}" y="${ly - 9}" width="10" height="10" fill="${color}"/>`);
    parts.push(
      `<text x="${frame.margin.left + 26}" y="${ly}" font-size="12" font-family="sans-serif">${esc(label)}</text>`
    );
    idx += 1;
  }
  return document(frame, parts.join("\n"));
}

/** Tabular figure: fitted gradients per modulation order / EVM convention, or
 * an uncertainty-budget table. Numeric cells are shown to 3 decimals. */
export function renderGradientTable(table: OtalinkTable, path: string): string {
  requireRows(table, path);
  const isGradient = GRADIENT_COLUMNS.every((c) => table.header.includes(c));
  const isBudget = BUDGET_COLUMNS.every((c) => table.header.includes(c));
  if (!isGradient && !isBudget) {
    const want = `${GRADIENT_COLUMNS.join(",")} or ${BUDGET_COLUMNS.join(",")}`;
    const missing = GRADIENT_COLUMNS.find((c) => !table.header.includes(c));
    throw new Error(`${path}: missing column '${missing}' (need ${want})`);
  }
  const header = table.header;
  const title = isGradient ? "Fitted gradients A" : "Channel-power uncertainty budget";

  const rowH = 24;
  const colW = Math.max(90, Math.floor(680 / header.length));
  const width = colW * header.length + 80;
  const height = rowH * (table.rows.length + 2) + 70;
  const parts: string[] = [];
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="28" text-anchor="middle" font-size="16" font-family="sans-serif">${esc(title)}</text>`
  );
  const x0 = 40;
  const y0 = 50;
  header.forEach((name, c) => {
    parts.push(
      `<text x="${x0 + c * colW + colW / 2}" y="${y0 + 16}" text-anchor="middle" font-size="12" font-weight="bold" font-family="sans-serif">${esc(name)}</text>`
    );
  });
  parts.push(
    `<line x1="${x0}" y1="${y0 + rowH}" x2="${x0 + header.length * colW}" y2="${y0 + rowH}" stroke="black"/>`
  );
  table.rows.forEach((row, r) => {
    header.forEach((name, c) => {
      const raw = row[name] ?? "";
      const asNumber = Number(raw);
      const shown =
        raw !== "" && !isNaN(asNumber) && !Number.isInteger(asNumber)
          ? asNumber.toFixed(3)
          : raw;
      parts.push(
        `<text x="${x0 + c * colW + colW / 2}" y="${y0 + rowH * (r + 2) - 6}" text-anchor="middle" font-size="12" font-family="sans-serif">${esc(shown)}</text>`
      );
    });
  });
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n` +
    parts.join("\n") +
    "\n</svg>\n"
  );
}
