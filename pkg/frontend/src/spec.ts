import { readFileSync } from "fs";

export type FigureClass = "evm_sinr" | "channel_power_errorbar" | "gradient_table";
export type AxisScale = "linear" | "log_y";

export interface FigureSpec {
  figure_class: FigureClass;
  input_csv: string;
  axis_scale: AxisScale;
  output: string;
}

const FIGURE_CLASSES = new Set(["evm_sinr", "channel_power_errorbar", "gradient_table"]);
const AXIS_SCALES = new Set(["linear", "log_y"]);

export function parseSpec(raw: unknown, source: string): FigureSpec {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error(`${source}: spec must be a JSON object`);
  }
  const obj = raw as Record<string, unknown>;
  const figureClass = obj.figure_class;
  if (typeof figureClass !== "string" || !FIGURE_CLASSES.has(figureClass)) {
    throw new Error(`${source}: figure_class must be one of ${[...FIGURE_CLASSES].join(", ")}`);
  }
  const inputCsv = obj.input_csv;
  if (typeof inputCsv !== "string" || inputCsv === "") {
    throw new Error(`${source}: input_csv is required`);
  }
  const output = obj.output;
  if (typeof output !== "string" || output === "") {
    throw new Error(`${source}: output is required`);
  }
  const axis = obj.axis_scale ?? "linear";
  if (typeof axis !== "string" || !AXIS_SCALES.has(axis)) {
    throw new Error(`${source}: axis_scale must be linear or log_y`);
  }
  const known = new Set(["figure_class", "input_csv", "axis_scale", "output"]);
  for (const key of Object.keys(obj)) {
    if (!known.has(key)) throw new Error(`${source}: unknown spec key '${key}'`);
  }
  return {
    figure_class: figureClass as FigureClass,
    input_csv: inputCsv,
    axis_scale: axis as AxisScale,
    output,
  };
}

export function loadSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (e) {
    throw new Error(`${path}: cannot read spec: ${(e as Error).message}`);
  }
  return parseSpec(raw, path);
}
