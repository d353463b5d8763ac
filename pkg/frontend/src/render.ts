import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";

import { readOtalinkCsv } from "./csv";
import { renderEvmSinr, renderGradientTable, renderPowerErrorbar } from "./figures";
import { FigureSpec } from "./spec";

const EXPECTED_SCHEMAS: Record<string, string[]> = {
  evm_sinr: ["otalink.evm_sinr"],
  channel_power_errorbar: ["otalink.power_errorbar"],
  gradient_table: ["otalink.gradient_table", "otalink.budget_table"],
};

/** Render one figure spec to an SVG file; returns the output path.
 * Rendering is a pure function of (CSV content, spec). */
export function render(spec: FigureSpec): string {
  const table = readOtalinkCsv(spec.input_csv);
  const allowed = EXPECTED_SCHEMAS[spec.figure_class];
  if (!allowed.includes(table.schema)) {
    throw new Error(
      `${spec.input_csv}: schema '${table.schema}' does not match figure class ` +
        `'${spec.figure_class}' (expected ${allowed.join(" or ")})`
    );
  }
  let svg: string;
  switch (spec.figure_class) {
    case "evm_sinr":
      svg = renderEvmSinr(table, spec.input_csv, spec.axis_scale);
      break;
    case "channel_power_errorbar":
      svg = renderPowerErrorbar(table, spec.input_csv, spec.axis_scale);
      break;
    case "gradient_table":
      svg = renderGradientTable(table, spec.input_csv);
      break;
  }
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg, "utf8");
  return spec.output;
}
