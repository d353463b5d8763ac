export { readOtalinkCsv, requireColumns, requireRows } from "./csv";
export { renderEvmSinr, renderPowerErrorbar, renderGradientTable } from "./figures";
export { render } from "./render";
export { loadSpec, parseSpec } from "./spec";
export type { FigureSpec, FigureClass, AxisScale } from "./spec";
