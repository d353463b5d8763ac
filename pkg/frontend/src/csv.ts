import { readFileSync } from "fs";
import Papa from "papaparse";

export interface OtalinkTable {
  schema: string;
  header: string[];
  rows: Record<string, string>[];
}

/** Parse an otalink CSV: a `#otalink schema=... v=...` tag line, then a
 * header row, then data. Cells stay strings; callers convert. */
export function readOtalinkCsv(path: string): OtalinkTable {
  const text = readFileSync(path, "utf8");
  const newline = text.indexOf("\n");
  const tagLine = newline >= 0 ? text.slice(0, newline).trim() : text.trim();
  if (!tagLine.startsWith("#otalink schema=")) {
    throw new Error(`${path}: missing otalink schema line`);
  }
  const tags = new Map<string, string>();
  for (const part of tagLine.slice(1).split(/\s+/)) {
    const eq = part.indexOf("=");
    if (eq > 0) tags.set(part.slice(0, eq), part.slice(eq + 1));
  }
  const schema = tags.get("schema");
  if (!schema) throw new Error(`${path}: schema tag missing`);

  const body = newline >= 0 ? text.slice(newline + 1) : "";
  const parsed = Papa.parse<Record<string, string>>(body, {
    header: true,
    skipEmptyLines: true,
    delimiter: ",",
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`${path}: CSV parse error: ${e.message} (row ${e.row})`);
  }
  const header = parsed.meta.fields ?? [];
  if (header.length === 0) throw new Error(`${path}: missing header row`);
  return { schema, header, rows: parsed.data };
}

export function requireColumns(table: OtalinkTable, columns: string[], path: string): void {
  for (const col of columns) {
    if (!table.header.includes(col)) {
      throw new Error(`${path}: missing column '${col}'`);
    }
  }
}

export function requireRows(table: OtalinkTable, path: string): void {
  if (table.rows.length === 0) {
    throw new Error(`${path}: no data rows`);
  }
}

export function num(row: Record<string, string>, column: string): number {
  const raw = row[column];
  if (raw === undefined || raw === "") return NaN;
  return Number(raw);
}
