import { mkdirSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { readOtalinkCsv, requireColumns, requireRows } from "../src/csv";
import { parseSpec } from "../src/spec";

const DIR = join(tmpdir(), "otalink-plots-csv-tests");
mkdirSync(DIR, { recursive: true });

function write(name: string, content: string): string {
  const path = join(DIR, name);
  writeFileSync(path, content);
  return path;
}

describe("readOtalinkCsv", () => {
  it("parses the schema tag and rows", () => {
    const path = write(
      "ok.csv",
      "#otalink schema=otalink.gradient_table v=1\norder,a\n4,100.0\n16,100.5\n"
    );
    const table = readOtalinkCsv(path);
    expect(table.schema).toBe("otalink.gradient_table");
    expect(table.header).toEqual(["order", "a"]);
    expect(table.rows).toHaveLength(2);
    expect(table.rows[1].a).toBe("100.5");
  });

  it("rejects files without the tag line", () => {
    const path = write("untagged.csv", "order,a\n4,100.0\n");
    expect(() => readOtalinkCsv(path)).toThrow(/schema line/);
  });

  it("names a missing column", () => {
    const path = write("short.csv", "#otalink schema=x v=1\norder\n4\n");
    const table = readOtalinkCsv(path);
    expect(() => requireColumns(table, ["order", "fit_a"], path)).toThrow(/'fit_a'/);
  });

  it("rejects empty tables", () => {
    const path = write("empty.csv", "#otalink schema=x v=1\norder,a\n");
    const table = readOtalinkCsv(path);
    expect(() => requireRows(table, path)).toThrow(/no data rows/);
  });
});

describe("parseSpec", () => {
  const base = {
    figure_class: "evm_sinr",
    input_csv: "in.csv",
    output: "out.svg",
  };

  it("defaults axis_scale to linear", () => {
    expect(parseSpec(base, "spec").axis_scale).toBe("linear");
  });

  it("rejects unknown figure classes", () => {
    expect(() => parseSpec({ ...base, figure_class: "pie" }, "spec")).toThrow(
      /figure_class/
    );
  });

  it("rejects unknown keys", () => {
    expect(() => parseSpec({ ...base, extra: 1 }, "spec")).toThrow(/'extra'/);
  });

  it("rejects bad axis scales", () => {
    expect(() => parseSpec({ ...base, axis_scale: "log_x" }, "spec")).toThrow(
      /axis_scale/
    );
  });
});
