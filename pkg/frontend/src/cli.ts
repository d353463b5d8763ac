#!/usr/bin/env node
import { loadSpec } from "./spec";
import { render } from "./render";

function usage(): void {
  console.error("usage: otalink-plots render --spec <figure-spec.json>");
}

export function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] !== "render") {
    usage();
    return 2;
  }
  const flagIdx = argv.indexOf("--spec");
  if (flagIdx < 0 || flagIdx + 1 >= argv.length) {
    usage();
    return 2;
  }
  try {
    const spec = loadSpec(argv[flagIdx + 1]);
    const out = render(spec);
    console.log(`wrote ${out}`);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
