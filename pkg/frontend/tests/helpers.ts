import { execSync } from "child_process";
import { mkdirSync, rmSync, writeFileSync } from "fs";
import { join } from "path";

export const FIXTURES = join(__dirname, "..", ".fixtures");

const SWEEP_YAML = `
sweep:
  sweep_variable: target_sinr_db
  start: 20
  stop: 0
  step: -10
  repeats: 3
  modulation_orders: [4, 16]
  master_seed: 20260
  n_interferers: 1
  interferer_kind: gwn_bandpass
  estimation_mode: known_h
  subframes: 1
`;

/** Drive the Python CLI once to produce real plot-data fixtures. */
export function generateFixtures(): {
  rows: string;
  plots: string;
  budget: string;
  gradients: string;
} {
  rmSync(FIXTURES, { recursive: true, force: true });
  mkdirSync(FIXTURES, { recursive: true });
  const config = join(FIXTURES, "sweep.yaml");
  writeFileSync(config, SWEEP_YAML);
  const rows = join(FIXTURES, "rows.csv");
  const plots = join(FIXTURES, "plots");
  const budget = join(FIXTURES, "budget.csv");
  const gradients = join(FIXTURES, "gradients.csv");
  const run = (cmd: string) => execSync(cmd, { stdio: "pipe", timeout: 120000 });
  run(`python3 -m otalink.cli sweep --config ${config} --out ${rows} --plot-data ${plots}`);
  run(`python3 -m otalink.cli budget --input ${rows} --group-by sweep_value --out ${budget}`);
  run(`python3 -m otalink.cli fit --input ${rows} --out ${gradients}`);
  return { rows, plots, budget, gradients };
}
