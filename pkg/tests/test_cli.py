import numpy as np
import pytest

from otalink.campaign import ingest_csv, read_csv
from otalink.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, main

SWEEP_YAML = """
sweep:
  sweep_variable: target_sinr_db
  start: 20
  stop: 10
  step: -10
  repeats: 2
  modulation_orders: [4]
  master_seed: 777
  subframes: 1
"""

STBC_YAML = """
stbc:
  subframes: 2
  order: 4
  channel_h: [[0.8, 0.3], [-0.4, 0.9]]
  interferers:
    - kind: gwn_bandpass
      power_dbm: -20
      seed: 5
  target_sinr_db: 12
  estimation_mode: known_h
  seed: 9
"""


@pytest.fixture()
def sweep_csv(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text(SWEEP_YAML)
    out = tmp_path / "rows.csv"
    code = main(["sweep", "--config", str(cfg), "--out", str(out)])
    assert code == EXIT_OK
    return out


def test_sweep_writes_rows_and_plot_data(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text(SWEEP_YAML)
    out = tmp_path / "rows.csv"
    plots = tmp_path / "plots"
    code = main(
        ["sweep", "--config", str(cfg), "--out", str(out), "--plot-data", str(plots)]
    )
    assert code == EXIT_OK
    rows = ingest_csv(out)
    assert len(rows) == 4 and all(r.status == "ok" for r in rows)
    for name in (
        "evm_vs_inv_sqrt_sinr.csv",
        "channel_power_vs_sweep.csv",
        "budget_table.csv",
        "gradient_table.csv",
    ):
        assert (plots / name).exists()


def test_sweep_deterministic_bytes(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text(SWEEP_YAML)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert main(["sweep", "--config", str(cfg), "--out", str(out2), "--workers", "3"]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()


def test_fit_command(sweep_csv, tmp_path, capsys):
    out = tmp_path / "fit.csv"
    code = main(["fit", "--input", str(sweep_csv), "--out", str(out)])
    assert code == EXIT_OK
    printed = capsys.readouterr().out
    assert "A = " in printed
    schema, header, rows = read_csv(out, "otalink.gradient_table")
    assert len(rows) == 2  # rms + normalized_rms for the single order
    by_kind = {r[header.index("evm_kind")]: float(r[header.index("a")]) for r in rows}
    assert abs(by_kind["normalized_rms"] - 100.0) < 5.0


def test_budget_command(sweep_csv, tmp_path, capsys):
    out = tmp_path / "budget.csv"
    code = main(
        ["budget", "--input", str(sweep_csv), "--group-by", "sweep_value", "--out", str(out)]
    )
    assert code == EXIT_OK
    assert "U = " in capsys.readouterr().out
    schema, header, rows = read_csv(out)
    assert len(rows) == 2


def test_stbc_command(tmp_path, capsys):
    cfg = tmp_path / "stbc.yaml"
    cfg.write_text(STBC_YAML)
    out = tmp_path / "stbc.csv"
    code = main(["stbc", "--config", str(cfg), "--out", str(out)])
    assert code == EXIT_OK
    printed = capsys.readouterr().out
    assert "subframe 0" in printed
    schema, header, rows = read_csv(out, "otalink.stbc")
    assert len(rows) == 2


def test_summarize_command(sweep_csv, tmp_path):
    out = tmp_path / "summary.csv"
    code = main(
        ["summarize", "--input", str(sweep_csv), "--group-by", "sweep_value,order",
         "--out", str(out)]
    )
    assert code == EXIT_OK
    schema, header, rows = read_csv(out, "otalink.summary")
    assert header[:2] == ["sweep_value", "order"]
    assert len(rows) > 0


def test_unknown_config_section_exits_2(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("sweeep:\n  start: 0\n")
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == EXIT_CONFIG


def test_unknown_sweep_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(SWEEP_YAML + "  bogus_key: 1\n")
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == EXIT_CONFIG


def test_missing_input_exits_4(tmp_path):
    code = main(["fit", "--input", str(tmp_path / "nope.csv")])
    assert code == EXIT_IO


def test_all_skipped_exits_3(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text(
        """
sweep:
  sweep_variable: target_sinr_db
  start: 30
  stop: 30
  step: 1
  repeats: 1
  modulation_orders: [4]
  master_seed: 1
  subframes: 1
  noise_power_dbm: 10
  signal_power_dbm: -30
  pin_signal_power: true
"""
    )
    out = tmp_path / "rows.csv"
    code = main(["sweep", "--config", str(cfg), "--out", str(out)])
    assert code == EXIT_INFEASIBLE
    rows = ingest_csv(out)
    assert all(r.status == "skipped" for r in rows)


def test_infeasible_stbc_exits_3(tmp_path):
    cfg = tmp_path / "stbc.yaml"
    cfg.write_text(
        """
stbc:
  subframes: 1
  order: 4
  interferers:
    - kind: gwn_bandpass
      power_dbm: -10
      seed: 1
  noise_power_dbm: 40
  target_sinr_db: 30
  seed: 2
"""
    )
    assert main(["stbc", "--config", str(cfg)]) == EXIT_INFEASIBLE


def test_malformed_yaml_exits_2(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("sweep: [unclosed\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o.csv")]) == EXIT_CONFIG
