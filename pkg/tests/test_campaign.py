import time

import numpy as np
import pytest

from otalink.campaign import (
    SweepConfig,
    SweepRow,
    dbm_to_watts,
    emit_csv,
    emit_plot_data,
    gradient_rows,
    ingest_csv,
    read_csv,
    run_sweep,
    summarize,
    watts_to_dbm,
)
from otalink.errors import InsufficientDataError, SchemaError


def _config(**overrides):
    base = dict(
        sweep_variable="target_sinr_db",
        start=20.0,
        stop=10.0,
        step=-10.0,
        repeats=2,
        modulation_orders=(4,),
        master_seed=314,
        n_interferers=1,
        estimation_mode="known_h",
        subframes=2,
    )
    base.update(overrides)
    return SweepConfig(**base)


def test_dbm_conversions():
    assert abs(dbm_to_watts(0.0) - 1e-3) < 1e-18
    assert abs(watts_to_dbm(1e-3)) < 1e-12
    assert abs(dbm_to_watts(-30.0) - 1e-6) < 1e-18


def test_points_inclusive_grid():
    cfg = _config(start=0.0, stop=-60.0, step=-1.0)
    pts = cfg.points()
    assert len(pts) == 61 and pts[0] == 0.0 and pts[-1] == -60.0


def test_step_direction_validated():
    with pytest.raises(ValueError):
        _config(start=0.0, stop=10.0, step=-1.0)


def test_unknown_order_rejected():
    with pytest.raises(ValueError):
        _config(modulation_orders=(8,))


def test_clean_link_zero_evm_rows():
    cfg = _config(
        sweep_variable="signal_power_dbm",
        start=-10.0,
        stop=-10.0,
        step=-1.0,
        repeats=1,
        n_interferers=0,
        subframes=2,
    )
    rows = run_sweep(cfg)
    assert len(rows) == 2
    for r in rows:
        assert r.status == "ok"
        assert r.evm_rms_pct < 1e-10
        assert r.normalized_evm_rms_pct < 1e-10
        assert r.sinr_db is None  # nothing to measure against
        assert abs(r.channel_power_signal - dbm_to_watts(-10.0)) < 1e-15


def test_signal_power_sweep_hits_receive_plane_power():
    cfg = _config(
        sweep_variable="signal_power_dbm",
        start=0.0,
        stop=-20.0,
        step=-10.0,
        repeats=1,
        n_interferers=1,
        total_interferer_power_dbm=-30.0,
        subframes=1,
    )
    rows = run_sweep(cfg)
    for r in rows:
        assert abs(r.channel_power_signal - dbm_to_watts(r.sweep_value)) < 1e-12
    # higher signal power -> higher SINR
    by_value = {r.sweep_value: r.sinr_db for r in rows}
    assert by_value[0.0] > by_value[-10.0] > by_value[-20.0]


def test_sweep_deterministic_rerun_and_parallel(tmp_path):
    cfg = _config(repeats=3, modulation_orders=(4, 16))
    rows_a = run_sweep(cfg, workers=1)
    rows_b = run_sweep(cfg, workers=1)
    rows_c = run_sweep(cfg, workers=4)
    assert rows_a == rows_b == rows_c
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(rows_a, pa)
    emit_csv(rows_c, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_sweep_row_order_is_canonical():
    cfg = _config(repeats=2, modulation_orders=(4, 16))
    rows = run_sweep(cfg, workers=4)
    keys = [
        (r.sweep_value, r.repeat_index, r.order, r.subframe_index) for r in rows
    ]
    points = cfg.points()
    expected = [
        (v, rep, o, s)
        for v in points
        for rep in range(2)
        for o in (4, 16)
        for s in range(2)
    ]
    assert keys == expected


def test_skipped_rows_accounting():
    # noise floor exceeds what the target allows: every row skipped
    cfg = _config(
        repeats=2,
        noise_power_dbm=10.0,
        signal_power_dbm=-30.0,
        pin_signal_power=True,
        start=30.0,
        stop=30.0,
        step=1.0,
    )
    rows = run_sweep(cfg)
    assert len(rows) == 1 * 2 * 1 * 2  # points x repeats x orders x subframes
    assert all(r.status == "skipped" for r in rows)
    assert all(r.reason == "infeasible_sinr_target" for r in rows)
    assert all(r.sinr_db is None for r in rows)


def test_per_repeat_calibration_reuses_scales():
    cfg = _config(calibration="per_repeat", channel_kind="fixed")
    rows = run_sweep(cfg)
    # both subframes of a repeat share the interference power level
    by_key = {}
    for r in rows:
        by_key.setdefault((r.sweep_value, r.repeat_index), []).append(
            r.channel_power_interference
        )
    for powers in by_key.values():
        assert abs(powers[0] - powers[1]) < 0.05 * abs(powers[0])


def test_summarize_single_row_group():
    rows = [SweepRow(1.0, 0, 0, 4, "ok", "", 1.0, 0.5, 10.0, 1.0, 2.0, 3.0, 0.1)]
    out = summarize(rows, ["sweep_value"])
    assert all(e["std"] == 0.0 and e["expanded_k2"] == 0.0 for e in out)


def test_summarize_identical_rows():
    row = SweepRow(1.0, 0, 0, 4, "ok", "", 1.0, 0.5, 10.0, 1.0, 2.0, 3.0, 0.1)
    out = summarize([row, row, row], ["sweep_value"])
    assert all(e["expanded_k2"] == 0.0 for e in out)


def test_summarize_recovers_known_spread():
    rng = np.random.default_rng(0)
    rows = []
    for v in (1.0, 2.0):
        for i in range(1000):
            rows.append(
                SweepRow(v, i, 0, 4, "ok", "", None, None, None, None,
                         float(rng.normal(50.0, 3.0)), None, None)
            )
    for e in summarize(rows, ["sweep_value"]):
        if e["metric"] == "normalized_evm_rms_pct":
            assert abs(e["std"] - 3.0) < 0.15
            assert e["n"] == 1000


def test_summarize_order_invariant():
    rng = np.random.default_rng(1)
    rows = [
        SweepRow(float(i % 3), i, 0, 4, "ok", "", None, None, float(i), None,
                 float(rng.normal(10, 1)), None, None)
        for i in range(60)
    ]
    a = summarize(rows, ["sweep_value"])
    shuffled = list(rows)
    rng.shuffle(shuffled)
    b = summarize(shuffled, ["sweep_value"])
    assert a == b


def test_summarize_empty_rejected():
    with pytest.raises(InsufficientDataError):
        summarize([], ["sweep_value"])
    skipped = [SweepRow(1.0, 0, 0, 4, "skipped", "infeasible_sinr_target")]
    with pytest.raises(InsufficientDataError):
        summarize(skipped, ["sweep_value"])


def test_summarize_unknown_column():
    rows = [SweepRow(1.0, 0, 0, 4, "ok", "", 1.0, None, None, None, None, None, None)]
    with pytest.raises(SchemaError):
        summarize(rows, ["nonexistent"])


def test_csv_roundtrip_small(tmp_path):
    cfg = _config()
    rows = run_sweep(cfg)
    path = tmp_path / "rows.csv"
    emit_csv(rows, path)
    assert ingest_csv(path) == rows


def test_csv_missing_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "#otalink schema=otalink.sweep v=1\n"
        "sweep_value,repeat_index,subframe_index,order,status,reason\n"
    )
    with pytest.raises(SchemaError, match="channel_power_signal"):
        ingest_csv(path)


def test_csv_wrong_schema_rejected(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("#otalink schema=otalink.summary v=1\na,b\n1,2\n")
    with pytest.raises(SchemaError):
        ingest_csv(path)


def test_csv_million_row_roundtrip_under_10s(tmp_path):
    rows = [
        SweepRow(
            float(i % 61), i % 100, i % 2, 4, "ok", "",
            1.234567890123456e-3 + i * 1e-9, 2.5e-4, 10.123456789 + i * 1e-7,
            1.1, 26.4, 18.7, 0.19,
        )
        for i in range(1_000_000)
    ]
    path = tmp_path / "big.csv"
    start = time.perf_counter()
    emit_csv(rows, path)
    back = ingest_csv(path)
    elapsed = time.perf_counter() - start
    assert back == rows
    assert elapsed < 10.0, f"round trip took {elapsed:.1f}s"


def test_gradient_rows_per_order():
    cfg = _config(repeats=4, modulation_orders=(4, 16), subframes=2)
    rows = run_sweep(cfg, workers=2)
    fits = gradient_rows(rows)
    kinds = {(g["order"], g["evm_kind"]) for g in fits}
    assert kinds == {(4, "rms"), (4, "normalized_rms"), (16, "rms"), (16, "normalized_rms")}
    for g in fits:
        if g["evm_kind"] == "normalized_rms":
            assert abs(g["a"] - 100.0) < 3.0


def test_emit_plot_data_files(tmp_path):
    cfg = _config(repeats=3)
    rows = run_sweep(cfg)
    paths = emit_plot_data(rows, tmp_path / "plots")
    assert set(paths) == {
        "evm_vs_inv_sqrt_sinr",
        "channel_power_vs_sweep",
        "budget_table",
        "gradient_table",
    }
    schema, header, data = read_csv(paths["evm_vs_inv_sqrt_sinr"], "otalink.evm_sinr")
    assert "fit_a" in header and len(data) > 0
    schema, header, data = read_csv(paths["budget_table"], "otalink.budget_table")
    assert "total_db" in header and len(data) == 2  # one per sweep point
    schema, header, data = read_csv(paths["gradient_table"], "otalink.gradient_table")
    assert header[0] == "order" and len(data) == 2  # one order, two EVM kinds
