"""Sweep campaigns: run, summarize, fit, and serialize as versioned CSV.

A sweep walks either the receive-plane signal power (dBm) or a calibrated
target SINR across a grid, repeating each point; every sub-frame of every
repeat produces one row of traceable metrics.  Rows are fully determined by
(config, master_seed): per-unit seeds are derived by stable hashing of the
indices, so parallel execution cannot reorder randomness.
"""

from __future__ import annotations

import csv
import gc
import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .channel import NoiseSpec, gen_channel
from .errors import InfeasibleTargetError, InsufficientDataError, SchemaError
from .interference import InterferenceSource
from .metrics import fit_gradient
from .stbc import run_stbc_subframe
from .uncertainty import InstrumentTerms, RepeatStats, channel_power_uncertainty
from .waveform import PRESETS, OfdmParams

__all__ = [
    "SweepConfig",
    "SweepRow",
    "run_sweep",
    "summarize",
    "emit_csv",
    "ingest_csv",
    "gradient_rows",
    "emit_plot_data",
    "dbm_to_watts",
    "watts_to_dbm",
    "SWEEP_COLUMNS",
    "METRIC_COLUMNS",
]

CSV_VERSION = 1
SCHEMA_SWEEP = "otalink.sweep"
SCHEMA_SUMMARY = "otalink.summary"
SCHEMA_EVM_SINR = "otalink.evm_sinr"
SCHEMA_POWER_ERRORBAR = "otalink.power_errorbar"
SCHEMA_BUDGET = "otalink.budget_table"
SCHEMA_GRADIENT = "otalink.gradient_table"

SWEEP_COLUMNS = [
    "sweep_value",
    "repeat_index",
    "subframe_index",
    "order",
    "status",
    "reason",
    "channel_power_signal",
    "channel_power_interference",
    "sinr_db",
    "evm_rms_pct",
    "normalized_evm_rms_pct",
    "mag_err_rms_pct",
    "phase_err_rms_rad",
]

METRIC_COLUMNS = SWEEP_COLUMNS[6:]

_VALID_ORDERS = (4, 16, 64, 256)


def dbm_to_watts(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * np.log10(watts / 1e-3)


@dataclass(frozen=True)
class SweepConfig:
    sweep_variable: str  # "signal_power_dbm" | "target_sinr_db"
    start: float
    stop: float
    step: float
    repeats: int
    modulation_orders: tuple[int, ...]
    master_seed: int
    interferer_policy: str = "constant_total"
    n_interferers: int = 1
    interferer_kind: str = "gwn_bandpass"
    estimation_mode: str = "known_h"
    subframes: int = 2
    total_interferer_power_dbm: float = 0.0
    noise_power_dbm: float | None = None
    signal_power_dbm: float = 0.0
    pin_signal_power: bool = False
    channel_kind: str = "rayleigh_per_subframe"
    channel_h: tuple = ((1.0, 0.0), (0.6, 0.8))  # (re, im) per coefficient
    n_pilot_pairs: int = 1
    calibration: str = "per_repeat"  # one interference adjustment per point/repeat
    numerology: str = "desk"
    ofdm: dict | None = None

    def __post_init__(self):
        if self.sweep_variable not in ("signal_power_dbm", "target_sinr_db"):
            raise ValueError(f"unknown sweep variable {self.sweep_variable!r}")
        if self.step == 0:
            raise ValueError("step must be non-zero")
        if (self.stop - self.start) * self.step < 0:
            raise ValueError("step direction inconsistent with start/stop")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.modulation_orders:
            raise ValueError("at least one modulation order required")
        object.__setattr__(self, "modulation_orders", tuple(int(o) for o in self.modulation_orders))
        for o in self.modulation_orders:
            if o not in _VALID_ORDERS:
                raise ValueError(f"unsupported modulation order {o}")
        if self.interferer_policy not in ("constant_total", "constant_per_source"):
            raise ValueError(f"unknown interferer policy {self.interferer_policy!r}")
        if self.n_interferers < 0:
            raise ValueError("n_interferers must be >= 0")
        if self.interferer_kind not in ("gwn_bandpass", "ofdm_lte_like"):
            raise ValueError(f"unknown interferer kind {self.interferer_kind!r}")
        if self.estimation_mode not in ("known_h", "realtime_estimate"):
            raise ValueError(f"unknown estimation mode {self.estimation_mode!r}")
        if self.subframes < 1:
            raise ValueError("subframes must be >= 1")
        if self.channel_kind not in ("fixed", "rayleigh_per_subframe"):
            raise ValueError(f"unknown channel kind {self.channel_kind!r}")
        if self.calibration not in ("per_repeat", "per_subframe"):
            raise ValueError(f"unknown calibration policy {self.calibration!r}")
        if self.numerology not in PRESETS:
            raise ValueError(f"unknown numerology preset {self.numerology!r}")

    def points(self) -> list[float]:
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(n)]

    def ofdm_params(self) -> OfdmParams:
        params = PRESETS[self.numerology]()
        if self.ofdm:
            params = replace(params, **self.ofdm)
        return params


@dataclass
class SweepRow:
    sweep_value: float
    repeat_index: int
    subframe_index: int
    order: int
    status: str = "ok"
    reason: str = ""
    channel_power_signal: float | None = None
    channel_power_interference: float | None = None
    sinr_db: float | None = None
    evm_rms_pct: float | None = None
    normalized_evm_rms_pct: float | None = None
    mag_err_rms_pct: float | None = None
    phase_err_rms_rad: float | None = None


def _interferer_powers(config: SweepConfig) -> list[float]:
    if config.n_interferers == 0:
        return []
    total = dbm_to_watts(config.total_interferer_power_dbm)
    if config.interferer_policy == "constant_total":
        return [total / config.n_interferers] * config.n_interferers
    return [total] * config.n_interferers


def _run_unit(config: SweepConfig, params: OfdmParams, p_idx: int, value: float, r_idx: int) -> list[SweepRow]:
    """All rows for one (sweep point, repeat): orders x sub-frames."""
    noise_var = (
        dbm_to_watts(config.noise_power_dbm) if config.noise_power_dbm is not None else 0.0
    )
    target = value if config.sweep_variable == "target_sinr_db" else None
    if config.sweep_variable == "signal_power_dbm":
        signal_power = dbm_to_watts(value)
    elif config.pin_signal_power:
        signal_power = dbm_to_watts(config.signal_power_dbm)
    else:
        signal_power = None
    base_powers = _interferer_powers(config)

    rows: list[SweepRow] = []
    for o_idx, order in enumerate(config.modulation_orders):
        parent = np.random.SeedSequence((config.master_seed, p_idx, r_idx, o_idx))
        payload_base, noise_base, interf_base, channel_base = (
            int(x) for x in parent.generate_state(4, dtype=np.uint64)
        )
        sources = [
            InterferenceSource(kind=config.interferer_kind, power=p, seed=interf_base)
            for p in base_powers
        ]
        held_scales: list[float] | None = None
        for s_idx in range(config.subframes):
            if config.channel_kind == "fixed":
                (h11_re, h11_im), (h12_re, h12_im) = config.channel_h
                h11 = complex(h11_re, h11_im)
                h12 = complex(h12_re, h12_im)
            else:
                mat = gen_channel("rayleigh_iid", 1, 2, seed=(channel_base, s_idx)).h
                h11, h12 = complex(mat[0, 0]), complex(mat[0, 1])
            row = SweepRow(
                sweep_value=value,
                repeat_index=r_idx,
                subframe_index=s_idx,
                order=int(order),
            )
            try:
                res = run_stbc_subframe(
                    order=order,
                    params=params,
                    h11=h11,
                    h12=h12,
                    interferers=sources,
                    noise=NoiseSpec(noise_var, seed=noise_base),
                    estimation_mode=config.estimation_mode,
                    n_pilot_pairs=config.n_pilot_pairs,
                    subframe_index=s_idx,
                    payload_seed=(payload_base, s_idx),
                    target_sinr_db=target,
                    signal_power=signal_power,
                    interferer_scales=held_scales,
                )
            except InfeasibleTargetError:
                row.status = "skipped"
                row.reason = "infeasible_sinr_target"
                rows.append(row)
                continue
            if config.calibration == "per_repeat" and held_scales is None:
                held_scales = res.interferer_scales
            row.channel_power_signal = res.channel_power_signal
            row.channel_power_interference = res.channel_power_interference
            row.sinr_db = res.sinr.db if res.sinr is not None else None
            row.evm_rms_pct = res.evm.evm_rms
            row.normalized_evm_rms_pct = res.evm.normalized_evm_rms
            row.mag_err_rms_pct = res.evm.mag_err_rms
            row.phase_err_rms_rad = res.evm.phase_err_rms
            rows.append(row)
    return rows


def run_sweep(config: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """Run the sweep; rows come back in (point, repeat, order, sub-frame) order
    regardless of the degree of parallelism."""
    params = config.ofdm_params()
    units = [
        (p_idx, value, r_idx)
        for p_idx, value in enumerate(config.points())
        for r_idx in range(config.repeats)
    ]
    if workers <= 1:
        chunks = [_run_unit(config, params, *u) for u in units]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_unit, config, params, *u) for u in units]
            chunks = [f.result() for f in futures]
    rows: list[SweepRow] = []
    for chunk in chunks:
        rows.extend(chunk)
    return rows


def summarize(rows: list[SweepRow], group_by: list[str]) -> list[dict]:
    """Per-group mean/std/expanded(k=2) for every numeric metric column.

    Only rows with status "ok" participate; groups are sorted by key and
    the result is invariant to row order within a group.
    """
    for col in group_by:
        if col not in SWEEP_COLUMNS:
            raise SchemaError(f"unknown group-by column {col!r}")
    ok_rows = [r for r in rows if r.status == "ok"]
    if not ok_rows:
        raise InsufficientDataError("no usable rows to summarize")
    groups: dict[tuple, list[SweepRow]] = {}
    for r in ok_rows:
        key = tuple(getattr(r, c) for c in group_by)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups):
        members = groups[key]
        for metric in METRIC_COLUMNS:
            values = [getattr(r, metric) for r in members if getattr(r, metric) is not None]
            if not values:
                continue
            mean, std = _stable_mean_std(values)
            entry = dict(zip(group_by, key))
            entry.update(
                metric=metric,
                n=len(values),
                mean=mean,
                std=std,
                expanded_k2=2.0 * std,
            )
            out.append(entry)
    return out


def _stable_mean_std(values) -> tuple[float, float]:
    """Row-order-invariant sample mean and std (n-1), exact 0 for equal values."""
    n = len(values)
    mean = math.fsum(values) / n
    if n == 1 or all(v == values[0] for v in values):
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


# ---------------------------------------------------------------------------
# CSV serialization (versioned header line + fixed column row)
# ---------------------------------------------------------------------------


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        # repr of the builtin float: shortest round-tripping decimal form
        # (numpy scalars repr as np.float64(...), so coerce first)
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, schema: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"#otalink schema={schema} v={CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])


def read_csv(path, schema: str | None = None):
    """Returns (schema, header, list of string rows); validates the tag line."""
    with open(path, "r", newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#otalink schema="):
            raise SchemaError(f"{path}: missing otalink schema line")
        tags = dict(part.split("=", 1) for part in first[1:].split() if "=" in part)
        found = tags.get("schema")
        if schema is not None and found != schema:
            raise SchemaError(f"{path}: schema {found!r}, expected {schema!r}")
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        return found, header, [row for row in reader if row]


_INT_COLUMNS = ("repeat_index", "subframe_index", "order")
_STR_COLUMNS = ("status", "reason")


@contextmanager
def _gc_paused():
    # bulk (de)serialization allocates millions of objects; collection churn
    # dominates the runtime if left enabled
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def _sweep_row_cells(r: SweepRow) -> tuple:
    # repr(float) is the shortest decimal form that round-trips exactly
    return (
        repr(r.sweep_value),
        r.repeat_index,
        r.subframe_index,
        r.order,
        r.status,
        r.reason,
        "" if r.channel_power_signal is None else repr(r.channel_power_signal),
        "" if r.channel_power_interference is None else repr(r.channel_power_interference),
        "" if r.sinr_db is None else repr(r.sinr_db),
        "" if r.evm_rms_pct is None else repr(r.evm_rms_pct),
        "" if r.normalized_evm_rms_pct is None else repr(r.normalized_evm_rms_pct),
        "" if r.mag_err_rms_pct is None else repr(r.mag_err_rms_pct),
        "" if r.phase_err_rms_rad is None else repr(r.phase_err_rms_rad),
    )


def emit_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"#otalink schema={SCHEMA_SWEEP} v={CSV_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        with _gc_paused():
            writer.writerows(map(_sweep_row_cells, rows))


def ingest_csv(path) -> list[SweepRow]:
    with open(path, "r", newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#otalink schema="):
            raise SchemaError(f"{path}: missing otalink schema line")
        tags = dict(part.split("=", 1) for part in first[1:].split() if "=" in part)
        if tags.get("schema") != SCHEMA_SWEEP:
            raise SchemaError(
                f"{path}: schema {tags.get('schema')!r}, expected {SCHEMA_SWEEP!r}"
            )
        body_start = fh.tell()
        header = next(csv.reader([fh.readline()]))
        missing = [c for c in SWEEP_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}")
        extra = [c for c in header if c not in SWEEP_COLUMNS]
        if extra:
            raise SchemaError(f"{path}: unexpected column {extra[0]!r}")
        fh.seek(body_start)
        dtype = {c: np.float64 for c in METRIC_COLUMNS}
        dtype["sweep_value"] = np.float64
        dtype.update({c: np.int64 for c in _INT_COLUMNS})
        dtype.update({c: str for c in _STR_COLUMNS})
        try:
            frame = pd.read_csv(
                fh,
                dtype=dtype,
                keep_default_na=False,
                na_values={c: [""] for c in METRIC_COLUMNS},
                float_precision="round_trip",
            )
        except ValueError as e:
            raise SchemaError(f"{path}: {e}") from None
    columns = []
    for name in SWEEP_COLUMNS:
        series = frame[name]
        if name in METRIC_COLUMNS:
            values = series.to_numpy()
            nan_mask = np.isnan(values)
            if nan_mask.any():
                obj = values.astype(object)
                obj[nan_mask] = None
                columns.append(obj.tolist())
            else:
                columns.append(values.tolist())
        else:
            columns.append(series.tolist())
    with _gc_paused():
        return [SweepRow(*cells) for cells in zip(*columns)]


# ---------------------------------------------------------------------------
# Gradient fits and per-figure-class plot data
# ---------------------------------------------------------------------------

_EVM_KIND_COLUMN = {"rms": "evm_rms_pct", "normalized_rms": "normalized_evm_rms_pct"}

GRADIENT_COLUMNS = ["order", "evm_kind", "a", "r_squared", "n_points", "sinr_floor_db"]


def gradient_rows(
    rows: list[SweepRow],
    sinr_floor_db: float = -np.inf,
    evm_kinds=("rms", "normalized_rms"),
) -> list[dict]:
    """Through-origin gradient fit per (modulation order, EVM convention)."""
    usable = [r for r in rows if r.status == "ok" and r.sinr_db is not None]
    if not usable:
        raise InsufficientDataError("no rows with a defined SINR to fit")
    orders = sorted({r.order for r in usable})
    out = []
    for order in orders:
        members = [r for r in usable if r.order == order]
        for kind in evm_kinds:
            col = _EVM_KIND_COLUMN[kind]
            points = [
                (10.0 ** (r.sinr_db / 10.0), getattr(r, col))
                for r in members
                if getattr(r, col) is not None
            ]
            fit = fit_gradient(points, sinr_floor_db=sinr_floor_db)
            out.append(
                {
                    "order": order,
                    "evm_kind": kind,
                    "a": fit.a,
                    "r_squared": fit.r_squared,
                    "n_points": fit.n_points,
                    "sinr_floor_db": fit.sinr_floor_db,
                }
            )
    return out


def emit_plot_data(
    rows: list[SweepRow],
    out_dir,
    sinr_floor_db: float = -np.inf,
    terms: InstrumentTerms | None = None,
) -> dict[str, str]:
    """Write the per-figure-class CSVs; returns {name: path}."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    fits = {(g["order"], g["evm_kind"]): g for g in gradient_rows(rows, sinr_floor_db)}

    evm_header = [
        "order",
        "evm_kind",
        "sinr_linear",
        "sinr_db",
        "inv_sqrt_sinr",
        "evm_pct",
        "fit_a",
        "fit_r2",
    ]
    evm_rows = []
    for r in rows:
        if r.status != "ok" or r.sinr_db is None:
            continue
        linear = 10.0 ** (r.sinr_db / 10.0)
        for kind, col in _EVM_KIND_COLUMN.items():
            value = getattr(r, col)
            if value is None:
                continue
            fit = fits.get((r.order, kind))
            evm_rows.append(
                [
                    r.order,
                    kind,
                    linear,
                    r.sinr_db,
                    float(1.0 / np.sqrt(linear)),
                    value,
                    fit["a"] if fit else None,
                    fit["r_squared"] if fit else None,
                ]
            )
    path = os.path.join(out_dir, "evm_vs_inv_sqrt_sinr.csv")
    write_csv(path, SCHEMA_EVM_SINR, evm_header, evm_rows)
    paths["evm_vs_inv_sqrt_sinr"] = path

    power_header = [
        "sweep_value",
        "metric",
        "n",
        "mean",
        "std",
        "expanded_k2",
        "repeatability_db",
        "budget_total_db",
    ]
    power_rows = []
    for entry in summarize(rows, ["sweep_value"]):
        if entry["metric"] not in ("channel_power_signal", "channel_power_interference"):
            continue
        rep_db = budget_db = None
        if entry["mean"] > 0:
            stats = RepeatStats(
                mean=entry["mean"],
                std=entry["std"],
                n=entry["n"],
                expanded_k2=entry["expanded_k2"],
            )
            budget = channel_power_uncertainty(stats, terms)
            rep_db, budget_db = budget.repeatability_db, budget.total_db
        power_rows.append(
            [
                entry["sweep_value"],
                entry["metric"],
                entry["n"],
                entry["mean"],
                entry["std"],
                entry["expanded_k2"],
                rep_db,
                budget_db,
            ]
        )
    path = os.path.join(out_dir, "channel_power_vs_sweep.csv")
    write_csv(path, SCHEMA_POWER_ERRORBAR, power_header, power_rows)
    paths["channel_power_vs_sweep"] = path

    budget_header = [
        "sweep_value",
        "n",
        "mean",
        "std",
        "repeatability_db",
        "u_fre_resp",
        "u_input_att",
        "u_abs",
        "u_rbw",
        "u_input_mixer",
        "total_db",
    ]
    used_terms = terms if terms is not None else InstrumentTerms()
    budget_rows = []
    for entry in summarize(rows, ["sweep_value"]):
        if entry["metric"] != "channel_power_signal" or entry["mean"] <= 0:
            continue
        stats = RepeatStats(
            mean=entry["mean"], std=entry["std"], n=entry["n"], expanded_k2=entry["expanded_k2"]
        )
        budget = channel_power_uncertainty(stats, used_terms)
        budget_rows.append(
            [
                entry["sweep_value"],
                entry["n"],
                entry["mean"],
                entry["std"],
                budget.repeatability_db,
                used_terms.u_fre_resp,
                used_terms.u_input_att,
                used_terms.u_abs,
                used_terms.u_rbw,
                used_terms.u_input_mixer,
                budget.total_db,
            ]
        )
    path = os.path.join(out_dir, "budget_table.csv")
    write_csv(path, SCHEMA_BUDGET, budget_header, budget_rows)
    paths["budget_table"] = path

    gradient_table = [
        [
            g["order"],
            g["evm_kind"],
            g["a"],
            g["r_squared"],
            g["n_points"],
            g["sinr_floor_db"] if np.isfinite(g["sinr_floor_db"]) else None,
        ]
        for g in fits.values()
    ]
    path = os.path.join(out_dir, "gradient_table.csv")
    write_csv(path, SCHEMA_GRADIENT, GRADIENT_COLUMNS, gradient_table)
    paths["gradient_table"] = path

    return paths
