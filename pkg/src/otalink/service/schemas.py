"""Pydantic request/response models for the service API.

Complex channel coefficients travel as [re, im] pairs; powers at external
boundaries are dBm at the simulated receive plane.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from ..campaign import SweepConfig, SweepRow, dbm_to_watts
from ..channel import ChannelMatrix, NoiseSpec
from ..interference import InterferenceSource
from ..stbc import StbcLinkConfig
from ..waveform import PRESETS, ConstellationOrder, OfdmParams


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SweepConfigModel(StrictModel):
    sweep_variable: str
    start: float
    stop: float
    step: float
    repeats: int
    modulation_orders: list[int]
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
    channel_h: list[list[float]] = Field(default=[[1.0, 0.0], [0.6, 0.8]])
    n_pilot_pairs: int = 1
    calibration: str = "per_repeat"
    numerology: str = "desk"
    ofdm: dict[str, float] | None = None

    def to_config(self) -> SweepConfig:
        ofdm = _coerce_ofdm(self.ofdm)
        h = _coerce_channel_pair(self.channel_h)
        return SweepConfig(
            sweep_variable=self.sweep_variable,
            start=self.start,
            stop=self.stop,
            step=self.step,
            repeats=self.repeats,
            modulation_orders=tuple(self.modulation_orders),
            master_seed=self.master_seed,
            interferer_policy=self.interferer_policy,
            n_interferers=self.n_interferers,
            interferer_kind=self.interferer_kind,
            estimation_mode=self.estimation_mode,
            subframes=self.subframes,
            total_interferer_power_dbm=self.total_interferer_power_dbm,
            noise_power_dbm=self.noise_power_dbm,
            signal_power_dbm=self.signal_power_dbm,
            pin_signal_power=self.pin_signal_power,
            channel_kind=self.channel_kind,
            channel_h=h,
            n_pilot_pairs=self.n_pilot_pairs,
            calibration=self.calibration,
            numerology=self.numerology,
            ofdm=ofdm,
        )


def _coerce_ofdm(ofdm: dict | None) -> dict | None:
    if ofdm is None:
        return None
    valid = set(OfdmParams.__dataclass_fields__)
    unknown = set(ofdm) - valid
    if unknown:
        raise ValueError(f"unknown ofdm parameter {sorted(unknown)[0]!r}")
    out = {}
    for key, value in ofdm.items():
        out[key] = float(value) if key == "sample_rate" else int(value)
    return out


def _coerce_channel_pair(h: list[list[float]]) -> tuple:
    if len(h) != 2 or any(len(c) != 2 for c in h):
        raise ValueError("channel_h must be two [re, im] pairs")
    return ((float(h[0][0]), float(h[0][1])), (float(h[1][0]), float(h[1][1])))


class SweepRequest(StrictModel):
    config: SweepConfigModel
    workers: int = 1


class SweepRowModel(StrictModel):
    sweep_value: float
    repeat_index: int
    subframe_index: int
    order: int
    status: str
    reason: str
    channel_power_signal: float | None
    channel_power_interference: float | None
    sinr_db: float | None
    evm_rms_pct: float | None
    normalized_evm_rms_pct: float | None
    mag_err_rms_pct: float | None
    phase_err_rms_rad: float | None

    @classmethod
    def from_row(cls, row: SweepRow) -> "SweepRowModel":
        return cls(**row.__dict__)

    def to_row(self) -> SweepRow:
        return SweepRow(**self.model_dump())


class SweepResponse(StrictModel):
    rows: list[SweepRowModel]
    n_total: int
    n_ok: int
    n_skipped: int


class FitRequest(StrictModel):
    points: list[tuple[float, float]]  # (sinr_linear, evm_percent)
    sinr_floor_db: float | None = None


class FitResponse(StrictModel):
    a: float
    r_squared: float
    n_points: int
    sinr_floor_db: float | None  # None: no floor applied (JSON has no -inf)


class InstrumentTermsModel(StrictModel):
    u_fre_resp: float = 0.38
    u_input_att: float = 0.2
    u_abs: float = 0.24
    u_rbw: float = 0.03
    u_input_mixer: float = 0.07


class BudgetRequest(StrictModel):
    samples: list[float]
    terms: InstrumentTermsModel = Field(default_factory=InstrumentTermsModel)
    combine: str = "sum"


class BudgetResponse(StrictModel):
    n: int
    mean: float
    std: float
    expanded_k2: float
    repeatability_db: float
    terms: InstrumentTermsModel
    total_db: float


class InterfererModel(StrictModel):
    kind: str = "gwn_bandpass"
    power_dbm: float = 0.0
    seed: int = 0
    frame_offset: int | None = None

    def to_source(self) -> InterferenceSource:
        return InterferenceSource(
            kind=self.kind,
            power=dbm_to_watts(self.power_dbm),
            seed=self.seed,
            frame_offset=self.frame_offset,
        )


class StbcRequest(StrictModel):
    subframes: int
    order: int
    channel_h: list[list[float]] = Field(default=[[1.0, 0.0], [0.6, 0.8]])
    interferers: list[InterfererModel] = Field(default_factory=list)
    noise_power_dbm: float | None = None
    estimation_mode: str = "known_h"
    n_pilot_pairs: int = 1
    target_sinr_db: float | None = None
    numerology: str = "desk"
    ofdm: dict[str, float] | None = None
    seed: int = 0

    def to_config(self) -> StbcLinkConfig:
        if self.numerology not in PRESETS:
            raise ValueError(f"unknown numerology preset {self.numerology!r}")
        params = PRESETS[self.numerology]()
        ofdm = _coerce_ofdm(self.ofdm)
        if ofdm:
            from dataclasses import replace

            params = replace(params, **ofdm)
        (h11_re, h11_im), (h12_re, h12_im) = _coerce_channel_pair(self.channel_h)
        noise_var = (
            dbm_to_watts(self.noise_power_dbm) if self.noise_power_dbm is not None else 0.0
        )
        return StbcLinkConfig(
            subframes=self.subframes,
            order=ConstellationOrder(self.order),
            channel=ChannelMatrix(
                h=[[complex(h11_re, h11_im), complex(h12_re, h12_im)]]
            ),
            interferers=[m.to_source() for m in self.interferers],
            noise=NoiseSpec(noise_var, seed=self.seed),
            estimation_mode=self.estimation_mode,
            params=params,
            n_pilot_pairs=self.n_pilot_pairs,
            target_sinr_db=self.target_sinr_db,
            seed=self.seed,
        )


class StbcSubframeModel(StrictModel):
    subframe_index: int
    order: int
    estimation_mode: str
    channel_power_signal: float
    channel_power_interference: float
    sinr_db: float | None
    evm_rms_pct: float
    normalized_evm_rms_pct: float
    mag_err_rms_pct: float
    phase_err_rms_rad: float


class StbcResponse(StrictModel):
    subframes: list[StbcSubframeModel]


class SummarizeRequest(StrictModel):
    rows: list[SweepRowModel]
    group_by: list[str]


class SummaryEntryModel(StrictModel):
    group: dict[str, int | float | str]
    metric: str
    n: int
    mean: float
    std: float
    expanded_k2: float


class SummarizeResponse(StrictModel):
    entries: list[SummaryEntryModel]


class HealthResponse(StrictModel):
    status: str
    version: str
