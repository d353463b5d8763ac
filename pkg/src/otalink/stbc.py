"""Alamouti 2x1 transmit diversity: encoding, combining, pilot estimation,
and a full waveform-level link run.

The space-time pairing is over adjacent OFDM symbol intervals, per
subcarrier.  The equivalent 2x2 system for one pair is

    [y1 ]   [h11   h12 ] [x1]   [n1]
    [y2c] = [h12* -h11*] [x2] + [n2]

where y2c is the conjugated second-interval observation.  Combining is
r = H^H y, so a perfectly known channel recovers gain * x exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelMatrix, NoiseSpec, PrecoderWeights, apply_channel, noise_samples
from .errors import DegenerateChannelError, EstimationError, ShapeError
from .interference import InterferenceSource, calibrate_to_sinr, gen_gwn_interferer, gen_ofdm_interferer
from .metrics import EvmReport, SinrSample, channel_power, evm, sinr_from_symbols
from .waveform import (
    ConstellationOrder,
    IqBuffer,
    OfdmParams,
    Role,
    SymbolFrame,
    bits_per_symbol,
    constellation_peak,
    map_symbols,
    occupied_band,
    ofdm_demodulate,
    ofdm_modulate,
    pilot_sequence,
)

__all__ = [
    "StbcPair",
    "ChannelEstimate",
    "StbcLinkConfig",
    "StbcSubframeResult",
    "alamouti_encode",
    "alamouti_receive",
    "alamouti_combine",
    "estimate_channel_pilots",
    "run_stbc_link",
    "run_stbc_subframe",
]

# payload order used for the OFDM-flavored interferer waveform
OFDM_INTERFERER_ORDER = ConstellationOrder.QAM16

_TAG_PAYLOAD = 1
_TAG_NOISE = 2
_TAG_INTERF = 3
_TAG_CHANNEL = 4


@dataclass(frozen=True)
class StbcPair:
    """One space-time block: two symbols over two intervals per antenna."""

    antenna1: np.ndarray  # [x1, -conj(x2)]
    antenna2: np.ndarray  # [x2,  conj(x1)]


@dataclass(frozen=True)
class ChannelEstimate:
    """(h11, h12) with the provenance of the estimate."""

    h11: complex | np.ndarray
    h12: complex | np.ndarray
    source: str  # "known" | "pilot_clean" | "pilot_contaminated"


def alamouti_encode(x1, x2) -> StbcPair:
    x1 = np.asarray(x1, dtype=np.complex128)
    x2 = np.asarray(x2, dtype=np.complex128)
    return StbcPair(
        antenna1=np.stack([x1, -np.conj(x2)]),
        antenna2=np.stack([x2, np.conj(x1)]),
    )


def alamouti_receive(pair: StbcPair, h11, h12, noise=(0.0, 0.0), interference=None):
    """Stacked observation [y(f1), y*(f2)] for one block.

    Interference, when supplied, adds (i1, i2) to the stacked vector before
    noise, matching the additive receive-plane placement.
    """
    x1 = pair.antenna1[0]
    x2 = pair.antenna2[0]
    n1, n2 = noise
    i1, i2 = interference if interference is not None else (0.0, 0.0)
    y1 = h11 * x1 + h12 * x2 + i1 + n1
    y2c = np.conj(h12) * x1 - np.conj(h11) * x2 + i2 + n2
    return y1, y2c


def alamouti_combine(received, est: ChannelEstimate):
    """r = H^H y and the diversity gain |h11|^2 + |h12|^2.

    Normalized symbol estimates are r_k / gain.
    """
    y1, y2c = received
    h11 = np.asarray(est.h11, dtype=np.complex128)
    h12 = np.asarray(est.h12, dtype=np.complex128)
    gain = np.abs(h11) ** 2 + np.abs(h12) ** 2
    if np.any(gain == 0.0):
        raise DegenerateChannelError("zero channel gain")
    r1 = np.conj(h11) * y1 + h12 * y2c
    r2 = np.conj(h12) * y1 - h11 * y2c
    return r1, r2, gain


def estimate_channel_pilots(
    rx_pilots, known_pilots, contamination=None
) -> ChannelEstimate:
    """Solve the per-block 2x2 system for (h11, h12) from known pilots.

    Inputs may be scalars (one pilot block) or arrays whose leading axis
    enumerates pilot blocks; estimates are averaged over that axis.  The
    system is exactly determined and invertible for any non-zero pilot pair.
    """
    y1, y2c = rx_pilots
    x1, x2 = known_pilots
    y1 = np.asarray(y1, dtype=np.complex128)
    y2c = np.asarray(y2c, dtype=np.complex128)
    x1 = np.asarray(x1, dtype=np.complex128)
    x2 = np.asarray(x2, dtype=np.complex128)
    source = "pilot_clean"
    if contamination is not None:
        i1, i2 = contamination
        y1 = y1 + np.asarray(i1, dtype=np.complex128)
        y2c = y2c + np.asarray(i2, dtype=np.complex128)
        source = "pilot_contaminated"
    det = np.abs(x1) ** 2 + np.abs(x2) ** 2
    if np.any(det == 0.0):
        raise EstimationError("singular pilot system: both pilots are zero")
    y2 = np.conj(y2c)
    h11 = (np.conj(x1) * y1 - x2 * y2) / det
    h12 = (np.conj(x2) * y1 + x1 * y2) / det
    if h11.ndim > 0:
        h11 = h11.mean(axis=0)
        h12 = h12.mean(axis=0)
    if h11.ndim == 0:
        return ChannelEstimate(h11=complex(h11), h12=complex(h12), source=source)
    return ChannelEstimate(h11=h11, h12=h12, source=source)


@dataclass(frozen=True)
class StbcLinkConfig:
    """One STBC link run: sub-frame count plus everything the link needs."""

    subframes: int
    order: ConstellationOrder
    channel: ChannelMatrix  # 1x2: [h11, h12]
    interferers: list[InterferenceSource] = field(default_factory=list)
    noise: NoiseSpec = NoiseSpec(0.0)
    estimation_mode: str = "known_h"
    params: OfdmParams = field(default_factory=OfdmParams.desk)
    n_pilot_pairs: int = 1
    target_sinr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.subframes < 1:
            raise ValueError("subframes must be >= 1")
        if self.estimation_mode not in ("known_h", "realtime_estimate"):
            raise ValueError(f"unknown estimation mode {self.estimation_mode!r}")
        if self.channel.h.shape != (1, 2):
            raise ShapeError("STBC link needs a 1x2 channel (h11, h12)")
        s = self.params.symbols_per_subframe
        if s % 2 != 0:
            raise ValueError("symbols_per_subframe must be even for STBC pairing")
        if self.n_pilot_pairs < 1 or self.n_pilot_pairs >= s // 2:
            raise ValueError("n_pilot_pairs must leave at least one data pair")


@dataclass
class StbcSubframeResult:
    evm: EvmReport
    sinr: SinrSample | None
    channel_power_signal: float
    channel_power_interference: float
    interferer_scales: list[float] = field(default_factory=list)


def _interferer_waveform(
    src: InterferenceSource,
    params: OfdmParams,
    subframe_index: int,
    source_index: int,
) -> IqBuffer:
    entropy = (int(src.seed), int(subframe_index), _TAG_INTERF, int(source_index))
    if src.kind == "gwn_bandpass":
        band = src.band if src.band is not None else occupied_band(params)
        return gen_gwn_interferer(
            params.subframe_samples, src.power, band, entropy, params.sample_rate
        )
    # ofdm_lte_like
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
    if src.frame_offset is None:
        offset = int(rng.integers(0, params.subframe_samples))
    else:
        offset = int(src.frame_offset)
    payload_seed = int(rng.integers(0, 2**63 - 1))
    return gen_ofdm_interferer(
        params, OFDM_INTERFERER_ORDER, src.power, offset, payload_seed
    )


def run_stbc_subframe(
    order: ConstellationOrder | int,
    params: OfdmParams,
    h11: complex,
    h12: complex,
    interferers: list[InterferenceSource],
    noise: NoiseSpec,
    estimation_mode: str,
    n_pilot_pairs: int,
    subframe_index: int,
    payload_seed,
    target_sinr_db: float | None = None,
    signal_power: float | None = None,
    interferer_scales: list[float] | None = None,
) -> StbcSubframeResult:
    """One sub-frame through the full encode/channel/decode pipeline.

    signal_power, when given, rescales the received (noise-free) signal to
    that channel power over the occupied band, emulating a receive-plane
    power sweep without a path-loss model.  interferer_scales reuses a
    previous calibration (one adjustment per campaign point) instead of
    re-calibrating against this sub-frame.
    """
    order = ConstellationOrder(int(order))
    s, k = params.symbols_per_subframe, params.active_subcarriers
    n_pairs = s // 2
    n_data_pairs = n_pairs - n_pilot_pairs
    if n_data_pairs < 1:
        raise ValueError("no data pairs left after pilots")

    # reference symbols: pilots (deterministic per sub-frame) + payload
    pilots = pilot_sequence(2 * n_pilot_pairs * k, subframe_index).reshape(
        n_pilot_pairs, k, 2
    )
    rng_payload = np.random.Generator(np.random.PCG64(np.random.SeedSequence(payload_seed)))
    n_bits = n_data_pairs * k * 2 * bits_per_symbol(order)
    payload = map_symbols(rng_payload.integers(0, 2, size=n_bits), order).reshape(
        n_data_pairs, k, 2
    )

    # build the two antenna grids pair by pair
    all_x = np.concatenate([pilots, payload], axis=0)  # [n_pairs, k, 2]
    x1, x2 = all_x[..., 0], all_x[..., 1]
    grid1 = np.empty((s, k), dtype=np.complex128)
    grid2 = np.empty((s, k), dtype=np.complex128)
    grid1[0::2], grid1[1::2] = x1, -np.conj(x2)
    grid2[0::2], grid2[1::2] = x2, np.conj(x1)

    roles = np.full((s, k), int(Role.DATA), dtype=np.int8)
    roles[: 2 * n_pilot_pairs] = int(Role.PILOT)
    tx1 = ofdm_modulate(SymbolFrame(grid1, roles), params)
    tx2 = ofdm_modulate(SymbolFrame(grid2, roles), params)

    # noise-free received waveform; noise is added separately so the
    # signal/interference/noise components stay individually measurable
    h_eff = np.array([[h11, h12]], dtype=np.complex128)
    clean = apply_channel(
        [tx1, tx2],
        ChannelMatrix(h=h_eff, subframe_index=subframe_index),
        PrecoderWeights.identity(2),
        NoiseSpec(0.0),
    )[0]

    band = occupied_band(params)
    if signal_power is not None:
        p0 = channel_power(clean, band)
        if p0 <= 0.0:
            raise ValueError("cannot scale a zero-power received signal")
        c = float(np.sqrt(signal_power / p0))
        clean = IqBuffer(clean.samples * c, clean.sample_rate)
        h11, h12 = h11 * c, h12 * c

    int_bufs = [
        _interferer_waveform(src, params, subframe_index, j)
        for j, src in enumerate(interferers)
    ]
    if interferer_scales is not None:
        scales = list(interferer_scales)
    elif target_sinr_db is not None:
        scales = calibrate_to_sinr(clean, int_bufs, noise.variance, target_sinr_db)
    else:
        scales = [1.0] * len(int_bufs)
    if any(s != 1.0 for s in scales):
        int_bufs = [
            IqBuffer(buf.samples * sc, buf.sample_rate)
            for buf, sc in zip(int_bufs, scales)
        ]

    rng_noise = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((int(noise.seed), int(subframe_index), _TAG_NOISE)))
    )
    nz = noise_samples(rng_noise, clean.samples.size, noise.variance)

    rx = clean.samples + nz
    for buf in int_bufs:
        rx = rx + buf.samples
    rx_grid = ofdm_demodulate(IqBuffer(rx, params.sample_rate), params).grid

    # channel estimate for the decoder
    if estimation_mode == "known_h":
        est = ChannelEstimate(h11=h11, h12=h12, source="known")
    else:
        y1p = rx_grid[0 : 2 * n_pilot_pairs : 2]
        y2p = np.conj(rx_grid[1 : 2 * n_pilot_pairs : 2])
        est = estimate_channel_pilots(
            (y1p, y2p), (pilots[..., 0], pilots[..., 1])
        )
        if interferers or noise.variance > 0.0:
            est = ChannelEstimate(est.h11, est.h12, source="pilot_contaminated")

    data_rows = rx_grid[2 * n_pilot_pairs :]
    y1 = data_rows[0::2]
    y2c = np.conj(data_rows[1::2])
    r1, r2, gain = alamouti_combine((y1, y2c), est)
    s_act = np.stack([r1 / gain, r2 / gain], axis=-1).ravel()
    s_ref = payload.ravel()
    report = evm(s_act, s_ref, ref_level=constellation_peak(order))

    # traceable per-sub-frame SINR on the demodulated data REs (the DFT is
    # linear, so signal and each interferer can be demodulated separately)
    clean_grid = ofdm_demodulate(clean, params).grid
    data_sel = np.s_[2 * n_pilot_pairs :]
    int_grids = [ofdm_demodulate(buf, params).grid[data_sel] for buf in int_bufs]
    denom_power = noise.variance + sum(
        float(np.mean(np.abs(g) ** 2)) for g in int_grids
    )
    if denom_power > 0.0:
        sinr = sinr_from_symbols(
            clean_grid[data_sel].ravel(),
            [g.ravel() for g in int_grids],
            noise.variance,
        )
    else:
        sinr = None

    p_sig = channel_power(clean, band)
    p_int = sum(channel_power(buf, band) for buf in int_bufs if buf.mean_power() > 0)
    return StbcSubframeResult(
        evm=report,
        sinr=sinr,
        channel_power_signal=p_sig,
        channel_power_interference=float(p_int),
        interferer_scales=scales,
    )


def run_stbc_link(config: StbcLinkConfig) -> list[StbcSubframeResult]:
    """Run the configured number of sub-frames over a fixed channel."""
    h11 = complex(config.channel.h[0, 0])
    h12 = complex(config.channel.h[0, 1])
    results = []
    for i in range(config.subframes):
        results.append(
            run_stbc_subframe(
                order=config.order,
                params=config.params,
                h11=h11,
                h12=h12,
                interferers=config.interferers,
                noise=config.noise,
                estimation_mode=config.estimation_mode,
                n_pilot_pairs=config.n_pilot_pairs,
                subframe_index=i,
                payload_seed=(int(config.seed), i, _TAG_PAYLOAD),
                target_sinr_db=config.target_sinr_db,
            )
        )
    return results
