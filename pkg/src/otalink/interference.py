"""In-band interference generation and SINR calibration.

Two interferer families are supported: bandpass-filtered complex Gaussian
noise and an OFDM waveform with random payload and a circular frame offset.
Both are rescaled to their nominal mean power exactly, which is what makes
the receive-plane SINR traceable by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal

from .errors import InfeasibleTargetError
from .waveform import (
    ConstellationOrder,
    IqBuffer,
    OfdmParams,
    bits_per_symbol,
    build_subframe,
    data_capacity,
    ofdm_modulate,
)

__all__ = [
    "InterferenceSource",
    "gen_gwn_interferer",
    "gen_ofdm_interferer",
    "calibrate_to_sinr",
]

FIR_ORDER = 128  # windowed-sinc (Hamming) bandpass; linear phase


@dataclass(frozen=True)
class InterferenceSource:
    """Declarative description of one interferer.

    frame_offset applies to the OFDM kind only; None means "draw a fresh
    offset per sub-frame" when the source is used inside a link run.  band
    applies to the GWN kind; None means "match the victim's occupied band".
    """

    kind: str  # "gwn_bandpass" | "ofdm_lte_like"
    power: float
    seed: int
    frame_offset: int | None = None
    band: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("gwn_bandpass", "ofdm_lte_like"):
            raise ValueError(f"unknown interferer kind {self.kind!r}")
        if self.power < 0:
            raise ValueError("interferer power must be >= 0")


def _bandpass_taps(f_lo: float, f_hi: float) -> np.ndarray | None:
    """FIR taps for the two-sided fractional band; None means all-pass."""
    if f_lo <= 0.0 and f_hi >= 0.5:
        return None
    numtaps = FIR_ORDER + 1
    if f_lo <= 0.0:
        return sp_signal.firwin(numtaps, f_hi, window="hamming", fs=1.0)
    if f_hi >= 0.5:
        return sp_signal.firwin(numtaps, f_lo, window="hamming", pass_zero=False, fs=1.0)
    return sp_signal.firwin(
        numtaps, [f_lo, f_hi], window="hamming", pass_zero=False, fs=1.0
    )


def _rescale_to_power(samples: np.ndarray, power: float) -> np.ndarray:
    current = float(np.mean(np.abs(samples) ** 2))
    if current <= 0.0:
        raise ValueError("cannot rescale a zero-power waveform")
    return samples * np.sqrt(power / current)


def gen_gwn_interferer(
    length: int,
    power: float,
    band: tuple[float, float],
    seed: int,
    sample_rate: float = 1.0,
) -> IqBuffer:
    """Bandpass-filtered complex white Gaussian noise at exact mean power."""
    f_lo, f_hi = band
    if not (0.0 <= f_lo < f_hi <= 0.5):
        raise ValueError(f"empty or invalid band {band}")
    if length < 1:
        raise ValueError("length must be positive")
    if power < 0:
        raise ValueError("power must be >= 0")
    if power == 0.0:
        return IqBuffer(np.zeros(length, dtype=np.complex128), sample_rate)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    white = (rng.standard_normal(length) + 1j * rng.standard_normal(length)) / np.sqrt(2.0)
    taps = _bandpass_taps(f_lo, f_hi)
    shaped = white if taps is None else sp_signal.fftconvolve(white, taps, mode="same")
    return IqBuffer(_rescale_to_power(shaped, power), sample_rate)


def gen_ofdm_interferer(
    params: OfdmParams,
    order: ConstellationOrder | int,
    power: float,
    frame_offset: int,
    seed: int,
) -> IqBuffer:
    """Random-payload CP-OFDM waveform, circularly shifted and power-set."""
    frame_len = params.subframe_samples
    if not (0 <= frame_offset < frame_len):
        raise ValueError(f"frame_offset {frame_offset} outside [0, {frame_len})")
    if power < 0:
        raise ValueError("power must be >= 0")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n_bits = data_capacity(params) * bits_per_symbol(order)
    bits = rng.integers(0, 2, size=n_bits)
    frame = build_subframe(bits, order, params, subframe_index=0)
    buf = ofdm_modulate(frame, params)
    samples = np.roll(buf.samples, frame_offset)
    if power == 0.0:
        return IqBuffer(np.zeros_like(samples), params.sample_rate)
    return IqBuffer(_rescale_to_power(samples, power), params.sample_rate)


def calibrate_to_sinr(
    signal: IqBuffer,
    interferers: list[IqBuffer],
    noise_power: float,
    target_sinr_db: float,
) -> list[float]:
    """Common amplitude scale for all interferers hitting the SINR target.

    Solves P_S / (s^2 * sum(P_I) + noise) = 10^(target/10) for s and returns
    one scale per interferer (all equal, preserving relative powers).
    """
    p_signal = signal.mean_power()
    if p_signal <= 0.0:
        raise ValueError("signal has zero power")
    p_int = [buf.mean_power() for buf in interferers]
    total_int = float(sum(p_int))
    target_linear = 10.0 ** (target_sinr_db / 10.0)
    budget = p_signal / target_linear - noise_power
    if budget < 0.0:
        raise InfeasibleTargetError(
            f"target {target_sinr_db} dB unreachable: noise alone exceeds the budget"
        )
    if total_int <= 0.0:
        # nothing to scale; feasible only if the noise floor already lands there
        if noise_power > 0.0 and abs(budget) <= 1e-9 * p_signal / target_linear:
            return [0.0] * len(interferers)
        raise InfeasibleTargetError(
            "no interference power available to meet the target"
        )
    s = float(np.sqrt(budget / total_int))
    return [s] * len(interferers)
