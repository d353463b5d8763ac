"""Traceable SINR, the RMS-EVM family, channel power and the gradient fit.

All SINR values are simple power ratios: desired power over summed
interference powers plus noise power, evaluated either on waveform sample
power ("waveform" plane) or on demodulated symbols ("symbol" plane).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ShapeError, UndefinedSinrError
from .waveform import IqBuffer, SymbolFrame

__all__ = [
    "SinrSample",
    "EvmReport",
    "GradientFit",
    "channel_power",
    "sinr_from_symbols",
    "sinr_per_demod_symbol",
    "evm",
    "fit_gradient",
]

FULL_BAND = (0.0, 0.5)


@dataclass(frozen=True)
class SinrSample:
    linear: float
    db: float
    plane: str  # "waveform" | "symbol"

    @classmethod
    def from_linear(cls, linear: float, plane: str) -> "SinrSample":
        if not (linear > 0.0) or not np.isfinite(linear):
            raise UndefinedSinrError(f"SINR must be finite and > 0, got {linear}")
        if plane not in ("waveform", "symbol"):
            raise ValueError(f"unknown SINR plane {plane!r}")
        return cls(linear=float(linear), db=float(10.0 * np.log10(linear)), plane=plane)


@dataclass
class EvmReport:
    """Per-symbol EVM plus the RMS error-vector quantities for one block."""

    evm_per_symbol: np.ndarray  # percent, one entry per symbol
    mag_err_rms: float  # percent
    phase_err_rms: float  # radians
    evm_rms: float  # percent, includes the 1/N_symbol factor
    normalized_evm_rms: float  # percent, reference-power normalization only
    n_symbol: int


@dataclass(frozen=True)
class GradientFit:
    """Through-origin fit of EVM% against 1/sqrt(linear SINR)."""

    a: float
    r_squared: float
    n_points: int
    sinr_floor_db: float


def channel_power(buf: IqBuffer, band: tuple[float, float] = FULL_BAND) -> float:
    """Periodogram power inside the two-sided fractional band [f_lo, f_hi].

    The band selects frequencies with f_lo <= |f| <= f_hi.  The full band
    reduces exactly to the mean sample power.
    """
    x = buf.samples
    if x.size == 0:
        raise ValueError("cannot measure power of an empty buffer")
    f_lo, f_hi = band
    if not (0.0 <= f_lo < f_hi <= 0.5):
        raise ValueError(f"invalid band {band}")
    if f_lo <= 0.0 and f_hi >= 0.5:
        return float(np.mean(np.abs(x) ** 2))
    spectrum = np.fft.fft(x)
    freqs = np.abs(np.fft.fftfreq(x.size))
    sel = (freqs >= f_lo) & (freqs <= f_hi)
    return float(np.sum(np.abs(spectrum[sel]) ** 2) / x.size**2)


def sinr_from_symbols(signal, interferers, noise_power: float) -> SinrSample:
    """Mean signal symbol power over summed mean interferer powers plus noise."""
    s = np.asarray(signal, dtype=np.complex128).ravel()
    if s.size < 1:
        raise ShapeError("signal sequence must be non-empty")
    denom = float(noise_power)
    for j in interferers:
        ji = np.asarray(j, dtype=np.complex128).ravel()
        if ji.size != s.size:
            raise ShapeError("interferer sequence length differs from signal")
        denom += float(np.mean(np.abs(ji) ** 2))
    if denom <= 0.0:
        raise UndefinedSinrError("interference-plus-noise power is zero")
    num = float(np.mean(np.abs(s) ** 2))
    if num <= 0.0:
        raise UndefinedSinrError("signal power is zero")
    return SinrSample.from_linear(num / denom, plane="symbol")


def sinr_per_demod_symbol(
    y_clean: SymbolFrame,
    interference_grids: list[SymbolFrame],
    noise_power: float,
) -> list[SinrSample]:
    """Per-resource-element SINR from separately demodulated components."""
    shape = y_clean.grid.shape
    for g in interference_grids:
        if g.grid.shape != shape:
            raise ShapeError("interference grid shape differs from signal grid")
    denom = np.full(shape, float(noise_power))
    for g in interference_grids:
        denom += np.abs(g.grid) ** 2
    if np.any(denom <= 0.0):
        raise UndefinedSinrError("zero interference-plus-noise at some element")
    ratios = (np.abs(y_clean.grid) ** 2 / denom).ravel()
    return [SinrSample.from_linear(r, plane="symbol") for r in ratios]


def _wrapped_phase_error(s_act: np.ndarray, s_ref: np.ndarray) -> np.ndarray:
    # principal-valued arg(s_act) - arg(s_ref); the plain difference keeps
    # identical inputs at exactly zero (angle of a product does not under FMA)
    diff = np.angle(s_act) - np.angle(s_ref)
    return np.mod(diff + np.pi, 2.0 * np.pi) - np.pi


def evm(
    s_act,
    s_ref,
    *,
    ref_level: float | None = None,
    ref_convention: str = "peak",
) -> EvmReport:
    """Full EVM family for one block of received vs reference symbols.

    Per-symbol EVM is normalized by |R|: the alphabet peak magnitude by
    default (pass ref_level to pin the per-order constant exactly), or the
    RMS reference magnitude with ref_convention="rms".
    """
    a = np.asarray(s_act, dtype=np.complex128).ravel()
    r = np.asarray(s_ref, dtype=np.complex128).ravel()
    if a.size != r.size or a.size < 1:
        raise ShapeError("s_act and s_ref must be equal-length and non-empty")
    ref_energy = float(np.sum(np.abs(r) ** 2))
    if ref_energy <= 0.0:
        raise ValueError("reference power is zero")
    if ref_level is None:
        if ref_convention == "peak":
            ref_level = float(np.max(np.abs(r)))
        elif ref_convention == "rms":
            ref_level = float(np.sqrt(ref_energy / r.size))
        else:
            raise ValueError(f"unknown ref convention {ref_convention!r}")
    if ref_level <= 0.0:
        raise ValueError("reference level must be positive")

    err = a - r
    err_energy = float(np.sum(np.abs(err) ** 2))
    n = a.size

    evm_per_symbol = np.abs(err) / ref_level * 100.0
    mag_err_rms = float(
        np.sqrt(np.sum((np.abs(a) - np.abs(r)) ** 2) / ref_energy) * 100.0
    )
    phase = _wrapped_phase_error(a, r)
    phase_err_rms = float(np.sqrt(np.mean(phase**2)))
    normalized_evm_rms = float(np.sqrt(err_energy / ref_energy) * 100.0)
    evm_rms = normalized_evm_rms / np.sqrt(n)

    return EvmReport(
        evm_per_symbol=evm_per_symbol,
        mag_err_rms=mag_err_rms,
        phase_err_rms=phase_err_rms,
        evm_rms=float(evm_rms),
        normalized_evm_rms=normalized_evm_rms,
        n_symbol=n,
    )


def fit_gradient(points, sinr_floor_db: float = -np.inf) -> GradientFit:
    """Least-squares through-origin fit of EVM% = A / sqrt(SINR).

    Only points with SINR strictly above the floor participate.  R-squared
    is the uncentered coefficient of the through-origin model.
    """
    pts = [(float(s), float(e)) for s, e in points]
    floor_linear = 10.0 ** (sinr_floor_db / 10.0) if np.isfinite(sinr_floor_db) else 0.0
    usable = [(s, e) for s, e in pts if s > floor_linear and s > 0.0]
    if len(usable) < 2:
        raise InsufficientDataError(
            f"need at least 2 points above the floor, got {len(usable)}"
        )
    s = np.array([p[0] for p in usable])
    y = np.array([p[1] for p in usable])
    x = 1.0 / np.sqrt(s)
    # fsum keeps the fit exactly invariant under point permutation
    sxx = math.fsum(x * x)
    sxy = math.fsum(x * y)
    a = sxy / sxx
    if a <= 0.0:
        raise InsufficientDataError("degenerate fit: non-positive gradient")
    syy = math.fsum(y * y)
    residual = math.fsum((y - a * x) ** 2)
    r2 = 1.0 - residual / syy if syy > 0.0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    return GradientFit(
        a=float(a),
        r_squared=float(r2),
        n_points=len(usable),
        sinr_floor_db=float(sinr_floor_db),
    )
