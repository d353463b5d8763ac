"""Flat-fading MIMO channel generation and application.

The channel is one complex matrix per sub-frame (flat in frequency); each
receive antenna sees the precoded sum of the transmit waveforms plus
circularly-symmetric Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .waveform import IqBuffer

__all__ = [
    "ChannelMatrix",
    "NoiseSpec",
    "PrecoderWeights",
    "gen_channel",
    "apply_channel",
    "noise_samples",
]


@dataclass(frozen=True)
class ChannelMatrix:
    """Per-link coefficients h_ij, shape [n_rx, n_tx], flat per sub-frame."""

    h: np.ndarray
    subframe_index: int = 0

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=np.complex128))
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise ShapeError("channel matrix must be at least 1x1")
        if not np.all(np.isfinite(h.view(np.float64))):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "h", h)

    @property
    def n_rx(self) -> int:
        return self.h.shape[0]

    @property
    def n_tx(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    """Complex noise power per sample and the seed of its realization."""

    variance: float
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be >= 0")


@dataclass(frozen=True)
class PrecoderWeights:
    """Generic linear precoder weights w_j, one per transmit antenna."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(w.view(np.float64))):
            raise ValueError("precoder weights must be finite")
        object.__setattr__(self, "w", w)

    @classmethod
    def identity(cls, n_tx: int) -> "PrecoderWeights":
        return cls(w=np.ones(n_tx, dtype=np.complex128))


def gen_channel(
    kind: str,
    n_rx: int,
    n_tx: int,
    *,
    h=None,
    seed: int | None = None,
    subframe_index: int = 0,
) -> ChannelMatrix:
    """Create a channel matrix.

    kind "fixed" passes the supplied entries through; "rayleigh_iid" draws
    i.i.d. CN(0, 1) entries deterministically from the seed.
    """
    if n_rx < 1 or n_tx < 1:
        raise ValueError("channel dimensions must be >= 1")
    if kind == "fixed":
        if h is None:
            raise ValueError("fixed channel requires h values")
        mat = np.asarray(h, dtype=np.complex128).reshape(n_rx, n_tx)
        return ChannelMatrix(h=mat, subframe_index=subframe_index)
    if kind == "rayleigh_iid":
        if seed is None:
            raise ValueError("rayleigh_iid channel requires a seed")
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        mat = (
            rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))
        ) / np.sqrt(2.0)
        return ChannelMatrix(h=mat, subframe_index=subframe_index)
    raise ValueError(f"unknown channel kind {kind!r}")


def noise_samples(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian samples."""
    if variance == 0.0:
        return np.zeros(n, dtype=np.complex128)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def apply_channel(
    tx: list[IqBuffer],
    h: ChannelMatrix,
    w: PrecoderWeights | None = None,
    noise: NoiseSpec = NoiseSpec(0.0),
) -> list[IqBuffer]:
    """y_i[n] = sum_j h_ij * w_j * x_j[n] + n_i[n], one buffer per rx antenna."""
    if len(tx) != h.n_tx:
        raise ShapeError(f"{len(tx)} tx buffers for a {h.n_tx}-antenna channel")
    lengths = {buf.samples.size for buf in tx}
    if len(lengths) != 1:
        raise ShapeError("all tx buffers must have the same length")
    if w is None:
        w = PrecoderWeights.identity(h.n_tx)
    if w.w.size != h.n_tx:
        raise ShapeError("precoder length does not match transmit antennas")

    x = np.stack([buf.samples for buf in tx])  # [n_tx, length]
    y = (h.h * w.w[None, :]) @ x  # [n_rx, length]

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(noise.seed)))
    out = []
    rate = tx[0].sample_rate
    for i in range(h.n_rx):
        yi = y[i] + noise_samples(rng, y.shape[1], noise.variance)
        out.append(IqBuffer(samples=yi, sample_rate=rate))
    return out
