"""QAM constellations and CP-OFDM sub-frame modulation/demodulation.

Conventions used throughout the toolkit:

* Gray-coded square constellations normalized to unit *average* power.
* Unitary DFT in both directions (scale 1/sqrt(N)), so grid power and
  time-domain power agree exactly (Parseval) and SINR bookkeeping is
  independent of the FFT size.
* Centered subcarrier mapping with the DC bin unused whenever there is
  slack (active < fft_size); identity mapping when every bin is active.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ShapeError

__all__ = [
    "ConstellationOrder",
    "OfdmParams",
    "SymbolFrame",
    "IqBuffer",
    "Role",
    "constellation",
    "constellation_peak",
    "bits_per_symbol",
    "map_symbols",
    "demap_symbols",
    "subcarrier_map",
    "subframe_layout",
    "data_capacity",
    "pilot_sequence",
    "pss_sequence",
    "build_subframe",
    "ofdm_modulate",
    "ofdm_demodulate",
    "occupied_band",
]


class ConstellationOrder(enum.IntEnum):
    QPSK = 4
    QAM16 = 16
    QAM64 = 64
    QAM256 = 256


class Role(enum.IntEnum):
    """Role of a resource element inside a sub-frame grid."""

    DATA = 0
    PILOT = 1
    PSS = 2
    NULL = 3


def bits_per_symbol(order: ConstellationOrder | int) -> int:
    return int(np.log2(int(order)))


def _axis_levels(bits_per_axis: int) -> np.ndarray:
    """Amplitude level for each axis bit-word, Gray-coded.

    Word b maps to level index i with gray(i) == b, and levels descend from
    +(L-1) so the all-zeros word lands in the first quadrant.
    """
    L = 1 << bits_per_axis
    idx = np.arange(L)
    gray = idx ^ (idx >> 1)
    lut = np.empty(L, dtype=int)
    lut[gray] = idx
    return (L - 1) - 2 * lut


_CONSTELLATIONS: dict[int, np.ndarray] = {}


def constellation(order: ConstellationOrder | int) -> np.ndarray:
    """Gray-coded unit-average-power constellation, indexed by bit word.

    The first half of each symbol's bits selects the I level, the second
    half the Q level (MSB first).
    """
    m = int(order)
    if m not in (4, 16, 64, 256):
        raise ValueError(f"unsupported constellation order {m}")
    cached = _CONSTELLATIONS.get(m)
    if cached is not None:
        return cached
    k = bits_per_symbol(m)
    half = k // 2
    levels = _axis_levels(half)
    words = np.arange(m)
    i_word = words >> half
    q_word = words & ((1 << half) - 1)
    points = levels[i_word] + 1j * levels[q_word]
    points = points / np.sqrt(2.0 * (m - 1) / 3.0)
    _CONSTELLATIONS[m] = points
    return points


def constellation_peak(order: ConstellationOrder | int) -> float:
    """Peak magnitude of the order's alphabet (corner point)."""
    return float(np.max(np.abs(constellation(order))))


def map_symbols(bits, order: ConstellationOrder | int) -> np.ndarray:
    """Map a 0/1 bit sequence onto constellation symbols (MSB first)."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = bits_per_symbol(order)
    if bits.size % k != 0:
        raise ShapeError(
            f"bit count {bits.size} not divisible by {k} bits/symbol"
        )
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ShapeError("bits must be 0 or 1")
    words = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    return constellation(order)[words]


def demap_symbols(symbols, order: ConstellationOrder | int) -> np.ndarray:
    """Hard minimum-distance demapping back to bits."""
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    points = constellation(order)
    k = bits_per_symbol(order)
    out = np.empty((symbols.size, k), dtype=np.int64)
    # chunk the distance matrix to keep memory bounded for long inputs
    step = 8192
    shifts = np.arange(k - 1, -1, -1)
    for lo in range(0, symbols.size, step):
        chunk = symbols[lo : lo + step]
        d2 = np.abs(chunk[:, None] - points[None, :]) ** 2
        words = d2.argmin(axis=1)
        out[lo : lo + chunk.size] = (words[:, None] >> shifts) & 1
    return out.ravel()


@dataclass(frozen=True)
class OfdmParams:
    """CP-OFDM numerology and sub-frame resource layout parameters."""

    fft_size: int
    cp_len: int
    active_subcarriers: int
    symbols_per_subframe: int
    pilot_spacing: int
    pss_symbol_index: int
    sample_rate: float
    pss_width: int | None = None
    pss_root: int = 25

    def __post_init__(self):
        if self.fft_size < 1:
            raise ValueError("fft_size must be positive")
        if self.cp_len < 0:
            raise ValueError("cp_len must be non-negative")
        if not (1 <= self.active_subcarriers <= self.fft_size):
            raise ValueError("active_subcarriers must be in [1, fft_size]")
        if self.symbols_per_subframe < 1:
            raise ValueError("symbols_per_subframe must be positive")
        if self.pilot_spacing < 1:
            raise ValueError("pilot_spacing must be positive")
        if not (0 <= self.pss_symbol_index < self.symbols_per_subframe):
            raise ValueError("pss_symbol_index outside sub-frame")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        width = self.effective_pss_width
        if not (1 <= width <= self.active_subcarriers):
            raise ValueError("pss_width outside [1, active_subcarriers]")

    @property
    def effective_pss_width(self) -> int:
        if self.pss_width is not None:
            return self.pss_width
        return max(1, self.active_subcarriers // 2)

    @property
    def samples_per_symbol(self) -> int:
        return self.fft_size + self.cp_len

    @property
    def subframe_samples(self) -> int:
        return self.symbols_per_subframe * self.samples_per_symbol

    @classmethod
    def desk(cls) -> "OfdmParams":
        """Small, fast default numerology for desk-scale runs."""
        return cls(
            fft_size=64,
            cp_len=16,
            active_subcarriers=48,
            symbols_per_subframe=14,
            pilot_spacing=6,
            pss_symbol_index=0,
            sample_rate=1.92e6,
        )

    @classmethod
    def lte20(cls) -> "OfdmParams":
        """20 MHz LTE-like numerology preset."""
        return cls(
            fft_size=2048,
            cp_len=144,
            active_subcarriers=1200,
            symbols_per_subframe=14,
            pilot_spacing=6,
            pss_symbol_index=0,
            sample_rate=30.72e6,
        )


PRESETS = {"desk": OfdmParams.desk, "lte20": OfdmParams.lte20}


@dataclass
class SymbolFrame:
    """Grid of modulation symbols plus the role of each resource element."""

    grid: np.ndarray  # complex, [symbols_per_subframe, active_subcarriers]
    role_mask: np.ndarray  # int8, same shape, values from Role

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.complex128)
        self.role_mask = np.asarray(self.role_mask, dtype=np.int8)
        if self.grid.shape != self.role_mask.shape:
            raise ShapeError("grid and role_mask shapes differ")

    @property
    def shape(self):
        return self.grid.shape

    def symbols_with_role(self, role: Role) -> np.ndarray:
        return self.grid[self.role_mask == int(role)]


@dataclass
class IqBuffer:
    """Complex baseband samples with their sample rate."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise ShapeError("samples must be one-dimensional")

    def __len__(self):
        return self.samples.size

    def mean_power(self) -> float:
        if self.samples.size == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))


def subcarrier_map(params: OfdmParams) -> np.ndarray:
    """FFT bin index for each grid column (low to high frequency).

    With slack, columns get the offsets [-h..-1, +1..+w] around DC; if every
    bin is active the map is the identity (DC cannot be skipped).
    """
    n, a = params.fft_size, params.active_subcarriers
    if a == n:
        return np.arange(n)
    h = a // 2
    w = a - h
    offsets = np.concatenate([np.arange(-h, 0), np.arange(1, w + 1)])
    return np.mod(offsets, n)


def occupied_band(params: OfdmParams) -> tuple[float, float]:
    """Fractional band (of the sample rate) covered by active subcarriers."""
    n, a = params.fft_size, params.active_subcarriers
    if a == n:
        return (0.0, 0.5)
    w = a - a // 2
    return (0.0, min(0.5, (w + 0.5) / n))


# LTE-like time positions of the pilot lattice inside each 7-symbol slot.
_PILOT_SLOT_POSITIONS = (0, 4)


def subframe_layout(params: OfdmParams) -> np.ndarray:
    """Role mask implied by the numerology alone (pure function of params).

    Pilots sit on symbols l with l mod 7 in {0, 4} at a fixed frequency
    stride (the second slot position staggered by half a stride).  The PSS
    symbol overrides its row: the central pss_width bins carry the PSS and
    the rest of that row is null.  Everything else is data.
    """
    s, a = params.symbols_per_subframe, params.active_subcarriers
    mask = np.full((s, a), int(Role.DATA), dtype=np.int8)
    for l in range(s):
        pos = l % 7
        if pos in _PILOT_SLOT_POSITIONS:
            offset = 0 if pos == _PILOT_SLOT_POSITIONS[0] else params.pilot_spacing // 2
            mask[l, offset :: params.pilot_spacing] = int(Role.PILOT)
    width = params.effective_pss_width
    row = params.pss_symbol_index
    mask[row, :] = int(Role.NULL)
    start = (a - width) // 2
    mask[row, start : start + width] = int(Role.PSS)
    return mask


def data_capacity(params: OfdmParams) -> int:
    """Number of data-role resource elements in the layout."""
    return int(np.count_nonzero(subframe_layout(params) == int(Role.DATA)))


_PILOT_SEED_TAG = 0x50494C54  # distinguishes pilot streams from other RNG uses


def pilot_sequence(n: int, subframe_index: int) -> np.ndarray:
    """Deterministic pseudo-random QPSK pilots, seeded by sub-frame index."""
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((_PILOT_SEED_TAG, int(subframe_index))))
    )
    words = rng.integers(0, 4, size=n)
    return constellation(ConstellationOrder.QPSK)[words]


def pss_sequence(width: int, root: int) -> np.ndarray:
    """Constant-amplitude Zadoff-Chu-style sequence for the PSS row."""
    m = np.arange(width)
    return np.exp(-1j * np.pi * root * m * (m + 1) / width)


def build_subframe(
    payload_bits,
    order: ConstellationOrder | int,
    params: OfdmParams,
    subframe_index: int,
) -> SymbolFrame:
    """Assemble one sub-frame grid from payload bits.

    Data REs are filled in raster order; unfilled data REs become nulls.
    Pilots come from the seeded QPSK sequence, the PSS row from the fixed
    constant-amplitude sequence.
    """
    symbols = map_symbols(payload_bits, order)
    layout = subframe_layout(params)
    capacity = int(np.count_nonzero(layout == int(Role.DATA)))
    if symbols.size == 0:
        raise CapacityError("empty payload: at least one data symbol required")
    if symbols.size > capacity:
        raise CapacityError(
            f"payload of {symbols.size} symbols exceeds capacity {capacity}"
        )

    grid = np.zeros(layout.shape, dtype=np.complex128)
    mask = layout.copy()

    flat_mask = mask.ravel()
    flat_grid = grid.ravel()

    data_slots = np.flatnonzero(flat_mask == int(Role.DATA))
    flat_grid[data_slots[: symbols.size]] = symbols
    flat_mask[data_slots[symbols.size :]] = int(Role.NULL)

    pilot_slots = np.flatnonzero(flat_mask == int(Role.PILOT))
    flat_grid[pilot_slots] = pilot_sequence(pilot_slots.size, subframe_index)

    pss_slots = np.flatnonzero(flat_mask == int(Role.PSS))
    flat_grid[pss_slots] = pss_sequence(pss_slots.size, params.pss_root)

    return SymbolFrame(grid=flat_grid.reshape(layout.shape), role_mask=flat_mask.reshape(layout.shape))


def ofdm_modulate(frame: SymbolFrame, params: OfdmParams) -> IqBuffer:
    """Unitary IDFT per OFDM symbol plus cyclic prefix."""
    s, a = params.symbols_per_subframe, params.active_subcarriers
    if frame.grid.shape != (s, a):
        raise ShapeError(
            f"frame shape {frame.grid.shape} does not match params ({s}, {a})"
        )
    n = params.fft_size
    spectrum = np.zeros((s, n), dtype=np.complex128)
    spectrum[:, subcarrier_map(params)] = frame.grid
    time = np.fft.ifft(spectrum, axis=1) * np.sqrt(n)
    if params.cp_len:
        time = np.concatenate([time[:, n - params.cp_len :], time], axis=1)
    return IqBuffer(samples=time.ravel(), sample_rate=params.sample_rate)


def ofdm_demodulate(buf: IqBuffer, params: OfdmParams) -> SymbolFrame:
    """Discard the prefix, apply the unitary DFT, extract active bins."""
    s, n, cp = params.symbols_per_subframe, params.fft_size, params.cp_len
    expected = s * (n + cp)
    if buf.samples.size != expected:
        raise ShapeError(
            f"buffer length {buf.samples.size} does not match {expected} samples"
        )
    time = buf.samples.reshape(s, n + cp)[:, cp:]
    spectrum = np.fft.fft(time, axis=1) / np.sqrt(n)
    grid = spectrum[:, subcarrier_map(params)]
    return SymbolFrame(grid=grid, role_mask=subframe_layout(params))
