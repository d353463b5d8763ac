"""Channel-power measurement uncertainty budget and repeatability stats.

The budget combines a repeatability term 10*log10(1 + 2*sigma/mu) with five
fixed instrument contributions, summed directly in dB (a root-sum-square
combination is available behind a flag for GUM-style users).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, UndefinedSinrError
from .metrics import SinrSample

__all__ = [
    "InstrumentTerms",
    "RepeatStats",
    "UncertaintyBudget",
    "repeat_stats",
    "channel_power_uncertainty",
    "traceable_sinr",
]


@dataclass(frozen=True)
class InstrumentTerms:
    """Spectrum-analyser contributions in dB (defaults: calibrated values)."""

    u_fre_resp: float = 0.38
    u_input_att: float = 0.2
    u_abs: float = 0.24
    u_rbw: float = 0.03
    u_input_mixer: float = 0.07

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"{name} must be >= 0")

    def as_dict(self) -> dict[str, float]:
        return {
            "u_fre_resp": self.u_fre_resp,
            "u_input_att": self.u_input_att,
            "u_abs": self.u_abs,
            "u_rbw": self.u_rbw,
            "u_input_mixer": self.u_input_mixer,
        }

    def total(self) -> float:
        # fsum: the dB terms must add without accumulation error
        return math.fsum(self.as_dict().values())


@dataclass(frozen=True)
class RepeatStats:
    mean: float
    std: float
    n: int
    expanded_k2: float  # 2 * std, 95% interval half-width


@dataclass(frozen=True)
class UncertaintyBudget:
    repeatability_db: float
    terms: InstrumentTerms
    total_db: float
    combine: str = "sum"  # "sum" | "rss"


def repeat_stats(samples) -> RepeatStats:
    """Sample mean and standard deviation (n-1 denominator) of repeats."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise InsufficientDataError("need at least 2 repeat samples")
    if np.any(x < 0):
        raise ValueError("power samples must be >= 0")
    mean = math.fsum(x) / x.size
    if np.all(x == x[0]):
        std = 0.0
    else:
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in x) / (x.size - 1))
    return RepeatStats(mean=mean, std=std, n=int(x.size), expanded_k2=2.0 * std)


def channel_power_uncertainty(
    stats: RepeatStats,
    terms: InstrumentTerms | None = None,
    combine: str = "sum",
) -> UncertaintyBudget:
    """Total channel-power measurement uncertainty in dB."""
    if terms is None:
        terms = InstrumentTerms()
    if stats.mean <= 0:
        raise ValueError("mean power must be positive")
    rep_db = float(10.0 * np.log10(1.0 + 2.0 * stats.std / stats.mean))
    if combine == "sum":
        total = math.fsum([rep_db, *terms.as_dict().values()])
    elif combine == "rss":
        parts = np.array([rep_db, *terms.as_dict().values()])
        total = float(np.sqrt(np.sum(parts**2)))
    else:
        raise ValueError(f"unknown combination rule {combine!r}")
    return UncertaintyBudget(
        repeatability_db=rep_db, terms=terms, total_db=float(total), combine=combine
    )


def traceable_sinr(
    signal_stats: RepeatStats,
    interference_stats: RepeatStats,
    noise_power: float,
    signal_budget: UncertaintyBudget,
    interference_budget: UncertaintyBudget,
) -> tuple[SinrSample, float]:
    """SINR from mean powers plus its worst-case dB uncertainty.

    The dB uncertainties of the two power measurements add directly
    (worst-case combination).
    """
    if signal_stats.mean <= 0:
        raise ValueError("signal mean power must be positive")
    denom = interference_stats.mean + noise_power
    if denom <= 0:
        raise UndefinedSinrError("interference-plus-noise power is zero")
    sinr = SinrSample.from_linear(signal_stats.mean / denom, plane="waveform")
    return sinr, float(signal_budget.total_db + interference_budget.total_db)
