"""Link-level MIMO OTA simulator and SINR/EVM metrology toolkit."""

from .waveform import (
    ConstellationOrder,
    IqBuffer,
    OfdmParams,
    Role,
    SymbolFrame,
    build_subframe,
    constellation,
    demap_symbols,
    map_symbols,
    ofdm_demodulate,
    ofdm_modulate,
)
from .channel import ChannelMatrix, NoiseSpec, PrecoderWeights, apply_channel, gen_channel
from .interference import (
    InterferenceSource,
    calibrate_to_sinr,
    gen_gwn_interferer,
    gen_ofdm_interferer,
)
from .metrics import EvmReport, GradientFit, SinrSample, channel_power, evm, fit_gradient
from .stbc import (
    ChannelEstimate,
    StbcLinkConfig,
    StbcPair,
    alamouti_combine,
    alamouti_encode,
    alamouti_receive,
    estimate_channel_pilots,
    run_stbc_link,
)
from .uncertainty import (
    InstrumentTerms,
    RepeatStats,
    UncertaintyBudget,
    channel_power_uncertainty,
    repeat_stats,
    traceable_sinr,
)
from .campaign import SweepConfig, SweepRow, emit_csv, ingest_csv, run_sweep, summarize

__version__ = "0.1.0"
