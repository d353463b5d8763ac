import numpy as np
import pytest

from otalink.errors import InfeasibleTargetError
from otalink.interference import (
    calibrate_to_sinr,
    gen_gwn_interferer,
    gen_ofdm_interferer,
)
from otalink.metrics import channel_power
from otalink.waveform import IqBuffer, OfdmParams, occupied_band


def test_gwn_zero_power_is_silence():
    buf = gen_gwn_interferer(256, 0.0, (0.1, 0.3), seed=0)
    assert np.all(buf.samples == 0)


def test_gwn_exact_power():
    buf = gen_gwn_interferer(4096, 0.1, (0.05, 0.4), seed=1)
    assert abs(buf.mean_power() - 0.1) < 1e-12


def test_gwn_full_band_moments():
    # complex-Gaussian moment ratio E|z|^4 / (E|z|^2)^2 = 2
    buf = gen_gwn_interferer(100000, 1.0, (0.0, 0.5), seed=2)
    m2 = np.mean(np.abs(buf.samples) ** 2)
    m4 = np.mean(np.abs(buf.samples) ** 4)
    assert abs(m4 / m2**2 - 2.0) < 0.1


def test_gwn_band_confinement():
    band = (0.1, 0.25)
    buf = gen_gwn_interferer(100000, 1.0, band, seed=3)
    inband = channel_power(buf, band)
    assert inband / channel_power(buf) > 0.98


def test_gwn_empty_band_rejected():
    with pytest.raises(ValueError):
        gen_gwn_interferer(100, 1.0, (0.3, 0.3), seed=0)


def test_ofdm_interferer_deterministic():
    params = OfdmParams.desk()
    a = gen_ofdm_interferer(params, 16, 1.0, 0, seed=5)
    b = gen_ofdm_interferer(params, 16, 1.0, 0, seed=5)
    assert np.array_equal(a.samples, b.samples)


def test_ofdm_interferer_exact_power():
    params = OfdmParams.desk()
    buf = gen_ofdm_interferer(params, 64, 0.25, 311, seed=6)
    assert abs(buf.mean_power() - 0.25) < 1e-12


def test_ofdm_interferer_offset_is_circular_shift():
    params = OfdmParams.desk()
    plain = gen_ofdm_interferer(params, 16, 1.0, 0, seed=7)
    shifted = gen_ofdm_interferer(params, 16, 1.0, 100, seed=7)
    assert np.allclose(np.roll(plain.samples, 100), shifted.samples, atol=1e-15)


def test_ofdm_interferer_spectral_occupancy():
    params = OfdmParams.desk()
    buf = gen_ofdm_interferer(params, 16, 1.0, 777, seed=1)
    frac = channel_power(buf, occupied_band(params)) / channel_power(buf)
    assert frac >= 0.99


def test_ofdm_interferer_offset_out_of_range():
    params = OfdmParams.desk()
    with pytest.raises(ValueError):
        gen_ofdm_interferer(params, 16, 1.0, params.subframe_samples, seed=0)


def test_calibrate_basic_arithmetic():
    sig = IqBuffer(np.ones(100, dtype=complex), 1.0)
    intf = IqBuffer(np.ones(100, dtype=complex), 1.0)
    (s,) = calibrate_to_sinr(sig, [intf], 0.0, 10.0)
    assert abs(s**2 - 0.1) < 1e-12


def test_calibrate_infeasible_noise_floor():
    sig = IqBuffer(np.ones(100, dtype=complex), 1.0)
    intf = IqBuffer(np.ones(100, dtype=complex), 1.0)
    with pytest.raises(InfeasibleTargetError):
        calibrate_to_sinr(sig, [intf], 0.2, 10.0)


def test_calibrate_two_interferers_remeasured():
    rng = np.random.default_rng(8)
    sig = IqBuffer(np.ones(5000, dtype=complex), 1.0)
    i1 = gen_gwn_interferer(5000, 0.5, (0.0, 0.5), seed=10)
    i2 = gen_gwn_interferer(5000, 0.5, (0.0, 0.5), seed=11)
    scales = calibrate_to_sinr(sig, [i1, i2], 0.01, 3.0)
    assert len(scales) == 2 and scales[0] == scales[1]
    achieved = sig.mean_power() / (
        sum(s**2 * b.mean_power() for s, b in zip(scales, [i1, i2])) + 0.01
    )
    target = 10.0**0.3
    assert abs(achieved - target) / target < 1e-6


def test_calibrate_zero_signal_rejected():
    sig = IqBuffer(np.zeros(10, dtype=complex), 1.0)
    with pytest.raises(ValueError):
        calibrate_to_sinr(sig, [IqBuffer(np.ones(10, dtype=complex), 1.0)], 0.0, 0.0)


def test_calibrate_monotone_in_target():
    sig = IqBuffer(np.ones(100, dtype=complex), 1.0)
    intf = IqBuffer(np.ones(100, dtype=complex), 1.0)
    scales = [calibrate_to_sinr(sig, [intf], 0.0, t)[0] for t in (0.0, 5.0, 10.0, 20.0)]
    assert all(a > b for a, b in zip(scales, scales[1:]))
