import numpy as np
import pytest
from dataclasses import replace

from otalink.errors import CapacityError, ShapeError
from otalink.waveform import (
    ConstellationOrder,
    IqBuffer,
    OfdmParams,
    Role,
    SymbolFrame,
    build_subframe,
    constellation,
    data_capacity,
    demap_symbols,
    map_symbols,
    ofdm_demodulate,
    ofdm_modulate,
    pilot_sequence,
    subframe_layout,
)

ORDERS = [4, 16, 64, 256]


def test_qpsk_first_quadrant_first():
    sym = map_symbols([0, 0], ConstellationOrder.QPSK)
    assert np.allclose(sym[0], (1 + 1j) / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("order", ORDERS)
def test_unit_average_power(order):
    points = constellation(order)
    assert points.size == order
    assert abs(np.mean(np.abs(points) ** 2) - 1.0) < 1e-12


@pytest.mark.parametrize("order", ORDERS)
def test_gray_adjacency(order):
    # neighbors along I or Q differ in exactly one bit of the full word
    points = constellation(order)
    k = int(np.log2(order))
    L = 1 << (k // 2)
    spacing = 2.0 / np.sqrt(2.0 * (order - 1) / 3.0)
    for w1 in range(order):
        for w2 in range(w1 + 1, order):
            d = points[w1] - points[w2]
            if abs(abs(d) - spacing) < 1e-9 and (
                abs(d.real) < 1e-9 or abs(d.imag) < 1e-9
            ):
                assert bin(w1 ^ w2).count("1") == 1


@pytest.mark.parametrize("order", ORDERS)
def test_map_demap_roundtrip(order):
    rng = np.random.default_rng(123)
    k = int(np.log2(order))
    bits = rng.integers(0, 2, size=200 * k)
    assert np.array_equal(demap_symbols(map_symbols(bits, order), order), bits)


def test_map_length_error():
    with pytest.raises(ShapeError):
        map_symbols([0, 1, 0], ConstellationOrder.QPSK)


def _plain_params(fft_size, cp_len, active=None):
    return OfdmParams(
        fft_size=fft_size,
        cp_len=cp_len,
        active_subcarriers=active if active is not None else fft_size,
        symbols_per_subframe=4,
        pilot_spacing=6,
        pss_symbol_index=0,
        sample_rate=1.0,
    )


def test_idft_of_delta_is_constant():
    params = _plain_params(8, 0)
    grid = np.zeros((4, 8), dtype=complex)
    grid[0, 0] = 1.0
    frame = SymbolFrame(grid, np.zeros((4, 8), dtype=np.int8))
    buf = ofdm_modulate(frame, params)
    assert np.allclose(buf.samples[:8], 1 / np.sqrt(8), atol=1e-14)


def test_parseval_unitary():
    rng = np.random.default_rng(5)
    params = _plain_params(64, 0, active=48)
    grid = rng.standard_normal((4, 48)) + 1j * rng.standard_normal((4, 48))
    frame = SymbolFrame(grid, np.zeros((4, 48), dtype=np.int8))
    buf = ofdm_modulate(frame, params)
    p_time = np.sum(np.abs(buf.samples) ** 2)
    p_grid = np.sum(np.abs(grid) ** 2)
    assert abs(p_time - p_grid) < 1e-10 * p_grid


@pytest.mark.parametrize("fft_size", [8, 64, 256])
@pytest.mark.parametrize("cp_frac", [0, 8, 4])
def test_modulate_demodulate_roundtrip(fft_size, cp_frac):
    cp = 0 if cp_frac == 0 else fft_size // cp_frac
    rng = np.random.default_rng(fft_size + cp)
    active = max(2, fft_size - fft_size // 4)
    params = _plain_params(fft_size, cp, active=active)
    words = rng.integers(0, 4, size=(4, active))
    grid = constellation(4)[words]
    frame = SymbolFrame(grid, np.zeros_like(words, dtype=np.int8))
    back = ofdm_demodulate(ofdm_modulate(frame, params), params)
    assert np.max(np.abs(back.grid - grid)) < 1e-9 * np.max(np.abs(grid))


def test_demodulate_zero_buffer():
    params = _plain_params(16, 4)
    buf = IqBuffer(np.zeros(4 * 20, dtype=complex), 1.0)
    frame = ofdm_demodulate(buf, params)
    assert np.all(frame.grid == 0)


def test_demodulate_linearity():
    rng = np.random.default_rng(7)
    params = _plain_params(64, 16, active=48)
    n = params.subframe_samples
    a = IqBuffer(rng.standard_normal(n) + 1j * rng.standard_normal(n), 1.0)
    b = IqBuffer(rng.standard_normal(n) + 1j * rng.standard_normal(n), 1.0)
    both = IqBuffer(a.samples + b.samples, 1.0)
    ga = ofdm_demodulate(a, params).grid
    gb = ofdm_demodulate(b, params).grid
    gab = ofdm_demodulate(both, params).grid
    scale = np.max(np.abs(gab))
    assert np.max(np.abs(gab - (ga + gb))) < 1e-10 * scale


def test_demodulate_length_error():
    params = _plain_params(16, 4)
    with pytest.raises(ShapeError):
        ofdm_demodulate(IqBuffer(np.zeros(7, dtype=complex), 1.0), params)


def test_build_subframe_deterministic():
    params = OfdmParams.desk()
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, size=data_capacity(params) * 2)
    f1 = build_subframe(bits, 4, params, 3)
    f2 = build_subframe(bits, 4, params, 3)
    assert np.array_equal(f1.grid, f2.grid)
    assert np.array_equal(f1.role_mask, f2.role_mask)


def test_build_subframe_empty_payload_rejected():
    params = OfdmParams.desk()
    with pytest.raises(CapacityError):
        build_subframe([], 4, params, 0)


def test_build_subframe_overflow_rejected():
    params = OfdmParams.desk()
    bits = np.zeros((data_capacity(params) + 1) * 2, dtype=int)
    with pytest.raises(CapacityError):
        build_subframe(bits, 4, params, 0)


def test_pss_allocation_changes_grid_power():
    # identical payload, different PSS-bearing symbol: the pilot lattice is
    # displaced differently, so total grid power must differ
    base = OfdmParams.desk()
    moved = replace(base, pss_symbol_index=1)
    rng = np.random.default_rng(4)
    n_bits = min(data_capacity(base), data_capacity(moved)) * 2
    bits = rng.integers(0, 2, size=n_bits)
    p0 = np.sum(np.abs(build_subframe(bits, 4, base, 0).grid) ** 2)
    p1 = np.sum(np.abs(build_subframe(bits, 4, moved, 1).grid) ** 2)
    assert abs(p0 - p1) > 1.0


def test_pilot_sequence_seeded_by_subframe_index():
    assert np.array_equal(pilot_sequence(64, 5), pilot_sequence(64, 5))
    assert not np.array_equal(pilot_sequence(64, 5), pilot_sequence(64, 6))
    assert np.allclose(np.abs(pilot_sequence(64, 5)), 1.0)


def test_layout_is_pure_function_of_params():
    params = OfdmParams.desk()
    m1 = subframe_layout(params)
    m2 = subframe_layout(params)
    assert np.array_equal(m1, m2)
    assert set(np.unique(m1)).issubset({int(r) for r in Role})
    # pilot and PSS positions never overlap data positions by construction
    pss_row = m1[params.pss_symbol_index]
    assert not np.any(pss_row == int(Role.DATA))
