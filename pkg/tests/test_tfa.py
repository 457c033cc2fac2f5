"""Modified-STFT conventions, IF estimation, synchroextraction invariants."""

import numpy as np
import pytest

from uavmd import tfa
from uavmd.errors import ParameterError

FS = 1000.0
M = 1024
T = np.arange(M) / FS
CFG = tfa.StftConfig(fft_size=1024)    # pin the grid the expectations assume
F0 = 30 * FS / CFG.fft_size            # exactly on the bin grid


def _tone():
    return np.exp(2j * np.pi * F0 * T)


def _two_component():
    return _tone() + 0.8 * np.exp(2j * np.pi * (200.0 * T + 40.0 * T ** 2))


# ---------------------------------------------------------------------------
# window & config

def test_gaussian_window_unit_energy_symmetric():
    w = tfa.gaussian_window()
    assert len(w) == 257
    assert np.linalg.norm(w) == pytest.approx(1.0, rel=1e-12)
    assert np.array_equal(w, w[::-1])
    with pytest.raises(ParameterError):
        tfa.gaussian_window(256)


def test_stft_config_validation():
    with pytest.raises(ParameterError):
        tfa.StftConfig(window=np.ones(4))          # even length
    with pytest.raises(ParameterError):
        tfa.StftConfig(window=np.array([1.0, 2.0, 3.0]))   # asymmetric
    with pytest.raises(ParameterError):
        tfa.StftConfig(hop=0)
    with pytest.raises(ParameterError):
        tfa.StftConfig(fft_size=128)               # < window length
    with pytest.raises(ParameterError):
        tfa.StftConfig(gamma_set=-1.0)


def test_threshold_absolute_overrides_relative():
    cfg = tfa.StftConfig(gamma_set=0.5)
    assert cfg.threshold_for(np.array([100.0])) == 0.5
    rel = tfa.StftConfig()
    assert rel.threshold_for(np.array([3.0, -50.0])) == pytest.approx(1.0)


def test_spectrogram_axis_mismatch():
    with pytest.raises(ParameterError):
        tfa.Spectrogram(values=np.zeros((4, 3)), freq_axis=np.zeros(5),
                        time_axis=np.zeros(3), config=CFG)


def test_stft_validation():
    with pytest.raises(ParameterError):
        tfa.stft(np.ones(100, complex), np.arange(100) / FS, CFG)  # < window
    with pytest.raises(ParameterError):
        tfa.stft(np.ones(M, complex), T[:-1], CFG)


# ---------------------------------------------------------------------------
# STFT conventions

def test_axes_and_steps():
    spec = tfa.stft(_tone(), T, CFG)
    assert spec.values.shape == (CFG.fft_size, (M + CFG.hop - 1) // CFG.hop)
    assert np.all(np.diff(spec.freq_axis) > 0)
    assert spec.bin_width == pytest.approx(FS / CFG.fft_size)
    assert spec.hop_interval == pytest.approx(CFG.hop / FS)
    assert spec.time_axis[0] == T[0]


def test_tone_ridge_location():
    spec = tfa.stft(_tone(), T, CFG)
    ridge_row = int(np.argmin(np.abs(spec.freq_axis - F0)))
    peaks = np.argmax(np.abs(spec.values), axis=0)
    assert np.all(peaks[20:-20] == ridge_row)


def test_ridge_phase_advances_at_signal_frequency():
    # the demodulated convention: every occupied cell's phase steps by
    # 2*pi*f0 per sample, which is what the IF estimator differentiates
    spec = tfa.stft(_tone(), T, CFG)
    row = int(np.argmin(np.abs(spec.freq_axis - F0)))
    steps = np.diff(np.unwrap(np.angle(spec.values[row, 20:-20])))
    assert np.allclose(steps, 2 * np.pi * F0 * CFG.hop / FS, atol=1e-6)


def test_energy_ratio_stable_across_signals():
    rng = np.random.default_rng(0)
    ratios = []
    for _ in range(2):
        x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        spec = tfa.stft(x, T, CFG)
        ratios.append(np.sum(np.abs(spec.values) ** 2)
                      / (CFG.fft_size * np.sum(np.abs(x) ** 2)))
    assert abs(ratios[0] - ratios[1]) <= 0.02 * ratios[0]


def test_zero_signal_all_zero():
    spec = tfa.stft(np.zeros(M, complex), T, CFG)
    assert not np.any(spec.values)
    se = tfa.set_transform(spec)
    assert not np.any(se.values)


# ---------------------------------------------------------------------------
# instantaneous frequency

def test_inst_freq_on_grid_tone():
    spec = tfa.stft(_tone(), T, CFG)
    row = int(np.argmin(np.abs(spec.freq_axis - F0)))
    om = tfa.inst_freq(spec)
    ridge = om[row, 20:-20]
    # discrete one-sample estimator reads (fs/2pi)*sin(2pi*f/fs)
    expect = FS / (2 * np.pi) * np.sin(2 * np.pi * F0 / FS)
    assert np.allclose(ridge, expect, atol=0.05)
    assert np.max(np.abs(ridge - F0)) < spec.bin_width / 2


def test_inst_freq_sentinel_below_threshold():
    spec = tfa.stft(_tone(), T, CFG)
    om = tfa.inst_freq(spec)
    far_row = int(np.argmin(np.abs(spec.freq_axis - 400.0)))
    assert np.all(om[far_row] == tfa.NO_FREQ)


def test_inst_freq_tracks_slow_chirp():
    sig = np.exp(2j * np.pi * (30.0 * T + 10.0 * T ** 2))   # 30..50 Hz
    spec = tfa.stft(sig, T, CFG)
    om = tfa.inst_freq(spec)
    for j in range(30, spec.values.shape[1] - 30, 7):
        f_true = 30.0 + 20.0 * spec.time_axis[j]
        row = int(np.argmax(np.abs(spec.values[:, j])))
        assert np.isfinite(om[row, j])
        assert abs(om[row, j] - f_true) <= 1.5 * spec.bin_width


def test_inst_freq_scale_invariant():
    spec = tfa.stft(_two_component(), T, CFG)
    scaled = tfa.stft(_two_component() * (3.0 - 4.0j), T, CFG)
    om_a, om_b = tfa.inst_freq(spec), tfa.inst_freq(scaled)
    finite = np.isfinite(om_a) & np.isfinite(om_b)
    assert np.allclose(om_a[finite], om_b[finite], atol=1e-6)


def test_inst_freq_needs_forward_twin():
    se = tfa.set_transform(tfa.stft(_tone(), T, CFG))
    with pytest.raises(ParameterError):
        tfa.inst_freq(se)


# ---------------------------------------------------------------------------
# synchroextraction

def test_set_single_cell_per_interior_frame():
    se = tfa.set_transform(tfa.stft(_tone(), T, CFG))
    counts = np.count_nonzero(se.values, axis=0)
    assert np.all(counts[20:-20] == 1)


def test_set_cells_subset_of_stft_and_equal():
    spec = tfa.stft(_two_component(), T, CFG)
    se = tfa.set_transform(spec)
    mask = se.values != 0
    assert np.array_equal(se.values[mask], spec.values[mask])
    above = np.abs(spec.values) > CFG.threshold_for(spec.values)
    assert np.all(above[mask])


def test_set_concentration_and_entropy():
    spec = tfa.stft(_two_component(), T, CFG)
    se = tfa.set_transform(spec)
    above = int(np.sum(np.abs(spec.values) > CFG.threshold_for(spec.values)))
    assert tfa.nonzero_cells(se.values) <= 0.10 * above
    assert tfa.renyi_entropy(se.values) < tfa.renyi_entropy(spec.values)


# ---------------------------------------------------------------------------
# metrics

def test_renyi_uniform_distribution():
    vals = np.zeros((8, 8))
    vals[2, 2:6] = 1.0
    assert tfa.renyi_entropy(vals, order=3) == pytest.approx(2.0)
    assert tfa.renyi_entropy(vals, order=1) == pytest.approx(2.0)


def test_renyi_scale_invariant_and_zero_rejected():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal((16, 16))
    assert tfa.renyi_entropy(vals * 7.3) == pytest.approx(tfa.renyi_entropy(vals))
    with pytest.raises(ParameterError):
        tfa.renyi_entropy(np.zeros((4, 4)))


def test_band_energy_two_sided():
    spec = tfa.stft(np.exp(-2j * np.pi * F0 * T), T, CFG)   # tone at -F0
    total = float(np.sum(np.abs(spec.values) ** 2))
    assert tfa.band_energy(spec, 20.0, 40.0) >= 0.9 * total
    assert tfa.band_energy(spec, 20.0, 40.0, two_sided=False) <= 0.05 * total
    assert tfa.band_energy(spec, 100.0, 200.0) <= 1e-3 * total
