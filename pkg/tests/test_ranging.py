import numpy as np
import pytest

from uavmd import grid, ranging, scene
from uavmd.errors import DetectionError, ParameterError, UnsupportedModeError

TS = 36.6e-6


def make_csi(scn, num_subcarriers, num_symbols, seed=0):
    t = np.arange(1, num_symbols + 1) * TS
    tx = grid.make_tx_grid(num_subcarriers, num_symbols, seed=seed)
    rx = grid.apply_channel(tx, scn, t)
    return grid.estimate_csi(rx, tx), t


def test_range_resolution_exact():
    assert ranging.range_resolution(100e6) == 1.5
    with pytest.raises(ParameterError):
        ranging.range_resolution(0.0)


def test_range_bin_of_table_cases():
    assert ranging.range_bin_of(50.0, 512, 30e3) == 5
    assert ranging.range_bin_of(50.0, 3276, 30e3) == 33


def test_range_profile_of_flat_csi_is_an_impulse():
    csi = grid.ResourceGrid(data=np.ones((64, 8), complex), role="csi",
                            subcarrier_spacing=30e3)
    trm = ranging.range_profile(csi)
    assert np.allclose(trm.data[0, :], 1.0)
    assert np.allclose(trm.data[1:, :], 0.0, atol=1e-12)
    # bin size c/(2 N df)
    assert np.isclose(trm.range_bin_size, 3e8 / (2 * 64 * 30e3))


def test_range_profile_parseval_factor():
    rng = np.random.default_rng(4)
    data = rng.standard_normal((32, 6)) + 1j * rng.standard_normal((32, 6))
    csi = grid.ResourceGrid(data=data, role="csi", subcarrier_spacing=30e3)
    trm = ranging.range_profile(csi)
    # ifft normalization: |TRM|^2 sums to |CSI|^2 / N
    assert np.isclose(np.sum(np.abs(trm.data) ** 2),
                      np.sum(np.abs(data) ** 2) / 32)


def test_peak_bin_from_full_pipeline():
    scn = scene.UavScene(vibration_enabled=False, rotation_enabled=False)
    csi, t = make_csi(scn, 512, 16)
    trm = ranging.range_profile(csi)
    mags = np.mean(np.abs(trm.data), axis=1)
    assert int(np.argmax(mags)) == 5
    csi2, _ = make_csi(scn, 3276, 4)
    mags2 = np.mean(np.abs(ranging.range_profile(csi2).data), axis=1)
    assert int(np.argmax(mags2)) == 33


def test_detect_and_extract_recovers_slow_time():
    scn = scene.UavScene()
    csi, t = make_csi(scn, 256, 64)
    trm = ranging.range_profile(csi)
    s = ranging.detect_and_extract(trm, t)
    assert s.origin_bin == ranging.range_bin_of(50.0, 256, 30e3)
    kd = scene.synthesize_slow_time(scn, t)
    # extracted row is kd scaled by the (complex) bin gain
    gain = s.samples[0] / kd[0]
    assert np.allclose(s.samples, gain * kd, rtol=1e-10)


def test_detect_is_scale_invariant():
    scn = scene.UavScene()
    csi, t = make_csi(scn, 128, 32)
    trm = ranging.range_profile(csi)
    s1 = ranging.detect_and_extract(trm, t)
    scaled = ranging.RangeProfileMatrix(data=trm.data * (3e-7 * np.exp(1j)),
                                        range_bin_size=trm.range_bin_size)
    s2 = ranging.detect_and_extract(scaled, t)
    assert s2.origin_bin == s1.origin_bin
    assert np.allclose(s2.samples, s1.samples * 3e-7 * np.exp(1j), rtol=1e-12)


def test_detect_rejects_all_zero_matrix():
    trm = ranging.RangeProfileMatrix(data=np.zeros((8, 4), complex),
                                     range_bin_size=1.5)
    with pytest.raises(DetectionError):
        ranging.detect_and_extract(trm, np.arange(1, 5) * TS)


def test_slow_time_signal_validates_lengths():
    with pytest.raises(ParameterError):
        ranging.SlowTimeSignal(samples=np.ones(4, complex),
                               timeline=np.arange(1, 4) * TS)


def test_add_clutter_identity_when_empty():
    t = np.arange(1, 65) * TS
    s = ranging.SlowTimeSignal(samples=np.exp(1j * np.arange(64)), timeline=t)
    cfg = ranging.ClutterConfig(num_scatterers=0, noise_var=0.0)
    out = ranging.add_clutter(s, cfg)
    assert np.array_equal(out.samples, s.samples)


def test_add_clutter_is_a_constant_offset():
    t = np.arange(1, 65) * TS
    s = ranging.SlowTimeSignal(samples=np.exp(1j * np.arange(64)), timeline=t)
    out = ranging.add_clutter(s, ranging.ClutterConfig(num_scatterers=3, seed=9))
    delta = out.samples - s.samples
    assert np.allclose(delta, delta[0], rtol=0, atol=1e-15)
    assert abs(delta[0]) > 0


def test_add_clutter_explicit_gammas_are_additive():
    t = np.arange(1, 33) * TS
    s = ranging.SlowTimeSignal(samples=np.ones(32, complex), timeline=t)
    g1, g2 = 0.3 + 0.1j, -0.2 + 0.5j
    once = ranging.add_clutter(s, ranging.ClutterConfig(gammas=(g1, g2)))
    twice = ranging.add_clutter(
        ranging.add_clutter(s, ranging.ClutterConfig(gammas=(g1,))),
        ranging.ClutterConfig(gammas=(g2,)))
    assert np.allclose(once.samples, twice.samples, rtol=0, atol=1e-15)


def test_add_clutter_csr_calibration():
    t = np.arange(1, 129) * TS
    rng = np.random.default_rng(2)
    samples = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    s = ranging.SlowTimeSignal(samples=samples, timeline=t)
    for csr in (0.0, 10.0):
        out = ranging.add_clutter(s, ranging.ClutterConfig(csr_db=csr, seed=1))
        offset = out.samples[0] - s.samples[0]
        measured = 10 * np.log10(abs(offset) ** 2 / np.mean(np.abs(samples) ** 2))
        assert np.isclose(measured, csr, atol=1e-9)


def test_add_clutter_noise_is_seed_deterministic():
    t = np.arange(1, 65) * TS
    s = ranging.SlowTimeSignal(samples=np.ones(64, complex), timeline=t)
    cfg = ranging.ClutterConfig(num_scatterers=0, noise_var=0.5, seed=3)
    a = ranging.add_clutter(s, cfg)
    b = ranging.add_clutter(s, cfg)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, s.samples)


def test_range_doppler_peak_location():
    scn = scene.UavScene(vibration_enabled=False, rotation_enabled=False)
    csi, t = make_csi(scn, 128, 1024)
    rd, ranges, velocity = ranging.range_doppler_map(csi, t,
                                                     wavelength=scn.link.wavelength)
    k_r, k_d = np.unravel_index(np.argmax(np.abs(rd)), rd.shape)
    bin_size = 3e8 / (2 * 128 * 30e3)
    assert abs(ranges[k_r] - 50.0) <= bin_size
    # receding target: negative velocity, |f_D| = 2v/lambda ~ 116.7 Hz
    v_bin = (velocity[1] - velocity[0])
    assert abs(velocity[k_d] - (-5.0)) <= v_bin


def test_range_doppler_requires_uniform_timeline():
    scn = scene.UavScene()
    csi, t = make_csi(scn, 32, 92)
    # two DDDSU cycles: the inter-cycle uplink gap breaks uniformity
    gapped = grid.build_timeline(grid.FrameConfig(sampling_mode="tdd-gapped",
                                                  cpi_duration=5e-3))
    assert len(gapped) == 92
    with pytest.raises(UnsupportedModeError):
        ranging.range_doppler_map(csi, gapped)
    with pytest.raises(ParameterError):
        ranging.range_doppler_map(csi, t[:-1])
