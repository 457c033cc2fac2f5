"""CSI → range profiles → slow-time extraction → mixed signal → range-Doppler.

The range-profile matrix (TRM) is the column-wise IDFT of the CSI; the UAV's
row is found by slow-time-averaged magnitude (robust against per-symbol
fades from the rotor's dynamic RCS) and extracted as the s_uav vector that
the decomposition stage consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from .errors import DetectionError, ParameterError, UnsupportedModeError
from .grid import ResourceGrid


@dataclass(frozen=True)
class RangeProfileMatrix:
    data: np.ndarray                  # N x M complex (TRM)
    range_bin_size: float             # meters per bin, c/(2 N Δf)

    def __post_init__(self):
        if self.range_bin_size <= 0:
            raise ParameterError("range_bin_size must be > 0")


@dataclass(frozen=True)
class SlowTimeSignal:
    samples: np.ndarray               # length-M complex
    timeline: np.ndarray              # seconds per sample
    origin_bin: int = -1              # k_p (−1: synthetic, not from a TRM)
    bulk_gain: complex = 1.0 + 0.0j   # slow-time mean of the extracted row

    def __post_init__(self):
        if len(self.samples) != len(self.timeline):
            raise ParameterError("samples and timeline lengths differ")


@dataclass(frozen=True)
class ClutterConfig:
    """Zero-Doppler clutter plus AWGN riding on the extracted row.

    Clutter is a small set of fixed complex constants.  If csr_db is given,
    the realized constant sum is rescaled so measured clutter power sits at
    exactly that clutter-to-signal ratio; otherwise the raw amplitude_scale
    draw is kept (the additive mode: applying two configs sequentially equals
    one config with the union of their scatterer sets).
    """
    num_scatterers: int = 3
    amplitude_scale: float = 1.0
    noise_var: float = 0.0
    csr_db: float | None = None
    seed: int = 0
    gammas: tuple = field(default=None)   # explicit constants override the draw

    def __post_init__(self):
        if self.num_scatterers < 0 or self.amplitude_scale < 0 or self.noise_var < 0:
            raise ParameterError("clutter config fields must be >= 0")


def range_resolution(bandwidth: float) -> float:
    """δ_r = c / (2B) for the occupied bandwidth, in meters."""
    if bandwidth <= 0:
        raise ParameterError("bandwidth must be > 0")
    return C.SPEED_OF_LIGHT / (2.0 * bandwidth)


def range_bin_of(initial_range: float, num_subcarriers: int, subcarrier_spacing: float) -> int:
    """Grid bin index where a scatterer at the given range lands."""
    return int(round(num_subcarriers * subcarrier_spacing
                     * 2.0 * initial_range / C.SPEED_OF_LIGHT))


def range_profile(csi: ResourceGrid) -> RangeProfileMatrix:
    """Column-wise IDFT of the CSI with the 1/N normalization."""
    data = np.fft.ifft(csi.data, axis=0)
    n = csi.data.shape[0]
    bin_size = C.SPEED_OF_LIGHT / (2.0 * n * csi.subcarrier_spacing)
    return RangeProfileMatrix(data=data, range_bin_size=bin_size)


def detect_and_extract(trm: RangeProfileMatrix, timeline) -> SlowTimeSignal:
    """Locate the target row k_p and return it as the slow-time vector.

    k_p maximizes the slow-time-averaged magnitude; the complex slow-time
    mean of the row is recorded as the bulk gain but NOT divided out — a
    global complex gain only scales the decomposition problem.
    """
    mags = np.mean(np.abs(trm.data), axis=1)
    if not np.any(mags > 0):
        raise DetectionError("all-zero range-profile matrix")
    k_p = int(np.argmax(mags))
    row = trm.data[k_p, :].copy()
    return SlowTimeSignal(samples=row, timeline=np.asarray(timeline, dtype=float),
                          origin_bin=k_p, bulk_gain=complex(np.mean(row)))


def draw_clutter_gammas(cfg: ClutterConfig, signal_power: float) -> np.ndarray:
    """The per-scatterer complex constants a config resolves to."""
    if cfg.gammas is not None:
        return np.asarray(cfg.gammas, dtype=complex)
    rng = np.random.default_rng(cfg.seed)
    g = cfg.amplitude_scale * (rng.standard_normal(cfg.num_scatterers)
                               + 1j * rng.standard_normal(cfg.num_scatterers))
    if cfg.csr_db is not None and cfg.num_scatterers > 0:
        total = np.sum(g)
        if total == 0:
            raise ParameterError("degenerate clutter draw (zero sum); change seed")
        want = np.sqrt(signal_power * 10.0 ** (cfg.csr_db / 10.0))
        g = g * (want / np.abs(total))
    return g


def add_clutter(s: SlowTimeSignal, cfg: ClutterConfig, rng=None) -> SlowTimeSignal:
    """s_mix = s + Σ_c γ_c + AWGN (clutter constants have zero Doppler)."""
    samples = s.samples.astype(complex).copy()
    p_sig = float(np.mean(np.abs(samples) ** 2))
    gam = draw_clutter_gammas(cfg, p_sig)
    if gam.size:
        samples += np.sum(gam)
    if cfg.noise_var > 0:
        rng = np.random.default_rng(cfg.seed + 1) if rng is None else (
            np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng)
        sigma = np.sqrt(cfg.noise_var / 2.0)
        samples += sigma * (rng.standard_normal(samples.shape)
                            + 1j * rng.standard_normal(samples.shape))
    return SlowTimeSignal(samples=samples, timeline=s.timeline,
                          origin_bin=s.origin_bin, bulk_gain=s.bulk_gain)


def range_doppler_map(csi: ResourceGrid, timeline, wavelength: float = C.WAVELENGTH):
    """2D transform: IDFT over subcarriers, DFT over slow time (shifted).

    Returns (map, range_axis_m, velocity_axis_mps).  Requires a uniform
    timeline; Doppler is undefined over gapped sampling.
    """
    timeline = np.asarray(timeline, dtype=float)
    if timeline.size != csi.data.shape[1]:
        raise ParameterError("timeline length does not match CSI columns")
    dt = np.diff(timeline)
    if timeline.size > 1 and not np.allclose(dt, dt[0], rtol=1e-9):
        raise UnsupportedModeError("range_doppler_map needs a uniform timeline")
    trm = np.fft.ifft(csi.data, axis=0)
    rd = np.fft.fftshift(np.fft.fft(trm, axis=1), axes=1)
    n, m = csi.data.shape
    bin_size = C.SPEED_OF_LIGHT / (2.0 * n * csi.subcarrier_spacing)
    ranges = np.arange(n) * bin_size
    ts = dt[0] if timeline.size > 1 else C.SYMBOL_DURATION
    doppler = np.fft.fftshift(np.fft.fftfreq(m, d=ts))
    velocity = doppler * wavelength / 2.0
    return rd, ranges, velocity
