"""Time-frequency analysis: modified STFT, instantaneous frequency, SET.

The STFT uses the origin-centered window convention
S(η, m) = Σ_ξ u(ξ) g(ξ−m) e^{−2πjη(ξ−m)}, under which the phase at every
occupied cell — not just on the ridge — advances at the signal's own
frequency, so a local phase derivative reads the instantaneous frequency
directly; the synchroextracting transform then keeps only the cells whose
estimated instantaneous frequency rounds onto their own bin, collapsing each
ridge to single-bin width.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

#: sentinel marking below-threshold cells in instantaneous-frequency maps
NO_FREQ = np.inf


def gaussian_window(length: int = 257) -> np.ndarray:
    """Unit-energy symmetric Gaussian window (σ = length/6), odd length."""
    if length % 2 == 0:
        raise ParameterError("window length must be odd")
    n = np.arange(length) - (length - 1) / 2.0
    g = np.exp(-0.5 * (n / (length / 6.0)) ** 2)
    return g / np.linalg.norm(g)


@dataclass(frozen=True)
class StftConfig:
    window: np.ndarray = field(default_factory=gaussian_window)
    hop: int = 4
    fft_size: int = 2048
    gamma_set: float | None = None     # absolute magnitude threshold
    gamma_set_rel: float = 0.02        # else: fraction of max magnitude

    def __post_init__(self):
        w = np.asarray(self.window, dtype=float)
        if w.ndim != 1 or len(w) % 2 == 0:
            raise ParameterError("window must be a 1-D odd-length vector")
        if not np.allclose(w, w[::-1], atol=1e-12):
            raise ParameterError("window must be symmetric")
        if self.hop < 1:
            raise ParameterError("hop must be >= 1")
        if self.fft_size < len(w):
            raise ParameterError("fft_size must be >= window length")
        if (self.gamma_set is not None and self.gamma_set < 0) or self.gamma_set_rel < 0:
            raise ParameterError("thresholds must be >= 0")

    def threshold_for(self, values) -> float:
        if self.gamma_set is not None:
            return float(self.gamma_set)
        mx = float(np.max(np.abs(values))) if np.asarray(values).size else 0.0
        return self.gamma_set_rel * mx


@dataclass(frozen=True)
class Spectrogram:
    values: np.ndarray              # freq bins x frames, complex (or magnitude)
    freq_axis: np.ndarray           # Hz, ascending (fftshifted)
    time_axis: np.ndarray           # seconds at frame centers
    config: StftConfig
    forward_values: np.ndarray | None = None   # STFT one sample ahead (for d/dt)

    def __post_init__(self):
        nf, nt = self.values.shape
        if len(self.freq_axis) != nf or len(self.time_axis) != nt:
            raise ParameterError("axis lengths do not match the value matrix")

    @property
    def bin_width(self) -> float:
        return float(self.freq_axis[1] - self.freq_axis[0])

    @property
    def hop_interval(self) -> float:
        if len(self.time_axis) > 1:
            return float(self.time_axis[1] - self.time_axis[0])
        return 0.0


def _frame_transform(u_padded, centers, win, nfft):
    """FFT of origin-centered windowed frames (rolled buffer layout)."""
    lh = (len(win) - 1) // 2
    frames = np.zeros((nfft, len(centers)), dtype=complex)
    for i, c in enumerate(centers):
        seg = u_padded[c:c + len(win)] * win
        buf = np.zeros(nfft, dtype=complex)
        buf[:lh + 1] = seg[lh:]          # window center lands at buffer origin
        buf[-lh:] = seg[:lh]
        frames[:, i] = buf
    return np.fft.fft(frames, axis=0)


def stft(u, timeline, cfg: StftConfig | None = None) -> Spectrogram:
    """Modified STFT of a slow-time signal.

    Also computes the one-sample-ahead twin transform used by inst_freq's
    phase derivative; frames step by cfg.hop and the signal is zero-padded
    so every sample is covered.
    """
    cfg = cfg or StftConfig()
    u = np.asarray(u, dtype=complex)
    timeline = np.asarray(timeline, dtype=float)
    win = np.asarray(cfg.window, dtype=float)
    if len(u) < len(win):
        raise ParameterError(f"signal length {len(u)} < window length {len(win)}")
    if len(u) != len(timeline):
        raise ParameterError("signal and timeline lengths differ")
    lh = (len(win) - 1) // 2
    dt = timeline[1] - timeline[0] if len(timeline) > 1 else 1.0
    centers = np.arange(0, len(u), cfg.hop)
    upad = np.concatenate([np.zeros(lh, complex), u, np.zeros(lh + 1, complex)])
    vals = _frame_transform(upad, centers, win, cfg.fft_size)
    fwd = _frame_transform(upad, centers + 1, win, cfg.fft_size)
    vals = np.fft.fftshift(vals, axes=0)
    fwd = np.fft.fftshift(fwd, axes=0)
    freq = np.fft.fftshift(np.fft.fftfreq(cfg.fft_size, d=dt))
    return Spectrogram(values=vals, freq_axis=freq, time_axis=timeline[0] + centers * dt,
                       config=cfg, forward_values=fwd)


def inst_freq(spec: Spectrogram, gamma_set: float | None = None) -> np.ndarray:
    """Instantaneous-frequency map ω̂(η, m) in Hz; NO_FREQ below threshold.

    ω̂ = Re{ ΔS / (2πj S Δt) } with ΔS the one-sample forward difference of
    the modified STFT.  The single-sample step keeps the phase derivative
    unambiguous across the full ±1/(2T_s) band (a hop-sized step would fold
    anything beyond 1/(2·hop·T_s)).
    """
    if spec.forward_values is None:
        raise ParameterError("spectrogram lacks the forward twin transform")
    s = spec.values
    thr = spec.config.threshold_for(s) if gamma_set is None else float(gamma_set)
    # sample interval recovered from the axis: nfft * Δη = 1/T_s
    dt = 1.0 / (len(spec.freq_axis) * spec.bin_width)
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = np.real((spec.forward_values - s) / (2j * np.pi * s * dt))
    out = np.where(np.abs(s) > thr, omega, NO_FREQ)
    out[~np.isfinite(out)] = NO_FREQ
    return out


def set_transform(spec: Spectrogram, gamma_set: float | None = None) -> Spectrogram:
    """Synchroextracting transform: keep cells lying on their own ridge.

    A cell survives iff |η − ω̂(η, m)| < Δη/2, i.e. its estimated
    instantaneous frequency rounds back onto its own bin; survivors are
    copied from the STFT unchanged, everything else is zeroed.
    """
    omega = inst_freq(spec, gamma_set)
    half_bin = spec.bin_width / 2.0
    eta = spec.freq_axis[:, None]
    keep = np.isfinite(omega) & (np.abs(eta - omega) < half_bin)
    vals = np.where(keep, spec.values, 0.0)
    return Spectrogram(values=vals, freq_axis=spec.freq_axis.copy(),
                       time_axis=spec.time_axis.copy(), config=spec.config,
                       forward_values=None)


# ---------------------------------------------------------------------------
# Spectrogram metrics

def renyi_entropy(spec_values, order: int = 3) -> float:
    """Order-α Rényi entropy (bits) of the normalized energy distribution."""
    e = np.abs(np.asarray(spec_values)) ** 2
    total = e.sum()
    if total <= 0:
        raise ParameterError("entropy of an all-zero spectrogram is undefined")
    p = (e / total).ravel()
    p = p[p > 0]
    if order == 1:
        return float(-(p * np.log2(p)).sum())
    return float(np.log2((p ** order).sum()) / (1.0 - order))


def band_energy(spec: Spectrogram, f_lo: float, f_hi: float,
                two_sided: bool = True) -> float:
    """Σ|S|² over frequency rows with f_lo <= |f| (or f) < f_hi."""
    f = spec.freq_axis
    sel = (np.abs(f) >= f_lo) & (np.abs(f) < f_hi) if two_sided else \
          (f >= f_lo) & (f < f_hi)
    return float(np.sum(np.abs(spec.values[sel, :]) ** 2))


def nonzero_cells(values) -> int:
    return int(np.count_nonzero(np.asarray(values)))
