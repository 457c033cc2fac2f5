"""Quantitative evaluation: SNR sweeps, flash periodicity, band suppression.

The Monte-Carlo harness is deterministic: every (variant, snr, trial) cell
draws from its own substream keyed by the sweep seed plus the cell's
coordinates, so results are bit-for-bit reproducible no matter how the cells
are scheduled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from . import nsp, scene, tfa
from .errors import EstimationError, ParameterError

FLASH_BAND_HZ = 500.0         # blade flashes live above the body/vibration band
FLASH_PEAK_THRESHOLD = 0.3    # autocorrelation height for a "significant" peak


def _samples(s):
    return np.asarray(getattr(s, "samples", s))


def noise_for_snr(s_uav, snr_db: float) -> float:
    """Complex-noise variance that puts the signal at the target SNR,
    σ_n² = Σ|s(m)|² / (M·10^{snr/10})."""
    x = _samples(s_uav)
    power = float(np.mean(np.abs(x) ** 2))
    if power == 0:
        raise ParameterError("noise_for_snr: zero signal")
    return power / (10.0 ** (snr_db / 10.0))


def synthesize_noisy(s_uav, snr_db: float, rng) -> np.ndarray:
    x = _samples(s_uav).astype(complex)
    var = noise_for_snr(x, snr_db)
    noise = rng.normal(size=len(x)) + 1j * rng.normal(size=len(x))
    return x + noise * np.sqrt(var / 2.0)


@dataclass(frozen=True)
class SweepConfig:
    snr_grid: tuple = tuple(range(-10, 31, 5))
    trials: int = 20
    variants: tuple = nsp.VARIANTS
    scene: scene.UavScene = field(default_factory=scene.UavScene)
    seed: int = 0
    num_symbols: int = 512
    passes: int = 3
    solver: nsp.SolverConfig = field(default_factory=nsp.SolverConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if len(self.snr_grid) == 0:
            raise ParameterError("snr grid is empty")
        unknown = set(self.variants) - set(nsp.VARIANTS)
        if unknown:
            raise ParameterError(f"unknown variants {sorted(unknown)}")


@dataclass(frozen=True)
class SweepPoint:
    variant: str
    snr_db: float
    mean_rmse: float
    std_rmse: float
    convergence_rate: float


def _cell_rng(seed: int, snr_db: float, trial: int):
    # substream key: (seed, snr in milli-dB, trial).  The variant is kept out
    # of the key on purpose: every variant faces the identical noise draw, so
    # cross-variant RMSE comparisons are paired and their ordering is far less
    # sensitive to the trial budget.  Cells stay independent across
    # (snr, trial), which is all the parallel scheduler needs.
    return np.random.default_rng(
        [seed, int(round(snr_db * 1000)) & 0x7FFFFFFF, trial])


def rmse_point(scn: scene.UavScene, variant: str, snr_db: float, trials: int,
               seed: int = 0, num_symbols: int = 512, passes: int = 3,
               solver: nsp.SolverConfig | None = None) -> SweepPoint:
    """Mean relative RMSE of the oracle-selected rotor component.

    Per trial: synthesize the noisy slow-time mixture, decompose, pick the
    component best correlated with the ground-truth rotor echo, and score
    ‖û − u_true‖/‖u_true‖.  Trials whose solve diverges are dropped from the
    mean and reported through the convergence rate.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    timeline = np.arange(1, num_symbols + 1) * C.SYMBOL_DURATION
    truth = scene.ground_truth_components(scn, timeline)
    u_true = truth["rotor"]
    s_clean = scene.synthesize_slow_time(scn, timeline)
    nt = float(np.linalg.norm(u_true))
    if nt == 0:
        raise ParameterError("scene has no rotor component to score against")
    errors = []
    failures = 0
    for trial in range(trials):
        rng = _cell_rng(seed, snr_db, trial)
        s_mix = synthesize_noisy(s_clean, snr_db, rng)
        try:
            out = nsp.decompose(s_mix, passes=passes, variant=variant, cfg=solver)
        except nsp.DivergenceError:
            failures += 1
            continue
        best = nsp.select_component(out, reference=u_true)
        errors.append(float(np.linalg.norm(out.components[best] - u_true)) / nt)
    if not errors:
        return SweepPoint(variant, snr_db, float("nan"), float("nan"), 0.0)
    return SweepPoint(variant, snr_db, float(np.mean(errors)), float(np.std(errors)),
                      (trials - failures) / trials)


def sweep(cfg: SweepConfig) -> list[SweepPoint]:
    points = []
    for variant in cfg.variants:
        for snr_db in cfg.snr_grid:
            points.append(rmse_point(cfg.scene, variant, float(snr_db), cfg.trials,
                                     seed=cfg.seed, num_symbols=cfg.num_symbols,
                                     passes=cfg.passes, solver=cfg.solver))
    return points


def write_sweep_csv(path, points) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variant", "snr_db", "mean_rmse", "std_rmse", "convergence_rate"])
        for p in points:
            w.writerow([p.variant, f"{p.snr_db:g}", f"{p.mean_rmse:.6f}",
                        f"{p.std_rmse:.6f}", f"{p.convergence_rate:.4f}"])


# ---------------------------------------------------------------------------
# Blade-flash periodicity

def flash_period(spec: tfa.Spectrogram, band_hz: float = FLASH_BAND_HZ) -> float:
    """Period of the blade-flash train, in seconds.

    Correlates the high-band (|f| > band_hz) spectral slices against
    themselves over frame lags — each bin zero-meaned across time, then a
    normalized inner product per lag — and returns the first local peak
    above threshold.  Correlating full slices rather than a scalar band
    energy keeps staggered multi-blade flash trains from aliasing the period
    down (distinct blades produce distinct slice shapes, identical only
    after a full rotation).
    """
    band = np.abs(spec.freq_axis) > band_hz
    if not np.any(band):
        raise ParameterError("flash band is empty at this sampling rate")
    power = np.abs(spec.values[band, :]) ** 2
    nfr = power.shape[1]
    if nfr < 8:
        raise EstimationError("too few frames for periodicity analysis")
    x = power - power.mean(axis=1, keepdims=True)
    max_lag = nfr // 2
    ac = np.zeros(max_lag + 1)
    for lag in range(max_lag + 1):
        a = x[:, :nfr - lag].ravel()
        b = x[:, lag:].ravel()
        denom = np.linalg.norm(a) * np.linalg.norm(b)
        ac[lag] = float(a @ b) / denom if denom > 0 else 0.0
    for k in range(2, max_lag):
        if ac[k] > ac[k - 1] and ac[k] >= ac[k + 1] and ac[k] > FLASH_PEAK_THRESHOLD:
            return k * spec.hop_interval
    raise EstimationError("no significant flash periodicity found")


# ---------------------------------------------------------------------------
# Vibration suppression

def truth_masks(scn: scene.UavScene, timeline,
                stft_cfg: tfa.StftConfig | None = None):
    """Time-frequency supports of the rotor and vibration ground truths.

    Each mask is the nonzero-cell set of that component's synchroextracted
    spectrogram; cells claimed by both trajectories (IF crossings) are
    ambiguous and dropped from both.  Returns
    (rotor_mask, vib_mask, rotor_ref_energy, vib_ref_energy) where the
    energies are the truths' own SET energies on their masks — the
    normalizers for retention fractions.
    """
    stft_cfg = stft_cfg or tfa.StftConfig()
    truth = scene.ground_truth_components(scn, timeline)
    refs = {}
    for key in ("rotor", "vibration"):
        u = truth[key]
        refs[key] = tfa.set_transform(tfa.stft(u, timeline, stft_cfg)) if np.any(u) else None
    mask_r = refs["rotor"].values != 0 if refs["rotor"] is not None else None
    mask_v = refs["vibration"].values != 0 if refs["vibration"] is not None else None
    if mask_r is not None and mask_v is not None:
        both = mask_r & mask_v
        mask_r = mask_r & ~both
        mask_v = mask_v & ~both
    den_r = float(np.sum(np.abs(refs["rotor"].values[mask_r]) ** 2)) if mask_r is not None else 0.0
    den_v = float(np.sum(np.abs(refs["vibration"].values[mask_v]) ** 2)) if mask_v is not None else 0.0
    return mask_r, mask_v, den_r, den_v


def vibration_suppression(component, timeline, scn: scene.UavScene | None = None,
                          masks: tuple | None = None,
                          stft_cfg: tfa.StftConfig | None = None) -> float:
    """How much better the component retained the rotor than the vibration, dB.

    Fraction of the rotor truth's SET energy the component keeps on the
    rotor's own time-frequency support, over the same retention fraction on
    the vibration's support: 10·log10[(E_R/E_R^truth) / (E_V/E_V^truth)].
    The normalization matters — an unnormalized band ratio mostly reports the
    scene's rotor-to-vibration energy offset, so a decomposition that drags
    the entire vibration term along still looks "suppressed" whenever the
    rotor is the stronger echo.  Here that case scores ~0 dB.
    """
    stft_cfg = stft_cfg or tfa.StftConfig()
    if masks is None:
        scn = scn or scene.UavScene()
        masks = truth_masks(scn, timeline, stft_cfg)
    mask_r, mask_v, den_r, den_v = masks
    se = tfa.set_transform(tfa.stft(component, timeline, stft_cfg))
    power = np.abs(se.values) ** 2
    e_rot = float(power[mask_r].sum()) / den_r if den_r > 0 else 0.0
    e_vib = float(power[mask_v].sum()) / den_v if den_v > 0 else 0.0
    if e_rot == 0:
        return -np.inf
    if e_vib == 0:
        return np.inf
    return 10.0 * float(np.log10(e_rot / e_vib))
