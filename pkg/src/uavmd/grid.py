"""Resource-grid plumbing: TDD timeline, transmit grid, channel, CSI.

The channel is applied at resource-grid level, D_RX = D_TX ∘ (k_R ⊗ k_D) + Ω;
delay spread within one OFDM symbol is negligible at the ranges modeled here,
so no time-domain convolution is performed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants as C
from .errors import ConfigError, ParameterError
from .scene import UavScene, synthesize_slow_time

# Sensing symbols per DDDSU cycle: every symbol of the three D slots plus the
# leading downlink symbols of the S slot.  4 S-slot symbols make 46 sensing
# instants per 2.5 ms cycle, i.e. 1840 over a 0.1 s CPI.
S_SLOT_SENSING_SYMBOLS = 4


@dataclass(frozen=True)
class FrameConfig:
    subcarrier_spacing: float = C.SUBCARRIER_SPACING
    symbol_duration: float = C.SYMBOL_DURATION
    tdd_pattern: str = C.TDD_PATTERN
    cycle_duration: float = C.CYCLE_DURATION
    cpi_duration: float = C.CPI_DURATION
    sampling_mode: str = "uniform"          # "uniform" | "tdd-gapped"
    num_symbols: int = C.NUM_SYMBOLS        # M in uniform mode

    def __post_init__(self):
        if self.symbol_duration <= 1.0 / self.subcarrier_spacing:
            raise ConfigError("symbol_duration must exceed 1/subcarrier_spacing "
                              "(cyclic prefix must be positive)")
        if self.sampling_mode not in ("uniform", "tdd-gapped"):
            raise ConfigError(f"unknown sampling_mode {self.sampling_mode!r}")
        if self.sampling_mode == "tdd-gapped":
            ratio = self.cpi_duration / self.cycle_duration
            if not np.isclose(ratio, round(ratio)) or round(ratio) < 1:
                raise ConfigError("cpi_duration must be a positive multiple of "
                                  "cycle_duration in tdd-gapped mode")
        if self.num_symbols < 1:
            raise ConfigError("num_symbols must be >= 1")

    @property
    def cp_duration(self) -> float:
        return self.symbol_duration - 1.0 / self.subcarrier_spacing


@dataclass(frozen=True)
class ResourceGrid:
    data: np.ndarray                     # N x M complex
    role: str                            # "tx" | "rx" | "csi"
    subcarrier_spacing: float = C.SUBCARRIER_SPACING

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ParameterError("ResourceGrid.data must be a nonempty 2-D array")
        if self.role not in ("tx", "rx", "csi"):
            raise ParameterError(f"unknown grid role {self.role!r}")
        if self.role == "tx" and not np.allclose(np.abs(self.data), 1.0, atol=1e-12):
            raise ParameterError("tx grids must have unit-modulus entries")

    @property
    def shape(self):
        return self.data.shape


def build_timeline(cfg: FrameConfig) -> np.ndarray:
    """Slow-time sample instants t_1..t_M in seconds.

    uniform:     t_m = m*T_s for m = 1..num_symbols (the lattice the m*T_s
                 slow-time indexing assumes).
    tdd-gapped:  only the sensing-symbol instants inside D and S slots of each
                 DDDSU cycle, on the same symbol lattice, preserving the real
                 uplink gaps.
    """
    ts = cfg.symbol_duration
    if cfg.sampling_mode == "uniform":
        return np.arange(1, cfg.num_symbols + 1) * ts
    cycles = int(round(cfg.cpi_duration / cfg.cycle_duration))
    pattern = cfg.tdd_pattern.upper()
    symbols_per_cycle = len(pattern) * C.SYMBOLS_PER_SLOT
    out = []
    for cyc in range(cycles):
        for slot, kind in enumerate(pattern):
            if kind == "D":
                take = C.SYMBOLS_PER_SLOT
            elif kind == "S":
                take = S_SLOT_SENSING_SYMBOLS
            else:                        # uplink / flexible: no sensing
                take = 0
            base = cyc * symbols_per_cycle + slot * C.SYMBOLS_PER_SLOT
            for k in range(take):
                out.append((base + k + 1) * ts)
    if not out:
        raise ConfigError("timeline is empty: TDD pattern has no sensing symbols")
    return np.asarray(out)


def make_tx_grid(num_subcarriers: int, num_symbols: int, seed: int,
                 subcarrier_spacing: float = C.SUBCARRIER_SPACING) -> ResourceGrid:
    """Deterministic pseudo-random QPSK transmit grid (unit modulus)."""
    if num_subcarriers < 1 or num_symbols < 1:
        raise ParameterError("grid dimensions must be positive")
    rng = np.random.default_rng(seed)
    quadrant = rng.integers(0, 4, size=(num_subcarriers, num_symbols))
    data = np.exp(1j * (np.pi / 4.0 + quadrant * np.pi / 2.0))
    return ResourceGrid(data=data, role="tx", subcarrier_spacing=subcarrier_spacing)


def kr_vector(num_subcarriers: int, subcarrier_spacing: float, initial_range: float) -> np.ndarray:
    """Fast-frequency steering vector k_R(n) = exp(-j 2π n Δf 2R_0/c)."""
    if initial_range <= 0:
        raise ParameterError("initial_range must be > 0")
    n = np.arange(num_subcarriers)
    tau = 2.0 * initial_range / C.SPEED_OF_LIGHT
    return np.exp(-2j * np.pi * n * subcarrier_spacing * tau)


def apply_channel(tx: ResourceGrid, scene: UavScene, timeline,
                  noise_var: float = 0.0, rng=None) -> ResourceGrid:
    """Receive grid D_RX = D_TX ∘ (k_R ⊗ k_D) + Ω.

    Ω is circular complex Gaussian with variance noise_var per entry;
    noise_var=0 gives the exact product.
    """
    timeline = np.asarray(timeline, dtype=float)
    n_sub, n_sym = tx.shape
    if timeline.size != n_sym:
        raise ParameterError(f"timeline length {timeline.size} != grid columns {n_sym}")
    kd = synthesize_slow_time(scene, timeline)
    kr = kr_vector(n_sub, tx.subcarrier_spacing, scene.body.initial_range)
    data = tx.data * np.outer(kr, kd)
    if noise_var > 0:
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        sigma = np.sqrt(noise_var / 2.0)
        data = data + sigma * (rng.standard_normal(data.shape)
                               + 1j * rng.standard_normal(data.shape))
    return ResourceGrid(data=data, role="rx", subcarrier_spacing=tx.subcarrier_spacing)


def estimate_csi(rx: ResourceGrid, tx: ResourceGrid) -> ResourceGrid:
    """Per-cell CSI = D_RX / D_TX (data symbols cancel exactly)."""
    if rx.shape != tx.shape:
        raise ParameterError("rx/tx dimension mismatch")
    if np.any(tx.data == 0):
        raise ParameterError("tx grid contains zero entries")
    return ResourceGrid(data=rx.data / tx.data, role="csi",
                        subcarrier_spacing=tx.subcarrier_spacing)
