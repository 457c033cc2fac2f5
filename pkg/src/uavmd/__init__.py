"""UAV micro-Doppler sensing on OFDM resource grids.

Simulation of multi-scatterer UAV echoes in CSI, slow-time extraction,
null-space-pursuit separation of rotor micro-Doppler, and synchroextracted
time-frequency analysis.
"""

__version__ = "0.1.0"

from . import bench, cli, config, constants, cxm, grid, nsp, ranging, scene, tfa
from .errors import (
    ConfigError,
    DetectionError,
    DivergenceError,
    EstimationError,
    FormatError,
    ParameterError,
    UavmdError,
    UnsupportedModeError,
)

__all__ = [
    "bench",
    "cli",
    "config",
    "constants",
    "cxm",
    "grid",
    "nsp",
    "ranging",
    "scene",
    "tfa",
    "ConfigError",
    "DetectionError",
    "DivergenceError",
    "EstimationError",
    "FormatError",
    "ParameterError",
    "UavmdError",
    "UnsupportedModeError",
    "__version__",
]
