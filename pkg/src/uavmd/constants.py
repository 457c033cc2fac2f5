"""Shared physical constants and default simulation parameters.

The defaults reproduce the simulation study's parameter table: a 3.5 GHz
ISAC downlink with 30 kHz subcarrier spacing observing a small quadrotor
at 50 m.  Everything here can be overridden through the configuration file
(see :mod:`uavmd.config`).
"""

import numpy as np

# Propagation speed used throughout.  The round number keeps derived
# quantities (range resolution c/2B, wavelength) consistent with the values
# quoted alongside the parameter table.
SPEED_OF_LIGHT = 3.0e8  # m/s

# --- Frame / waveform ----------------------------------------------------
CARRIER_FREQUENCY = 3.5e9        # Hz
SUBCARRIER_SPACING = 30e3        # Hz
BANDWIDTH = 100e6                # Hz (occupied)
NUM_SUBCARRIERS = 3276           # N
NUM_SYMBOLS = 1840               # M (sensing symbols per CPI)
SYMBOL_DURATION = 36.6e-6        # s (1/Δf + cyclic prefix)
CPI_DURATION = 0.1               # s
TDD_PATTERN = "DDDSU"            # slot types per 2.5 ms cycle
CYCLE_DURATION = 2.5e-3          # s
SYMBOLS_PER_SLOT = 14

WAVELENGTH = SPEED_OF_LIGHT / CARRIER_FREQUENCY  # ≈ 0.0857 m

# --- Link budget ----------------------------------------------------------
TRANSMIT_POWER_DBM = 28.0
ANTENNA_GAIN_DB = 18.0           # both ends

# --- Target geometry / motion (body) --------------------------------------
INITIAL_RANGE = 50.0             # m
RADIAL_VELOCITY = 5.0            # m/s
ELEVATION_ANGLE = np.deg2rad(30.0)
BODY_RCS = 0.1                   # m²
VIBRATION_AMPLITUDE = 0.05       # m
VIBRATION_FREQUENCY = 100.0      # Hz
VIBRATION_AZIMUTH = np.deg2rad(10.0)

# --- Rotor ----------------------------------------------------------------
BLADE_LENGTH = 0.5               # m
ROTATION_RATE = 80.0             # rotations/s

# Carbon-fiber blade dynamic-RCS sinusoid-sum coefficients (a_i, b_i, c_i).
# The b_i are tabulated for a 100 r/s rotation and scale linearly with f_r.
RCS_COEFF_A = np.array([1.133, 0.425, 0.7121, -0.1588, 0.1046, 0.0027])
RCS_COEFF_B = np.array([356.8, 1445.0, 608.0, 1946.0, 2236.0, 3513.0])
RCS_COEFF_C = np.array([-0.1997, -2.464, 1.695, 1.319, -0.1277, -0.2433])


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
