"""UAV multi-scatterer model and slow-time channel synthesis.

The target is a coherent sum of independent scattering centers: the fuselage
(pure translation), a vibrating point scatterer riding on the fuselage, and
one point per rotor-blade tip.  Each center contributes
``amplitude(t) * exp(-j*4*pi*R(t)/lambda)`` to the slow-time channel vector
k_D; ranges come from the geometric motion models, so the phase laws are
exact rather than small-angle approximations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import constants as C
from .errors import ParameterError

FOUR_PI_CUBED = (4.0 * np.pi) ** 3


@dataclass(frozen=True)
class LinkBudget:
    """Radar link parameters; gains and losses are linear (not dB)."""

    transmit_power: float = C.dbm_to_watts(C.TRANSMIT_POWER_DBM)  # W
    tx_gain: float = C.db_to_linear(C.ANTENNA_GAIN_DB)
    rx_gain: float = C.db_to_linear(C.ANTENNA_GAIN_DB)
    carrier_frequency: float = C.CARRIER_FREQUENCY  # Hz
    system_loss: float = 1.0
    path_loss: float = 1.0

    def __post_init__(self):
        for name in ("transmit_power", "tx_gain", "rx_gain",
                     "carrier_frequency", "system_loss", "path_loss"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"LinkBudget.{name} must be > 0")

    @property
    def wavelength(self) -> float:
        return C.SPEED_OF_LIGHT / self.carrier_frequency


@dataclass(frozen=True)
class BodyScatterer:
    initial_range: float = C.INITIAL_RANGE          # R_0, m
    radial_velocity: float = C.RADIAL_VELOCITY      # v, m/s (positive = receding)
    rcs: float = C.BODY_RCS                         # m²
    vibration_amplitude: float = C.VIBRATION_AMPLITUDE   # D_v, m
    vibration_frequency: float = C.VIBRATION_FREQUENCY   # f_v, Hz
    vibration_azimuth: float = C.VIBRATION_AZIMUTH       # α_q, rad
    elevation: float = C.ELEVATION_ANGLE                 # θ, rad
    azimuth: float = 0.0                                 # α, rad

    def __post_init__(self):
        if self.initial_range <= 0:
            raise ParameterError("BodyScatterer.initial_range must be > 0")
        if self.rcs < 0 or self.vibration_amplitude < 0 or self.vibration_frequency < 0:
            raise ParameterError("BodyScatterer rcs/vibration fields must be >= 0")


@dataclass(frozen=True)
class RotorBlade:
    blade_length: float = C.BLADE_LENGTH     # L, m (tip-to-tip of one blade arm: offset L/2)
    rotation_rate: float = C.ROTATION_RATE   # f_r, rotations/s
    initial_angle: float = 0.0               # φ_p, rad
    elevation: float = C.ELEVATION_ANGLE     # θ, rad
    coeff_a: np.ndarray = field(default_factory=lambda: C.RCS_COEFF_A.copy())
    coeff_b: np.ndarray = field(default_factory=lambda: C.RCS_COEFF_B.copy())
    coeff_c: np.ndarray = field(default_factory=lambda: C.RCS_COEFF_C.copy())

    def __post_init__(self):
        if self.blade_length <= 0 or self.rotation_rate <= 0:
            raise ParameterError("RotorBlade blade_length and rotation_rate must be > 0")
        la, lb, lc = len(self.coeff_a), len(self.coeff_b), len(self.coeff_c)
        if not (la == lb == lc) or la < 1:
            raise ParameterError("RotorBlade coefficient vectors must share length >= 1")


def default_blades(count: int = 2) -> tuple[RotorBlade, ...]:
    """Blades with evenly staggered initial angles over a quarter turn.

    Two blades at 0 and π/2 keep their flash trains interleaved without
    aliasing the flash period down to half a rotation (a mirrored pair at
    0/π produces identical spectral slices twice per rotation).
    """
    return tuple(RotorBlade(initial_angle=k * np.pi / 2) for k in range(count))


@dataclass(frozen=True)
class UavScene:
    body: BodyScatterer = field(default_factory=BodyScatterer)
    blades: tuple[RotorBlade, ...] = field(default_factory=default_blades)
    link: LinkBudget = field(default_factory=LinkBudget)
    translation_enabled: bool = True
    vibration_enabled: bool = True
    rotation_enabled: bool = True

    def with_flags(self, translation=None, vibration=None, rotation=None) -> "UavScene":
        """Copy of the scene with motion terms toggled (None = keep)."""
        return replace(
            self,
            translation_enabled=self.translation_enabled if translation is None else translation,
            vibration_enabled=self.vibration_enabled if vibration is None else vibration,
            rotation_enabled=self.rotation_enabled if rotation is None else rotation,
        )


# ---------------------------------------------------------------------------
# Geometry

def scatterer_range(kind: str, t, scene: UavScene, blade_index: int = 0):
    """Range R(t) in meters of one scattering center.

    Parameters
    ----------
    kind : {"body-translation", "blade-tip", "body-vibration"}
    t : scalar or array of seconds
    blade_index : which blade for kind="blade-tip"
    """
    t = np.asarray(t, dtype=float)
    body = scene.body
    base = body.initial_range + body.radial_velocity * t
    if kind == "body-translation":
        return base
    if kind == "blade-tip":
        if not 0 <= blade_index < len(scene.blades):
            raise ParameterError(f"no blade with index {blade_index}")
        b = scene.blades[blade_index]
        return base + (b.blade_length / 2.0) * np.cos(b.elevation) * np.cos(
            2.0 * np.pi * b.rotation_rate * t + b.initial_angle)
    if kind == "body-vibration":
        return base + body.vibration_amplitude * np.sin(
            2.0 * np.pi * body.vibration_frequency * t) * np.cos(
            body.elevation) * np.cos(body.vibration_azimuth)
    raise ParameterError(f"unknown scatterer kind {kind!r}")


def rotor_rcs(t, blade: RotorBlade):
    """Signed dynamic RCS of a rotating blade, in m².

    The sinusoid-sum material model is evaluated in gate-relative time: the
    rotation windows tile t >= 0 and the sum's argument restarts at each
    window boundary, so the RCS waveform is exactly periodic with the
    rotation.  (Running the sinusoid phase continuously across windows
    destroys that periodicity, and with it the blade-flash period the
    spectrogram analysis is built around.)  The b_i coefficients are
    tabulated at 100 r/s and scale with f_r.
    """
    t = np.asarray(t, dtype=float)
    period = 1.0 / blade.rotation_rate
    # blade offset enters as a time shift; gate index = rotation count
    t_shift = t + blade.initial_angle / (2.0 * np.pi * blade.rotation_rate)
    t_rel = np.mod(t_shift, period)
    arg = np.multiply.outer(t_rel, blade.coeff_b * (blade.rotation_rate / 100.0))
    return np.sum(blade.coeff_a * np.sin(arg + blade.coeff_c), axis=-1)


def rotation_gate_index(t, blade: RotorBlade):
    """Index ℓ of the active rotation window at time t (exactly one per t)."""
    t = np.asarray(t, dtype=float)
    t_shift = t + blade.initial_angle / (2.0 * np.pi * blade.rotation_rate)
    return np.floor(t_shift * blade.rotation_rate).astype(int)


def scattering_amplitude(sigma, R, link: LinkBudget):
    """Linear scattering amplitude from the radar equation; sign of σ kept.

    A negative dynamic RCS flips the contribution's phase by π rather than
    being clamped.
    """
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise ParameterError("scattering_amplitude requires R > 0")
    lam = link.wavelength
    num = link.transmit_power * link.tx_gain * link.rx_gain * lam ** 2
    den = FOUR_PI_CUBED * R ** 4 * link.system_loss * link.path_loss
    return num / den * np.asarray(sigma)


# ---------------------------------------------------------------------------
# Slow-time synthesis

def _phase(R, lam):
    return np.exp(-1j * 4.0 * np.pi * R / lam)


def synthesize_slow_time(scene: UavScene, timeline) -> np.ndarray:
    """Noiseless slow-time channel vector k_D over the given sample times.

    Coherent sum over all enabled scattering centers of
    amplitude(t_m) * exp(-j*4π*R(t_m)/λ).  Returns zeros when every motion
    term is disabled (empty contribution set).
    """
    timeline = np.asarray(timeline, dtype=float)
    if timeline.size == 0:
        raise ParameterError("synthesize_slow_time needs a nonempty timeline")
    if timeline.size > 1 and np.any(np.diff(timeline) <= 0):
        raise ParameterError("timeline must be strictly increasing")
    lam = scene.link.wavelength
    kd = np.zeros(timeline.shape, dtype=complex)
    if scene.translation_enabled:
        R = scatterer_range("body-translation", timeline, scene)
        kd += scattering_amplitude(scene.body.rcs, R, scene.link) * _phase(R, lam)
    if scene.vibration_enabled:
        R = scatterer_range("body-vibration", timeline, scene)
        kd += scattering_amplitude(scene.body.rcs, R, scene.link) * _phase(R, lam)
    if scene.rotation_enabled:
        for p in range(len(scene.blades)):
            R = scatterer_range("blade-tip", timeline, scene, blade_index=p)
            sigma = rotor_rcs(timeline, scene.blades[p])
            kd += scattering_amplitude(sigma, R, scene.link) * _phase(R, lam)
    return kd


def ground_truth_components(scene: UavScene, timeline) -> dict[str, np.ndarray]:
    """Per-motion-term slow-time vectors (translation / vibration / rotor).

    Each entry is the k_D the scene would produce with only that term
    enabled; their sum equals the full synthesis by linearity.
    """
    out = {}
    for name in ("translation", "vibration", "rotation"):
        flags = {"translation": False, "vibration": False, "rotation": False}
        flags[name] = True
        sub = scene.with_flags(**flags)
        key = "rotor" if name == "rotation" else name
        out[key] = synthesize_slow_time(sub, timeline) if getattr(
            scene, f"{name}_enabled") else np.zeros(len(timeline), dtype=complex)
    return out
