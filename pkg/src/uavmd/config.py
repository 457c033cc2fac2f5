"""Sectioned key=value run configuration.

Plain INI text, one section per pipeline stage, every key validated against
the schema below (unknown section or key -> ConfigError).  Defaults describe
the bundled reference scenario: a 3.5 GHz / 100 MHz OFDM sensing link watching
a small rotor UAV at 50 m.  `--set section.key=value` overrides come last.
"""

from __future__ import annotations

import configparser
import io

import numpy as np

from . import constants as C
from . import bench, grid, nsp, ranging, scene, tfa
from .errors import ConfigError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    return int(s, 0)


def _str(s: str) -> str:
    return s.strip()


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _opt_int(s: str):
    return None if s.strip().lower() in ("", "none") else int(s, 0)


def _str_list(s: str):
    return tuple(part.strip() for part in s.split(",") if part.strip())


# (parser, default, comment) per section.key — comments surface in `dump`.
SCHEMA = {
    "scene": {
        "initial_range": (_float, 50.0, "R0, m"),
        "radial_velocity": (_float, 5.0, "v, m/s, positive receding"),
        "elevation_deg": (_float, 30.0, "theta"),
        "body_rcs": (_float, 0.1, "sigma of the fuselage, m^2"),
        "vibration_amplitude": (_float, 0.05, "D_v, m"),
        "vibration_frequency": (_float, 100.0, "f_v, Hz"),
        "vibration_azimuth_deg": (_float, 10.0, "alpha_q"),
        "blades": (_int, 2, "rotor blade count"),
        "blade_length": (_float, 0.5, "L, m"),
        "rotation_rate": (_float, 80.0, "f_r, rotations/s"),
        "translation_enabled": (_bool, True, ""),
        "vibration_enabled": (_bool, True, ""),
        "rotation_enabled": (_bool, True, ""),
        "transmit_power_dbm": (_float, 28.0, ""),
        "antenna_gain_db": (_float, 18.0, "applied at both ends"),
    },
    "frame": {
        "carrier_frequency": (_float, C.CARRIER_FREQUENCY, "f_c, Hz (mid-band NR)"),
        "subcarrier_spacing": (_float, C.SUBCARRIER_SPACING, "delta_f, Hz"),
        "num_subcarriers": (_int, C.NUM_SUBCARRIERS, "N (100 MHz at 30 kHz)"),
        "num_symbols": (_int, C.NUM_SYMBOLS, "M over one 0.1 s CPI"),
        "symbol_duration": (_float, C.SYMBOL_DURATION, "T_s incl. cyclic prefix, s"),
        "sampling_mode": (_str, "uniform", "uniform | tdd-gapped"),
        "cpi_duration": (_float, C.CPI_DURATION, "s"),
        "seed": (_int, 0, "QPSK payload seed"),
    },
    "clutter": {
        "enabled": (_bool, False, "static clutter paths in the target bin"),
        "num_scatterers": (_int, 3, ""),
        "amplitude_scale": (_float, 1.0, ""),
        "csr_db": (_opt_float, 10.0, "clutter-to-signal ratio; none = raw draw"),
        "snr_db": (_opt_float, None, "AWGN level for s_mix; none = noiseless"),
        "seed": (_int, 0, ""),
    },
    "solver": {
        "variant": (_str, "rmd-nsp", "rmd-nsp | amfm-nsp | nsp"),
        "passes": (_int, 3, "extraction passes"),
        "lam2": (_float, nsp.SolverConfig.lam2, "parameter-smoothness weight"),
        "mu": (_float, nsp.SolverConfig.mu, "ridge on the damping track (rmd-nsp)"),
        "lam1_init": (_float, nsp.SolverConfig.lam1_init, "relative to Rayleigh quotient"),
        "gamma_init": (_float, nsp.SolverConfig.gamma_init, ""),
        "eps": (_float, nsp.SolverConfig.eps, "residual-settling stop threshold"),
        "max_iter": (_opt_int, nsp.SolverConfig.max_iter, "none = per-variant default"),
    },
    "transform": {
        "window_length": (_int, 257, "odd Gaussian window length"),
        "hop": (_int, 4, "frame step, symbols"),
        "fft_size": (_int, tfa.StftConfig.fft_size, ""),
        "gamma_set_rel": (_float, 0.02, "threshold, fraction of peak magnitude"),
    },
    "sweep": {
        "snr_min": (_float, -10.0, "dB"),
        "snr_max": (_float, 30.0, "dB"),
        "snr_step": (_float, 5.0, "dB"),
        "trials": (_int, 20, ""),
        "variants": (_str_list, ("rmd-nsp", "amfm-nsp", "nsp"), "comma separated"),
        "num_symbols": (_int, 512, "desk-scale M"),
        "seed": (_int, 0, ""),
    },
}


class RunConfig:
    """Resolved configuration: every schema key present with a final value."""

    def __init__(self, values: dict):
        self._values = values

    def __getitem__(self, section: str) -> dict:
        return self._values[section]

    def get(self, section: str, key: str):
        return self._values[section][key]

    def sections(self):
        return self._values.keys()


def default_config() -> RunConfig:
    return RunConfig({sec: {k: spec[1] for k, spec in keys.items()}
                      for sec, keys in SCHEMA.items()})


def _parse_value(section: str, key: str, raw: str):
    if section not in SCHEMA:
        raise ConfigError(f"unknown config section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"unknown config key {section}.{key}")
    parser = SCHEMA[section][key][0]
    try:
        return parser(raw)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({err})") from err


def load_config(path=None, overrides=()) -> RunConfig:
    """Read an INI file (optional), apply `section.key=value` overrides."""
    cfg = default_config()
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None,
                                           inline_comment_prefixes=(";",))
        try:
            with open(path, "r") as fh:
                parser.read_file(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        except configparser.Error as err:
            raise ConfigError(f"malformed config {path}: {err}") from err
        for section in parser.sections():
            for key, raw in parser[section].items():
                value = _parse_value(section, key, raw)
                cfg[section][key] = value
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        dotted, raw = item.split("=", 1)
        section, key = dotted.split(".", 1)
        value = _parse_value(section, key, raw)
        cfg[section][key] = value
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Resolved config as INI text (with schema comments); reloadable."""
    out = io.StringIO()
    for section, keys in SCHEMA.items():
        out.write(f"[{section}]\n")
        for key, (parser, _default, comment) in keys.items():
            val = cfg.get(section, key)
            if parser is _str_list:
                text = ",".join(val)
            elif val is None:
                text = "none"
            elif isinstance(val, bool):
                text = "true" if val else "false"
            else:
                text = f"{val:g}" if isinstance(val, float) else str(val)
            pad = f"  ; {comment}" if comment else ""
            out.write(f"{key} = {text}{pad}\n")
        out.write("\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Builders: config sections -> domain objects

def scene_from(cfg: RunConfig) -> scene.UavScene:
    sc = cfg["scene"]
    body = scene.BodyScatterer(
        initial_range=sc["initial_range"],
        radial_velocity=sc["radial_velocity"],
        rcs=sc["body_rcs"],
        vibration_amplitude=sc["vibration_amplitude"],
        vibration_frequency=sc["vibration_frequency"],
        vibration_azimuth=np.deg2rad(sc["vibration_azimuth_deg"]),
        elevation=np.deg2rad(sc["elevation_deg"]),
    )
    blades = tuple(
        scene.RotorBlade(blade_length=sc["blade_length"],
                         rotation_rate=sc["rotation_rate"],
                         initial_angle=k * np.pi / 2,
                         elevation=np.deg2rad(sc["elevation_deg"]))
        for k in range(sc["blades"]))
    link = scene.LinkBudget(
        transmit_power=C.dbm_to_watts(sc["transmit_power_dbm"]),
        tx_gain=C.db_to_linear(sc["antenna_gain_db"]),
        rx_gain=C.db_to_linear(sc["antenna_gain_db"]),
        carrier_frequency=cfg.get("frame", "carrier_frequency"),
    )
    return scene.UavScene(
        body=body, blades=blades, link=link,
        translation_enabled=sc["translation_enabled"],
        vibration_enabled=sc["vibration_enabled"],
        rotation_enabled=sc["rotation_enabled"],
    )


def frame_from(cfg: RunConfig) -> grid.FrameConfig:
    fr = cfg["frame"]
    return grid.FrameConfig(
        subcarrier_spacing=fr["subcarrier_spacing"],
        symbol_duration=fr["symbol_duration"],
        cpi_duration=fr["cpi_duration"],
        sampling_mode=fr["sampling_mode"],
        num_symbols=fr["num_symbols"],
    )


def solver_from(cfg: RunConfig) -> nsp.SolverConfig:
    so = cfg["solver"]
    return nsp.SolverConfig(lam2=so["lam2"], mu=so["mu"],
                            lam1_init=so["lam1_init"],
                            gamma_init=so["gamma_init"], eps=so["eps"],
                            max_iter=so["max_iter"])


def stft_from(cfg: RunConfig) -> tfa.StftConfig:
    tr = cfg["transform"]
    return tfa.StftConfig(window=tfa.gaussian_window(tr["window_length"]),
                          hop=tr["hop"], fft_size=tr["fft_size"],
                          gamma_set_rel=tr["gamma_set_rel"])


def clutter_from(cfg: RunConfig, noise_var: float = 0.0) -> ranging.ClutterConfig:
    cl = cfg["clutter"]
    return ranging.ClutterConfig(num_scatterers=cl["num_scatterers"],
                                 amplitude_scale=cl["amplitude_scale"],
                                 noise_var=noise_var, csr_db=cl["csr_db"],
                                 seed=cl["seed"])


def sweep_from(cfg: RunConfig) -> bench.SweepConfig:
    sw = cfg["sweep"]
    lo, hi, step = sw["snr_min"], sw["snr_max"], sw["snr_step"]
    if step <= 0 or hi < lo:
        raise ConfigError("sweep needs snr_step > 0 and snr_max >= snr_min")
    n_pts = int(np.floor((hi - lo) / step + 0.5)) + 1
    snr_grid = tuple(lo + k * step for k in range(n_pts))
    return bench.SweepConfig(snr_grid=snr_grid, trials=sw["trials"],
                             variants=sw["variants"], scene=scene_from(cfg),
                             seed=sw["seed"], num_symbols=sw["num_symbols"],
                             passes=cfg.get("solver", "passes"),
                             solver=solver_from(cfg))
