"""Command-line front end.

Subcommands wrap the library pipeline stages; every run writes a manifest
(resolved config + seed + artifact list) sufficient to reproduce it.  Exit
codes: 0 ok, 2 bad config/arguments, 3 I/O failure, 4 malformed input file,
5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench, config as cfgmod, cxm, grid, nsp, ranging, scene, tfa
from . import __version__
from .errors import (ConfigError, DetectionError, DivergenceError, EstimationError,
                     FormatError, ParameterError, UnsupportedModeError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_NUMERIC = 5


def _write_manifest(outdir, command, cfg, artifacts, extra=None):
    resolved = os.path.join(outdir, "resolved_config.ini")
    with open(resolved, "w") as fh:
        fh.write(cfgmod.dump_config(cfg))
    doc = {
        "command": command,
        "version": __version__,
        "seed": cfg.get("frame", "seed"),
        "config": "resolved_config.ini",
        "artifacts": sorted(artifacts),
    }
    if extra:
        doc.update(extra)
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_vector(path):
    data = cxm.read_cxm(path)
    if data.ndim == 2 and 1 in data.shape:
        return data.ravel()
    if data.ndim == 1:
        return data
    raise FormatError(f"{path}: expected a 1xM or Mx1 vector, got shape {data.shape}")


def cmd_simulate(args, cfg) -> int:
    scn = cfgmod.scene_from(cfg)
    frame = cfgmod.frame_from(cfg)
    timeline = grid.build_timeline(frame)
    seed = cfg.get("frame", "seed")
    n = cfg.get("frame", "num_subcarriers")
    tx = grid.make_tx_grid(n, len(timeline), seed, frame.subcarrier_spacing)
    rx = grid.apply_channel(tx, scn, timeline)
    csi = grid.estimate_csi(rx, tx)

    s_uav = scene.synthesize_slow_time(scn, timeline)
    truth = scene.ground_truth_components(scn, timeline)
    s_mix = s_uav
    cl = cfg["clutter"]
    noise_var = 0.0
    if cl["snr_db"] is not None:
        noise_var = bench.noise_for_snr(s_uav, cl["snr_db"])
    if cl["enabled"] or noise_var > 0:
        ccfg = cfgmod.clutter_from(cfg, noise_var=noise_var)
        if not cl["enabled"]:
            ccfg = ranging.ClutterConfig(num_scatterers=0, noise_var=noise_var,
                                         seed=cl["seed"])
        wrapped = ranging.SlowTimeSignal(samples=s_uav, timeline=timeline)
        s_mix = ranging.add_clutter(wrapped, ccfg).samples

    os.makedirs(args.output_dir, exist_ok=True)
    files = {
        "csi.cxm": csi.data,
        "s_uav.cxm": s_uav,
        "s_mix.cxm": s_mix,
        "truth_translation.cxm": truth["translation"],
        "truth_vibration.cxm": truth["vibration"],
        "truth_rotor.cxm": truth["rotor"],
    }
    for name, arr in files.items():
        cxm.write_cxm(os.path.join(args.output_dir, name), arr)
    _write_manifest(args.output_dir, "simulate", cfg, files,
                    extra={"num_subcarriers": n, "num_symbols": len(timeline)})
    print(f"simulate: wrote {len(files)} files to {args.output_dir} "
          f"(N={n}, M={len(timeline)})")
    return EXIT_OK


def cmd_decompose(args, cfg) -> int:
    s_mix = _read_vector(args.input)
    solver = cfgmod.solver_from(cfg)
    variant = args.variant or cfg.get("solver", "variant")
    passes = args.passes or cfg.get("solver", "passes")
    out = nsp.decompose(s_mix, passes=passes, variant=variant, cfg=solver)

    os.makedirs(args.output_dir, exist_ok=True)
    artifacts = []
    for k, comp in enumerate(out.components, start=1):
        name = f"component_{k}.cxm"
        cxm.write_cxm(os.path.join(args.output_dir, name), comp)
        artifacts.append(name)
    cxm.write_cxm(os.path.join(args.output_dir, "residual.cxm"), out.final_residual)
    artifacts.append("residual.cxm")

    recon = sum(out.components) + out.final_residual
    denom = float(np.linalg.norm(s_mix))
    conservation = float(np.linalg.norm(recon - s_mix)) / denom if denom > 0 else 0.0
    diagnostics = {
        "variant": variant,
        "passes": passes,
        "conservation_rel_error": conservation,
        "per_pass": out.diagnostics,
    }
    with open(os.path.join(args.output_dir, "diagnostics.json"), "w") as fh:
        json.dump(diagnostics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts.append("diagnostics.json")
    _write_manifest(args.output_dir, "decompose", cfg, artifacts,
                    extra={"input": os.path.basename(args.input),
                           "variant": variant, "passes": passes})
    print(f"decompose[{variant}]: {passes} passes, conservation residual "
          f"{conservation:.2e}, wrote {args.output_dir}")
    return EXIT_OK


def cmd_spectrogram(args, cfg) -> int:
    u = _read_vector(args.input)
    frame = cfgmod.frame_from(cfg)
    timeline = np.arange(1, len(u) + 1) * frame.symbol_duration
    stft_cfg = cfgmod.stft_from(cfg)
    spec = tfa.stft(u, timeline, stft_cfg)
    if args.mode == "set":
        spec = tfa.set_transform(spec)

    os.makedirs(args.output_dir, exist_ok=True)
    mag = np.abs(spec.values)
    csv_name, pgm_name = "spectrogram.csv", "spectrogram.pgm"
    cxm.write_db_csv(os.path.join(args.output_dir, csv_name), mag,
                     row_axis=spec.freq_axis, col_axis=spec.time_axis,
                     row_label="freq_hz", col_label="time_s")
    cxm.write_pgm(os.path.join(args.output_dir, pgm_name), mag)
    _write_manifest(args.output_dir, "spectrogram", cfg, [csv_name, pgm_name],
                    extra={"mode": args.mode,
                           "input": os.path.basename(args.input),
                           "freq_span_hz": [float(spec.freq_axis[0]),
                                            float(spec.freq_axis[-1])],
                           "hop_interval_s": spec.hop_interval,
                           "frames": int(spec.values.shape[1])})
    print(f"spectrogram[{args.mode}]: {spec.values.shape[0]}x{spec.values.shape[1]} "
          f"cells, wrote {args.output_dir}")
    return EXIT_OK


def _bench_cell(job):
    sweep_cfg, variant, snr_db = job
    return bench.rmse_point(sweep_cfg.scene, variant, snr_db, sweep_cfg.trials,
                            seed=sweep_cfg.seed, num_symbols=sweep_cfg.num_symbols,
                            passes=sweep_cfg.passes, solver=sweep_cfg.solver)


def cmd_bench(args, cfg) -> int:
    sweep_cfg = cfgmod.sweep_from(cfg)
    os.makedirs(args.output_dir, exist_ok=True)
    csv_path = os.path.join(args.output_dir, "sweep.csv")
    workers = int(os.environ.get("UAVMD_WORKERS", "1"))
    jobs = [(sweep_cfg, v, float(snr))
            for v in sweep_cfg.variants for snr in sweep_cfg.snr_grid]

    def emit(fh, results):
        for p in results:       # submission order: rows deterministic
            fh.write(f"{p.variant},{p.snr_db:g},{p.mean_rmse:.6f},"
                     f"{p.std_rmse:.6f},{p.convergence_rate:.4f}\n")
            fh.flush()

    with open(csv_path, "w", newline="") as fh:
        fh.write("variant,snr_db,mean_rmse,std_rmse,convergence_rate\n")
        fh.flush()
        if workers > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=workers) as pool:
                emit(fh, pool.map(_bench_cell, jobs))
        else:
            emit(fh, map(_bench_cell, jobs))
    _write_manifest(args.output_dir, "bench", cfg, ["sweep.csv"],
                    extra={"workers": workers, "cells": len(jobs)})
    print(f"bench: {len(jobs)} sweep points -> {csv_path}")
    return EXIT_OK


def cmd_range_doppler(args, cfg) -> int:
    data = cxm.read_cxm(args.input)
    if data.ndim != 2 or min(data.shape) < 2:
        raise FormatError(f"{args.input}: expected an NxM CSI matrix, "
                          f"got shape {data.shape}")
    frame = cfgmod.frame_from(cfg)
    timeline = grid.build_timeline(
        grid.FrameConfig(subcarrier_spacing=frame.subcarrier_spacing,
                         symbol_duration=frame.symbol_duration,
                         cpi_duration=frame.cpi_duration,
                         sampling_mode=frame.sampling_mode,
                         num_symbols=data.shape[1]))
    csi = grid.ResourceGrid(data=data, role="csi",
                            subcarrier_spacing=frame.subcarrier_spacing)
    wavelength = cfgmod.scene_from(cfg).link.wavelength
    rd, ranges_m, velocity = ranging.range_doppler_map(csi, timeline,
                                                       wavelength=wavelength)
    mag = np.abs(rd)
    os.makedirs(args.output_dir, exist_ok=True)
    cxm.write_db_csv(os.path.join(args.output_dir, "range_doppler.csv"), mag,
                     row_axis=ranges_m, col_axis=velocity,
                     row_label="range_m", col_label="velocity_mps")
    cxm.write_pgm(os.path.join(args.output_dir, "range_doppler.pgm"), mag)
    peak = np.unravel_index(int(np.argmax(mag)), mag.shape)
    _write_manifest(args.output_dir, "range-doppler", cfg,
                    ["range_doppler.csv", "range_doppler.pgm"],
                    extra={"input": os.path.basename(args.input),
                           "peak_range_m": float(ranges_m[peak[0]]),
                           "peak_velocity_mps": float(velocity[peak[1]])})
    print(f"range-doppler: peak at {ranges_m[peak[0]]:.2f} m, "
          f"{velocity[peak[1]]:+.2f} m/s, wrote {args.output_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uavmd",
                                 description="OFDM sensing of UAV micro-Doppler: "
                                             "simulate, decompose, analyze.")
    ap.add_argument("--version", action="version", version=f"uavmd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config path (defaults bundled)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override one config value")
        p.add_argument("-o", "--output-dir", default=".", help="artifact directory")

    p = sub.add_parser("simulate", help="synthesize CSI + slow-time echo files")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose", help="null-space-pursuit component extraction")
    common(p)
    p.add_argument("input", help="slow-time vector, CXM1 format")
    p.add_argument("--variant", choices=nsp.VARIANTS, help="operator variant")
    p.add_argument("--passes", type=int, help="extraction passes")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("spectrogram", help="STFT / synchroextracted spectrogram")
    common(p)
    p.add_argument("input", help="slow-time vector, CXM1 format")
    p.add_argument("--mode", choices=("stft", "set"), default="set")
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("bench", help="RMSE-vs-SNR sweep across variants")
    common(p)
    p.add_argument("--snr-min", type=float, help="override sweep.snr_min")
    p.add_argument("--snr-max", type=float, help="override sweep.snr_max")
    p.add_argument("--snr-step", type=float, help="override sweep.snr_step")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("range-doppler", help="range-Doppler map from a CSI file")
    common(p)
    p.add_argument("input", help="CSI matrix, CXM1 format")
    p.set_defaults(func=cmd_range_doppler)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.command == "bench":
        for name in ("snr_min", "snr_max", "snr_step"):
            val = getattr(args, name)
            if val is not None:
                overrides.append(f"sweep.{name}={val:g}")
    try:
        cfg = cfgmod.load_config(args.config, overrides)
        return args.func(args, cfg)
    except (ConfigError, ParameterError, UnsupportedModeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except (DivergenceError, EstimationError, DetectionError,
            np.linalg.LinAlgError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
