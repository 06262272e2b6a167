"""Command-line entry point.

Modes::

    simulate   write IMU, orientation and ground-truth CSVs for a preset
    fuse       6D fusion of input.imu1 / input.imu2 into orientation CSVs
    estimate   heading-offset timeline from input.orientation1 / 2
    evaluate   error report for input.timeline against input.truth
    pipeline   simulate, (fuse,) estimate and evaluate in one go

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
The log level comes from ``ROMHEADING_LOG`` (e.g. ``INFO``); ``--verbose``
forces ``DEBUG``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import MODES, ConfigError, RunConfig, load_config
from .estimator import run_estimator
from .fusion import fuse_6d
from .io import (DataError, emit_results, load_imu_csv, load_orientation_csv, load_timeline_csv,
                 load_truth_csv, resample_align, write_imu_csv, write_orientation_csv, write_truth_csv)
from .metrics import evaluate, nearest_index, reference_heading_offset
from .simulation import DriftSpec, Simulation, scenario_presets, simulate
from .streams import OrientationStream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4

log = logging.getLogger("romheading")


def _simulate(cfg: RunConfig) -> Simulation:
    profile = scenario_presets()[cfg.preset]
    changes = {}
    if cfg.duration is not None:
        changes["duration"] = cfg.duration
    if cfg.amplitude is not None:
        changes["angle_amplitude"] = (cfg.amplitude,) * 3
    if cfg.saturation is not None:
        changes["saturation"] = cfg.saturation
    profile = dataclasses.replace(profile, **changes)
    delta0 = cfg.delta0
    if delta0 is None:
        delta0 = float(np.random.default_rng(cfg.seed).uniform(0.0, 2 * np.pi))
    drift = DriftSpec(delta0, cfg.drift_rate)
    log.info("simulating preset %s for %g s, delta_0 = %.3f deg", cfg.preset, profile.duration, np.degrees(delta0))
    return simulate(cfg.joint, profile, drift, cfg.noise, cfg.window.sample_interval, seed=cfg.seed)


def _write_simulation(sim: Simulation, out: Path) -> None:
    write_imu_csv(out / "imu1.csv", sim.imu1)
    write_imu_csv(out / "imu2.csv", sim.imu2)
    write_orientation_csv(out / "orientation1.csv", sim.ori1)
    write_orientation_csv(out / "orientation2.csv", sim.ori2)
    write_truth_csv(out / "truth.csv", sim.truth)


def _fuse(cfg: RunConfig, imu1, imu2) -> tuple[OrientationStream, OrientationStream]:
    log.info("fusing %d + %d IMU samples (gain %g)", len(imu1), len(imu2), cfg.fusion_gain)
    return fuse_6d(imu1, cfg.fusion_gain, cfg.acc_gate), fuse_6d(imu2, cfg.fusion_gain, cfg.acc_gate)


def _estimate(cfg: RunConfig, o1: OrientationStream, o2: OrientationStream, names=None):
    (o1, o2), dev = resample_align([o1, o2], cfg.window.sample_interval, cfg.window.window_length, names)
    log.info("aligned streams: %d samples, max timestamp deviation %.3g s", len(o1), dev)
    timeline = run_estimator(o1, o2, cfg.joint, cfg.window, cfg.optimizer, cfg.slack)
    log.info("%d heading estimates", len(timeline))
    return o1, o2, timeline


def _evaluate(cfg: RunConfig, timeline, o1, o2, truth):
    j = nearest_index(truth.t, o1.t, 0.5 * cfg.window.sample_interval)
    if np.all(j < 0):
        raise DataError("truth", "ground truth does not overlap the orientation streams")
    if cfg.delta_reference == "fused":
        keep = j >= 0
        jj = j[keep]
        ref = reference_heading_offset(o1.q[keep], o2.q[keep], truth.q1[jj], truth.q2[jj])
        return evaluate(timeline, o1, o2, o1.t[keep], truth.q_rel[jj], ref, t_start=cfg.t_start)
    return evaluate(timeline, o1, o2, truth.t, truth.q_rel, truth.delta, t_start=cfg.t_start)


def _print_summary(report) -> None:
    for k, v in report.summary().items():
        print(f"{k} = {v:.3f}")


def run(cfg: RunConfig) -> None:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.mode in ("simulate", "pipeline"):
        sim = _simulate(cfg)
        _write_simulation(sim, out)
        if cfg.mode == "simulate":
            return
        if cfg.source == "imu":
            o1, o2 = _fuse(cfg, sim.imu1, sim.imu2)
            write_orientation_csv(out / "fused1.csv", o1)
            write_orientation_csv(out / "fused2.csv", o2)
            cfg = dataclasses.replace(cfg, delta_reference="fused")
        else:
            o1, o2 = sim.ori1, sim.ori2
        o1, o2, timeline = _estimate(cfg, o1, o2)
        report = _evaluate(cfg, timeline, o1, o2, sim.truth)
        emit_results(timeline, report, out)
        _print_summary(report)
    elif cfg.mode == "fuse":
        o1, o2 = _fuse(cfg, load_imu_csv(cfg.inputs["imu1"]), load_imu_csv(cfg.inputs["imu2"]))
        write_orientation_csv(out / "orientation1.csv", o1)
        write_orientation_csv(out / "orientation2.csv", o2)
    elif cfg.mode == "estimate":
        names = [str(cfg.inputs["orientation1"]), str(cfg.inputs["orientation2"])]
        _, _, timeline = _estimate(cfg, load_orientation_csv(names[0]), load_orientation_csv(names[1]), names)
        emit_results(timeline, None, out)
    elif cfg.mode == "evaluate":
        names = [str(cfg.inputs["orientation1"]), str(cfg.inputs["orientation2"])]
        o1, o2 = load_orientation_csv(names[0]), load_orientation_csv(names[1])
        (o1, o2), _ = resample_align([o1, o2], cfg.window.sample_interval, cfg.window.window_length, names)
        timeline = load_timeline_csv(cfg.inputs["timeline"])
        report = _evaluate(cfg, timeline, o1, o2, load_truth_csv(cfg.inputs["truth"]))
        emit_results(timeline, report, out)
        _print_summary(report)
    log.info("results written to %s", out)


def _setup_logging(verbose: bool) -> None:
    name = os.environ.get("ROMHEADING_LOG", "WARNING").strip().upper()
    level = logging.DEBUG if verbose else getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(level)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="romheading",
                                description="Heading-offset estimation for two IMUs joined by a joint.")
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--mode", choices=MODES, help="overrides the mode given in the config")
    p.add_argument("--seed", type=int, metavar="N", help="random seed for simulation")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--verbose", action="store_true", help="debug logging")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        cfg = load_config(args.config, args.mode, args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run(cfg)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # a precondition failed: of the input files in read modes, of the simulation settings otherwise
        if cfg.mode in ("simulate", "pipeline"):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
