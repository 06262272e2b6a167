"""Run configuration in a flat ``key = value`` text format.

Keys are dotted by section, values are numbers or words, ranges are two
numbers separated by blanks, ``#`` starts a comment::

    mode = pipeline
    seed = 3
    joint.convention = zxy
    joint.alpha_deg = -20 20
    window.length_s = 8

Angles are given in degrees and converted to radians here. Relative input
paths are resolved against the directory of the config file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .estimator import OptimizerConfig, WindowConfig
from .fusion import ACC_GATE, DEFAULT_GAIN
from .joint import CMC_CONVENTION, CMC_RANGES_DEG, DEFAULT_SLACK, JointModel, check_slack
from .simulation import DEFAULT_SAMPLE_INTERVAL, NoiseSpec, scenario_presets

MODES = ("simulate", "fuse", "estimate", "evaluate", "pipeline")
SOURCES = ("orientation", "imu")
REFERENCES = ("truth", "fused")
INPUT_KEYS = ("imu1", "imu2", "orientation1", "orientation2", "truth", "timeline")
# input files each mode reads
MODE_INPUTS = {
    "simulate": (),
    "pipeline": (),
    "fuse": ("imu1", "imu2"),
    "estimate": ("orientation1", "orientation2"),
    "evaluate": ("orientation1", "orientation2", "truth", "timeline"),
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the file, line and key."""


def _number(value: str) -> float:
    v = float(value)
    if not np.isfinite(v):
        raise ValueError("must be finite")
    return v


def _integer(value: str) -> int:
    v = float(value)
    if v != int(v):
        raise ValueError("must be an integer")
    return int(v)


def _pair(value: str) -> tuple[float, float]:
    parts = value.split()
    if len(parts) != 2:
        raise ValueError("expected two numbers 'min max'")
    return _number(parts[0]), _number(parts[1])


def _choice(options):
    def conv(value: str) -> str:
        if value not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return value
    return conv


def _word(value: str) -> str:
    if not value:
        raise ValueError("must not be empty")
    return value


def _delta0(value: str):
    return None if value == "random" else _number(value)


_KEYS = {
    "mode": _choice(MODES),
    "seed": _integer,
    "joint.convention": _word,
    "joint.alpha_deg": _pair,
    "joint.beta_deg": _pair,
    "joint.gamma_deg": _pair,
    "joint.slack_deg": _number,
    "window.length_s": _number,
    "window.interval_s": _number,
    "window.sample_interval_s": _number,
    "optimizer.grid_step_deg": _number,
    "optimizer.refine_tol_deg": _number,
    "optimizer.stride": _integer,
    "fusion.gain": _number,
    "fusion.acc_gate": _number,
    "simulate.preset": _choice(tuple(scenario_presets())),
    "simulate.duration_s": _number,
    "simulate.delta0_deg": _delta0,
    "simulate.drift_deg_s": _number,
    "simulate.amplitude": _number,
    "simulate.saturation": _number,
    "noise.gyro_sigma": _number,
    "noise.gyro_bias_deg_s": _number,
    "noise.acc_sigma": _number,
    "noise.orientation_sigma_deg": _number,
    "pipeline.source": _choice(SOURCES),
    "evaluate.t_start_s": _number,
    "evaluate.delta_reference": _choice(REFERENCES),
    "output.dir": _word,
    **{f"input.{k}": _word for k in INPUT_KEYS},
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, tuple[object, int]]:
    """Key to ``(converted value, line number)``; unknown or repeated keys are errors."""
    out: dict[str, tuple[object, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}, line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}, line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}, line {lineno}: key {key!r} repeats line {out[key][1]}")
        try:
            out[key] = (_KEYS[key](value), lineno)
        except ValueError as exc:
            raise ConfigError(f"{source}, line {lineno}: {key}: {exc}") from None
    return out


@dataclass
class RunConfig:
    """Everything one CLI run needs, in SI units and radians."""

    mode: str = "pipeline"
    seed: int = 0
    joint: JointModel = field(default_factory=lambda: JointModel.from_convention(CMC_CONVENTION, CMC_RANGES_DEG))
    slack: float = DEFAULT_SLACK
    window: WindowConfig = field(default_factory=WindowConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    fusion_gain: float = DEFAULT_GAIN
    acc_gate: float = ACC_GATE
    preset: str = "E05"
    duration: float | None = None
    delta0: float | None = None
    drift_rate: float = np.radians(0.2)
    amplitude: float | None = None
    saturation: float | None = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    source: str = "orientation"
    t_start: float = 10.0
    delta_reference: str = "truth"
    inputs: dict[str, Path] = field(default_factory=dict)
    out_dir: Path = Path("out")
    # "file, line N" of each key read from a config file
    origin: dict[str, str] = field(default_factory=dict)

    def check_inputs(self) -> None:
        """The files the current mode reads must be configured and exist."""
        for key in MODE_INPUTS[self.mode]:
            path = self.inputs.get(key)
            if path is None:
                raise ConfigError(f"mode {self.mode!r} needs input.{key}")
            if not path.is_file():
                where = self.origin.get(f"input.{key}", "config")
                raise ConfigError(f"{where}: input.{key}: file {str(path)!r} does not exist")


def build_run_config(values: dict[str, tuple[object, int]], source: str = "<config>",
                     base_dir: Path | None = None) -> RunConfig:
    """RunConfig from parsed values; invariant violations cite the offending line."""
    base_dir = Path(".") if base_dir is None else Path(base_dir)
    get = {k: v for k, (v, _) in values.items()}

    def fail(keys, exc):
        lines = [values[k][1] for k in keys if k in values]
        where = f"{source}, line {min(lines)}" if lines else source
        raise ConfigError(f"{where}: {', '.join(keys)}: {exc}") from None

    cfg = RunConfig()
    cfg.origin = {k: f"{source}, line {line}" for k, (_, line) in values.items()}
    cfg.mode = get.get("mode", cfg.mode)
    cfg.seed = get.get("seed", cfg.seed)

    jkeys = ("joint.convention", "joint.alpha_deg", "joint.beta_deg", "joint.gamma_deg")
    try:
        ranges = [get.get(k, CMC_RANGES_DEG[i]) for i, k in enumerate(jkeys[1:])]
        cfg.joint = JointModel.from_convention(get.get("joint.convention", CMC_CONVENTION), ranges)
    except ValueError as exc:
        fail(jkeys, exc)
    try:
        cfg.slack = check_slack(np.radians(get.get("joint.slack_deg", np.degrees(DEFAULT_SLACK))))
    except ValueError as exc:
        fail(("joint.slack_deg",), exc)

    wkeys = ("window.length_s", "window.interval_s", "window.sample_interval_s")
    try:
        cfg.window = WindowConfig(get.get(wkeys[0], 8.0), get.get(wkeys[1], 1.0),
                                  get.get(wkeys[2], DEFAULT_SAMPLE_INTERVAL))
    except ValueError as exc:
        fail(wkeys, exc)
    okeys = ("optimizer.grid_step_deg", "optimizer.refine_tol_deg", "optimizer.stride")
    try:
        cfg.optimizer = OptimizerConfig(np.radians(get.get(okeys[0], 1.0)), np.radians(get.get(okeys[1], 1e-4)),
                                        get.get(okeys[2], 1))
    except ValueError as exc:
        fail(okeys, exc)

    cfg.fusion_gain = get.get("fusion.gain", cfg.fusion_gain)
    if not 0.0 <= cfg.fusion_gain <= 1.0:
        fail(("fusion.gain",), "must lie in [0, 1]")
    cfg.acc_gate = get.get("fusion.acc_gate", cfg.acc_gate)
    if cfg.acc_gate <= 0:
        fail(("fusion.acc_gate",), "must be positive")

    cfg.preset = get.get("simulate.preset", cfg.preset)
    cfg.duration = get.get("simulate.duration_s")
    if cfg.duration is not None and cfg.duration <= 0:
        fail(("simulate.duration_s",), "must be positive")
    d0 = get.get("simulate.delta0_deg")
    cfg.delta0 = None if d0 is None else float(np.radians(d0))
    cfg.drift_rate = float(np.radians(get.get("simulate.drift_deg_s", 0.2)))
    if abs(cfg.drift_rate) > np.radians(0.5) + 1e-15:
        fail(("simulate.drift_deg_s",), "magnitude must not exceed 0.5 deg/s")
    cfg.amplitude = get.get("simulate.amplitude")
    if cfg.amplitude is not None and not 0.0 <= cfg.amplitude <= 1.0:
        fail(("simulate.amplitude",), "must lie in [0, 1]")
    cfg.saturation = get.get("simulate.saturation")
    if cfg.saturation is not None and cfg.saturation < 0:
        fail(("simulate.saturation",), "must be non-negative")

    nkeys = ("noise.gyro_sigma", "noise.gyro_bias_deg_s", "noise.acc_sigma", "noise.orientation_sigma_deg")
    d = NoiseSpec()
    noise = (get.get(nkeys[0], d.gyro_sigma), np.radians(get.get(nkeys[1], np.degrees(d.gyro_bias))),
             get.get(nkeys[2], d.acc_sigma), np.radians(get.get(nkeys[3], np.degrees(d.orientation_sigma))))
    for k, v in zip(nkeys, noise):
        if v < 0:
            fail((k,), "must be non-negative")
    cfg.noise = NoiseSpec(*(float(v) for v in noise))

    cfg.source = get.get("pipeline.source", cfg.source)
    cfg.t_start = get.get("evaluate.t_start_s", cfg.t_start)
    cfg.delta_reference = get.get("evaluate.delta_reference", cfg.delta_reference)
    cfg.inputs = {k: base_dir / get[f"input.{k}"] for k in INPUT_KEYS if f"input.{k}" in get}
    if "output.dir" in get:
        cfg.out_dir = base_dir / get["output.dir"]
    return cfg


def load_config(path=None, mode: str | None = None, seed: int | None = None, out=None) -> RunConfig:
    """Read a config file (or use defaults), apply command-line overrides and check inputs."""
    if path is None:
        cfg = RunConfig()
    else:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"{path}: cannot read config ({exc})") from None
        cfg = build_run_config(parse_config_text(text, str(path)), str(path), path.parent)
    if mode is not None:
        if mode not in MODES:
            raise ConfigError(f"--mode: must be one of {', '.join(MODES)}")
        cfg.mode = mode
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=int(seed))
    if out is not None:
        cfg.out_dir = Path(out)
    cfg.check_inputs()
    return cfg
