"""Magnetometer-free heading-offset estimation from joint range-of-motion constraints."""

from .estimator import (DeltaTimeline, HeadingEstimate, NoEstimateError, OptimizerConfig, WindowConfig,
                        constraint_violation, heading_quat, minimize_window, relative_orientation,
                        run_estimator, window_cost)
from .fusion import fuse_6d, integrate_gyro_step
from .joint import DEFAULT_SLACK, JointModel, cmc_joint, joint_angles, joint_forward, rom_check, rom_distance
from .metrics import ErrorReport, delta_error, evaluate, orientation_error, reference_heading_offset
from .simulation import DriftSpec, GroundTruth, MotionProfile, NoiseSpec, Simulation, scenario_presets, simulate
from .streams import ImuStream, OrientationStream

__all__ = [
    "DEFAULT_SLACK", "DeltaTimeline", "DriftSpec", "ErrorReport", "GroundTruth", "HeadingEstimate",
    "ImuStream", "JointModel", "MotionProfile", "NoEstimateError", "NoiseSpec", "OptimizerConfig",
    "OrientationStream", "Simulation", "WindowConfig", "cmc_joint", "constraint_violation", "delta_error",
    "evaluate", "fuse_6d", "heading_quat", "integrate_gyro_step", "joint_angles", "joint_forward",
    "minimize_window", "orientation_error", "reference_heading_offset", "relative_orientation",
    "rom_check", "rom_distance", "run_estimator", "scenario_presets", "simulate", "window_cost",
]
