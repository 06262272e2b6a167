"""Timestamped sensor streams.

A stream holds one sensor's samples column-wise: a time vector ``t`` of shape
``(N,)`` plus per-sample arrays with ``N`` rows.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np


def _check_time(t: np.ndarray) -> None:
    if t.ndim != 1:
        raise ValueError("time vector must be one-dimensional")
    if not np.all(np.isfinite(t)):
        raise ValueError("time vector contains non-finite values")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0)) + 1
        raise ValueError(f"timestamps must be strictly increasing (sample {bad})")


class _Stream:
    t: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def select(self, index):
        """New stream with the rows picked by ``index`` (slice, mask or indices)."""
        return type(self)(**{f.name: getattr(self, f.name)[index] for f in fields(self)})

    @property
    def sample_interval(self) -> float:
        return float(np.median(np.diff(self.t)))


@dataclass(eq=False)
class ImuStream(_Stream):
    """Gyroscope (rad/s) and accelerometer (m/s^2) samples in the sensor frame."""

    t: np.ndarray
    gyr: np.ndarray
    acc: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.gyr = np.asarray(self.gyr, dtype=float).reshape(-1, 3)
        self.acc = np.asarray(self.acc, dtype=float).reshape(-1, 3)
        _check_time(self.t)
        if not (self.gyr.shape[0] == self.acc.shape[0] == self.t.size):
            raise ValueError("gyr, acc and t must have the same number of samples")
        if not (np.all(np.isfinite(self.gyr)) and np.all(np.isfinite(self.acc))):
            raise ValueError("IMU samples must be finite")


@dataclass(eq=False)
class OrientationStream(_Stream):
    """Sensor-to-reference orientations ``q`` (N, 4), w-first."""

    t: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.q = np.asarray(self.q, dtype=float).reshape(-1, 4)
        _check_time(self.t)
        if self.q.shape[0] != self.t.size:
            raise ValueError("q and t must have the same number of samples")
        if not np.all(np.isfinite(self.q)):
            raise ValueError("orientation samples must be finite")
