"""Gyroscope/accelerometer (6D) orientation fusion.

A plain complementary filter: strapdown integration of the body-frame angular
rate, followed by a small correction of the inclination towards the gravity
direction measured by the accelerometer. The correction axis is always
horizontal, so the heading is never corrected and drifts with the vertical
component of the gyro bias. Each stream therefore lives in its own reference
frame whose heading is set by the filter's initial state, which is exactly
the situation the heading-offset estimator resolves.
"""

from __future__ import annotations

import math

import numpy as np

from . import quaternion as quat
from .streams import ImuStream, OrientationStream

GRAVITY = 9.81
DEFAULT_GAIN = 0.01
ACC_GATE = 2.0

_UP = np.array([0.0, 0.0, 1.0])


def integrate_gyro_step(q, gyr, dt: float) -> np.ndarray:
    """``q * Q(|w| dt, w / |w|)``; exact for a rate that is constant over ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    gyr = np.asarray(gyr, dtype=float)
    if np.linalg.norm(gyr) < 1e-12:
        return np.array(q, dtype=float)
    return quat.normalize(quat.multiply(q, quat.from_rotvec(gyr * dt)))


def inclination_from_acc(acc) -> np.ndarray:
    """Smallest rotation that maps the measured specific force onto the vertical.

    The result has zero heading: its rotation axis is horizontal.
    """
    a = np.asarray(acc, dtype=float)
    a = a / np.linalg.norm(a)
    axis = np.cross(a, _UP)
    s = np.linalg.norm(axis)
    c = float(np.dot(a, _UP))
    if s < 1e-12:
        return quat.identity() if c > 0 else np.array([0.0, 1.0, 0.0, 0.0])
    return quat.from_axis_angle(axis / s, np.arctan2(s, c))


def _fuse_loop(q, t, gyr, acc, use_acc, gain):
    # scalar arithmetic: numpy call overhead dominates for 4-element arrays
    w, x, y, z = (float(c) for c in q)
    out = np.empty((len(t), 4))
    out[0] = (w, x, y, z)
    for k in range(1, len(t)):
        dt = t[k] - t[k - 1]
        gx = 0.5 * (gyr[k - 1][0] + gyr[k][0]) * dt
        gy = 0.5 * (gyr[k - 1][1] + gyr[k][1]) * dt
        gz = 0.5 * (gyr[k - 1][2] + gyr[k][2]) * dt
        angle = math.sqrt(gx * gx + gy * gy + gz * gz)
        if angle > 1e-12:
            c = math.cos(0.5 * angle)
            f = math.sin(0.5 * angle) / angle
            bx, by, bz = f * gx, f * gy, f * gz
            w, x, y, z = (
                w * c - x * bx - y * by - z * bz,
                w * bx + x * c + y * bz - z * by,
                w * by - x * bz + y * c + z * bx,
                w * bz + x * by - y * bx + z * c,
            )
        if use_acc[k]:
            ax, ay, az = acc[k]
            # acc rotated into the reference frame
            tx = 2.0 * (y * az - z * ay)
            ty = 2.0 * (z * ax - x * az)
            tz = 2.0 * (x * ay - y * ax)
            rx = ax + w * tx + y * tz - z * ty
            ry = ay + w * ty + z * tx - x * tz
            rz = az + w * tz + x * ty - y * tx
            n = math.sqrt(rx * rx + ry * ry + rz * rz)
            # axis = r x up = (ry, -rx, 0)
            s = math.hypot(rx, ry)
            if n > 0 and s > 1e-12 * n:
                angle = gain * math.atan2(s, rz)
                c = math.cos(0.5 * angle)
                f = math.sin(0.5 * angle) / s
                cx, cy = f * ry, -f * rx
                w, x, y, z = (
                    c * w - cx * x - cy * y,
                    c * x + cx * w + cy * z,
                    c * y - cx * z + cy * w,
                    c * z + cx * y - cy * x,
                )
        n = math.sqrt(w * w + x * x + y * y + z * z)
        w, x, y, z = w / n, x / n, y / n, z / n
        out[k] = (w, x, y, z)
    return out


def fuse_6d(stream: ImuStream, gain: float = DEFAULT_GAIN, acc_gate: float = ACC_GATE,
            q0=None) -> OrientationStream:
    """Orientation of the sensor with respect to its own heading-arbitrary reference frame.

    The gyro rate over each sampling interval is taken as the mean of its two
    end samples. ``gain`` is the fraction of the inclination error removed per
    sample. Accelerometer samples whose norm differs from gravity by more than
    ``acc_gate`` m/s^2 are ignored. Without ``q0`` the filter starts from the
    inclination of the first sample and zero heading.
    """
    if len(stream) == 0:
        raise ValueError("cannot fuse an empty IMU stream")
    if len(stream) < 2:
        raise ValueError("fusion needs at least two samples")
    if not 0.0 <= gain <= 1.0:
        raise ValueError("gain must lie in [0, 1]")
    dt = np.diff(stream.t)
    nominal = np.median(dt)
    if np.any(np.abs(dt - nominal) > 0.2 * nominal):
        raise ValueError("sampling interval deviates more than 20% from nominal")

    q = inclination_from_acc(stream.acc[0]) if q0 is None else quat.normalize(q0)
    use_acc = (np.abs(np.linalg.norm(stream.acc, axis=1) - GRAVITY) <= acc_gate) & (gain > 0)
    out = _fuse_loop(q, stream.t.tolist(), stream.gyr.tolist(), stream.acc.tolist(), use_acc.tolist(), gain)
    return OrientationStream(stream.t.copy(), out)
