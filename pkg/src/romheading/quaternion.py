"""Quaternion algebra and intrinsic Euler angles.

Quaternions are float arrays of shape ``(..., 4)`` stored w-first as
``[w, x, y, z]``. Every function broadcasts over leading dimensions.

Composition follows the Hamilton convention: ``multiply(a, b)`` applies ``b``
in the frame already rotated by ``a``, so ``R(a * b) = R(a) @ R(b)``.

Renormalization policy: ``multiply`` never renormalizes. Code that chains
products over time (gyro integration, filter updates, simulation) calls
:func:`normalize` after every step.
"""

from __future__ import annotations

import numpy as np

AXIS_INDEX = {"x": 0, "y": 1, "z": 2}
GIMBAL_EPS = 1e-6
UNIT_TOL = 1e-9

TAIT_BRYAN = ("xyz", "xzy", "yxz", "yzx", "zxy", "zyx")
PROPER_EULER = ("xyx", "xzx", "yxy", "yzy", "zxz", "zyz")


def as_quat(q) -> np.ndarray:
    arr = np.asarray(q, dtype=float)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"quaternion arrays need a trailing axis of length 4, got shape {arr.shape}")
    return arr


def identity(*shape: int) -> np.ndarray:
    q = np.zeros(shape + (4,))
    q[..., 0] = 1.0
    return q


def norm(q) -> np.ndarray:
    return np.linalg.norm(as_quat(q), axis=-1)


def normalize(q) -> np.ndarray:
    q = as_quat(q)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize a zero quaternion")
    return q / n


def multiply(a, b) -> np.ndarray:
    """Hamilton product ``a * b``."""
    a = as_quat(a)
    b = as_quat(b)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        (
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ),
        axis=-1,
    )


def inverse(q) -> np.ndarray:
    """Conjugate of a unit quaternion.

    Raises ``ValueError`` for (near) zero quaternions, which have no inverse.
    """
    q = as_quat(q)
    if np.any(np.linalg.norm(q, axis=-1) < 1e-12):
        raise ValueError("zero quaternion has no inverse")
    out = -q
    out[..., 0] = q[..., 0]
    return out


def from_axis_angle(axis, angle) -> np.ndarray:
    """Rotation by ``angle`` (rad) about the unit vector ``axis``.

    ``axis`` must have unit norm within 1e-9; it is not silently normalized.
    """
    axis = np.asarray(axis, dtype=float)
    if axis.shape[-1:] != (3,):
        raise ValueError(f"axis needs a trailing axis of length 3, got shape {axis.shape}")
    if np.any(np.abs(np.linalg.norm(axis, axis=-1) - 1.0) > UNIT_TOL):
        raise ValueError("rotation axis must have unit norm")
    half = 0.5 * np.asarray(angle, dtype=float)
    lead = np.broadcast_shapes(axis.shape[:-1], half.shape)
    w = np.broadcast_to(np.cos(half), lead)[..., None]
    v = np.broadcast_to(np.sin(half)[..., None] * axis, lead + (3,))
    return np.concatenate((w, v), axis=-1)


def from_rotvec(v) -> np.ndarray:
    """Quaternion for the rotation vector ``v`` (axis times angle in rad)."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v, axis=-1)
    half = 0.5 * angle
    # sin(half)/angle, with its limit 1/2 at zero
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(angle > 1e-12, np.sin(half) / np.where(angle > 0, angle, 1.0), 0.5)
    return np.concatenate((np.cos(half)[..., None], k[..., None] * v), axis=-1)


def to_rotvec(q) -> np.ndarray:
    q = as_quat(q)
    q = np.where(q[..., :1] < 0, -q, q)
    vn = np.linalg.norm(q[..., 1:], axis=-1)
    angle = 2.0 * np.arctan2(vn, q[..., 0])
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(vn > 1e-12, angle / np.where(vn > 0, vn, 1.0), 2.0)
    return k[..., None] * q[..., 1:]


def rotation_angle(q) -> np.ndarray:
    """Angle of the rotation described by ``q``, in ``[0, pi]``.

    Insensitive to the sign of ``q``.
    """
    q = as_quat(q)
    return 2.0 * np.arctan2(np.linalg.norm(q[..., 1:], axis=-1), np.abs(q[..., 0]))


def rotation_distance(a, b) -> np.ndarray:
    """``min(|a - b|, |a + b|)``: zero iff both describe the same rotation."""
    a = as_quat(a)
    b = as_quat(b)
    return np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def rotate(q, v) -> np.ndarray:
    """Rotate vectors ``v`` by ``q`` (active rotation, ``R(q) @ v``)."""
    q = as_quat(q)
    v = np.asarray(v, dtype=float)
    w = q[..., :1]
    u = q[..., 1:]
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def to_matrix(q) -> np.ndarray:
    q = as_quat(q)
    w, x, y, z = np.moveaxis(q, -1, 0)
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    m = np.stack(
        (
            1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy),
            2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx),
            2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy),
        ),
        axis=-1,
    )
    return m.reshape(q.shape[:-1] + (3, 3))


def wrap_angle(a) -> np.ndarray:
    """Wrap angles to ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)


def parse_convention(convention: str) -> tuple[int, int, int]:
    """Axis indices of an intrinsic sequence.

    Accepts ``"zxy"``, ``"ZXY"`` or ``"z-x'-y''"``. Adjacent axes must differ.
    """
    letters = [c for c in convention.lower() if c in AXIS_INDEX]
    stripped = "".join(c for c in convention.lower() if c not in "-' ")
    if len(letters) != 3 or len(stripped) != 3:
        raise ValueError(f"invalid Euler convention {convention!r}")
    i, j, k = (AXIS_INDEX[c] for c in letters)
    if i == j or j == k:
        raise ValueError(f"adjacent axes must differ in Euler convention {convention!r}")
    return i, j, k


def _parity(i: int, j: int, k: int) -> int:
    return 1 if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1


def basis_vector(index: int) -> np.ndarray:
    e = np.zeros(3)
    e[index] = 1.0
    return e


def euler_compose(angles, convention: str = "zxy") -> np.ndarray:
    """Quaternion ``Q(a, e_i) * Q(b, e_j) * Q(c, e_k)`` for intrinsic angles ``(..., 3)``."""
    angles = np.asarray(angles, dtype=float)
    axes = parse_convention(convention)
    q = from_axis_angle(basis_vector(axes[0]), angles[..., 0])
    for n in (1, 2):
        q = multiply(q, from_axis_angle(basis_vector(axes[n]), angles[..., n]))
    return q


def euler_decompose(q, convention: str = "zxy") -> np.ndarray:
    """Intrinsic Euler angles ``(..., 3)`` of ``q``, each wrapped to ``(-pi, pi]``.

    The middle angle lies in ``[-pi/2, pi/2]`` for Tait-Bryan sequences and in
    ``[0, pi]`` for proper Euler sequences. Near gimbal lock (``|cos|`` of a
    Tait-Bryan middle angle, or ``|sin|`` of a proper Euler one, below 1e-6)
    the whole rotation about the shared axis goes to the first angle and the
    third angle is set to zero.
    """
    q = as_quat(q)
    i, j, k = parse_convention(convention)
    r = to_matrix(q)
    if i != k:
        s = _parity(i, j, k)
        mid = np.arctan2(s * r[..., i, k], np.hypot(r[..., i, i], r[..., i, j]))
        first = np.arctan2(-s * r[..., j, k], r[..., k, k])
        third = np.arctan2(-s * r[..., i, j], r[..., i, i])
        degenerate = np.abs(np.cos(mid)) < GIMBAL_EPS
    else:
        k = 3 - i - j
        s = _parity(i, j, k)
        mid = np.arctan2(np.hypot(r[..., i, j], r[..., i, k]), r[..., i, i])
        first = np.arctan2(r[..., j, i], -s * r[..., k, i])
        third = np.arctan2(r[..., i, j], s * r[..., i, k])
        degenerate = np.abs(np.sin(mid)) < GIMBAL_EPS
    if np.any(degenerate):
        # q = Q(first, e_i) * Q(mid, e_j) with third = 0
        rest = multiply(q, from_axis_angle(basis_vector(j), -mid))
        locked = 2.0 * np.arctan2(rest[..., 1 + i], rest[..., 0])
        first = np.where(degenerate, locked, first)
        third = np.where(degenerate, 0.0, third)
    return np.stack((wrap_angle(first), wrap_angle(mid), wrap_angle(third)), axis=-1)
