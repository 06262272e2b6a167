"""Generic rotational joint with range-of-motion limits.

The relative orientation of the distal body with respect to the proximal one
is modelled as consecutive rotations about three joint axes::

    q_rel = Q(phi_1, j_1) * Q(phi_2, j_2) * Q(phi_3, j_3)

with each joint angle restricted to a closed interval. The admissible set of
relative orientations is the image of that box of angles. Membership is
decided by decomposing ``q_rel`` into intrinsic Euler angles, which requires
the axes to be the basis vectors of a Tait-Bryan sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternion as quat

DEFAULT_SLACK = np.radians(2.0)
MAX_SLACK = np.radians(10.0)
# closes the intervals against round-off of compose/decompose round trips
BOUNDARY_TOL = 1e-12

CMC_CONVENTION = "zxy"
CMC_RANGES_DEG = ((-20.0, 20.0), (-15.0, 15.0), (-40.0, 40.0))


def check_slack(slack: float) -> float:
    slack = float(slack)
    if not 0.0 <= slack <= MAX_SLACK + 1e-15:
        raise ValueError(f"slack must lie in [0, 10] deg, got {np.degrees(slack):.3g} deg")
    return slack


@dataclass(frozen=True, eq=False)
class JointModel:
    """Joint axes (rows of ``axes``), angle ranges in rad and optional Euler convention.

    Use :meth:`from_convention` for the Euler-angle case; only such models
    support :func:`rom_check` and :func:`rom_distance`.
    """

    axes: np.ndarray
    ranges: np.ndarray
    convention: str | None = None

    def __post_init__(self):
        axes = np.array(self.axes, dtype=float).reshape(3, 3)
        ranges = np.array(self.ranges, dtype=float).reshape(3, 2)
        if np.any(np.abs(np.linalg.norm(axes, axis=1) - 1.0) > 1e-9):
            raise ValueError("joint axes must be unit vectors")
        if abs(np.linalg.det(axes)) < 1e-6:
            raise ValueError("joint axes must be linearly independent")
        if np.any(ranges[:, 0] > ranges[:, 1]):
            raise ValueError("each joint range needs min <= max")
        if np.any(ranges <= -np.pi) or np.any(ranges > np.pi):
            raise ValueError("joint ranges must lie within (-180, 180] deg")
        if self.convention is not None:
            idx = quat.parse_convention(self.convention)
            if len(set(idx)) != 3:
                raise ValueError("joint models need three distinct axes (Tait-Bryan sequence)")
            expected = np.stack([quat.basis_vector(i) for i in idx])
            if not np.allclose(axes, expected, atol=1e-12):
                raise ValueError(f"axes do not match convention {self.convention!r}")
            object.__setattr__(self, "convention", "".join("xyz"[i] for i in idx))
        axes.flags.writeable = False
        ranges.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "ranges", ranges)

    @classmethod
    def from_convention(cls, convention: str, ranges_deg) -> "JointModel":
        idx = quat.parse_convention(convention)
        axes = np.stack([quat.basis_vector(i) for i in idx])
        return cls(axes, np.radians(np.asarray(ranges_deg, dtype=float)), convention)

    def widened(self, slack: float) -> "JointModel":
        """Copy with every interval widened by ``slack`` on both sides (clipped to +-pi)."""
        r = self.ranges + np.array([-slack, slack])
        r = np.clip(r, -np.pi + 1e-12, np.pi)
        return JointModel(self.axes, r, self.convention)

    @property
    def ranges_deg(self) -> np.ndarray:
        return np.degrees(self.ranges)


def cmc_joint() -> JointModel:
    """z-x'-y'' joint with the thumb-CMC-like ranges (+-20, +-15, +-40 deg)."""
    return JointModel.from_convention(CMC_CONVENTION, CMC_RANGES_DEG)


def joint_forward(model: JointModel, angles) -> np.ndarray:
    """Relative orientation for joint angles ``(..., 3)`` in rad."""
    angles = np.asarray(angles, dtype=float)
    q = quat.from_axis_angle(model.axes[0], angles[..., 0])
    for p in (1, 2):
        q = quat.multiply(q, quat.from_axis_angle(model.axes[p], angles[..., p]))
    return q


def joint_angles(model: JointModel, q_rel) -> np.ndarray:
    if model.convention is None:
        raise ValueError("membership tests need a joint model built on an Euler convention")
    return quat.euler_decompose(q_rel, model.convention)


def rom_check(model: JointModel, q_rel, slack: float = DEFAULT_SLACK) -> np.ndarray:
    """Constraint indicator: 0 where ``q_rel`` is inside the widened ROM box, else 1.

    Returns an ``int8`` array with the leading shape of ``q_rel``.
    """
    slack = check_slack(slack)
    phi = joint_angles(model, q_rel)
    lo = model.ranges[:, 0] - slack - BOUNDARY_TOL
    hi = model.ranges[:, 1] + slack + BOUNDARY_TOL
    inside = np.all((phi >= lo) & (phi <= hi), axis=-1)
    return (~inside).astype(np.int8)


def rom_distance(model: JointModel, q_rel) -> np.ndarray:
    """Largest per-angle interval exceedance in rad; zero on the admissible set."""
    phi = joint_angles(model, q_rel)
    below = model.ranges[:, 0] - phi
    above = phi - model.ranges[:, 1]
    excess = np.max(np.maximum(below, above), axis=-1)
    return np.where(excess > BOUNDARY_TOL, excess, 0.0)
