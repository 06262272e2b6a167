"""Error metrics against ground truth.

``epsilon(t)`` is the angle of ``q_true^-1 * q_est`` between true and estimated
relative orientation; ``epsilon_delta(t)`` is the wrapped difference between
true and estimated heading offset. The report carries both series, their RMS
and maxima, and the time after which ``epsilon`` stays below 5 deg.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternion as quat
from .estimator import DeltaTimeline, relative_orientation
from .streams import OrientationStream

CONVERGENCE_THRESHOLD = np.radians(5.0)
CONVERGENCE_HOLD = 2.0


def orientation_error(q_true, q_est) -> np.ndarray:
    """Rotation angle between two orientations, in ``[0, pi]``."""
    return quat.rotation_angle(quat.multiply(quat.inverse(q_true), q_est))


def delta_error(delta_true, delta_est) -> np.ndarray:
    """Wrapped heading-offset error, in ``[0, pi]``."""
    return np.abs(quat.wrap_angle(np.asarray(delta_true, dtype=float) - np.asarray(delta_est, dtype=float)))


def heading_angle(q) -> np.ndarray:
    """Angle of the twist of ``q`` about the vertical axis."""
    q = quat.as_quat(q)
    return 2.0 * np.arctan2(q[..., 3], q[..., 0])


def reference_heading_offset(q1_est, q2_est, q1_true, q2_true) -> np.ndarray:
    """Heading offset implied by two heading-arbitrary streams and the true orientations.

    For ``q_i_est ~ Qz(h_i) * q_i_true`` the offset that maps stream 2's
    reference frame onto stream 1's is ``h_1 - h_2``. This is the reference
    value of ``delta`` for orientations produced by 6D fusion.
    """
    h1 = heading_angle(quat.multiply(q1_est, quat.inverse(q1_true)))
    h2 = heading_angle(quat.multiply(q2_est, quat.inverse(q2_true)))
    return np.mod(h1 - h2, 2 * np.pi)


def convergence_time(t: np.ndarray, err: np.ndarray, threshold: float = CONVERGENCE_THRESHOLD,
                     hold: float = CONVERGENCE_HOLD) -> float:
    """First instant after which ``err`` stays below ``threshold`` for at least ``hold`` s.

    NaN when that never happens.
    """
    ok = err < threshold
    if t.size == 0:
        return float("nan")
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return float(t[0])
    # time of the next failing sample at or after each index
    nxt = np.searchsorted(bad, np.arange(t.size))
    next_bad_t = np.where(nxt < bad.size, t[bad[np.minimum(nxt, bad.size - 1)]], np.inf)
    good = ok & (next_bad_t - t >= hold) & ((t[-1] - t >= hold) | np.isinf(next_bad_t))
    idx = np.flatnonzero(good)
    return float(t[idx[0]]) if idx.size else float("nan")


def nearest_index(t_src: np.ndarray, t_dst: np.ndarray, tol: float) -> np.ndarray:
    """Index into ``t_src`` nearest to each ``t_dst``; -1 where farther than ``tol``."""
    i = np.clip(np.searchsorted(t_src, t_dst), 1, t_src.size - 1)
    left = t_src[i - 1]
    right = t_src[i]
    pick = np.where(np.abs(t_dst - left) <= np.abs(right - t_dst), i - 1, i)
    if t_src.size == 1:
        pick = np.zeros_like(pick)
    return np.where(np.abs(t_src[pick] - t_dst) <= tol, pick, -1)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x ** 2))) if x.size else float("nan")


def _max(x: np.ndarray) -> float:
    return float(np.max(x)) if x.size else float("nan")


@dataclass(eq=False)
class ErrorReport:
    """Error series (rad) on the estimator's sample grid and their summary values.

    Series cover every sample with an estimate. The scalar fields are taken
    over the samples with ``t > t_start``; ``n_samples`` counts them.
    """

    t: np.ndarray
    epsilon: np.ndarray
    epsilon_delta: np.ndarray
    eps_rms: float
    eps_delta_rms: float
    eps_max: float
    eps_delta_max: float
    convergence_time: float
    n_samples: int
    t_start: float

    def summary(self) -> dict[str, float]:
        """The four headline values in degrees."""
        return {
            "eps_rms_deg": float(np.degrees(self.eps_rms)),
            "eps_delta_rms_deg": float(np.degrees(self.eps_delta_rms)),
            "eps_max_deg": float(np.degrees(self.eps_max)),
            "eps_delta_max_deg": float(np.degrees(self.eps_delta_max)),
        }


def evaluate(timeline: DeltaTimeline, stream1: OrientationStream, stream2: OrientationStream,
             truth_t, truth_q_rel, truth_delta=None, t_start: float = -np.inf) -> ErrorReport:
    """Compare estimates with ground truth.

    ``truth_q_rel`` is the true relative orientation at ``truth_t``. Truth
    samples are matched to the estimator grid by nearest neighbour within
    half a sample interval. Without ``truth_delta`` only ``epsilon`` is
    meaningful and ``epsilon_delta`` is NaN.
    """
    t = stream1.t
    truth_t = np.asarray(truth_t, dtype=float)
    tol = 0.5 * stream1.sample_interval if t.size > 1 else 0.0
    j = nearest_index(truth_t, t, tol)
    delta_hat = timeline.at(t)
    keep = (j >= 0) & np.isfinite(delta_hat)
    if not np.any(j >= 0):
        raise ValueError("estimates and ground truth do not overlap in time")
    ts = t[keep]
    jj = j[keep]
    q_est = relative_orientation(stream1.q[keep], stream2.q[keep], delta_hat[keep])
    eps = orientation_error(np.asarray(truth_q_rel)[jj], q_est)
    if truth_delta is None:
        eps_d = np.full(ts.size, np.nan)
    else:
        eps_d = delta_error(np.asarray(truth_delta)[jj], delta_hat[keep])

    after = ts > t_start
    return ErrorReport(
        t=ts,
        epsilon=eps,
        epsilon_delta=eps_d,
        eps_rms=_rms(eps[after]),
        eps_delta_rms=_rms(eps_d[after]),
        eps_max=_max(eps[after]),
        eps_delta_max=_max(eps_d[after]),
        convergence_time=convergence_time(ts, eps),
        n_samples=int(after.sum()),
        t_start=float(t_start),
    )
