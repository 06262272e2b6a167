"""Window-based heading-offset estimation from range-of-motion constraints.

Two bodies joined by a joint are tracked by 6D orientation streams ``q1(t)``
and ``q2(t)`` whose reference frames differ by an unknown rotation ``delta``
about the vertical. For a candidate ``d`` the relative orientation is::

    q_rel(d) = q1^-1 * heading_quat(d) * q2

and each sample contributes ``e_k(d) = 1`` when ``q_rel(d)`` falls outside the
joint's range of motion. Every ``estimation_interval`` seconds the estimator
takes the most recent ``N`` samples and minimizes::

    c(d) = N / pi * dist(d, d_prev) + sum_k e_k(d)

where ``dist`` is the wrapped angular distance. The first term keeps the
estimate near the previous one when the motion carries little information;
its scale makes a half-turn cost as much as violating every sample.

The minimizer evaluates every sample on a 1 deg grid over the full circle
and bisects each change of its indicator, which turns a sample into closed
arcs of admissible offsets. The window count is then piecewise constant with
steps at arc endpoints, so the cost minimum lies at an endpoint or at the
previous estimate, and a sorted sweep evaluates all of them. Arcs narrower
than the grid step can be missed. Exact ties go to the candidate closest to
the previous estimate, then to the smaller angle. The first window has no previous estimate: the distance term
is dropped and the midpoint of the widest arc of minimal violation count is
taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import quaternion as quat
from .joint import DEFAULT_SLACK, JointModel, check_slack, rom_check
from .streams import OrientationStream

TWO_PI = 2.0 * np.pi
_Z = np.array([0.0, 0.0, 0.0, 1.0])
# bound on candidate-sample pairs decomposed per numpy call
_CHUNK = 1 << 18


@dataclass(frozen=True)
class WindowConfig:
    """Window length, estimation interval and sample interval, all in seconds."""

    window_length: float = 8.0
    estimation_interval: float = 1.0
    sample_interval: float = 1.0 / 75.0

    def __post_init__(self):
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        if not (self.sample_interval <= self.estimation_interval <= self.window_length):
            raise ValueError("need sample_interval <= estimation_interval <= window_length")
        if self.n_samples < 2:
            raise ValueError("a window must hold at least two samples")

    @property
    def n_samples(self) -> int:
        """Samples per full window."""
        return int(round(self.window_length / self.sample_interval))

    @property
    def min_samples(self) -> int:
        """Samples a warm-up window needs before it yields an estimate."""
        return max(2, self.n_samples // 8)


@dataclass(frozen=True)
class OptimizerConfig:
    grid_step: float = np.radians(1.0)
    # arc boundaries are bisected this finely; intersections narrower than
    # twice this value are lost
    refine_tol: float = np.radians(1e-4)
    stride: int = 1

    def __post_init__(self):
        if not 0 < self.grid_step <= np.pi / 2:
            raise ValueError("grid_step must lie in (0, 90] deg")
        if not 0 < self.refine_tol <= self.grid_step:
            raise ValueError("refine_tol must lie in (0, grid_step]")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError("stride must be a positive integer")

    def grid(self) -> np.ndarray:
        n = int(math.ceil(TWO_PI / self.grid_step - 1e-9))
        return np.arange(n) * self.grid_step


@dataclass(frozen=True)
class HeadingEstimate:
    t_w: float
    delta_hat: float
    cost: float
    violation_count: int
    samples_used: int


class NoEstimateError(LookupError):
    """Raised when the timeline is queried before its first estimate."""


@dataclass(eq=False)
class DeltaTimeline:
    """Per-window estimates, ordered by ``t_w``.

    A sample instant takes the estimate of the latest window with
    ``t_w <= t``. Instants before the first window have no estimate.
    """

    t_w: np.ndarray
    delta_hat: np.ndarray
    cost: np.ndarray
    violation_count: np.ndarray
    samples_used: np.ndarray

    @classmethod
    def from_estimates(cls, estimates: list[HeadingEstimate]) -> "DeltaTimeline":
        return cls(
            np.array([e.t_w for e in estimates], dtype=float),
            np.array([e.delta_hat for e in estimates], dtype=float),
            np.array([e.cost for e in estimates], dtype=float),
            np.array([e.violation_count for e in estimates], dtype=int),
            np.array([e.samples_used for e in estimates], dtype=int),
        )

    def __len__(self) -> int:
        return self.t_w.size

    def __iter__(self) -> Iterator[HeadingEstimate]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i: int) -> HeadingEstimate:
        return HeadingEstimate(float(self.t_w[i]), float(self.delta_hat[i]), float(self.cost[i]),
                               int(self.violation_count[i]), int(self.samples_used[i]))

    def _index(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.searchsorted(self.t_w, t + 1e-9, side="right") - 1

    def has_estimate(self, t) -> np.ndarray:
        return self._index(t) >= 0

    def lookup(self, t: float) -> float:
        i = int(self._index(t))
        if i < 0:
            raise NoEstimateError(f"no heading estimate available at t = {t:g} s")
        return float(self.delta_hat[i])

    def at(self, t) -> np.ndarray:
        """Estimates at the instants ``t``; NaN marks instants before the first window."""
        i = self._index(t)
        out = np.full(np.shape(i), np.nan)
        ok = i >= 0
        out[ok] = self.delta_hat[i[ok]]
        return out


def heading_quat(delta) -> np.ndarray:
    """Rotation by ``delta`` about the vertical axis: ``[cos(d/2), 0, 0, sin(d/2)]``."""
    half = 0.5 * np.asarray(delta, dtype=float)
    zero = np.zeros_like(half)
    return np.stack((np.cos(half), zero, zero, np.sin(half)), axis=-1)


def relative_orientation(q1, q2, delta_hat) -> np.ndarray:
    """``q1^-1 * heading_quat(delta_hat) * q2``."""
    return quat.multiply(quat.inverse(q1), quat.multiply(heading_quat(delta_hat), q2))


def constraint_violation(q1, q2, delta_hat, model: JointModel, slack: float = DEFAULT_SLACK):
    """Per-sample indicator ``e_k``: 0 if the corrected relative orientation is admissible."""
    return rom_check(model, relative_orientation(q1, q2, delta_hat), slack)


def angular_distance(a, b) -> np.ndarray:
    """Wrapped distance between angles, in ``[0, pi]``."""
    return np.abs(quat.wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


class _PairConstraint:
    """Constraint indicators of sample pairs for many candidate offsets at once.

    ``q_rel(d) = cos(d/2) q1^-1 q2 + sin(d/2) q1^-1 z q2`` is linear in
    ``(cos(d/2), sin(d/2))``, so two products per sample cover every candidate.
    """

    def __init__(self, q1, q2, model: JointModel, slack: float):
        q1 = quat.as_quat(q1).reshape(-1, 4)
        q2 = quat.as_quat(q2).reshape(-1, 4)
        if q1.shape != q2.shape:
            raise ValueError("both orientation arrays need the same number of samples")
        inv = quat.inverse(q1)
        self.base = quat.multiply(inv, q2)
        self.quarter = quat.multiply(inv, quat.multiply(_Z, q2))
        self.model = model
        self.slack = check_slack(slack)

    def __len__(self) -> int:
        return self.base.shape[0]

    def violations(self, deltas, rows=None) -> np.ndarray:
        """``(n_rows, n_deltas)`` int8 matrix of ``e_k(d)``."""
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        base = self.base if rows is None else self.base[rows]
        quarter = self.quarter if rows is None else self.quarter[rows]
        c = np.cos(0.5 * deltas)[None, :, None]
        s = np.sin(0.5 * deltas)[None, :, None]
        out = np.empty((base.shape[0], deltas.size), dtype=np.int8)
        step = max(1, _CHUNK // deltas.size)
        for i in range(0, base.shape[0], step):
            q = c * base[i:i + step, None, :] + s * quarter[i:i + step, None, :]
            out[i:i + step] = rom_check(self.model, q, self.slack)
        return out

    def violations_at(self, rows: np.ndarray, deltas: np.ndarray) -> np.ndarray:
        """``e_k(d_k)`` for paired rows and offsets."""
        out = np.empty(rows.size, dtype=np.int8)
        for i in range(0, rows.size, _CHUNK):
            r, h = rows[i:i + _CHUNK], 0.5 * deltas[i:i + _CHUNK, None]
            q = np.cos(h) * self.base[r] + np.sin(h) * self.quarter[r]
            out[i:i + _CHUNK] = rom_check(self.model, q, self.slack)
        return out


def _evaluated_rows(start: int, stop: int, stride: int) -> np.ndarray:
    # the newest sample is always evaluated
    return np.arange(stop - 1, start - 1, -stride)[::-1]


def _tiebreak(deltas: np.ndarray, costs: np.ndarray, prev: float | None) -> int:
    closeness = np.zeros_like(deltas) if prev is None else angular_distance(deltas, prev)
    return int(np.lexsort((np.mod(deltas, TWO_PI), closeness, costs))[0])


@dataclass(frozen=True)
class _SampleArcs:
    """Admissible offsets of each sample as closed arcs ``[start, stop]``.

    Arcs crossing zero have ``stop > 2 pi``. Rows whose indicator never
    changes on the grid have no arcs and keep that indicator in ``const``;
    rows with arcs have ``const == -1``.
    """

    row: np.ndarray
    start: np.ndarray
    stop: np.ndarray
    const: np.ndarray


def _sample_arcs(pc: _PairConstraint, table: np.ndarray, grid: np.ndarray, tol: float) -> _SampleArcs:
    """Bisect every sign change of ``table`` (rows x grid) down to ``tol``."""
    ends = np.append(grid[1:], TWO_PI)
    r, i = np.nonzero(table != np.roll(table, -1, axis=1))
    state = table[r, i]
    lo, hi = grid[i], ends[i]
    while r.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        same = pc.violations_at(r, mid) == state
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    # keep the admissible side of each boundary
    point = np.where(state == 0, lo, hi)
    # per row the changes alternate; each entry into an arc pairs with the next exit
    idx = np.arange(r.size)
    new_row = np.diff(r) != 0
    first = np.concatenate(([True], new_row))
    last = np.concatenate((new_row, [True]))
    row_first = np.maximum.accumulate(np.where(first, idx, 0))
    nxt = idx + 1
    nxt[last] = row_first[last]
    enter = np.flatnonzero(state == 1)
    start = point[enter]
    stop = point[nxt[enter]]
    stop = np.where(stop < start, stop + TWO_PI, stop)
    has = np.zeros(table.shape[0], bool)
    has[r] = True
    const = np.where(has, -1, table[:, 0]).astype(np.int8)
    return _SampleArcs(r[enter], start, stop, const)


class _WindowCounts:
    """Violation count of one window as a function of the offset."""

    _EPS = 1e-12

    def __init__(self, arcs: _SampleArcs, rows: np.ndarray, stride: int):
        lo = np.searchsorted(arcs.row, rows[0], side="left")
        hi = np.searchsorted(arcs.row, rows[-1], side="right")
        sel = np.arange(lo, hi)
        if stride > 1:
            sel = sel[np.isin(arcs.row[sel], rows)]
        self.stride = stride
        self.outside = int(np.count_nonzero(arcs.const[rows] != 0))
        self.start = np.sort(arcs.start[sel])
        self.stop = np.sort(arcs.stop[sel])

    def __call__(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        e = self._EPS
        inside = (np.searchsorted(self.start, d + e, side="right")
                  - np.searchsorted(self.stop, d - e, side="left")
                  + self.stop.size - np.searchsorted(self.stop, d + TWO_PI - e, side="left"))
        return self.stride * (self.outside - inside)

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.mod(np.concatenate((self.start, self.stop)), TWO_PI))


def _widest_min_arc(counts: _WindowCounts) -> float:
    """Midpoint of the widest arc of minimal violation count (0 if the count is constant)."""
    p = counts.breakpoints()
    if p.size == 0:
        return 0.0
    nxt = np.append(p[1:], p[0] + TWO_PI)
    mids = np.mod(0.5 * (p + nxt), TWO_PI)
    # alternate closed breakpoints and the open pieces between them
    v = np.column_stack((counts(p), counts(mids))).ravel()
    width = np.column_stack((np.zeros_like(p), nxt - p)).ravel()
    pos = np.repeat(p, 2)
    good = v == v.min()
    if good.all():
        return 0.0
    shift = int(np.argmin(good))
    good, width, pos = np.roll(good, -shift), np.roll(width, -shift), np.roll(pos, -shift)
    edges = np.diff(np.concatenate(([0], good.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    cw = np.concatenate(([0.0], np.cumsum(width)))
    lengths = cw[stops] - cw[starts]
    pick = np.lexsort((pos[starts], -lengths))[0]
    return float(np.mod(pos[starts[pick]] + 0.5 * lengths[pick], TWO_PI))


def _estimate(pc: _PairConstraint, arcs: _SampleArcs, rows: np.ndarray, n: int, prev: float | None,
              opt: OptimizerConfig, t_w: float) -> HeadingEstimate:
    """Minimize the window cost exactly over the arc model.

    The count is piecewise constant with steps at arc endpoints and the
    distance term is V-shaped around ``prev``, so the minimum sits at an
    endpoint or at ``prev``.
    """
    counts = _WindowCounts(arcs, rows, opt.stride)
    if prev is None:
        delta = _widest_min_arc(counts)
    else:
        cands = np.append(counts.breakpoints(), np.mod(prev, TWO_PI))
        costs = n / np.pi * angular_distance(cands, prev) + counts(cands)
        delta = float(cands[_tiebreak(cands, costs, prev)])
    # report the directly evaluated count, not the arc model's
    v = int(pc.violations([delta], rows).sum())
    cost = float(opt.stride * v)
    if prev is not None:
        cost += float(n / np.pi * angular_distance(delta, prev))
    return HeadingEstimate(float(t_w), delta, cost, v, int(rows.size))


def window_cost(q1, q2, delta_hat: float, prev_delta: float | None, model: JointModel,
                slack: float = DEFAULT_SLACK, stride: int = 1) -> float:
    """Cost of ``delta_hat`` over one window of sample pairs ``(n, 4)``.

    With ``stride > 1`` only every ``stride``-th sample (counting back from
    the newest) is tested and the violation sum is scaled by ``stride``.
    Without a previous estimate the distance term is omitted.
    """
    pc = _PairConstraint(q1, q2, model, slack)
    n = len(pc)
    if n == 0:
        raise ValueError("window holds no samples")
    rows = _evaluated_rows(0, n, stride)
    v = stride * int(pc.violations([delta_hat], rows).sum())
    if prev_delta is None:
        return float(v)
    return float(n / np.pi * angular_distance(delta_hat, prev_delta) + v)


def minimize_window(q1, q2, prev_delta: float | None, model: JointModel,
                    slack: float = DEFAULT_SLACK, opt: OptimizerConfig = OptimizerConfig(),
                    t_w: float = math.nan) -> HeadingEstimate:
    """Heading offset minimizing :func:`window_cost` over one window of sample pairs."""
    pc = _PairConstraint(q1, q2, model, slack)
    n = len(pc)
    if n == 0:
        raise ValueError("window holds no samples")
    rows = _evaluated_rows(0, n, opt.stride)
    grid = opt.grid()
    arcs = _sample_arcs(pc, pc.violations(grid), grid, opt.refine_tol)
    return _estimate(pc, arcs, rows, n, prev_delta, opt, t_w)


def _check_aligned(stream1: OrientationStream, stream2: OrientationStream, cfg: WindowConfig) -> np.ndarray:
    if len(stream1) != len(stream2):
        raise ValueError("orientation streams must have the same number of samples")
    if len(stream1) < 2:
        raise ValueError("orientation streams need at least two samples")
    if np.max(np.abs(stream1.t - stream2.t)) > 0.5 * cfg.sample_interval:
        raise ValueError("orientation streams are not aligned within half a sample interval")
    dt = stream1.sample_interval
    if abs(dt - cfg.sample_interval) > 0.2 * cfg.sample_interval:
        raise ValueError(f"stream sample interval {dt:g} s does not match the configured "
                         f"{cfg.sample_interval:g} s")
    return stream1.t


def run_estimator(stream1: OrientationStream, stream2: OrientationStream, model: JointModel,
                  cfg: WindowConfig = WindowConfig(), opt: OptimizerConfig = OptimizerConfig(),
                  slack: float = DEFAULT_SLACK) -> DeltaTimeline:
    """Estimate the heading offset at ``t_w = w * estimation_interval``, ``w = 1, 2, ...``.

    Each window uses only samples with ``t_w - window_length < t <= t_w``.
    Early windows with fewer than a full window of samples use what is
    available once they reach ``cfg.min_samples``.
    """
    t = _check_aligned(stream1, stream2, cfg)
    pc = _PairConstraint(stream1.q, stream2.q, model, slack)
    grid = opt.grid()
    # each row depends on its own sample only, so precomputing keeps causality
    arcs = _sample_arcs(pc, pc.violations(grid), grid, opt.refine_tol)
    eps = 1e-6 * cfg.sample_interval
    n_w = cfg.n_samples
    w = max(1, math.ceil((t[0] - eps) / cfg.estimation_interval))
    estimates: list[HeadingEstimate] = []
    prev = None
    while True:
        t_w = w * cfg.estimation_interval
        if t_w > t[-1] + eps:
            break
        w += 1
        stop = int(np.searchsorted(t, t_w + eps, side="right"))
        start = max(0, stop - n_w)
        if stop - start < cfg.min_samples:
            continue
        rows = _evaluated_rows(start, stop, opt.stride)
        est = _estimate(pc, arcs, rows, stop - start, prev, opt, t_w)
        estimates.append(est)
        prev = est.delta_hat
    return DeltaTimeline.from_estimates(estimates)
