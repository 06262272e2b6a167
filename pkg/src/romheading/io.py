"""CSV files, stream alignment and result files.

All data files are UTF-8, comma separated, with a header row and numbers
written with 9 significant digits. Sensor files hold one sensor each::

    IMU:          t_s, gyr_x, gyr_y, gyr_z, acc_x, acc_y, acc_z   (rad/s, m/s^2)
    orientation:  t_s, q_w, q_x, q_y, q_z

Parse errors are reported as :class:`DataError` carrying the file, the line
and the offending column.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from pathlib import Path

import numpy as np

from .estimator import DeltaTimeline
from .metrics import ErrorReport
from .simulation import GroundTruth
from .streams import ImuStream, OrientationStream

IMU_COLUMNS = ("t_s", "gyr_x", "gyr_y", "gyr_z", "acc_x", "acc_y", "acc_z")
ORIENTATION_COLUMNS = ("t_s", "q_w", "q_x", "q_y", "q_z")
TRUTH_COLUMNS = ("t_s", "delta_rad",
                 "q1_w", "q1_x", "q1_y", "q1_z",
                 "q2_w", "q2_x", "q2_y", "q2_z",
                 "phi1_rad", "phi2_rad", "phi3_rad")
TIMELINE_COLUMNS = ("t_w", "delta_hat_deg", "cost", "violation_count")
ERROR_COLUMNS = ("t", "epsilon_deg", "epsilon_delta_deg")
SUMMARY_FIELDS = ("eps_rms_deg", "eps_delta_rms_deg", "eps_max_deg", "eps_delta_max_deg")

FLOAT_FORMAT = "%.9g"


class DataError(ValueError):
    """Unusable input data; the message names file, line and constraint."""

    def __init__(self, path, message: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}, line {line}"
        super().__init__(f"{where}: {message}")


def _fmt(x) -> str:
    return FLOAT_FORMAT % x


def read_table(path, columns: tuple[str, ...]) -> np.ndarray:
    """Numeric CSV with the given header; rows must have strictly increasing first column."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(path, f"cannot open file ({exc.strerror})") from None
    rows = []
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader, None)
            if header is None:
                raise DataError(path, "file is empty, expected a header row", 1)
            header = [h.strip() for h in header]
            if tuple(header) != columns:
                raise DataError(path, f"header {','.join(header)!r} does not match "
                                      f"expected {','.join(columns)!r}", 1)
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                line = reader.line_num
                if len(row) != len(columns):
                    raise DataError(path, f"expected {len(columns)} columns, found {len(row)}", line)
                vals = []
                for name, cell in zip(columns, row):
                    try:
                        v = float(cell)
                    except ValueError:
                        raise DataError(path, f"column {name!r}: cannot parse {cell.strip()!r} "
                                              "as a number", line) from None
                    if not math.isfinite(v):
                        raise DataError(path, f"column {name!r}: value must be finite", line)
                    vals.append(v)
                if rows and vals[0] <= rows[-1][0]:
                    raise DataError(path, f"column {columns[0]!r}: time {_fmt(vals[0])} does not "
                                          f"increase (previous row: {_fmt(rows[-1][0])})", line)
                rows.append(vals)
        except UnicodeDecodeError:
            raise DataError(path, "file is not valid UTF-8") from None
        except csv.Error as exc:
            raise DataError(path, f"malformed CSV ({exc})", reader.line_num) from None
    return np.array(rows, dtype=float).reshape(-1, len(columns))


def write_table(path, columns: tuple[str, ...], data) -> None:
    data = np.asarray(data, dtype=float).reshape(-1, len(columns))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in data:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def load_imu_csv(path) -> ImuStream:
    a = read_table(path, IMU_COLUMNS)
    return ImuStream(a[:, 0], a[:, 1:4], a[:, 4:7])


def write_imu_csv(path, stream: ImuStream) -> None:
    write_table(path, IMU_COLUMNS, np.column_stack([stream.t, stream.gyr, stream.acc]))


def load_orientation_csv(path) -> OrientationStream:
    a = read_table(path, ORIENTATION_COLUMNS)
    q = a[:, 1:5]
    n = np.linalg.norm(q, axis=1)
    bad = np.flatnonzero(np.abs(n - 1.0) > 1e-3)
    if bad.size:
        raise DataError(path, f"quaternion norm {n[bad[0]]:.6g} is not 1 (row {bad[0] + 1} of data)")
    return OrientationStream(a[:, 0], q / n[:, None])


def write_orientation_csv(path, stream: OrientationStream) -> None:
    write_table(path, ORIENTATION_COLUMNS, np.column_stack([stream.t, stream.q]))


def load_truth_csv(path) -> GroundTruth:
    a = read_table(path, TRUTH_COLUMNS)
    return GroundTruth(a[:, 0], a[:, 2:6], a[:, 6:10], a[:, 1], a[:, 10:13])


def write_truth_csv(path, truth: GroundTruth) -> None:
    write_table(path, TRUTH_COLUMNS,
                np.column_stack([truth.t, truth.delta, truth.q1, truth.q2, truth.angles]))


def load_timeline_csv(path) -> DeltaTimeline:
    """Timeline written by :func:`emit_results`.

    ``samples_used`` is not stored and comes back as -1.
    """
    a = read_table(path, TIMELINE_COLUMNS)
    return DeltaTimeline(a[:, 0], np.radians(a[:, 1]), a[:, 2], a[:, 3].astype(int),
                         np.full(a.shape[0], -1, dtype=int))


def resample_align(streams, sample_interval: float, window_length: float, names=None):
    """Put streams on a common time grid by nearest-neighbour selection.

    The grid starts at the latest first sample and steps by
    ``sample_interval`` up to the earliest last sample. Streams that already
    share the same timestamps at that interval are returned unchanged.
    Returns the aligned streams and the largest deviation between a grid
    instant and the sample chosen for it.
    """
    streams = list(streams)
    names = list(names) if names is not None else [f"stream {i + 1}" for i in range(len(streams))]
    for s, name in zip(streams, names):
        if len(s) < 2:
            raise DataError(name, "need at least two samples")
    start = max(float(s.t[0]) for s in streams)
    stop = min(float(s.t[-1]) for s in streams)
    overlap = stop - start
    if overlap < 2.0 * window_length:
        raise DataError(", ".join(names), f"insufficient data: streams overlap for {max(overlap, 0.0):.6g} s, "
                                          f"need at least {2.0 * window_length:g} s (two windows)")
    t0 = streams[0].t
    if all(s.t.shape == t0.shape and np.array_equal(s.t, t0) for s in streams):
        if np.max(np.abs(np.diff(t0) - sample_interval)) <= 0.01 * sample_interval:
            return streams, 0.0

    grid = start + sample_interval * np.arange(int(math.floor(overlap / sample_interval + 1e-9)) + 1)
    out = []
    deviation = 0.0
    for s in streams:
        i = np.clip(np.searchsorted(s.t, grid), 1, len(s) - 1)
        pick = np.where(grid - s.t[i - 1] <= s.t[i] - grid, i - 1, i)
        deviation = max(deviation, float(np.max(np.abs(s.t[pick] - grid))))
        out.append(dataclasses.replace(s.select(pick), t=grid.copy()))
    return out, deviation


def emit_results(timeline: DeltaTimeline, report: ErrorReport | None, path) -> list[Path]:
    """Write ``timeline.csv`` and, given a report, ``errors.csv``, ``summary.txt`` and ``summary.csv``.

    Returns the paths written.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "timeline.csv"]
    write_table(written[0], TIMELINE_COLUMNS,
                np.column_stack([timeline.t_w, np.degrees(timeline.delta_hat), timeline.cost,
                                 timeline.violation_count]))
    if report is None:
        return written

    written.append(out / "errors.csv")
    write_table(written[-1], ERROR_COLUMNS,
                np.column_stack([report.t, np.degrees(report.epsilon), np.degrees(report.epsilon_delta)]))
    summary = report.summary()
    written.append(out / "summary.txt")
    with written[-1].open("w", encoding="utf-8") as fh:
        fh.write(f"# RMS and max errors in deg over t > {report.t_start:g} s, "
                 f"{report.n_samples} samples\n")
        for key in SUMMARY_FIELDS:
            fh.write(f"{key} = {_fmt(summary[key])}\n")
    written.append(out / "summary.csv")
    write_table(written[-1], SUMMARY_FIELDS, [[summary[k] for k in SUMMARY_FIELDS]])
    return written
