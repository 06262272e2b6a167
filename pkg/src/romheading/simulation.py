"""Synthetic two-body motion with ground truth.

Body 1 moves through a random starting orientation followed by sinusoidal
yaw/roll/pitch excursions; body 2 hangs off it through the joint model, with
each joint angle swinging sinusoidally around the centre of its range. The
simulator emits

* ideal body-frame gyroscope and accelerometer samples with bias and noise,
* orientation streams in two reference frames that differ by the heading
  offset ``delta(t) = delta_0 + rate * t (+ optional slow modulation)``,
* the ground truth: body orientations, joint angles and ``delta(t)``.

Motion speed can be scheduled over time. A speed of zero freezes the pose,
which is how rest intervals are produced; speed changes ramp smoothly over
``profile.ramp`` seconds so the angular rates stay continuous.

The excitation levels of the presets (about 0.5 Hz for fast and 0.1 Hz for
slow motion) are choices of this package, not measured values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternion as quat
from .estimator import heading_quat
from .fusion import GRAVITY
from .joint import JointModel, joint_forward
from .streams import ImuStream, OrientationStream

MAX_DRIFT_RATE = np.radians(0.5)
DEFAULT_SAMPLE_INTERVAL = 1.0 / 75.0
# excitation used by the presets
PRESET_AMPLITUDE = 0.995
PRESET_SATURATION = 4.0

_E = np.eye(3)


@dataclass(frozen=True)
class MotionProfile:
    """Excitation of the joint and of the proximal body.

    ``angle_amplitude`` is the peak of each joint angle as a fraction of its
    half range; ``saturation`` makes the angles linger near that peak, like a
    joint pushed against its stops; ``angle_frequencies`` and ``base_frequencies`` hold one or
    more sinusoid frequencies (Hz) per angle. The base body turns by
    ``Q(yaw, z) Q(roll, x) Q(pitch, y)`` with peak angles ``base_amplitude_deg``.
    ``speed_changes`` are ``(t, speed)`` pairs; ``rests`` are ``(start, end)``
    spans of zero speed.
    """

    duration: float
    angle_amplitude: tuple[float, float, float] = (0.97, 0.97, 0.97)
    saturation: float = 0.0
    angle_frequencies: tuple[tuple[float, ...], ...] = ((0.23,), (0.31,), (0.17,))
    base_amplitude_deg: tuple[float, float, float] = (90.0, 45.0, 45.0)
    base_frequencies: tuple[tuple[float, ...], ...] = ((0.07,), (0.11,), (0.13,))
    speed_changes: tuple[tuple[float, float], ...] = ()
    rests: tuple[tuple[float, float], ...] = ()
    ramp: float = 0.5
    random_start: bool = True
    seed: int = 0

    def validate(self, sample_interval: float) -> None:
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if len(self.angle_amplitude) != 3 or len(self.angle_frequencies) != 3:
            raise ValueError("need amplitude and frequencies for all three joint angles")
        if len(self.base_amplitude_deg) != 3 or len(self.base_frequencies) != 3:
            raise ValueError("need amplitude and frequencies for all three base angles")
        if any(not 0.0 <= a <= 1.0 for a in self.angle_amplitude):
            raise ValueError("joint-angle amplitudes are fractions of the range and must lie in [0, 1]")
        top_speed = max([1.0] + [s for _, s in self.speed_changes])
        limit = 0.25 * 0.5 / sample_interval
        for f in [f for fs in self.angle_frequencies + self.base_frequencies for f in fs]:
            if not 0 < f * top_speed < limit:
                raise ValueError(f"frequency {f} Hz (x{top_speed} speed) must stay below a quarter of Nyquist")
        if self.saturation < 0:
            raise ValueError("saturation must be non-negative")
        if any(s < 0 for _, s in self.speed_changes):
            raise ValueError("speeds must be non-negative")
        for a, b in self.rests:
            if not (0 <= a - self.ramp and a < b):
                raise ValueError(f"invalid rest interval ({a}, {b})")


@dataclass(frozen=True)
class DriftSpec:
    """Heading offset between the two orientation reference frames, in rad and rad/s."""

    delta_0: float = 0.0
    drift_rate: float = 0.0
    modulation_amplitude: float = 0.0
    modulation_period: float = 60.0

    def __post_init__(self):
        if abs(self.drift_rate) > MAX_DRIFT_RATE + 1e-15:
            raise ValueError("drift rate must not exceed 0.5 deg/s")
        if self.modulation_period <= 0:
            raise ValueError("modulation period must be positive")

    def delta(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (self.delta_0 + self.drift_rate * t
                + self.modulation_amplitude * np.sin(2 * np.pi * t / self.modulation_period))


@dataclass(frozen=True)
class NoiseSpec:
    """Sensor imperfections; ``gyro_bias`` is the per-axis bound of a uniform draw."""

    gyro_sigma: float = 0.01
    gyro_bias: float = np.radians(0.3)
    acc_sigma: float = 0.05
    orientation_sigma: float = np.radians(0.5)

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass(eq=False)
class GroundTruth:
    t: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    delta: np.ndarray
    angles: np.ndarray

    @property
    def q_rel(self) -> np.ndarray:
        """True relative orientation ``q1^-1 * q2`` (equals the joint model output)."""
        return quat.multiply(quat.inverse(self.q1), self.q2)


@dataclass(eq=False)
class Simulation:
    truth: GroundTruth
    imu1: ImuStream
    imu2: ImuStream
    ori1: OrientationStream
    ori2: OrientationStream
    gyro_bias: np.ndarray = field(default_factory=lambda: np.zeros((2, 3)))


def _smoothstep_integral(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, None)
    inner = np.minimum(u, 1.0)
    return inner ** 3 - 0.5 * inner ** 4 + np.maximum(u - 1.0, 0.0)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _speed_knots(profile: MotionProfile) -> list[tuple[float, float]]:
    """Times at which a speed ramp starts, with the speed it ramps to."""
    events = [(t, "speed", s) for t, s in profile.speed_changes]
    events += [(a - profile.ramp, "rest", None) for a, _ in profile.rests]
    events += [(b, "resume", None) for _, b in profile.rests]
    events.sort(key=lambda e: e[0])
    knots = []
    speed = 1.0
    target = 1.0
    for t, kind, s in events:
        if kind == "speed":
            target = s
            # a change scheduled inside a rest takes effect when it ends
            if speed == 0.0:
                continue
            new = s
        elif kind == "rest":
            new = 0.0
        else:
            new = target
        knots.append((t, new))
        speed = new
    times = [t for t, _ in knots]
    if any(b - a < profile.ramp for a, b in zip(times, times[1:])):
        raise ValueError("speed changes and rests must be at least one ramp apart")
    return knots


def time_warp(t: np.ndarray, profile: MotionProfile) -> tuple[np.ndarray, np.ndarray]:
    """Motion phase ``tau(t)`` and its rate ``dtau/dt`` (the speed)."""
    tau = np.array(t, dtype=float)
    speed = np.ones_like(tau)
    prev = 1.0
    r = profile.ramp
    for tc, s in _speed_knots(profile):
        u = (t - tc) / r
        tau = tau + (s - prev) * r * _smoothstep_integral(u)
        speed = speed + (s - prev) * _smoothstep(u)
        prev = s
    return tau, speed


def _sinusoids(tau, speed, freqs, phases, peak, saturation=0.0):
    """Mean of sines scaled to ``peak``, and its time derivative.

    ``saturation > 0`` shapes the signal with ``tanh(k x) / tanh(k)``, which
    keeps the peak but makes it dwell near the extremes.
    """
    freqs = np.asarray(freqs, dtype=float)
    arg = 2 * np.pi * freqs[None, :] * tau[:, None] + phases[None, :]
    x = np.sin(arg).mean(axis=1)
    dx = (2 * np.pi * freqs[None, :] * np.cos(arg)).mean(axis=1) * speed
    if saturation > 0:
        k = saturation
        th = np.tanh(k * x)
        return peak * th / np.tanh(k), peak * k * (1 - th ** 2) / np.tanh(k) * dx
    return peak * x, peak * dx


def chain_body_rate(axes, angles, rates) -> np.ndarray:
    """Body-frame angular rate of ``prod_i Q(angles_i, axes_i)``.

    ``angles`` and ``rates`` are lists of ``(N,)`` arrays, one per factor.
    A constant left factor does not change the body rate.
    """
    n = angles[0].size
    omega = np.zeros((n, 3))
    suffix = quat.identity(n)
    for axis, phi, dphi in zip(axes[::-1], angles[::-1], rates[::-1]):
        omega += dphi[:, None] * quat.rotate(quat.inverse(suffix), np.broadcast_to(axis, (n, 3)))
        suffix = quat.multiply(quat.from_axis_angle(axis, phi), suffix)
    return omega


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def simulate(model: JointModel, profile: MotionProfile, drift: DriftSpec = DriftSpec(),
             noise: NoiseSpec = NoiseSpec(), sample_interval: float = DEFAULT_SAMPLE_INTERVAL,
             seed: int | None = None) -> Simulation:
    """Generate ground truth, IMU streams and orientation streams for both bodies.

    ``seed`` defaults to ``profile.seed``; every random draw (phases, start
    orientation, biases, noise) derives from it.
    """
    profile.validate(sample_interval)
    seed = profile.seed if seed is None else seed
    motion_rng, bias_rng, imu_rng, ori_rng = (np.random.default_rng(s)
                                              for s in np.random.SeedSequence(seed).spawn(4))

    n = int(np.floor(profile.duration / sample_interval + 1e-9)) + 1
    t = np.arange(n) * sample_interval
    tau, speed = time_warp(t, profile)

    centre = model.ranges.mean(axis=1)
    half = 0.5 * (model.ranges[:, 1] - model.ranges[:, 0])
    joint_angles, joint_rates = [], []
    for p in range(3):
        freqs = profile.angle_frequencies[p]
        phases = motion_rng.uniform(0, 2 * np.pi, len(freqs))
        v, r = _sinusoids(tau, speed, freqs, phases, profile.angle_amplitude[p] * half[p],
                          profile.saturation)
        joint_angles.append(centre[p] + v)
        joint_rates.append(r)

    base_axes = [_E[2], _E[0], _E[1]]
    base_angles, base_rates = [], []
    for p in range(3):
        freqs = profile.base_frequencies[p]
        phases = motion_rng.uniform(0, 2 * np.pi, len(freqs))
        v, r = _sinusoids(tau, speed, freqs, phases, np.radians(profile.base_amplitude_deg[p]))
        base_angles.append(v)
        base_rates.append(r)
    start = _random_rotation(motion_rng) if profile.random_start else quat.identity()

    q1 = start
    for axis, phi in zip(base_axes, base_angles):
        q1 = quat.multiply(q1, quat.from_axis_angle(axis, phi))
    q1 = quat.normalize(np.broadcast_to(q1, (n, 4)))
    angles = np.stack(joint_angles, axis=1)
    q2 = quat.normalize(quat.multiply(q1, joint_forward(model, angles)))

    w1 = chain_body_rate(base_axes, base_angles, base_rates)
    w2 = chain_body_rate(base_axes + list(model.axes), base_angles + joint_angles,
                         base_rates + joint_rates)

    bias = bias_rng.uniform(-noise.gyro_bias, noise.gyro_bias, (2, 3))
    up = np.array([0.0, 0.0, GRAVITY])
    imus = []
    for b, (q, w) in enumerate(((q1, w1), (q2, w2))):
        gyr = w + bias[b] + noise.gyro_sigma * imu_rng.standard_normal((n, 3))
        acc = quat.rotate(quat.inverse(q), up) + noise.acc_sigma * imu_rng.standard_normal((n, 3))
        imus.append(ImuStream(t.copy(), gyr, acc))

    delta = drift.delta(t)

    def noisy(q):
        return quat.multiply(q, quat.from_rotvec(noise.orientation_sigma * ori_rng.standard_normal((n, 3))))

    ori1 = OrientationStream(t.copy(), noisy(q1))
    ori2 = OrientationStream(t.copy(), noisy(quat.multiply(heading_quat(-delta), q2)))
    truth = GroundTruth(t, q1, q2, delta, angles)
    return Simulation(truth, imus[0], imus[1], ori1, ori2, bias)


def scenario_presets() -> dict[str, MotionProfile]:
    """Motion profiles modelled on the validation experiments.

    ``E01`` random start (60 s), ``E04`` fast (300 s), ``E05`` slow (210 s),
    ``E06`` mixed speeds with a 20 s rest at 164-184 s (300 s). All of them
    drive the joint angles close to their limits and hold them there.
    """
    rich = dict(angle_amplitude=(PRESET_AMPLITUDE,) * 3, saturation=PRESET_SATURATION)
    return {
        "E01": MotionProfile(
            duration=60.0, **rich,
            angle_frequencies=((0.23,), (0.31,), (0.17,)),
            base_frequencies=((0.07,), (0.11,), (0.13,)),
        ),
        "E04": MotionProfile(
            duration=300.0, **rich,
            angle_frequencies=((0.5,), (0.43,), (0.57,)),
            base_frequencies=((0.21,), (0.29,), (0.33,)),
        ),
        "E05": MotionProfile(
            duration=210.0, **rich,
            angle_frequencies=((0.1,), (0.083,), (0.121,)),
            base_frequencies=((0.037,), (0.053,), (0.071,)),
        ),
        "E06": MotionProfile(
            duration=300.0, **rich,
            angle_frequencies=((0.15,), (0.13,), (0.18,)),
            base_frequencies=((0.05,), (0.07,), (0.09,)),
            speed_changes=((60.0, 3.0), (120.0, 1.0), (220.0, 2.5), (260.0, 1.0)),
            rests=((164.0, 184.0),),
        ),
    }
