import numpy as np
import pytest

from romheading.joint import cmc_joint
from romheading.simulation import DriftSpec, NoiseSpec, scenario_presets, simulate


def random_quats(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def same_rotation(a, b, atol=1e-9) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    d = np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))
    return bool(np.all(d <= atol))


@pytest.fixture(scope="session")
def cmc():
    return cmc_joint()


@pytest.fixture(scope="session")
def clean_sim(cmc):
    """60 s of preset motion without noise, delta_0 = 30 deg, drift 0.2 deg/s."""
    return simulate(cmc, scenario_presets()["E01"], DriftSpec(np.radians(30.0), np.radians(0.2)),
                    NoiseSpec.none(), seed=11)


@pytest.fixture(scope="session")
def noisy_sim(cmc):
    """Same motion with default sensor noise."""
    return simulate(cmc, scenario_presets()["E01"], DriftSpec(np.radians(30.0), np.radians(0.2)),
                    NoiseSpec(), seed=11)


def brute_costs(q1, q2, deltas, prev, model, slack):
    """Window cost at every candidate, evaluated directly sample by sample."""
    from romheading.estimator import relative_orientation
    from romheading.joint import rom_check

    deltas = np.asarray(deltas, dtype=float)
    n = q1.shape[0]
    counts = np.empty(deltas.size)
    step = max(1, 200_000 // n)
    for i in range(0, deltas.size, step):
        d = deltas[i:i + step]
        q = relative_orientation(q1[None, :, :], q2[None, :, :], d[:, None])
        counts[i:i + step] = rom_check(model, q, slack).sum(axis=1)
    if prev is None:
        return counts
    dist = np.abs(np.angle(np.exp(1j * (deltas - prev))))
    return n / np.pi * dist + counts


def random_window(sim, rng, min_len=50, max_len=600):
    """Random contiguous slice of a simulation plus a random previous estimate."""
    n = int(rng.integers(min_len, max_len + 1))
    start = int(rng.integers(0, len(sim.ori1) - n))
    sl = slice(start, start + n)
    kind = rng.integers(0, 4)
    if kind == 0:
        prev = None
    elif kind == 1:
        prev = float(rng.uniform(0, 2 * np.pi))
    else:
        prev = float(np.mod(sim.truth.delta[start + n - 1] + rng.uniform(-0.2, 0.2), 2 * np.pi))
    return sim.ori1.q[sl], sim.ori2.q[sl], prev


def grid_check(q1, q2, prev, model, slack, opt=None):
    """Compare ``minimize_window`` with exhaustive search.

    The 0.1 deg grid can only overestimate the continuum minimum, so every
    cell whose endpoints come within reach of the grid minimum is re-searched
    at 0.01 deg. Returns the estimate, its cost gap to the 0.1 deg grid, its
    cost gap to the refined minimum, its directly recomputed cost and the
    distance (deg) to the nearest refined point within 0.05 of that minimum.
    """
    from romheading.estimator import OptimizerConfig, angular_distance, minimize_window

    est = minimize_window(q1, q2, prev, model, slack, opt or OptimizerConfig())
    step = np.radians(0.1)
    grid = step * np.arange(3600)
    c = brute_costs(q1, q2, grid, prev, model, slack)
    best = c.min()
    reach = (0.0 if prev is None else len(q1) / np.pi * step) + 2.0
    low = np.minimum(c, np.roll(c, -1)) <= best + reach
    fine = (grid[low][:, None] + np.radians(0.01) * np.arange(11)).ravel()
    cf = brute_costs(q1, q2, fine, prev, model, slack)
    floor = min(best, cf.min())
    near = np.concatenate((grid[c <= floor + 0.05], fine[cf <= floor + 0.05]))
    own = brute_costs(q1, q2, [est.delta_hat], prev, model, slack)[0]
    ddeg = float(np.degrees(angular_distance(near, est.delta_hat).min()))
    return est, est.cost - best, est.cost - floor, own, ddeg


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
