import numpy as np
import pytest

from streamplan.flowfield import QuadVortexField, UniformField
from streamplan.geometry import Bounds

UNIT = Bounds(0.0, 0.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def quad_vortex():
    """The benchmark flow: amplitude 4, four 1 m cells on [0, 2]^2."""
    return QuadVortexField(amplitude=4.0, cell_size=1.0)


@pytest.fixture(scope="session")
def still_water():
    return UniformField(0.0, 0.0, Bounds(0.0, 0.0, 2.0, 2.0))


def trapezoid_stream_value(f, p, q, n=100_000):
    """Independent oracle: dense trapezoidal line integral of u dy - v dx."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = p[None, :] + ts[:, None] * (q - p)[None, :]
    vel = f.velocity_many(pts)
    integrand = vel[:, 0] * (q[1] - p[1]) - vel[:, 1] * (q[0] - p[0])
    return float(np.trapezoid(integrand, ts))


def euler_halving_ratios(field, seed: int, n: int, dt: float) -> np.ndarray:
    """Endpoint-error ratios e(dt)/e(dt/2) for random persistent controls.

    Errors are measured against each run's own 64x finer reference; the
    ratio sits near 2 in the first-order convergence regime.
    """
    import math

    from streamplan.propagate import COMPLETED, ControlAction, propagate_time

    rng = np.random.default_rng(seed)
    ratios = []
    while len(ratios) < n:
        x0 = rng.uniform(0.4, 1.6, size=2)
        ang = rng.uniform(0, 2 * math.pi)
        spd = rng.uniform(0.2, 1.0)
        u = (spd * math.cos(ang), spd * math.sin(ang))
        tau = rng.uniform(0.5, 1.2)
        ends = {}
        for d in (dt, dt / 2, dt / 64, dt / 128):
            traj = propagate_time(field, x0, ControlAction(u[0], u[1], tau), dt=d)
            if traj.terminated != COMPLETED:
                break
            ends[d] = traj.end
        else:
            e1 = np.linalg.norm(ends[dt] - ends[dt / 64])
            e2 = np.linalg.norm(ends[dt / 2] - ends[dt / 128])
            if e2 > 1e-13:
                ratios.append(e1 / e2)
    return np.array(ratios)
