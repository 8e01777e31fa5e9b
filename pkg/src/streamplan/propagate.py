"""Forward propagation of vehicle dynamics under persistent controls.

The vehicle obeys xdot = v(x) + u with a piecewise-constant relative
velocity u held for a duration tau (a persistent control).  Integration is
explicit Euler in two modes: fixed time step, and adaptive arc-length where
every step covers a constant spatial distance dx_max and the step count for
a p -> q connection is capped by the arc length of a semicircle over the
chord, n = ceil(pi ||q - p|| / (2 dx_max)).  Cost is elapsed travel time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FieldBoundsError, InvalidEdgeError
from .flowfield import FlowField
from .geometry import Bounds, as_point

__all__ = [
    "ControlAction",
    "Workspace",
    "Trajectory",
    "propagate_time",
    "propagate_arc",
    "n_steps",
    "edge_cost",
    "truncate",
    "write_trajectory",
    "read_trajectory",
]

COMPLETED = "completed"
OUT_OF_BOUNDS = "out-of-bounds"
STAGNATION = "stagnation"


@dataclass(frozen=True)
class ControlAction:
    """Persistent control: relative velocity (ux, uy) [m/s] held for tau [s]."""

    ux: float
    uy: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.ux) and math.isfinite(self.uy)):
            raise ValueError("control velocity must be finite")
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"control duration must be positive, got {self.tau}")

    @property
    def u(self) -> np.ndarray:
        return np.array([self.ux, self.uy])

    @property
    def speed(self) -> float:
        return math.hypot(self.ux, self.uy)


@dataclass(frozen=True)
class Workspace:
    """Planning domain: a bounding rectangle minus rectangular obstacles.

    Collision means entering an obstacle or leaving the bounds.
    """

    bounds: Bounds
    obstacles: tuple[Bounds, ...] = ()

    def contains(self, x: float, y: float) -> bool:
        if not self.bounds.contains(x, y):
            return False
        for ob in self.obstacles:
            if ob.contains(x, y):
                return False
        return True

    def segment_free(self, p, q) -> bool:
        """True when p-q stays in bounds and meets no obstacle."""
        if not (self.bounds.contains_point(p) and self.bounds.contains_point(q)):
            return False
        for ob in self.obstacles:
            if ob.segment_intersects(p, q):
                return False
        return True


class Trajectory:
    """Time-stamped polyline of vehicle states; immutable after construction.

    ``times`` are strictly increasing; ``cost`` is elapsed time.
    ``terminated`` records why propagation stopped.  ``psi_cum``, when
    recorded, holds the running stream value along the polyline (a cheap
    trapezoid estimate used for heuristic ranking on fields without a
    closed-form potential).
    """

    __slots__ = ("times", "points", "terminated", "psi_cum")

    def __init__(self, times, points, terminated: str, psi_cum=None):
        self.times = np.asarray(times, dtype=np.float64)
        self.points = np.asarray(points, dtype=np.float64)
        self.psi_cum = None if psi_cum is None else np.asarray(psi_cum, dtype=np.float64)
        if self.times.ndim != 1 or self.points.shape != (len(self.times), 2):
            raise ValueError("trajectory needs matching (n,) times and (n, 2) points")
        if len(self.times) == 0:
            raise ValueError("trajectory needs at least one state")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory timestamps must be strictly increasing")
        if terminated not in (COMPLETED, OUT_OF_BOUNDS, STAGNATION):
            raise ValueError(f"unknown termination reason {terminated!r}")
        self.terminated = terminated
        self.times.flags.writeable = False
        self.points.flags.writeable = False
        if self.psi_cum is not None:
            self.psi_cum.flags.writeable = False

    def __len__(self) -> int:
        return len(self.times)

    @property
    def cost(self) -> float:
        """Elapsed travel time [s]."""
        return float(self.times[-1] - self.times[0])

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def n_steps(p, q, dx_max: float) -> int:
    """Arc-length step budget: ceil(pi ||q - p|| / (2 dx_max)), at least 1.

    The path of an admissible traversal is heuristically bounded by the arc
    length of a semicircle whose diameter is the chord p -> q.
    """
    if dx_max <= 0.0:
        raise ValueError(f"dx_max must be positive, got {dx_max}")
    p = as_point(p)
    q = as_point(q)
    d = math.hypot(q[0] - p[0], q[1] - p[1])
    return max(1, math.ceil(math.pi * d / (2.0 * dx_max)))


def _workspace_for(f: FlowField, workspace: Workspace | None) -> Workspace:
    return workspace if workspace is not None else Workspace(f.bounds)


def propagate_time(
    f: FlowField,
    x0,
    action: ControlAction,
    dt: float,
    workspace: Workspace | None = None,
) -> Trajectory:
    """Fixed-time-step Euler propagation of a persistent control.

    Steps x_{k+1} = x_k + (v(x_k) + u) dt until the control duration is
    exhausted; the final step is shortened to land exactly on tau.  Every
    state is recorded.  Leaving the workspace stops propagation with the
    exterior state unrecorded.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    ws = _workspace_for(f, workspace)
    x0 = as_point(x0)
    x, y = float(x0[0]), float(x0[1])
    if not ws.contains(x, y):
        raise FieldBoundsError(f"start point {(x, y)} outside the workspace")
    ux, uy, tau = action.ux, action.uy, action.tau
    vel = f.velocity_at
    times = [0.0]
    xs = [x]
    ys = [y]
    t = 0.0
    terminated = COMPLETED
    while True:
        remaining = tau - t
        if remaining <= dt * 1e-12:
            break
        step = dt if remaining > dt else remaining
        vx, vy = vel(x, y)
        nx = x + (vx + ux) * step
        ny = y + (vy + uy) * step
        if not ws.contains(nx, ny):
            terminated = OUT_OF_BOUNDS
            break
        x, y = nx, ny
        t = tau if remaining <= dt else t + step
        times.append(t)
        xs.append(x)
        ys.append(y)
    return Trajectory(times, np.column_stack([xs, ys]), terminated)


def _fast_trajectory(times, xs, ys, terminated: str, psis=None) -> Trajectory:
    """Build a Trajectory from integrator output, skipping re-validation."""
    traj = Trajectory.__new__(Trajectory)
    traj.times = np.asarray(times)
    pts = np.empty((len(xs), 2))
    pts[:, 0] = xs
    pts[:, 1] = ys
    traj.points = pts
    traj.terminated = terminated
    traj.psi_cum = None if psis is None else np.asarray(psis)
    traj.times.flags.writeable = False
    traj.points.flags.writeable = False
    if traj.psi_cum is not None:
        traj.psi_cum.flags.writeable = False
    return traj


def propagate_arc(
    f: FlowField,
    x0,
    u,
    target,
    dx_max: float,
    workspace: Workspace | None = None,
    v_max: float | None = None,
    record_stream: bool = False,
    stop_tol: float | None = None,
) -> Trajectory:
    """Adaptive arc-length Euler propagation towards a target point.

    Every step moves exactly dx_max along the instantaneous total velocity
    v(x) + u, taking dt_k = dx_max / ||v + u||, for n_steps(x0, target)
    steps unless the workspace is left or the total speed stagnates below
    1e-9 * v_max first.  The control u is held constant; only the flow term
    varies with position.  With ``stop_tol`` set, propagation ends as soon as
    a recorded state falls within that distance of the target (the recorded
    prefix is identical to truncating a full run at its first such state).
    """
    if dx_max <= 0.0:
        raise ValueError(f"dx_max must be positive, got {dx_max}")
    ws = _workspace_for(f, workspace)
    x0 = as_point(x0)
    u = as_point(u)
    target = as_point(target)
    x, y = float(x0[0]), float(x0[1])
    if not ws.contains(x, y):
        raise FieldBoundsError(f"start point {(x, y)} outside the workspace")
    ux, uy = float(u[0]), float(u[1])
    scale = v_max if v_max is not None else max(math.hypot(ux, uy), 1.0)
    eps_speed = 1e-9 * scale
    n = n_steps(x0, target, dx_max)
    vel = f.velocity_at
    b = ws.bounds
    xmin, xmax, ymin, ymax = b.xmin, b.xmax, b.ymin, b.ymax
    obstacles = ws.obstacles
    tgx, tgy = float(target[0]), float(target[1])
    stop_sq = -1.0 if stop_tol is None else float(stop_tol) ** 2
    times = [0.0]
    xs = [x]
    ys = [y]
    psis = [0.0] if record_stream else None
    t = 0.0
    terminated = COMPLETED
    for _ in range(n):
        vx, vy = vel(x, y)
        tx = vx + ux
        ty = vy + uy
        speed = math.sqrt(tx * tx + ty * ty)
        if speed < eps_speed:
            terminated = STAGNATION
            break
        h = dx_max / speed
        nx = x + tx * h
        ny = y + ty * h
        if nx < xmin or nx > xmax or ny < ymin or ny > ymax:
            terminated = OUT_OF_BOUNDS
            break
        if obstacles:
            hit = False
            for ob in obstacles:
                if ob.contains(nx, ny):
                    hit = True
                    break
            if hit:
                terminated = OUT_OF_BOUNDS
                break
        if psis is not None:
            # Trapezoid increment of psi = int(u_c dy - v_c dx) along the step.
            nvx, nvy = vel(nx, ny)
            psis.append(
                psis[-1]
                + 0.5 * ((vx + nvx) * (ny - y) - (vy + nvy) * (nx - x))
            )
        x, y = nx, ny
        t += h
        times.append(t)
        xs.append(x)
        ys.append(y)
        if stop_sq >= 0.0:
            ddx = x - tgx
            ddy = y - tgy
            if ddx * ddx + ddy * ddy <= stop_sq:
                break
    return _fast_trajectory(times, xs, ys, terminated, psis)


def edge_cost(traj: Trajectory) -> float:
    """Travel time of a completed trajectory; incomplete ones are not edges."""
    if traj.terminated != COMPLETED:
        raise InvalidEdgeError(f"trajectory terminated with {traj.terminated!r}, not completed")
    return traj.cost


def truncate(traj: Trajectory, index: int) -> Trajectory:
    """Prefix of a trajectory up to ``index`` (inclusive), marked completed.

    A truncated prefix is an executable persistent control in its own right:
    the same relative velocity held for the shorter duration.
    """
    if not 0 <= index < len(traj):
        raise IndexError(f"truncation index {index} out of range for {len(traj)} states")
    if index == 0:
        raise ValueError("cannot truncate a trajectory to a single state")
    psi = None if traj.psi_cum is None else traj.psi_cum[: index + 1]
    return _fast_trajectory(
        traj.times[: index + 1],
        traj.points[: index + 1, 0],
        traj.points[: index + 1, 1],
        COMPLETED,
        psi,
    )


def write_trajectory(traj: Trajectory, dest) -> None:
    """Write states as `t x y` lines (the path-trace export format)."""
    own = not hasattr(dest, "write")
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        for t, (x, y) in zip(traj.times, traj.points):
            fh.write("%.17g %.17g %.17g\n" % (t, x, y))
    finally:
        if own:
            fh.close()


def read_trajectory(source) -> Trajectory:
    """Read a `t x y` trace written by write_trajectory."""
    own = not hasattr(source, "read")
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        rows = [[float(s) for s in line.split()] for line in fh if line.strip()]
    finally:
        if own:
            fh.close()
    arr = np.asarray(rows)
    return Trajectory(arr[:, 0], arr[:, 1:3], COMPLETED)
