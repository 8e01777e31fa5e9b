"""Asymptotically optimal tree planner with streamline steering.

RRT* over a flow field: sample (Halton), find the nearest tree vertex under
a pluggable distance heuristic, steer along the control line, validate the
edge by sampling a handful of admissible velocities, insert, then
choose-parent and rewire among the k nearest vertices
(k = max(1, ceil(K_RRG ln |V|))).  Edge costs are travel times measured on
the propagated trajectories.

Edges are stored as one or two persistent-control pieces: the propagated
trajectory truncated at its first state within dx_max of the child vertex,
plus, when needed, a sub-dx_max straight "landing" piece computed with the
locally-uniform flow assumption so that every stored edge ends exactly at
its child vertex.  That keeps extracted paths continuous and replayable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegeneratePairError, FieldBoundsError, InfeasibleError
from .flowfield import FlowField
from .geometry import as_point
from .metricspace import DistanceHeuristic, VertexSet, k_nearest_count, knearest, nearest
from .propagate import (
    COMPLETED,
    ControlAction,
    Trajectory,
    Workspace,
    n_steps,
    propagate_arc,
    truncate,
)
from .sampling import DispersionTracker, HaltonSampler
from .streamctl import optimistic_steer, sample_line_velocities

__all__ = [
    "EDGE_MODES",
    "PlannerConfig",
    "Edge",
    "PlanTree",
    "MetricRow",
    "PlanResult",
    "steer",
    "collision_free",
    "plan",
    "extract_path",
    "concat_path",
    "replay_path",
    "write_result",
]

EDGE_MODES = ("adaptive-arc", "analytic-step")

# Coincidence guard for vertex positions and chord endpoints [m].
_EPS_POS = 1e-12


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs for a planning run; all lengths in metres, times in seconds."""

    heuristic: str = "l2-lsb"
    edge_mode: str = "adaptive-arc"
    v_max: float = 1.0
    dx_max: float = 0.01
    n_line_samples: int = 7
    goal_radius: float | None = None  # default: 1% of the workspace diagonal
    max_iterations: int = 5000
    max_wall_s: float = 60.0
    alpha: float = 1.0
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.edge_mode not in EDGE_MODES:
            raise ValueError(f"edge_mode must be one of {EDGE_MODES}, got {self.edge_mode!r}")
        if self.v_max <= 0 or self.dx_max <= 0:
            raise ValueError("v_max and dx_max must be positive")
        if self.n_line_samples < 1:
            raise ValueError("n_line_samples must be >= 1")
        if self.goal_radius is not None and self.goal_radius <= 0:
            raise ValueError("goal_radius must be positive")
        if self.max_iterations < 0 or self.max_wall_s < 0:
            raise ValueError("budgets must be non-negative")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


@dataclass(frozen=True)
class Edge:
    """A tree edge: persistent controls with their recorded trajectories."""

    pieces: tuple[tuple[ControlAction, Trajectory], ...]

    @property
    def cost(self) -> float:
        return sum(t.cost for _, t in self.pieces)

    @property
    def start(self) -> np.ndarray:
        return self.pieces[0][1].start

    @property
    def end(self) -> np.ndarray:
        return self.pieces[-1][1].end


class PlanTree:
    """Rooted tree over a VertexSet with costs, parent edges and children."""

    def __init__(self, field: FlowField, root, goal, goal_radius: float):
        self.vertices = VertexSet(field)
        self.costs: list[float] = []
        self.parents: list[int] = []
        self.edges: list[Edge | None] = []
        self.children: list[set[int]] = []
        self.goal = as_point(goal)
        self.goal_radius = float(goal_radius)
        self.goal_ids: list[int] = []
        self.root = self._append(root, -1, None, 0.0)

    def __len__(self) -> int:
        return len(self.vertices)

    def _append(self, p, parent: int, edge: Edge | None, cost: float) -> int:
        vid = self.vertices.insert(p)
        self.costs.append(cost)
        self.parents.append(parent)
        self.edges.append(edge)
        self.children.append(set())
        if parent >= 0:
            self.children[parent].add(vid)
        if self._reaches_goal(p):
            self.goal_ids.append(vid)
        return vid

    def _reaches_goal(self, p) -> bool:
        return math.hypot(p[0] - self.goal[0], p[1] - self.goal[1]) <= self.goal_radius

    def add_vertex(self, p, parent: int, edge: Edge, cost: float) -> int:
        return self._append(p, parent, edge, cost)

    def reparent(self, vid: int, new_parent: int, new_edge: Edge, new_cost: float) -> None:
        """Swap a vertex's inbound edge, eagerly pushing the cost delta down."""
        old_parent = self.parents[vid]
        if old_parent >= 0:
            self.children[old_parent].discard(vid)
        self.parents[vid] = new_parent
        self.edges[vid] = new_edge
        delta = new_cost - self.costs[vid]
        self.costs[vid] = new_cost
        self.children[new_parent].add(vid)
        if delta == 0.0:
            return
        stack = list(self.children[vid])
        while stack:
            c = stack.pop()
            self.costs[c] += delta
            stack.extend(self.children[c])

    def best_goal(self) -> tuple[int, float] | None:
        if not self.goal_ids:
            return None
        best = min(self.goal_ids, key=lambda g: (self.costs[g], g))
        return best, self.costs[best]

    def path_ids(self, vid: int) -> list[int]:
        ids = []
        while vid >= 0:
            ids.append(vid)
            vid = self.parents[vid]
        ids.reverse()
        return ids

    def validate(self, tol: float = 1e-9) -> None:
        """Check the cost/parent invariants; used by tests."""
        seen = 0
        stack = [self.root]
        while stack:
            v = stack.pop()
            seen += 1
            for c in self.children[v]:
                assert self.parents[c] == v
                edge = self.edges[c]
                assert edge is not None
                assert abs(self.costs[c] - (self.costs[v] + edge.cost)) <= tol
                assert np.hypot(*(edge.end - self.vertices.position(c))) <= tol
                stack.append(c)
        assert seen == len(self)
        assert self.parents[self.root] == -1 and self.costs[self.root] == 0.0


def _steer_on_line(psi: float, dx: float, dy: float, v_max: float):
    """Max-progress control on the line psi + u_s dy - v_s dx = 0, or None.

    Scalar version of the control-line/speed-disk intersection used for
    locally-uniform steps; (dx, dy) is the displacement and must be nonzero.
    """
    d2 = dx * dx + dy * dy
    fx = -psi * dy / d2
    fy = psi * dx / d2
    h2 = v_max * v_max - (fx * fx + fy * fy)
    if h2 < 0.0:
        return None
    s = math.sqrt(h2 / d2)
    return fx + s * dx, fy + s * dy


def _uniform_step_piece(
    f: FlowField, from_xy: np.ndarray, to_xy: np.ndarray, cfg: PlannerConfig, ws: Workspace
) -> tuple[ControlAction, Trajectory] | None:
    """Straight sub-step from -> to with the flow frozen at the start point.

    Returns None when the local control line misses the speed disk, the
    resulting motion makes no forward progress, or the segment collides.
    """
    dx = to_xy[0] - from_xy[0]
    dy = to_xy[1] - from_xy[1]
    length = math.hypot(dx, dy)
    if length <= _EPS_POS:
        return None
    vx, vy = f.velocity_at(from_xy[0], from_xy[1])
    u = _steer_on_line(vx * dy - vy * dx, dx, dy, cfg.v_max)
    if u is None:
        return None
    speed = ((vx + u[0]) * dx + (vy + u[1]) * dy) / length
    if speed <= 1e-9 * cfg.v_max:
        return None
    if not ws.segment_free(from_xy, to_xy):
        return None
    tau = length / speed
    traj = Trajectory([0.0, tau], np.vstack([from_xy, to_xy]), COMPLETED)
    return ControlAction(u[0], u[1], tau), traj


def _heuristic_dists_to(
    h: DistanceHeuristic, f: FlowField, traj: Trajectory, target: np.ndarray
) -> np.ndarray:
    """Heuristic distance of every trajectory state to the target point."""
    pts = traj.points
    d = np.hypot(pts[:, 0] - target[0], pts[:, 1] - target[1])
    if h.kind == "euclidean":
        return d
    if f.has_potential:
        psi = f.stream_potential_at(target[0], target[1]) - f.potential_many(pts)
    else:
        # Running stream value along the polyline plus one true segment query.
        cum = traj.psi_cum
        if cum is None:
            raise ValueError("trajectory lacks recorded stream values")
        psi = (cum[-1] - cum) + f.stream_value(pts[-1], target)
    if h.kind == "l2-stream":
        return np.sqrt(d * d + (psi / h.alpha) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        lsb = np.where(d > 0.0, np.abs(psi) / d, 0.0)
    return np.sqrt(d * d + (lsb * h.beta) ** 2)


def steer(
    f: FlowField,
    from_p,
    to_p,
    cfg: PlannerConfig,
    workspace: Workspace | None = None,
    heuristic: DistanceHeuristic | None = None,
) -> tuple[np.ndarray, Edge] | None:
    """Drive from ``from_p`` towards ``to_p``; returns (reached, edge) or None.

    Adaptive-arc mode picks the optimistic control-line velocity and runs
    arc-length propagation for the semicircle step budget; the trajectory is
    truncated at its first state within dx_max of the target, or else at the
    state closest to the target under the configured heuristic.  Analytic-step
    mode takes one straight step of length min(dx_max, distance) treating the
    flow as locally uniform.  None means the target is unreachable on the
    control line (or no forward progress was made).
    """
    from_p = as_point(from_p)
    to_p = as_point(to_p)
    if math.hypot(*(to_p - from_p)) <= _EPS_POS:
        raise DegeneratePairError("steer needs distinct endpoints")
    ws = workspace if workspace is not None else Workspace(f.bounds)
    if not ws.contains(from_p[0], from_p[1]):
        raise FieldBoundsError(f"steer start {tuple(from_p)} outside the workspace")
    if heuristic is None:
        heuristic = DistanceHeuristic(cfg.heuristic, f, cfg.alpha, cfg.beta)

    if cfg.edge_mode == "analytic-step":
        d = math.hypot(*(to_p - from_p))
        step = min(cfg.dx_max, d)
        target = from_p + (step / d) * (to_p - from_p)
        piece = _uniform_step_piece(f, from_p, target, cfg, ws)
        if piece is None:
            return None
        return target, Edge((piece,))

    u = optimistic_steer(f, from_p, to_p, cfg.v_max)
    if u is None:
        return None
    traj = propagate_arc(
        f,
        from_p,
        u,
        to_p,
        cfg.dx_max,
        workspace=ws,
        v_max=cfg.v_max,
        record_stream=not f.has_potential,
        stop_tol=cfg.dx_max,
    )
    if len(traj) < 2:
        return None
    if math.hypot(*(traj.end - to_p)) <= cfg.dx_max:
        part = traj if traj.terminated == COMPLETED else truncate(traj, len(traj) - 1)
    else:
        cut = int(np.argmin(_heuristic_dists_to(heuristic, f, traj, to_p)))
        if cut == 0:
            return None
        part = truncate(traj, cut)
    action = ControlAction(u[0], u[1], part.cost)
    return part.end.copy(), Edge(((action, part),))


def _scan_arrival_time(
    f: FlowField,
    from_p: np.ndarray,
    to_p: np.ndarray,
    ux: float,
    uy: float,
    dx_max: float,
    ws: Workspace,
    v_max: float,
    time_cap: float,
) -> float | None:
    """Arrival time of one candidate control, or None.

    Record-free twin of propagate_arc for edge evaluation: same stepping,
    same termination, plus an early exit once the elapsed time can no longer
    beat ``time_cap`` (such a candidate would lose anyway).
    """
    x, y = float(from_p[0]), float(from_p[1])
    tgx, tgy = float(to_p[0]), float(to_p[1])
    eps_speed = 1e-9 * v_max
    n = n_steps(from_p, to_p, dx_max)
    vel = f.velocity_at
    b = ws.bounds
    xmin, xmax, ymin, ymax = b.xmin, b.xmax, b.ymin, b.ymax
    obstacles = ws.obstacles
    stop_sq = dx_max * dx_max
    # Every step covers exactly dx_max, so a state farther from the target
    # than the remaining step budget can reach is a certain miss.
    reach = dx_max * n
    t = 0.0
    for _ in range(n):
        vx, vy = vel(x, y)
        tx = vx + ux
        ty = vy + uy
        speed = math.sqrt(tx * tx + ty * ty)
        if speed < eps_speed:
            return None
        h = dx_max / speed
        t += h
        if t >= time_cap:
            return None
        x += tx * h
        y += ty * h
        if x < xmin or x > xmax or y < ymin or y > ymax:
            return None
        if obstacles:
            for ob in obstacles:
                if ob.contains(x, y):
                    return None
        ddx = x - tgx
        ddy = y - tgy
        d_sq = ddx * ddx + ddy * ddy
        if d_sq <= stop_sq:
            return t
        if d_sq > reach * reach:
            return None
        reach -= dx_max
    return None


def _best_line_edge(
    f: FlowField,
    from_p: np.ndarray,
    to_p: np.ndarray,
    cfg: PlannerConfig,
    ws: Workspace,
    time_cap: float = math.inf,
) -> tuple[ControlAction, Trajectory] | None:
    """Minimum-cost line-sampled connection reaching within dx_max of ``to_p``.

    ``time_cap`` discards connections at least that expensive; the default
    keeps every arrival.
    """
    d = math.hypot(*(to_p - from_p))
    if d <= _EPS_POS:
        raise DegeneratePairError("edge evaluation needs distinct endpoints")

    if cfg.edge_mode == "analytic-step":
        if d > 2.0 * cfg.dx_max:
            return None
        step = min(cfg.dx_max, d)
        best = None
        vx, vy = f.velocity_at(from_p[0], from_p[1])
        for u in sample_line_velocities(f, from_p, to_p, cfg.v_max, cfg.n_line_samples):
            tx, ty = vx + u[0], vy + u[1]
            speed = math.hypot(tx, ty)
            if speed <= 1e-9 * cfg.v_max:
                continue
            end = np.array([from_p[0] + tx / speed * step, from_p[1] + ty / speed * step])
            if math.hypot(*(end - to_p)) > cfg.dx_max:
                continue
            if not ws.segment_free(from_p, end):
                continue
            tau = step / speed
            if best is None or tau < best[1].cost:
                traj = Trajectory([0.0, tau], np.vstack([from_p, end]), COMPLETED)
                best = (ControlAction(u[0], u[1], tau), traj)
        return best

    best_u = None
    best_cost = time_cap
    # Try the optimistic end of the chord first so the shrinking cost cap
    # cuts the remaining candidates early.
    for u in reversed(sample_line_velocities(f, from_p, to_p, cfg.v_max, cfg.n_line_samples)):
        t_arr = _scan_arrival_time(
            f, from_p, to_p, u[0], u[1], cfg.dx_max, ws, cfg.v_max, best_cost
        )
        if t_arr is not None:
            best_u = u
            best_cost = t_arr
    if best_u is None:
        return None
    traj = propagate_arc(
        f, from_p, best_u, to_p, cfg.dx_max, workspace=ws, v_max=cfg.v_max, stop_tol=cfg.dx_max
    )
    part = traj if traj.terminated == COMPLETED else truncate(traj, len(traj) - 1)
    return ControlAction(best_u[0], best_u[1], part.cost), part


def collision_free(
    f: FlowField,
    from_p,
    to_p,
    cfg: PlannerConfig,
    workspace: Workspace | None = None,
) -> tuple[bool, Trajectory | None]:
    """Whether any line-sampled velocity connects from -> to without collision.

    Propagates each of ``cfg.n_line_samples`` admissible velocities per the
    configured edge mode and returns the minimum-cost trajectory reaching
    within dx_max of ``to_p``, or (False, None).
    """
    from_p = as_point(from_p)
    to_p = as_point(to_p)
    ws = workspace if workspace is not None else Workspace(f.bounds)
    best = _best_line_edge(f, from_p, to_p, cfg, ws)
    if best is None:
        return False, None
    return True, best[1]


def _edge_between(
    f: FlowField,
    from_p: np.ndarray,
    to_p: np.ndarray,
    cfg: PlannerConfig,
    ws: Workspace,
    time_cap: float = math.inf,
) -> Edge | None:
    """Full tree edge from -> to: best line-sampled connection plus landing."""
    best = _best_line_edge(f, from_p, to_p, cfg, ws, time_cap)
    if best is None:
        return None
    action, traj = best
    gap = math.hypot(*(to_p - traj.end))
    if gap <= _EPS_POS:
        return Edge((best,))
    landing = _uniform_step_piece(f, traj.end, to_p, cfg, ws)
    if landing is None:
        return None
    return Edge((best, landing))


@dataclass(frozen=True)
class MetricRow:
    """One metrics checkpoint.  ``connections`` counts new-vertex insertions
    only (rewires are not counted)."""

    iteration: int
    wall_s: float
    connections: int
    dispersion: float
    first_solution_s: float | None
    best_cost: float | None


@dataclass
class PlanResult:
    tree: PlanTree
    metrics: list[MetricRow]
    feasible: bool
    best_cost: float | None
    first_solution_s: float | None
    first_solution_iter: int | None
    iterations: int
    connections: int
    wall_s: float

    def best_path(self) -> list[tuple[ControlAction, Trajectory]]:
        return extract_path(self.tree)


def _truncate_edge_at_goal(edge: Edge, goal: np.ndarray, goal_radius: float) -> Edge:
    """Cut an edge at its first recorded state inside the goal disk."""
    pieces = []
    for action, traj in edge.pieces:
        d = np.hypot(traj.points[:, 0] - goal[0], traj.points[:, 1] - goal[1])
        within = np.nonzero(d[1:] <= goal_radius)[0]
        if len(within):
            part = truncate(traj, int(within[0]) + 1)
            pieces.append((replace(action, tau=part.cost), part))
            return Edge(tuple(pieces))
        pieces.append((action, traj))
    return Edge(tuple(pieces))


def plan(
    f: FlowField,
    start,
    goal,
    cfg: PlannerConfig,
    sampler: HaltonSampler,
    obstacles=(),
    dispersion_resolution: int = 256,
    metrics_cadence: int = 50,
) -> PlanResult:
    """Run RRT* from start towards goal until the iteration or wall budget.

    Identical (seed, config, field) inputs reproduce identical trees
    iteration for iteration; only the wall-clock columns of the metrics
    differ between runs.
    """
    start = as_point(start)
    goal = as_point(goal)
    ws = Workspace(f.bounds, tuple(obstacles))
    for name, p in (("start", start), ("goal", goal)):
        if not ws.contains(p[0], p[1]):
            raise FieldBoundsError(f"{name} point {tuple(p)} outside the workspace")
    if math.hypot(*(goal - start)) <= _EPS_POS:
        raise DegeneratePairError("start and goal must differ")

    h = DistanceHeuristic(cfg.heuristic, f, cfg.alpha, cfg.beta)
    goal_radius = cfg.goal_radius if cfg.goal_radius is not None else 0.01 * ws.bounds.diagonal
    tree = PlanTree(f, start, goal, goal_radius)
    disp = DispersionTracker(ws.bounds, dispersion_resolution)
    disp.add(start)
    lb_speed = cfg.v_max + f.speed_bound()

    metrics: list[MetricRow] = []
    connections = 0
    first_solution_s: float | None = None
    first_solution_iter: int | None = None
    t0 = time.perf_counter()

    def best_cost_now() -> float | None:
        bg = tree.best_goal()
        return None if bg is None else bg[1]

    def emit(it: int) -> None:
        metrics.append(
            MetricRow(
                iteration=it,
                wall_s=time.perf_counter() - t0,
                connections=connections,
                dispersion=disp.value(),
                first_solution_s=first_solution_s,
                best_cost=best_cost_now(),
            )
        )

    if tree.goal_ids:
        # Degenerate setup: the start already satisfies the goal condition.
        first_solution_s = 0.0
        first_solution_iter = 0
    emit(0)

    def iterate(it: int) -> None:
        nonlocal connections, first_solution_s, first_solution_iter
        sample = sampler.next_sample()
        nid = nearest(h, tree.vertices, sample)
        npos = tree.vertices.position(nid)
        if math.hypot(*(sample - npos)) <= _EPS_POS:
            return

        steered = steer(f, npos, sample, cfg, ws, h)
        if steered is None:
            return
        reached, edge = steered
        if math.hypot(*(reached - npos)) <= _EPS_POS:
            return

        # CollisionFree/Cost refinement: the line-sampled evaluator may find a
        # cheaper connection to the reached point than the steered run; the
        # steered trajectory itself already stays inside the workspace.
        refined = _edge_between(f, npos, reached, cfg, ws, time_cap=edge.cost)
        if refined is not None and refined.cost < edge.cost:
            edge = refined
        edge = _truncate_edge_at_goal(edge, goal, goal_radius)
        reached = edge.end.copy()
        if math.hypot(*(reached - npos)) <= _EPS_POS:
            return
        positions = tree.vertices.positions
        dmin = np.min(np.hypot(positions[:, 0] - reached[0], positions[:, 1] - reached[1]))
        if dmin <= _EPS_POS:
            return

        k = k_nearest_count(len(tree))
        near_ids = knearest(h, tree.vertices, reached, k)

        new_cost = tree.costs[nid] + edge.cost
        vid = tree.add_vertex(reached, nid, edge, new_cost)
        connections += 1
        disp.add(reached)
        if tree.goal_ids and first_solution_s is None:
            first_solution_s = time.perf_counter() - t0
            first_solution_iter = it

        # Choose-parent: candidates ordered by an admissible total-cost bound.
        scored = []
        for c in near_ids:
            if c == nid:
                continue
            cpos = tree.vertices.position(c)
            d = math.hypot(*(reached - cpos))
            if d <= _EPS_POS:
                continue
            scored.append((tree.costs[c] + d / lb_speed, c, cpos))
        scored.sort(key=lambda s: (s[0], s[1]))
        for bound, c, cpos in scored:
            if bound >= tree.costs[vid] - 1e-12:
                break
            cand_edge = _edge_between(
                f, cpos, reached, cfg, ws, time_cap=tree.costs[vid] - tree.costs[c]
            )
            if cand_edge is None:
                continue
            cand_cost = tree.costs[c] + cand_edge.cost
            if cand_cost < tree.costs[vid] - 1e-12:
                tree.reparent(vid, c, cand_edge, cand_cost)

        # Rewire: adopt the new vertex as parent where it shortens paths.
        for c in near_ids:
            if c == tree.parents[vid] or c == vid:
                continue
            cpos = tree.vertices.position(c)
            d = math.hypot(*(reached - cpos))
            if d <= _EPS_POS:
                continue
            if tree.costs[vid] + d / lb_speed >= tree.costs[c] - 1e-12:
                continue
            cand_edge = _edge_between(
                f, reached, cpos, cfg, ws, time_cap=tree.costs[c] - tree.costs[vid]
            )
            if cand_edge is None:
                continue
            cand_cost = tree.costs[vid] + cand_edge.cost
            if cand_cost < tree.costs[c] - 1e-12:
                tree.reparent(c, vid, cand_edge, cand_cost)

    it = 0
    for it in range(1, cfg.max_iterations + 1):
        if time.perf_counter() - t0 >= cfg.max_wall_s:
            it -= 1
            break
        iterate(it)
        if it % metrics_cadence == 0:
            emit(it)

    if not metrics or metrics[-1].iteration != it:
        emit(it)

    bg = tree.best_goal()
    return PlanResult(
        tree=tree,
        metrics=metrics,
        feasible=bg is not None,
        best_cost=None if bg is None else bg[1],
        first_solution_s=first_solution_s,
        first_solution_iter=first_solution_iter,
        iterations=it,
        connections=connections,
        wall_s=time.perf_counter() - t0,
    )


def extract_path(tree: PlanTree) -> list[tuple[ControlAction, Trajectory]]:
    """Root-to-goal chain of persistent controls with their trajectories.

    Flattens multi-piece edges, so the list may be longer than the number of
    tree edges.  Raises InfeasibleError when no vertex reaches the goal disk.
    """
    bg = tree.best_goal()
    if bg is None:
        raise InfeasibleError("no vertex lies within the goal radius")
    pieces: list[tuple[ControlAction, Trajectory]] = []
    for vid in tree.path_ids(bg[0]):
        edge = tree.edges[vid]
        if edge is not None:
            pieces.extend(edge.pieces)
    return pieces


def concat_path(path: list[tuple[ControlAction, Trajectory]]) -> Trajectory:
    """Concatenate path pieces into one trajectory with a global clock."""
    if not path:
        raise ValueError("cannot concatenate an empty path")
    times = [np.asarray(path[0][1].times)]
    points = [np.asarray(path[0][1].points)]
    offset = float(path[0][1].times[-1])
    for _, traj in path[1:]:
        times.append(traj.times[1:] + offset)
        points.append(traj.points[1:])
        offset += traj.cost
    return Trajectory(np.concatenate(times), np.vstack(points), COMPLETED)


def replay_path(
    f: FlowField,
    start,
    path: list[tuple[ControlAction, Trajectory]],
    dx_max: float,
    workspace: Workspace | None = None,
) -> np.ndarray:
    """Re-propagate extracted controls from the start; returns the endpoint.

    Uses the same arc-length stepping rule as the planner (fixed spatial step
    dx_max, final partial step by remaining duration), so a faithful plan
    replays onto its stored path.
    """
    ws = workspace if workspace is not None else Workspace(f.bounds)
    x, y = float(start[0]), float(start[1])
    vel = f.velocity_at
    for action, _ in path:
        ux, uy, tau = action.ux, action.uy, action.tau
        t = 0.0
        while tau - t > 1e-12 * max(tau, 1.0):
            vx, vy = vel(x, y)
            tx, ty = vx + ux, vy + uy
            speed = math.sqrt(tx * tx + ty * ty)
            if speed <= 0.0:
                break
            dt_full = dx_max / speed
            step = min(dt_full, tau - t)
            nx_, ny_ = x + tx * step, y + ty * step
            if not ws.contains(nx_, ny_):
                return np.array([x, y])
            x, y = nx_, ny_
            t += step
    return np.array([x, y])


def write_result(result: PlanResult, dest, header: dict | None = None) -> None:
    """Serialise a PlanResult as structured text.

    `# key value` echo lines, a metrics table `iter wall_s connections
    dispersion best_cost` ('-' marks absent values), then the final path in
    `t x y` trajectory-export lines.
    """
    own = not hasattr(dest, "write")
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        for key, value in (header or {}).items():
            fh.write(f"# {key} {value}\n")
        fh.write("# connections counts new-vertex insertions; rewires are not counted\n")
        fh.write("# columns: iter wall_s connections dispersion best_cost\n")
        for row in result.metrics:
            best = "-" if row.best_cost is None else "%.9g" % row.best_cost
            fh.write(
                "%d %.3f %d %.9g %s\n"
                % (row.iteration, row.wall_s, row.connections, row.dispersion, best)
            )
        fh.write("# path: t x y\n")
        if result.feasible:
            traj = concat_path(result.best_path())
            for t, (x, y) in zip(traj.times, traj.points):
                fh.write("%.17g %.17g %.17g\n" % (t, x, y))
    finally:
        if own:
            fh.close()
