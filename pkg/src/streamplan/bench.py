"""Experiment orchestration: scenarios, metrics persistence, summaries.

A Scenario declares everything a run needs -- flow field, endpoints, vehicle
limits, heuristic/edge-mode arms, seeds and budgets -- so experiments are
reproducible from a single text file.  ``run_scenario`` executes every
(arm x seed) pair with its own rotated/offset Halton sequence, streams
MetricsRecords at a fixed iteration cadence, and writes per-run path traces;
``summarize`` aggregates the records into per-arm trend statistics.
"""

from __future__ import annotations

import configparser
import io
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .flowfield import (
    FlowField,
    GridField,
    GridFlowField,
    QuadVortexField,
    SingleVortexField,
    UniformField,
    load_grid,
)
from .geometry import Bounds
from .metricspace import HEURISTIC_KINDS
from .planner import PlannerConfig, PlanResult, concat_path, plan, write_result
from .propagate import write_trajectory
from .sampling import HaltonSampler

__all__ = [
    "Scenario",
    "MetricsRecord",
    "ArmSummary",
    "builtin_scenario",
    "BUILTIN_SCENARIOS",
    "load_scenario",
    "save_scenario",
    "build_field",
    "channel_profile",
    "channel_grid",
    "run_scenario",
    "run_one",
    "summarize",
    "format_summary",
    "write_metrics_csv",
    "read_metrics_csv",
    "METRICS_HEADER",
]

METRICS_HEADER = "scenario,arm,seed,iter,wall_s,connections,dispersion,first_solution_s,best_cost_s"

_MODE_TOKENS = {
    "arc": "adaptive-arc",
    "adaptive-arc": "adaptive-arc",
    "step": "analytic-step",
    "analytic-step": "analytic-step",
}


def parse_arm(token: str) -> tuple[str, str]:
    """Split an arm token 'heuristic:mode' into canonical pieces."""
    head, sep, tail = token.partition(":")
    if not sep:
        tail = "arc"
    if head not in HEURISTIC_KINDS:
        raise ValueError(f"unknown heuristic {head!r} in arm {token!r}")
    if tail not in _MODE_TOKENS:
        raise ValueError(f"unknown edge mode {tail!r} in arm {token!r}")
    return head, _MODE_TOKENS[tail]


def arm_name(heuristic: str, edge_mode: str) -> str:
    return f"{heuristic}:{'arc' if edge_mode == 'adaptive-arc' else 'step'}"


@dataclass(frozen=True)
class Scenario:
    """Declarative experiment configuration."""

    name: str
    flow: dict
    bounds: Bounds
    start: tuple[float, float]
    goal: tuple[float, float]
    v_max: float = 1.0
    dx_max: float = 0.01
    arms: tuple[str, ...] = ("l2-lsb:arc", "euclidean:arc")
    n_line_samples: int = 7
    seeds: tuple[int, ...] = (0, 1, 2)
    budget_wall_s: float = 60.0
    budget_iterations: int = 5000
    goal_radius: float | None = None
    alpha: float = 1.0
    beta: float = 1.0
    dispersion_resolution: int = 256
    metrics_cadence: int = 50

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("scenario needs at least one seed")
        if self.budget_wall_s <= 0 and self.budget_iterations <= 0:
            raise ValueError("scenario needs a positive budget")
        for p, label in ((self.start, "start"), (self.goal, "goal")):
            if not self.bounds.contains(p[0], p[1]):
                raise ValueError(f"{label} {p} outside scenario bounds {self.bounds}")
        for token in self.arms:
            parse_arm(token)

    def planner_config(self, arm: str, seed: int) -> PlannerConfig:
        heuristic, mode = parse_arm(arm)
        return PlannerConfig(
            heuristic=heuristic,
            edge_mode=mode,
            v_max=self.v_max,
            dx_max=self.dx_max,
            n_line_samples=self.n_line_samples,
            goal_radius=self.goal_radius,
            max_iterations=self.budget_iterations,
            max_wall_s=self.budget_wall_s,
            alpha=self.alpha,
            beta=self.beta,
            seed=seed,
        )


@dataclass(frozen=True)
class MetricsRecord:
    """One CSV row of run metrics."""

    scenario: str
    arm: str
    seed: int
    iteration: int
    wall_s: float
    connections: int
    dispersion: float
    first_solution_s: float | None
    best_cost_s: float | None


# ---------------------------------------------------------------------------
# Flow construction
# ---------------------------------------------------------------------------


def channel_profile(
    x: float,
    jet_speed: float = 2.0,
    counter_speed: float = 0.4,
    center: float = 1.0,
    width: float = 0.25,
) -> float:
    """North-south channel speed: a strong southward jet between weaker
    northward counter-flow bands near the boundaries."""
    g = math.exp(-(((x - center) / width) ** 2))
    return counter_speed - (jet_speed + counter_speed) * g


def channel_grid(
    bounds: Bounds,
    nx: int = 101,
    jet_speed: float = 2.0,
    counter_speed: float = 0.4,
    center: float = 1.0,
    width: float = 0.25,
) -> GridField:
    """Gridded jet-channel flow; v = (0, g(x)) is divergence-free exactly."""
    xs = np.linspace(bounds.xmin, bounds.xmax, nx)
    v_row = np.array(
        [channel_profile(x, jet_speed, counter_speed, center, width) for x in xs]
    )
    u = np.zeros((2, nx))
    v = np.vstack([v_row, v_row])
    return GridField(
        origin=(bounds.xmin, bounds.ymin),
        spacing=(xs[1] - xs[0], bounds.height),
        nx=nx,
        ny=2,
        u=u,
        v=v,
    )


def build_field(sc: Scenario) -> FlowField:
    """Construct the scenario's flow field; raises on invalid flow specs."""
    spec = dict(sc.flow)
    kind = spec.pop("kind", None)
    if kind == "uniform":
        return UniformField(float(spec.get("vx", 0.0)), float(spec.get("vy", 0.0)), sc.bounds)
    if kind == "quad-vortex":
        return QuadVortexField(
            amplitude=float(spec.get("amplitude", 4.0)),
            cell_size=float(spec.get("cell_size", 1.0)),
            origin=(sc.bounds.xmin, sc.bounds.ymin),
        )
    if kind == "single-vortex":
        return SingleVortexField(
            center=(float(spec["center_x"]), float(spec["center_y"])),
            strength=float(spec["strength"]),
            core_radius=float(spec["core_radius"]),
            bounds=sc.bounds,
        )
    if kind == "channel":
        grid = channel_grid(
            sc.bounds,
            nx=int(spec.get("nx", 101)),
            jet_speed=float(spec.get("jet_speed", 2.0)),
            counter_speed=float(spec.get("counter_speed", 0.4)),
            center=float(spec.get("center", 0.5 * (sc.bounds.xmin + sc.bounds.xmax))),
            width=float(spec.get("width", 0.25)),
        )
        return GridFlowField(grid)
    if kind == "grid":
        path = spec.get("file")
        if not path:
            raise ValueError("grid flow spec needs a 'file' entry")
        return GridFlowField(load_grid(path))
    raise ValueError(f"unknown flow kind {kind!r}")


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------


def _quad_vortex_scenario() -> Scenario:
    # Flow peaks at 4x the vehicle speed over a 2 m workspace; start and goal
    # sit at the centres of diagonally opposite vortex cells.
    return Scenario(
        name="quad-vortex",
        flow={"kind": "quad-vortex", "amplitude": 4.0, "cell_size": 1.0},
        bounds=Bounds(0.0, 0.0, 2.0, 2.0),
        start=(0.5, 0.5),
        goal=(1.5, 1.5),
        v_max=1.0,
        dx_max=0.01,
        arms=("euclidean:arc", "l2-stream:arc", "l2-lsb:arc", "l2-lsb-approx:arc"),
        seeds=tuple(range(20)),
    )


def _uniform_channel_scenario() -> Scenario:
    # Synthetic stand-in for an opposing boundary-current crossing: a strong
    # jet against the start->goal direction with weak counter-flow bands near
    # the east/west boundaries.
    return Scenario(
        name="uniform-channel",
        flow={
            "kind": "channel",
            "jet_speed": 2.0,
            "counter_speed": 0.4,
            "center": 1.0,
            "width": 0.25,
            "nx": 101,
        },
        bounds=Bounds(0.0, 0.0, 2.0, 2.0),
        start=(0.35, 0.15),
        goal=(1.65, 1.85),
        v_max=1.0,
        dx_max=0.01,
        arms=("euclidean:arc", "l2-stream:arc", "l2-lsb:arc", "l2-lsb-approx:arc"),
        seeds=tuple(range(20)),
        budget_wall_s=60.0,
        budget_iterations=2500,
    )


def _still_water_scenario() -> Scenario:
    return Scenario(
        name="still-water",
        flow={"kind": "uniform", "vx": 0.0, "vy": 0.0},
        bounds=Bounds(0.0, 0.0, 1.0, 1.0),
        start=(0.1, 0.1),
        goal=(0.9, 0.9),
        v_max=1.0,
        dx_max=0.01,
        arms=("euclidean:arc", "l2-lsb:arc"),
        seeds=tuple(range(5)),
        budget_iterations=2000,
        # without goal-biased sampling, the goal region must be large enough
        # for undirected samples to hit it
        goal_radius=0.04,
    )


def _upstream_corridor_scenario() -> Scenario:
    # Narrow corridor with a flow twice the vehicle speed pushing away from
    # the goal: infeasible by the lower-speed-bound certificate.
    return Scenario(
        name="upstream-corridor",
        flow={"kind": "uniform", "vx": 2.0, "vy": 0.0},
        bounds=Bounds(0.0, -0.2, 3.0, 0.2),
        start=(2.5, 0.0),
        goal=(0.5, 0.0),
        v_max=1.0,
        dx_max=0.01,
        arms=("euclidean:arc", "l2-lsb:arc"),
        seeds=tuple(range(10)),
        budget_iterations=10000,
        budget_wall_s=120.0,
    )


BUILTIN_SCENARIOS = {
    "quad-vortex": _quad_vortex_scenario,
    "uniform-channel": _uniform_channel_scenario,
    "still-water": _still_water_scenario,
    "upstream-corridor": _upstream_corridor_scenario,
}


def builtin_scenario(name: str) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[name]()
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; built-ins: {sorted(BUILTIN_SCENARIOS)}"
        ) from None


# ---------------------------------------------------------------------------
# Scenario files (key-value sections, one scenario per file)
# ---------------------------------------------------------------------------


def load_scenario(source) -> Scenario:
    """Parse a scenario file (path, file object, or text content)."""
    cp = configparser.ConfigParser()
    if hasattr(source, "read"):
        cp.read_file(source)
    elif isinstance(source, str) and "\n" in source:
        cp.read_string(source)
    else:
        if not cp.read(source):
            raise ValueError(f"cannot read scenario file {source!r}")
    try:
        sc = cp["scenario"]
        bounds = Bounds(*(float(s) for s in sc["bounds"].split()))
        start = tuple(float(s) for s in sc["start"].split())
        goal = tuple(float(s) for s in sc["goal"].split())
        flow = dict(cp["flow"])
        planner = cp["planner"] if cp.has_section("planner") else {}
        budget = cp["budget"] if cp.has_section("budget") else {}
        return Scenario(
            name=sc.get("name", "scenario"),
            flow=flow,
            bounds=bounds,
            start=(start[0], start[1]),
            goal=(goal[0], goal[1]),
            v_max=float(sc.get("v_max", 1.0)),
            dx_max=float(sc.get("dx_max", 0.01)),
            arms=tuple(planner.get("arms", "l2-lsb:arc euclidean:arc").split()),
            n_line_samples=int(planner.get("n_line_samples", 7)),
            seeds=tuple(int(s) for s in sc.get("seeds", "0 1 2").split()),
            budget_wall_s=float(budget.get("wall_s", 60.0)),
            budget_iterations=int(budget.get("iterations", 5000)),
            goal_radius=float(planner["goal_radius"]) if "goal_radius" in planner else None,
            alpha=float(planner.get("alpha", 1.0)),
            beta=float(planner.get("beta", 1.0)),
            dispersion_resolution=int(budget.get("dispersion_resolution", 256)),
            metrics_cadence=int(budget.get("metrics_cadence", 50)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"invalid scenario file: {exc}") from exc


def save_scenario(sc: Scenario, dest) -> None:
    cp = configparser.ConfigParser()
    cp["scenario"] = {
        "name": sc.name,
        "bounds": "%g %g %g %g" % (sc.bounds.xmin, sc.bounds.ymin, sc.bounds.xmax, sc.bounds.ymax),
        "start": "%g %g" % sc.start,
        "goal": "%g %g" % sc.goal,
        "v_max": "%g" % sc.v_max,
        "dx_max": "%g" % sc.dx_max,
        "seeds": " ".join(str(s) for s in sc.seeds),
    }
    cp["flow"] = {k: str(v) for k, v in sc.flow.items()}
    planner = {
        "arms": " ".join(sc.arms),
        "n_line_samples": str(sc.n_line_samples),
        "alpha": "%g" % sc.alpha,
        "beta": "%g" % sc.beta,
    }
    if sc.goal_radius is not None:
        planner["goal_radius"] = "%g" % sc.goal_radius
    cp["planner"] = planner
    cp["budget"] = {
        "wall_s": "%g" % sc.budget_wall_s,
        "iterations": str(sc.budget_iterations),
        "dispersion_resolution": str(sc.dispersion_resolution),
        "metrics_cadence": str(sc.metrics_cadence),
    }
    own = not hasattr(dest, "write")
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        cp.write(fh)
    finally:
        if own:
            fh.close()


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def run_one(sc: Scenario, arm: str, seed: int, out_dir: str | None = None) -> list[MetricsRecord]:
    """Execute one (arm, seed) run and return its metrics records.

    With ``out_dir`` set, also writes the per-run metrics CSV, the structured
    result text, and the final-path trace (or an ``.infeasible`` marker).
    """
    f = build_field(sc)
    cfg = sc.planner_config(arm, seed)
    sampler = HaltonSampler(f.bounds, seed=seed)
    result = plan(
        f,
        sc.start,
        sc.goal,
        cfg,
        sampler,
        dispersion_resolution=sc.dispersion_resolution,
        metrics_cadence=sc.metrics_cadence,
    )
    records = [
        MetricsRecord(
            scenario=sc.name,
            arm=arm,
            seed=seed,
            iteration=row.iteration,
            wall_s=row.wall_s,
            connections=row.connections,
            dispersion=row.dispersion,
            first_solution_s=row.first_solution_s,
            best_cost_s=row.best_cost,
        )
        for row in result.metrics
    ]
    if out_dir is not None:
        _write_run_artifacts(sc, arm, seed, result, records, out_dir)
    return records


def _slug(arm: str) -> str:
    return arm.replace(":", "-")


def _write_run_artifacts(sc, arm, seed, result: PlanResult, records, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    tag = f"{_slug(arm)}_s{seed}"
    write_metrics_csv(records, os.path.join(out_dir, f"metrics_{tag}.csv"))
    header = {"scenario": sc.name, "arm": arm, "seed": seed}
    write_result(result, os.path.join(out_dir, f"result_{tag}.txt"), header=header)
    if result.feasible:
        write_trajectory(concat_path(result.best_path()), os.path.join(out_dir, f"path_{tag}.txt"))
    else:
        with open(os.path.join(out_dir, f"path_{tag}.infeasible"), "w", encoding="utf-8") as fh:
            fh.write("infeasible\n")


def run_scenario(
    sc: Scenario,
    out_dir: str | None = None,
    arms: tuple[str, ...] | None = None,
    seeds: tuple[int, ...] | None = None,
    workers: int = 1,
) -> list[MetricsRecord]:
    """Run every (arm x seed) pair of a scenario.

    The flow spec is validated before any run starts.  Runs are independent;
    ``workers > 1`` executes them in separate processes and merges the
    per-run metrics afterwards, preserving (arm, seed) order.
    """
    arms = tuple(arms) if arms is not None else sc.arms
    seeds = tuple(seeds) if seeds is not None else sc.seeds
    sc = replace(sc, arms=arms, seeds=seeds)
    build_field(sc)  # fail fast on configuration errors
    jobs = [(arm, seed) for arm in arms for seed in seeds]
    all_records: list[MetricsRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_one, sc, arm, seed, out_dir) for arm, seed in jobs]
            for fut in futures:
                all_records.extend(fut.result())
    else:
        for arm, seed in jobs:
            all_records.extend(run_one(sc, arm, seed, out_dir))
    if out_dir is not None:
        write_metrics_csv(all_records, os.path.join(out_dir, "metrics.csv"))
    return all_records


# ---------------------------------------------------------------------------
# Metrics CSV
# ---------------------------------------------------------------------------


def _fmt_opt(v) -> str:
    return "" if v is None else "%.17g" % v


def write_metrics_csv(records: list[MetricsRecord], dest) -> None:
    own = not hasattr(dest, "write")
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write(METRICS_HEADER + "\n")
        for r in records:
            fh.write(
                "%s,%s,%d,%d,%.6f,%d,%.17g,%s,%s\n"
                % (
                    r.scenario,
                    r.arm,
                    r.seed,
                    r.iteration,
                    r.wall_s,
                    r.connections,
                    r.dispersion,
                    _fmt_opt(r.first_solution_s),
                    _fmt_opt(r.best_cost_s),
                )
            )
    finally:
        if own:
            fh.close()


def read_metrics_csv(source) -> list[MetricsRecord]:
    own = not hasattr(source, "read")
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        lines = [ln.strip() for ln in fh if ln.strip()]
    finally:
        if own:
            fh.close()
    if not lines or lines[0] != METRICS_HEADER:
        raise ValueError("not a metrics CSV (bad header)")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        records.append(
            MetricsRecord(
                scenario=parts[0],
                arm=parts[1],
                seed=int(parts[2]),
                iteration=int(parts[3]),
                wall_s=float(parts[4]),
                connections=int(parts[5]),
                dispersion=float(parts[6]),
                first_solution_s=float(parts[7]) if parts[7] else None,
                best_cost_s=float(parts[8]) if parts[8] else None,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


@dataclass
class ArmSummary:
    arm: str
    seeds: list[int]
    iterations: list[int]
    mean_connections: list[float]
    band_connections: list[float]
    mean_dispersion: list[float]
    band_dispersion: list[float]
    success_curve: list[tuple[float, float]]  # (wall_s, fraction solved)
    median_first_solution_s: float | None
    median_best_cost_s: float | None
    n_feasible: int


@dataclass
class Summary:
    scenario: str
    arms: dict[str, ArmSummary] = field(default_factory=dict)


def _per_seed_final(records: list[MetricsRecord]) -> dict[int, MetricsRecord]:
    final: dict[int, MetricsRecord] = {}
    for r in records:
        cur = final.get(r.seed)
        if cur is None or r.iteration >= cur.iteration:
            final[r.seed] = r
    return final


def value_at_iteration(
    records: list[MetricsRecord], arm: str, iteration: int, column: str
) -> dict[int, float]:
    """Per-seed metric value at an exact checkpoint iteration."""
    out: dict[int, float] = {}
    for r in records:
        if r.arm == arm and r.iteration == iteration:
            out[r.seed] = getattr(r, column)
    return out


def median_first_solution(
    records: list[MetricsRecord], arm: str, censor_at: float | None = None
) -> float:
    """Median first-solution wall time over seeds.

    Seeds with no solution are censored at their run's final wall time (or at
    ``censor_at``), which under-estimates the true time -- conservative when
    the arm is the comparison baseline.
    """
    final = _per_seed_final([r for r in records if r.arm == arm])
    vals = []
    for rec in final.values():
        if rec.first_solution_s is not None:
            vals.append(rec.first_solution_s)
        else:
            vals.append(censor_at if censor_at is not None else rec.wall_s)
    if not vals:
        raise ValueError(f"no records for arm {arm!r}")
    return float(statistics.median(vals))


def summarize(records: list[MetricsRecord]) -> Summary:
    """Aggregate records of a single scenario into per-arm trend statistics.

    Means carry 99.7% normal-approximation confidence half-widths
    (3 sigma / sqrt(n)) at every iteration checkpoint shared by all seeds.
    """
    if not records:
        raise ValueError("summarize needs at least one record")
    scenarios = {r.scenario for r in records}
    if len(scenarios) != 1:
        raise ValueError(f"summarize expects one scenario, got {sorted(scenarios)}")
    summary = Summary(scenario=records[0].scenario)
    arms = sorted({r.arm for r in records})
    for arm in arms:
        arm_recs = [r for r in records if r.arm == arm]
        seeds = sorted({r.seed for r in arm_recs})
        by_iter: dict[int, list[MetricsRecord]] = {}
        for r in arm_recs:
            by_iter.setdefault(r.iteration, []).append(r)
        iters = sorted(i for i, rs in by_iter.items() if len(rs) == len(seeds))
        mean_conn, band_conn, mean_disp, band_disp = [], [], [], []
        for i in iters:
            rows = by_iter[i]
            conns = np.array([r.connections for r in rows], dtype=float)
            disps = np.array([r.dispersion for r in rows], dtype=float)
            n = len(rows)
            mean_conn.append(float(conns.mean()))
            band_conn.append(float(3.0 * conns.std(ddof=0) / math.sqrt(n)))
            mean_disp.append(float(disps.mean()))
            band_disp.append(float(3.0 * disps.std(ddof=0) / math.sqrt(n)))
        final = _per_seed_final(arm_recs)
        solved = sorted(
            rec.first_solution_s for rec in final.values() if rec.first_solution_s is not None
        )
        n_seeds = len(final)
        curve = [(t, (i + 1) / n_seeds) for i, t in enumerate(solved)]
        costs = [rec.best_cost_s for rec in final.values() if rec.best_cost_s is not None]
        summary.arms[arm] = ArmSummary(
            arm=arm,
            seeds=seeds,
            iterations=iters,
            mean_connections=mean_conn,
            band_connections=band_conn,
            mean_dispersion=mean_disp,
            band_dispersion=band_disp,
            success_curve=curve,
            median_first_solution_s=float(statistics.median(solved)) if solved else None,
            median_best_cost_s=float(statistics.median(costs)) if costs else None,
            n_feasible=len(solved),
        )
    return summary


def format_summary(summary: Summary) -> str:
    """Plain-text summary table (connections are new-vertex insertions)."""
    buf = io.StringIO()
    buf.write(f"scenario: {summary.scenario}\n")
    buf.write("# connections = new-vertex insertions (rewires not counted)\n")
    buf.write(
        "%-22s %6s %10s %12s %12s %14s %12s\n"
        % ("arm", "seeds", "feasible", "conn@last", "disp@last", "median_first_s", "median_cost")
    )
    for arm, s in summary.arms.items():
        conn = "%.1f±%.1f" % (s.mean_connections[-1], s.band_connections[-1]) if s.iterations else "-"
        disp = "%.4f±%.4f" % (s.mean_dispersion[-1], s.band_dispersion[-1]) if s.iterations else "-"
        first = "-" if s.median_first_solution_s is None else "%.2f" % s.median_first_solution_s
        cost = "-" if s.median_best_cost_s is None else "%.3f" % s.median_best_cost_s
        buf.write(
            "%-22s %6d %10s %12s %12s %14s %12s\n"
            % (arm, len(s.seeds), f"{s.n_feasible}/{len(s.seeds)}", conn, disp, first, cost)
        )
    return buf.getvalue()
