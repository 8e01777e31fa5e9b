"""Streamline-based motion planning in strong 2D incompressible flows.

Distance heuristics built from stream-function values (L2-stream, L2-LSB),
control-line steering, adaptive arc-length propagation, an RRT*-style
planner, and a benchmark harness for comparing heuristic arms.
"""

from .errors import (
    DegeneratePairError,
    FieldBoundsError,
    GridParseError,
    HeuristicKindError,
    InfeasibleError,
    InvalidEdgeError,
    StreamplanError,
)
from .flowfield import (
    FlowField,
    GridField,
    GridFlowField,
    QuadVortexField,
    SingleVortexField,
    SuperpositionField,
    UniformField,
    grid_to_text,
    load_grid,
    save_grid,
    stream_value_quadrature,
    superpose,
)
from .geometry import Bounds
from .metricspace import (
    K_RRG,
    DistanceHeuristic,
    VertexSet,
    dist,
    k_nearest_count,
    knearest,
    near,
    nearest,
    stream_embed,
)
from .planner import (
    Edge,
    MetricRow,
    PlannerConfig,
    PlanResult,
    PlanTree,
    collision_free,
    concat_path,
    extract_path,
    plan,
    replay_path,
    steer,
    write_result,
)
from .propagate import (
    ControlAction,
    Trajectory,
    Workspace,
    edge_cost,
    n_steps,
    propagate_arc,
    propagate_time,
    read_trajectory,
    truncate,
    write_trajectory,
)
from .sampling import DispersionTracker, HaltonSampler, dispersion, radical_inverse
from .streamctl import (
    ControlLine,
    control_line,
    lower_speed_bound,
    optimistic_steer,
    sample_line_velocities,
)

__version__ = "0.1.0"
