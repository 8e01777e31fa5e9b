"""Streamline control-line geometry.

For travel from p to q through an incompressible flow, every relative
velocity u = (u_s, v_s) that lets the vehicle traverse the straight segment
lies on the *control line*

    psi(p, q) + u_s * dy - v_s * dx = 0,      (dx, dy) = q - p,

a line in velocity space.  Its distance from the origin, |psi| / ||q - p||,
is the minimum speed any vehicle needs for the traversal (the lower speed
bound); intersecting the line with the speed disk ||u|| <= v_max yields the
admissible chord that steering and edge-cost sampling draw from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePairError
from .flowfield import FlowField
from .geometry import as_point

__all__ = [
    "ControlLine",
    "control_line",
    "lower_speed_bound",
    "optimistic_steer",
    "sample_line_velocities",
]


@dataclass(frozen=True)
class ControlLine:
    """Admissible-velocity line for a p -> q traversal.

    ``psi`` is the stream value between the endpoints [m^2/s]; ``delta`` is
    the displacement q - p [m] and must be nonzero.
    """

    psi: float
    delta: np.ndarray

    @property
    def length(self) -> float:
        return math.hypot(self.delta[0], self.delta[1])

    @property
    def min_speed(self) -> float:
        """Origin-to-line distance: the lower speed bound."""
        return abs(self.psi) / self.length

    def residual(self, u) -> float:
        """Signed value of the line equation at u; zero iff u is admissible."""
        return self.psi + u[0] * self.delta[1] - u[1] * self.delta[0]

    def foot(self) -> np.ndarray:
        """Closest point of the line to the origin (the minimum-speed control)."""
        d2 = self.delta[0] ** 2 + self.delta[1] ** 2
        return np.array([-self.psi * self.delta[1] / d2, self.psi * self.delta[0] / d2])

    def direction(self) -> np.ndarray:
        """Unit vector along the line; parallel to the displacement q - p."""
        return self.delta / self.length

    def chord(self, v_max: float) -> tuple[np.ndarray, np.ndarray] | None:
        """Endpoints of the intersection with the closed disk ||u|| <= v_max.

        Returns None when the line misses the disk; exact tangency yields a
        zero-length chord.
        """
        foot = self.foot()
        h2 = v_max * v_max - (foot[0] ** 2 + foot[1] ** 2)
        if h2 < 0.0:
            return None
        h = math.sqrt(h2)
        d = self.direction()
        return foot - h * d, foot + h * d


def control_line(f: FlowField, p, q) -> ControlLine:
    """Control line for travelling from p to q in field f."""
    p = as_point(p)
    q = as_point(q)
    delta = q - p
    if delta[0] == 0.0 and delta[1] == 0.0:
        raise DegeneratePairError("control line is undefined for coincident points")
    return ControlLine(psi=f.stream_value(p, q), delta=delta)


def lower_speed_bound(f: FlowField, p, q) -> float:
    """Minimum vehicle speed required to travel p -> q: |psi(p,q)| / ||q-p||.

    Defined as 0 for coincident points (psi(p,p) = 0 and the limit along any
    streamline-respecting approach is 0).
    """
    p = as_point(p)
    q = as_point(q)
    if p[0] == q[0] and p[1] == q[1]:
        # Endpoints must still be inside the domain.
        f.velocity(p)
        return 0.0
    psi = f.stream_value(p, q)
    return abs(psi) / math.hypot(q[0] - p[0], q[1] - p[1])


def optimistic_steer(f: FlowField, p, q, v_max: float) -> np.ndarray | None:
    """Admissible control with the greatest progress toward q, or None.

    Picks, among the intersection points of the control line with the circle
    ||u|| = v_max, the one maximising (v(p) + u) . (q - p).  Because the line
    runs parallel to q - p, this is always the intersection displaced along
    +direction; ties are impossible except at exact tangency, where the single
    tangent control is returned.  None means the lower speed bound exceeds
    v_max, i.e. q cannot be reached on a straight run at any admissible speed.
    """
    if v_max <= 0.0:
        raise ValueError(f"v_max must be positive, got {v_max}")
    line = control_line(f, p, q)
    chord = line.chord(v_max)
    if chord is None:
        return None
    return chord[1]


def sample_line_velocities(f: FlowField, p, q, v_max: float, n: int) -> list[np.ndarray]:
    """n evenly spaced admissible controls along the in-disk chord.

    Endpoints of the chord are included for n >= 2; n = 1 yields the
    minimum-speed control.  Empty when the control line misses the speed disk.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if v_max <= 0.0:
        raise ValueError(f"v_max must be positive, got {v_max}")
    line = control_line(f, p, q)
    chord = line.chord(v_max)
    if chord is None:
        return []
    if n == 1:
        return [line.foot()]
    lo, hi = chord
    ts = np.linspace(0.0, 1.0, n)
    return [lo + t * (hi - lo) for t in ts]
