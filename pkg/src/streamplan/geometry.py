"""Plane geometry helpers: validated 2D points and axis-aligned rectangles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def as_point(p) -> np.ndarray:
    """Coerce ``p`` to a finite float64 array of shape (2,).

    Non-finite components are rejected; every public operation funnels its
    point arguments through here.
    """
    if type(p) is np.ndarray and p.dtype == np.float64 and p.shape == (2,):
        if math.isfinite(p[0]) and math.isfinite(p[1]):
            return p
        raise ValueError(f"point has non-finite components: {p}")
    a = np.asarray(p, dtype=np.float64)
    if a.shape != (2,):
        raise ValueError(f"expected a 2D point, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"point has non-finite components: {a}")
    return a


def as_points(ps) -> np.ndarray:
    """Coerce to a finite (N, 2) float64 array."""
    a = np.asarray(ps, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError(f"expected an (N, 2) array of points, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("points contain non-finite components")
    return a


@dataclass(frozen=True)
class Bounds:
    """Closed axis-aligned rectangle [xmin, xmax] x [ymin, ymax], in metres."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"bounds must be finite, got {vals}")
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError(f"bounds must have positive extent, got {vals}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> np.ndarray:
        return np.array([0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax)])

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def contains_point(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return self.contains(x, y)

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )

    def intersection(self, other: "Bounds") -> "Bounds":
        """Overlap rectangle; raises ValueError when the overlap is empty."""
        xmin = max(self.xmin, other.xmin)
        ymin = max(self.ymin, other.ymin)
        xmax = min(self.xmax, other.xmax)
        ymax = min(self.ymax, other.ymax)
        if xmax <= xmin or ymax <= ymin:
            raise ValueError(f"bounds {self} and {other} do not overlap")
        return Bounds(xmin, ymin, xmax, ymax)

    def segment_intersects(self, p, q) -> bool:
        """True when segment p-q meets this rectangle (slab clipping test)."""
        px, py = float(p[0]), float(p[1])
        qx, qy = float(q[0]), float(q[1])
        t0, t1 = 0.0, 1.0
        for lo, hi, a, d in (
            (self.xmin, self.xmax, px, qx - px),
            (self.ymin, self.ymax, py, qy - py),
        ):
            if d == 0.0:
                if a < lo or a > hi:
                    return False
                continue
            ta = (lo - a) / d
            tb = (hi - a) / d
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 > t1:
                return False
        return True
