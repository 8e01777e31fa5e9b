"""Incompressible 2D flow fields with stream-value evaluation.

A flow field is a divergence-free velocity field v(x) = (u, v) over a
rectangular domain.  Because the net flux through any closed boundary is
zero, the line integral

    psi(p, q) = integral along p -> q of (u dy - v dx)

is path independent; we evaluate it along the straight segment p -> q and
call it the *stream value* between the two points.  Analytic field kinds
carry a closed-form scalar potential psi_hat with u = d(psi_hat)/dy and
v = -d(psi_hat)/dx, so psi(p, q) = psi_hat(q) - psi_hat(p) exactly.
Gridded fields integrate a reconstruction of their samples by Gauss-Legendre
quadrature, one sub-segment per grid-cell crossing.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RectBivariateSpline

from .errors import FieldBoundsError, GridParseError
from .geometry import Bounds, as_point

__all__ = [
    "FlowField",
    "UniformField",
    "SingleVortexField",
    "QuadVortexField",
    "SuperpositionField",
    "GridField",
    "GridFlowField",
    "superpose",
    "load_grid",
    "save_grid",
    "stream_value_quadrature",
]

# 5-point Gauss-Legendre rule: exact for polynomials up to degree 9, which
# covers a bicubic reconstruction restricted to a line (degree <= 6).
_GL_NODES, _GL_WEIGHTS = leggauss(5)


class FlowField:
    """Base class: immutable, concurrently readable velocity field."""

    kind: str = "abstract"

    def __init__(self, bounds: Bounds):
        self._bounds = bounds

    @property
    def bounds(self) -> Bounds:
        return self._bounds

    # -- scalar fast paths (no validation; hot loops) --------------------

    def velocity_at(self, x: float, y: float) -> tuple[float, float]:
        raise NotImplementedError

    def stream_potential_at(self, x: float, y: float) -> float:
        """Closed-form potential psi_hat; only analytic kinds have one."""
        raise NotImplementedError

    @property
    def has_potential(self) -> bool:
        return False

    def speed_bound(self) -> float:
        """Upper bound on flow speed over the domain."""
        raise NotImplementedError

    # -- validated public queries -----------------------------------------

    def _check_inside(self, p: np.ndarray) -> np.ndarray:
        if not self._bounds.contains(p[0], p[1]):
            raise FieldBoundsError(f"point {tuple(p)} outside field bounds {self._bounds}")
        return p

    def velocity(self, p) -> np.ndarray:
        """Flow velocity at a point inside the domain."""
        p = self._check_inside(as_point(p))
        vx, vy = self.velocity_at(p[0], p[1])
        return np.array([vx, vy])

    def velocity_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised velocity at (N, 2) points; no bounds validation."""
        out = np.empty_like(pts)
        for i, (x, y) in enumerate(pts):
            out[i] = self.velocity_at(x, y)
        return out

    def potential_many(self, pts: np.ndarray) -> np.ndarray:
        out = np.empty(len(pts))
        for i, (x, y) in enumerate(pts):
            out[i] = self.stream_potential_at(x, y)
        return out

    def stream_value(self, p, q) -> float:
        """Stream value psi(p, q) along the straight segment p -> q [m^2/s]."""
        p = self._check_inside(as_point(p))
        q = self._check_inside(as_point(q))
        if self.has_potential:
            return self.stream_potential_at(q[0], q[1]) - self.stream_potential_at(p[0], p[1])
        return self._stream_value_segment(p, q)

    def _stream_value_segment(self, p: np.ndarray, q: np.ndarray) -> float:
        return stream_value_quadrature(self, p, q)


class UniformField(FlowField):
    """Constant velocity everywhere: psi_hat = vx*y - vy*x."""

    kind = "uniform"

    def __init__(self, vx: float, vy: float, bounds: Bounds):
        super().__init__(bounds)
        self.vx = float(vx)
        self.vy = float(vy)
        if not (math.isfinite(self.vx) and math.isfinite(self.vy)):
            raise ValueError("uniform velocity must be finite")

    @property
    def has_potential(self) -> bool:
        return True

    def velocity_at(self, x, y):
        return self.vx, self.vy

    def velocity_many(self, pts):
        out = np.empty_like(pts)
        out[:, 0] = self.vx
        out[:, 1] = self.vy
        return out

    def stream_potential_at(self, x, y):
        return self.vx * y - self.vy * x

    def potential_many(self, pts):
        return self.vx * pts[:, 1] - self.vy * pts[:, 0]

    def speed_bound(self):
        return math.hypot(self.vx, self.vy)


class SingleVortexField(FlowField):
    """Gaussian-core vortex: psi_hat = S * exp(-r^2 / (2 sigma^2)).

    Positive strength S circulates counter-clockwise.  Peak speed is
    S / (sigma * sqrt(e)) at radius sigma.
    """

    kind = "single-vortex"

    def __init__(self, center, strength: float, core_radius: float, bounds: Bounds):
        super().__init__(bounds)
        self.center = as_point(center)
        self.strength = float(strength)
        self.core_radius = float(core_radius)
        if self.core_radius <= 0:
            raise ValueError("core_radius must be positive")

    @property
    def has_potential(self) -> bool:
        return True

    def stream_potential_at(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        s2 = self.core_radius * self.core_radius
        return self.strength * math.exp(-(dx * dx + dy * dy) / (2.0 * s2))

    def velocity_at(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        s2 = self.core_radius * self.core_radius
        g = self.strength * math.exp(-(dx * dx + dy * dy) / (2.0 * s2)) / s2
        return -g * dy, g * dx

    def velocity_many(self, pts):
        d = pts - self.center
        s2 = self.core_radius * self.core_radius
        g = self.strength * np.exp(-np.sum(d * d, axis=1) / (2.0 * s2)) / s2
        return np.column_stack([-g * d[:, 1], g * d[:, 0]])

    def potential_many(self, pts):
        d = pts - self.center
        s2 = self.core_radius * self.core_radius
        return self.strength * np.exp(-np.sum(d * d, axis=1) / (2.0 * s2))

    def speed_bound(self):
        return abs(self.strength) / (self.core_radius * math.sqrt(math.e))


class QuadVortexField(FlowField):
    """Four counter-rotating square vortex cells tiling a 2L x 2L workspace.

    psi_hat(x, y) = (A L / pi) sin(pi x / L) sin(pi y / L) on [0, 2L]^2
    (shifted by ``origin``), giving u = A sin(pi x/L) cos(pi y/L) and
    v = -A cos(pi x/L) sin(pi y/L); the peak flow speed is exactly A and
    every cell boundary is the psi_hat = 0 streamline.
    """

    kind = "quad-vortex"

    def __init__(self, amplitude: float, cell_size: float = 1.0, origin=(0.0, 0.0)):
        self.amplitude = float(amplitude)
        self.cell_size = float(cell_size)
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        ox, oy = float(origin[0]), float(origin[1])
        self.origin = np.array([ox, oy])
        self._ox = ox
        self._oy = oy
        side = 2.0 * self.cell_size
        super().__init__(Bounds(ox, oy, ox + side, oy + side))
        self._k = math.pi / self.cell_size
        self._psi0 = self.amplitude * self.cell_size / math.pi

    @property
    def has_potential(self) -> bool:
        return True

    def stream_potential_at(self, x, y):
        k = self._k
        return self._psi0 * math.sin(k * (x - self._ox)) * math.sin(k * (y - self._oy))

    def velocity_at(self, x, y):
        k = self._k
        a = k * (x - self._ox)
        b = k * (y - self._oy)
        amp = self.amplitude
        return (
            amp * math.sin(a) * math.cos(b),
            -amp * math.cos(a) * math.sin(b),
        )

    def velocity_many(self, pts):
        a = self._k * (pts[:, 0] - self.origin[0])
        b = self._k * (pts[:, 1] - self.origin[1])
        return np.column_stack(
            [
                self.amplitude * np.sin(a) * np.cos(b),
                -self.amplitude * np.cos(a) * np.sin(b),
            ]
        )

    def potential_many(self, pts):
        a = self._k * (pts[:, 0] - self.origin[0])
        b = self._k * (pts[:, 1] - self.origin[1])
        return self._psi0 * np.sin(a) * np.sin(b)

    def speed_bound(self):
        return abs(self.amplitude)


class SuperpositionField(FlowField):
    """Pointwise sum of component fields on the intersection of their bounds.

    Stream functions add along with the velocities, so the stream value of a
    superposition is the sum of component stream values.
    """

    kind = "superposition"

    def __init__(self, fields):
        fields = list(fields)
        if not fields:
            raise ValueError("superpose needs at least one field")
        bounds = fields[0].bounds
        for f in fields[1:]:
            bounds = bounds.intersection(f.bounds)
        super().__init__(bounds)
        self.fields = tuple(fields)
        self._all_potential = all(f.has_potential for f in fields)

    @property
    def has_potential(self) -> bool:
        return self._all_potential

    def velocity_at(self, x, y):
        vx = 0.0
        vy = 0.0
        for f in self.fields:
            a, b = f.velocity_at(x, y)
            vx += a
            vy += b
        return vx, vy

    def velocity_many(self, pts):
        out = np.zeros_like(pts)
        for f in self.fields:
            out += f.velocity_many(pts)
        return out

    def stream_potential_at(self, x, y):
        return sum(f.stream_potential_at(x, y) for f in self.fields)

    def potential_many(self, pts):
        out = np.zeros(len(pts))
        for f in self.fields:
            out += f.potential_many(pts)
        return out

    def stream_value(self, p, q):
        p = self._check_inside(as_point(p))
        q = self._check_inside(as_point(q))
        return sum(f.stream_value(p, q) for f in self.fields)

    def speed_bound(self):
        return sum(f.speed_bound() for f in self.fields)


def superpose(fields) -> SuperpositionField:
    """Sum a list of fields; their bounds must overlap."""
    return SuperpositionField(fields)


@dataclass(frozen=True)
class GridField:
    """Raw velocity samples on a regular grid.

    ``u`` and ``v`` have shape (ny, nx) indexed [iy, ix]; node (ix, iy) sits
    at origin + (ix*dx, iy*dy).
    """

    origin: tuple[float, float]
    spacing: tuple[float, float]
    nx: int
    ny: int
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs nx >= 2 and ny >= 2, got {self.nx}x{self.ny}")
        if self.spacing[0] <= 0 or self.spacing[1] <= 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        for name, arr in (("u", self.u), ("v", self.v)):
            if arr.shape != (self.ny, self.nx):
                raise ValueError(
                    f"{name} samples have shape {arr.shape}, expected {(self.ny, self.nx)}"
                )
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} samples contain non-finite values")

    @classmethod
    def from_function(cls, fn, bounds: Bounds, nx: int, ny: int) -> "GridField":
        """Sample ``fn(x, y) -> (u, v)`` on an nx-by-ny grid spanning bounds."""
        xs = np.linspace(bounds.xmin, bounds.xmax, nx)
        ys = np.linspace(bounds.ymin, bounds.ymax, ny)
        u = np.empty((ny, nx))
        v = np.empty((ny, nx))
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                u[iy, ix], v[iy, ix] = fn(x, y)
        return cls(
            origin=(bounds.xmin, bounds.ymin),
            spacing=(xs[1] - xs[0], ys[1] - ys[0]),
            nx=nx,
            ny=ny,
            u=u,
            v=v,
        )

    @classmethod
    def from_field(cls, f: FlowField, nx: int, ny: int) -> "GridField":
        return cls.from_function(f.velocity_at, f.bounds, nx, ny)


class GridFlowField(FlowField):
    """Flow field backed by grid samples.

    Velocity queries bilinearly interpolate the samples.  Stream values
    integrate a bicubic-spline reconstruction of the samples with 5-point
    Gauss-Legendre quadrature on each grid-cell crossing of the straight
    segment: the spline restricted to a segment inside one cell is a
    polynomial the rule integrates exactly, so quadrature error is nil and
    accuracy is set by the reconstruction order.
    """

    kind = "grid"

    def __init__(self, grid: GridField):
        self.grid = grid
        x0, y0 = grid.origin
        dx, dy = grid.spacing
        super().__init__(Bounds(x0, y0, x0 + (grid.nx - 1) * dx, y0 + (grid.ny - 1) * dy))
        self._x0 = x0
        self._y0 = y0
        self._dx = dx
        self._dy = dy
        self._xs = x0 + dx * np.arange(grid.nx)
        self._ys = y0 + dy * np.arange(grid.ny)
        kx = min(3, grid.ny - 1)
        ky = min(3, grid.nx - 1)
        self._u_spline = RectBivariateSpline(self._ys, self._xs, grid.u, kx=kx, ky=ky)
        self._v_spline = RectBivariateSpline(self._ys, self._xs, grid.v, kx=kx, ky=ky)
        self._speed_bound = float(np.max(np.hypot(grid.u, grid.v)))
        # flat python-float copies for the scalar interpolation hot path
        self._uf = grid.u.ravel().tolist()
        self._vf = grid.v.ravel().tolist()
        self._nx = grid.nx
        self._ny = grid.ny

    def velocity_at(self, x, y):
        nx = self._nx
        fx = (x - self._x0) / self._dx
        fy = (y - self._y0) / self._dy
        ix = int(fx)
        iy = int(fy)
        if ix > nx - 2:
            ix = nx - 2
        elif ix < 0:
            ix = 0
        if iy > self._ny - 2:
            iy = self._ny - 2
        elif iy < 0:
            iy = 0
        fx -= ix
        fy -= iy
        uf = self._uf
        vf = self._vf
        base = iy * nx + ix
        w00 = (1.0 - fx) * (1.0 - fy)
        w01 = fx * (1.0 - fy)
        w10 = (1.0 - fx) * fy
        w11 = fx * fy
        return (
            w00 * uf[base] + w01 * uf[base + 1] + w10 * uf[base + nx] + w11 * uf[base + nx + 1],
            w00 * vf[base] + w01 * vf[base + 1] + w10 * vf[base + nx] + w11 * vf[base + nx + 1],
        )

    def velocity_many(self, pts):
        g = self.grid
        fx = (pts[:, 0] - self._x0) / self._dx
        fy = (pts[:, 1] - self._y0) / self._dy
        ix = np.clip(fx.astype(np.int64), 0, g.nx - 2)
        iy = np.clip(fy.astype(np.int64), 0, g.ny - 2)
        fx = fx - ix
        fy = fy - iy
        w00 = (1.0 - fx) * (1.0 - fy)
        w01 = fx * (1.0 - fy)
        w10 = (1.0 - fx) * fy
        w11 = fx * fy
        u = (
            w00 * g.u[iy, ix]
            + w01 * g.u[iy, ix + 1]
            + w10 * g.u[iy + 1, ix]
            + w11 * g.u[iy + 1, ix + 1]
        )
        v = (
            w00 * g.v[iy, ix]
            + w01 * g.v[iy, ix + 1]
            + w10 * g.v[iy + 1, ix]
            + w11 * g.v[iy + 1, ix + 1]
        )
        return np.column_stack([u, v])

    def _crossing_params(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Sorted segment parameters where p->q crosses grid lines, with 0 and 1."""
        ts = [0.0, 1.0]
        for lines, a, d in ((self._xs, p[0], q[0] - p[0]), (self._ys, p[1], q[1] - p[1])):
            if d == 0.0:
                continue
            t = (lines - a) / d
            ts.extend(t[(t > 0.0) & (t < 1.0)])
        return np.unique(np.asarray(ts))

    def _stream_value_segment(self, p, q):
        if p[0] == q[0] and p[1] == q[1]:
            return 0.0
        ts = self._crossing_params(p, q)
        mids = 0.5 * (ts[1:] + ts[:-1])
        halves = 0.5 * (ts[1:] - ts[:-1])
        # (n_sub, 5) quadrature nodes along the segment parameter
        tq = mids[:, None] + halves[:, None] * _GL_NODES[None, :]
        xq = p[0] + tq * (q[0] - p[0])
        yq = p[1] + tq * (q[1] - p[1])
        u = self._u_spline.ev(yq.ravel(), xq.ravel()).reshape(tq.shape)
        v = self._v_spline.ev(yq.ravel(), xq.ravel()).reshape(tq.shape)
        integrand = u * (q[1] - p[1]) - v * (q[0] - p[0])
        return float(np.sum((integrand * _GL_WEIGHTS[None, :]).sum(axis=1) * halves))

    def speed_bound(self):
        # Bilinear interpolation cannot overshoot its samples.
        return self._speed_bound


def stream_value_quadrature(f: FlowField, p, q, max_step: float = 0.01) -> float:
    """Straight-segment stream value by composite 5-point Gauss-Legendre.

    Works for any field via its velocity; useful as an independent evaluation
    route for fields that also carry a closed-form potential.  ``max_step``
    bounds the sub-segment length in metres.
    """
    p = as_point(p)
    q = as_point(q)
    delta = q - p
    length = math.hypot(delta[0], delta[1])
    if length == 0.0:
        return 0.0
    n = max(1, math.ceil(length / max_step))
    edges = np.linspace(0.0, 1.0, n + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * (edges[1:] - edges[:-1])
    tq = mids[:, None] + halves[:, None] * _GL_NODES[None, :]
    pts = p[None, None, :] + tq[:, :, None] * delta[None, None, :]
    vel = f.velocity_many(pts.reshape(-1, 2)).reshape(n, 5, 2)
    integrand = vel[:, :, 0] * delta[1] - vel[:, :, 1] * delta[0]
    return float(np.sum((integrand * _GL_WEIGHTS[None, :]).sum(axis=1) * halves))


# ---------------------------------------------------------------------------
# Grid file I/O
#
# Text format, SI units:
#   line 1:  FLOWGRID 1
#   line 2:  origin_x origin_y dx dy nx ny
#   then nx*ny lines of "u v" in row-major order (y-major rows).
# '#' starts a comment anywhere on a line; blank lines are skipped.
# ---------------------------------------------------------------------------


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def load_grid(source) -> GridField:
    """Parse a FLOWGRID file from a path, text stream, bytes, or str content."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str) and "\n" in source:
        text = source
    elif hasattr(source, "read"):
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()

    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GridParseError("empty grid file") from None
    if header.split() != ["FLOWGRID", "1"]:
        raise GridParseError(f"bad header {header!r}, expected 'FLOWGRID 1'", lineno)

    try:
        lineno, dims = next(lines)
    except StopIteration:
        raise GridParseError("missing dimension line") from None
    parts = dims.split()
    if len(parts) != 6:
        raise GridParseError(f"dimension line needs 6 fields, got {len(parts)}", lineno)
    try:
        ox, oy, dx, dy = (float(s) for s in parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
    except ValueError:
        raise GridParseError(f"unparseable dimension line {dims!r}", lineno) from None
    if nx < 2 or ny < 2 or dx <= 0 or dy <= 0:
        raise GridParseError(f"invalid grid dimensions {dims!r}", lineno)

    u = np.empty((ny, nx))
    v = np.empty((ny, nx))
    count = 0
    total = nx * ny
    for lineno, line in lines:
        if count >= total:
            raise GridParseError(f"extra sample line beyond {total} expected", lineno)
        parts = line.split()
        if len(parts) != 2:
            raise GridParseError(f"sample line needs 2 fields, got {len(parts)}", lineno)
        try:
            uu, vv = float(parts[0]), float(parts[1])
        except ValueError:
            raise GridParseError(f"unparseable sample line {line!r}", lineno) from None
        if not (math.isfinite(uu) and math.isfinite(vv)):
            raise GridParseError(f"non-finite sample {line!r}", lineno)
        iy, ix = divmod(count, nx)
        u[iy, ix] = uu
        v[iy, ix] = vv
        count += 1
    if count != total:
        raise GridParseError(f"expected {total} samples, file has {count}")
    return GridField(origin=(ox, oy), spacing=(dx, dy), nx=nx, ny=ny, u=u, v=v)


def save_grid(grid: GridField, dest) -> None:
    """Write a GridField in FLOWGRID format; floats round-trip bit-exactly."""
    own = not hasattr(dest, "write")
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write("FLOWGRID 1\n")
        fh.write(
            "%.17g %.17g %.17g %.17g %d %d\n"
            % (grid.origin[0], grid.origin[1], grid.spacing[0], grid.spacing[1], grid.nx, grid.ny)
        )
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                fh.write("%.17g %.17g\n" % (grid.u[iy, ix], grid.v[iy, ix]))
    finally:
        if own:
            fh.close()


def grid_to_text(grid: GridField) -> str:
    buf = io.StringIO()
    save_grid(grid, buf)
    return buf.getvalue()
