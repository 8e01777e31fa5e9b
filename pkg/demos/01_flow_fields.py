"""Flow fields and stream values.

Builds the analytic field kinds, evaluates velocities and stream values,
and shows that gridded samples reproduce the analytic stream function.
Run:  python demos/01_flow_fields.py
"""

import numpy as np

from streamplan import (
    Bounds,
    GridField,
    GridFlowField,
    QuadVortexField,
    SingleVortexField,
    UniformField,
    grid_to_text,
    load_grid,
    superpose,
)

# --- a uniform current and its stream function --------------------------
uni = UniformField(1.0, 0.0, Bounds(0, 0, 2, 2))
print("uniform v(0.3, 0.7)        =", uni.velocity((0.3, 0.7)))
print("uniform psi((0,0)->(1,1))  =", uni.stream_value((0, 0), (1, 1)), " (flux of 1 m/s across 1 m)")

# --- the quad-vortex benchmark flow --------------------------------------
# four counter-rotating cells, peak speed = amplitude, cell borders are the
# zero streamline
qv = QuadVortexField(amplitude=4.0, cell_size=1.0)
print("\nquad-vortex centre velocity:", qv.velocity((0.5, 0.5)), "(stagnation point)")
print("quad-vortex border velocity:", qv.velocity((1.0, 0.5)), "(full-speed jet)")
print("psi between opposite cell centres:", qv.stream_value((0.5, 0.5), (1.5, 1.5)),
      "(same level set)")

# stream values measure net streamline crossing: path independent
p, q, m = (0.3, 0.4), (1.6, 1.1), (0.9, 1.7)
direct = qv.stream_value(p, q)
dogleg = qv.stream_value(p, m) + qv.stream_value(m, q)
print(f"path independence: direct {direct:.12f} vs dogleg {dogleg:.12f}")

# --- superposition adds velocities and stream functions ------------------
vortex = SingleVortexField(center=(1.0, 1.0), strength=0.5, core_radius=0.4,
                           bounds=Bounds(0, 0, 2, 2))
combo = superpose([uni, vortex])
print("\nsuperposed velocity at (1.0, 1.4):", combo.velocity((1.0, 1.4)))
print("psi adds:", combo.stream_value(p, q), "=",
      uni.stream_value(p, q) + vortex.stream_value(p, q))

# --- gridded fields: sampled, saved, reloaded ----------------------------
grid = GridField.from_field(qv, 201, 201)
gf = GridFlowField(grid)
rng = np.random.default_rng(0)
errs = []
for _ in range(200):
    a, b = rng.uniform(0.0, 2.0, size=(2, 2))
    errs.append(abs(gf.stream_value(a, b) - qv.stream_value(a, b)))
print(f"\n201x201 grid vs analytic psi: max abs err {max(errs):.2e}")

text = grid_to_text(GridField.from_field(qv, 21, 21))
back = load_grid(text)
print("grid file round-trip exact:", np.array_equal(back.u, GridField.from_field(qv, 21, 21).u))
