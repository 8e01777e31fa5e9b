"""Control lines, the lower speed bound, and optimistic steering.

Every relative velocity that lets the vehicle run the straight segment
p -> q sits on a line in velocity space; its distance from the origin is
the minimum speed the traversal needs.
Run:  python demos/02_control_lines.py
"""

import numpy as np

from streamplan import (
    Bounds,
    QuadVortexField,
    UniformField,
    control_line,
    lower_speed_bound,
    optimistic_steer,
    sample_line_velocities,
)

f = UniformField(2.0, 0.0, Bounds(-1, -1, 3, 3))
p, q = (0.0, 0.0), (0.0, 1.0)

line = control_line(f, p, q)
print(f"crossing a 2 m/s current: psi = {line.psi}, delta = {line.delta}")
print(f"lower speed bound = {lower_speed_bound(f, p, q)} m/s")
print("a 1 m/s vehicle cannot cross:", optimistic_steer(f, p, q, v_max=1.0))

u = optimistic_steer(f, p, q, v_max=3.0)
print(f"\na 3 m/s vehicle steers u = {u}")
print("  total velocity:", f.velocity(p) + u, "(straight at the target)")

# the seven admissible velocities used for edge-cost sampling
print("\nseven chord samples (all satisfy the line equation):")
for s in sample_line_velocities(f, p, q, v_max=3.0, n=7):
    print(f"  u = ({s[0]:+.3f}, {s[1]:+.3f})  residual = {line.residual(s):+.2e}"
          f"  speed = {np.hypot(*s):.3f}")

# in the quad-vortex, reachability depends strongly on where you stand
qv = QuadVortexField(4.0, 1.0)
rng = np.random.default_rng(1)
reachable = 0
for _ in range(2000):
    a, b = rng.uniform(0.05, 1.95, size=(2, 2))
    if lower_speed_bound(qv, a, b) <= 1.0:
        reachable += 1
print(f"\nquad-vortex: {reachable / 20:.1f}% of random pairs are straight-reachable"
      " for a vehicle 4x slower than the peak flow")
