"""Streamline-aware distance heuristics and nearest-neighbour queries.

Compares Euclidean, L2-stream, L2-LSB and the approximated L2-LSB nearest
neighbour on the quad-vortex flow, and demonstrates the 3D embedding that
makes L2-stream a true metric.
Run:  python demos/03_distance_heuristics.py
"""

import numpy as np

from streamplan import (
    DistanceHeuristic,
    HaltonSampler,
    QuadVortexField,
    VertexSet,
    dist,
    k_nearest_count,
    nearest,
    stream_embed,
)

qv = QuadVortexField(4.0, 1.0)
hs = {k: DistanceHeuristic(k, qv) for k in ("euclidean", "l2-stream", "l2-lsb", "l2-lsb-approx")}

p, q = (0.5, 0.5), (0.95, 0.5)  # same cell, crossing inner streamlines
r = (0.5, 0.95)                 # same distance, along the rotation
print(f"distances from {p}:")
for name, h in hs.items():
    print(f"  {name:14s} to {q}: {dist(h, p, q):.4f}   to {r}: {dist(h, p, r):.4f}")

# the L2-stream metric is an ordinary Euclidean metric in (x, y, psi) space
h = hs["l2-stream"]
a, b = (0.3, 0.4), (1.2, 1.7)
ea, eb = np.array(stream_embed(h, a)), np.array(stream_embed(h, b))
print(f"\nembedding check: |embed(a)-embed(b)| = {np.linalg.norm(ea - eb):.6f}"
      f" vs dist = {dist(h, a, b):.6f}")

# nearest-neighbour agreement and the two-stage approximation
vs = VertexSet(qv)
for pt in HaltonSampler(qv.bounds).take(400):
    vs.insert(pt)
print(f"\n400 vertices; shortlist size k = {k_nearest_count(len(vs))}")
rng = np.random.default_rng(2)
agree = 0
for _ in range(300):
    query = rng.uniform(0, 2, size=2)
    exact = nearest(hs["l2-lsb"], vs, query)
    approx = nearest(hs["l2-lsb-approx"], vs, query)
    agree += exact == approx
print(f"approximated L2-LSB nearest matches the exact answer in {agree / 3:.1f}% of queries")

# L2-LSB violates the triangle inequality (no metric embedding exists)
h = hs["l2-lsb"]
rng = np.random.default_rng(3)
for _ in range(100_000):
    x, y, z = rng.uniform(0, 2, size=(3, 2))
    if dist(h, x, z) > dist(h, x, y) + dist(h, y, z) + 1e-9:
        print(f"\ntriangle violation: d(x,z)={dist(h, x, z):.3f} >"
              f" d(x,y)+d(y,z)={dist(h, x, y) + dist(h, y, z):.3f}")
        break
