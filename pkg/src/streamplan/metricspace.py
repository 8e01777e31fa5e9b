"""Distance heuristics and nearest-neighbour queries over vertex sets.

Two streamline-aware distances augment the Euclidean plane with a third
coordinate derived from the flow:

* L2-stream:  sqrt(||p - q||^2 + (psi(p, q) / alpha)^2).  A true metric --
  it is the Euclidean distance of the embedding (x, y, psi(., x0)/alpha)
  for any reference point x0, since psi(p, q) = psi(p, x0) - psi(q, x0).
* L2-LSB:  sqrt(||p - q||^2 + (V_LSB(p, q) * beta)^2) with
  V_LSB = |psi| / ||p - q||.  Symmetric and nonnegative but it violates the
  triangle inequality, so no such embedding exists; nearest neighbours can
  instead be approximated by shortlisting k L2-stream-nearest candidates and
  minimising L2-LSB among them, k = max(1, ceil(k_RRG * ln |V|)).

Vertex sets cache psi(vertex, x0) at insertion, making every pairwise psi a
subtraction; queries are vectorised linear scans (no spatial index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HeuristicKindError
from .flowfield import FlowField
from .geometry import as_point

__all__ = [
    "K_RRG",
    "k_nearest_count",
    "HEURISTIC_KINDS",
    "DistanceHeuristic",
    "VertexSet",
    "dist",
    "nearest",
    "near",
    "knearest",
    "stream_embed",
]

# k-nearest RRG constant for dimension 2: e * (1 + 1/d).
K_RRG = math.e * 1.5

HEURISTIC_KINDS = ("euclidean", "l2-stream", "l2-lsb", "l2-lsb-approx")


def k_nearest_count(n_vertices: int) -> int:
    """Neighbourhood size k = max(1, ceil(K_RRG * ln n))."""
    if n_vertices <= 1:
        return 1
    return max(1, math.ceil(K_RRG * math.log(n_vertices)))


@dataclass(frozen=True)
class DistanceHeuristic:
    """A distance kind bound to a flow field and its scaling terms.

    ``alpha`` [m/s] scales the stream value in L2-stream; ``beta`` [s] scales
    the lower speed bound in the L2-LSB variants.  ``reference_point``
    anchors the L2-stream embedding (any point works; distances are
    invariant to it).
    """

    kind: str
    field: FlowField
    alpha: float = 1.0
    beta: float = 1.0
    reference_point: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in HEURISTIC_KINDS:
            raise HeuristicKindError(f"unknown heuristic kind {self.kind!r}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        ref = self.reference_point
        ref = self.field.bounds.center if ref is None else as_point(ref)
        object.__setattr__(self, "reference_point", ref)


class VertexSet:
    """Append-only set of planar vertices with cached stream values.

    Each vertex stores psi(position, reference_point) so pairwise stream
    values reduce to cached differences.  Single-writer insertion; reads
    between insertions are safe.
    """

    def __init__(self, field: FlowField, reference_point=None, capacity: int = 256):
        self.field = field
        ref = field.bounds.center if reference_point is None else as_point(reference_point)
        self.reference_point = ref
        self._pos = np.empty((capacity, 2))
        self._psi = np.empty(capacity)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    def insert(self, p) -> int:
        """Add a vertex, computing its psi-to-reference cache; returns its id."""
        p = as_point(p)
        if self._n == len(self._pos):
            self._pos = np.concatenate([self._pos, np.empty_like(self._pos)])
            self._psi = np.concatenate([self._psi, np.empty_like(self._psi)])
        self._pos[self._n] = p
        self._psi[self._n] = self.field.stream_value(p, self.reference_point)
        self._n += 1
        return self._n - 1

    @property
    def positions(self) -> np.ndarray:
        return self._pos[: self._n]

    @property
    def psi_to_reference(self) -> np.ndarray:
        return self._psi[: self._n]

    def position(self, vid: int) -> np.ndarray:
        if not 0 <= vid < self._n:
            raise IndexError(f"vertex id {vid} out of range")
        return self._pos[vid].copy()


def dist(h: DistanceHeuristic, p, q) -> float:
    """Heuristic distance between two points (not necessarily vertices)."""
    p = as_point(p)
    q = as_point(q)
    d = math.hypot(q[0] - p[0], q[1] - p[1])
    if h.kind == "euclidean":
        return d
    if d == 0.0:
        return 0.0
    psi = h.field.stream_value(p, q)
    if h.kind == "l2-stream":
        return math.sqrt(d * d + (psi / h.alpha) ** 2)
    # l2-lsb and its approximation share the distance definition.
    lsb = abs(psi) / d
    return math.sqrt(d * d + (lsb * h.beta) ** 2)


def _dist_sq_to_set(h: DistanceHeuristic, vs: VertexSet, q: np.ndarray, kind: str) -> np.ndarray:
    """Squared distances from every vertex to q, using the psi cache."""
    pos = vs.positions
    dx = pos[:, 0] - q[0]
    dy = pos[:, 1] - q[1]
    d2 = dx * dx + dy * dy
    if kind == "euclidean":
        return d2
    # psi(vertex_i, q) = psi(vertex_i, x0) - psi(q, x0)
    psi = vs.psi_to_reference - vs.field.stream_value(q, vs.reference_point)
    if kind == "l2-stream":
        return d2 + (psi / h.alpha) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lsb2 = np.where(d2 > 0.0, (psi * psi) / d2, 0.0)
    return d2 + lsb2 * (h.beta * h.beta)


def nearest(h: DistanceHeuristic, vs: VertexSet, q) -> int:
    """Id of the vertex nearest to q under the heuristic.

    Exact linear scan for the euclidean/l2-stream/l2-lsb kinds.  The
    l2-lsb-approx kind shortlists the k L2-stream-nearest vertices
    (k = max(1, ceil(K_RRG ln |V|))) and returns the L2-LSB minimiser among
    them; ties break toward the smallest id.
    """
    if len(vs) == 0:
        raise ValueError("nearest needs a non-empty vertex set")
    q = as_point(q)
    if h.kind != "l2-lsb-approx":
        return int(np.argmin(_dist_sq_to_set(h, vs, q, h.kind)))
    k = k_nearest_count(len(vs))
    if k >= len(vs):
        return int(np.argmin(_dist_sq_to_set(h, vs, q, "l2-lsb")))
    stream_sq = _dist_sq_to_set(h, vs, q, "l2-stream")
    cand = np.sort(np.argpartition(stream_sq, k - 1)[:k])
    lsb_sq = _dist_sq_to_set(h, vs, q, "l2-lsb")[cand]
    return int(cand[np.argmin(lsb_sq)])


def near(h: DistanceHeuristic, vs: VertexSet, q, radius: float) -> list[int]:
    """Ids of all vertices within ``radius`` of q, ascending by (distance, id)."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    q = as_point(q)
    kind = "l2-lsb" if h.kind == "l2-lsb-approx" else h.kind
    d2 = _dist_sq_to_set(h, vs, q, kind)
    ids = np.nonzero(d2 <= radius * radius)[0]
    order = np.lexsort((ids, d2[ids]))
    return [int(i) for i in ids[order]]


def knearest(h: DistanceHeuristic, vs: VertexSet, q, k: int) -> list[int]:
    """k nearest vertex ids, ascending by distance.

    For l2-lsb-approx this is the two-stage shortlist: the k
    L2-stream-nearest candidates reordered by L2-LSB distance.
    """
    if len(vs) == 0:
        raise ValueError("knearest needs a non-empty vertex set")
    q = as_point(q)
    k = min(k, len(vs))
    if h.kind == "l2-lsb-approx":
        stage = _dist_sq_to_set(h, vs, q, "l2-stream")
        cand = np.argpartition(stage, k - 1)[:k] if k < len(vs) else np.arange(len(vs))
        cand = np.sort(cand)
        d2 = _dist_sq_to_set(h, vs, q, "l2-lsb")[cand]
        return [int(i) for i in cand[np.lexsort((cand, d2))]]
    d2 = _dist_sq_to_set(h, vs, q, h.kind)
    cand = np.argpartition(d2, k - 1)[:k] if k < len(vs) else np.arange(len(vs))
    order = np.lexsort((cand, d2[cand]))
    return [int(i) for i in cand[order]]


def stream_embed(h: DistanceHeuristic, p) -> tuple[float, float, float]:
    """3D embedding (x, y, psi(p, x0)/alpha) whose L2 distance is L2-stream.

    Only defined for the l2-stream kind.  Changing the reference point shifts
    the third coordinate by a constant, leaving all pairwise distances
    unchanged.
    """
    if h.kind != "l2-stream":
        raise HeuristicKindError(f"stream_embed requires the l2-stream kind, got {h.kind!r}")
    p = as_point(p)
    psi = h.field.stream_value(p, h.reference_point)
    return float(p[0]), float(p[1]), psi / h.alpha
