"""Finite metric spaces: validation, shortest-path metrics, geodesic tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DisconnectedGraph, MetricViolation

METRIC_ATOL = 1e-12
GEODESIC_RTOL = 1e-9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite point set with an exact pairwise distance table.

    Immutable after construction; safe to share across threads.
    """

    points: tuple
    dist: np.ndarray
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})
        self.dist.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, point) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise KeyError(f"unknown point {point!r}") from None

    def d(self, x, y) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n > 1 else 0.0


def _validate_metric(dist: np.ndarray, atol: float = METRIC_ATOL) -> None:
    n = dist.shape[0]
    if dist.shape != (n, n):
        raise MetricViolation("distance table is not square")
    if not np.all(np.isfinite(dist)):
        raise MetricViolation("non-finite distance entry")
    if np.any(dist < 0):
        raise MetricViolation("negative distance entry")
    if np.any(np.abs(np.diag(dist)) > atol):
        raise MetricViolation("nonzero diagonal entry")
    if np.any(np.abs(dist - dist.T) > atol):
        i, j = np.unravel_index(np.argmax(np.abs(dist - dist.T)), dist.shape)
        raise MetricViolation(f"asymmetry at pair ({i}, {j})")
    if n > 1:
        off = dist.copy()
        np.fill_diagonal(off, 1.0)
        if np.any(off <= 0):
            i, j = np.unravel_index(np.argmin(off), dist.shape)
            raise MetricViolation(f"zero distance between distinct points ({i}, {j})")
    # Triangle inequality, one intermediate point at a time to bound memory.
    for k in range(n):
        slack = dist - (dist[:, k][:, None] + dist[k, :][None, :])
        if np.any(slack > atol):
            i, j = np.unravel_index(np.argmax(slack), slack.shape)
            raise MetricViolation(
                f"triangle inequality fails for ({i}, {j}) via {k}: "
                f"d={dist[i, j]} > {dist[i, k] + dist[k, j]}"
            )


def space_from_matrix(points, matrix) -> FiniteMetricSpace:
    """Validate a dense distance matrix against every metric axiom."""
    dist = np.array(matrix, dtype=np.float64)
    if len(points) != dist.shape[0]:
        raise MetricViolation("point count does not match matrix size")
    _validate_metric(dist)
    return FiniteMetricSpace(tuple(points), dist)


def space_from_edges(points, edges) -> FiniteMetricSpace:
    """Build the shortest-path metric of a weighted undirected graph.

    edges: iterable of (u, v, weight) with positive weights.  Raises
    DisconnectedGraph if some pair is unreachable.
    """
    points = tuple(points)
    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    rows, cols, data = [], [], []
    for u, v, w in edges:
        w = float(w)
        if w <= 0:
            raise MetricViolation(f"non-positive edge weight on ({u!r}, {v!r})")
        i, j = index[u], index[v]
        rows += [i, j]
        cols += [j, i]
        data += [w, w]
    graph = csr_matrix((data, (rows, cols)), shape=(n, n))
    dist = shortest_path(graph, method="D", directed=False)
    if np.any(np.isinf(dist)):
        raise DisconnectedGraph("edge list does not connect all points")
    return FiniteMetricSpace(points, np.asarray(dist, dtype=np.float64))


def build_space(source, points=None) -> FiniteMetricSpace:
    """Build a space from a distance matrix or a weighted edge list.

    Matrix input: source is a square array-like; points default to range(n).
    Edge-list input: source is a list of (u, v, weight); points default to
    the sorted set of endpoints.
    """
    try:
        arr = np.asarray(source, dtype=np.float64)
        is_matrix = arr.ndim == 2 and arr.shape[0] == arr.shape[1]
    except (TypeError, ValueError):
        is_matrix = False
    # A square numeric 2D input is a distance matrix; anything else (in
    # particular triples with non-numeric endpoints) is an edge list.  Pass a
    # non-square edge list or label endpoints to avoid the ambiguous case.
    if not is_matrix:
        if points is None:
            points = sorted({e[0] for e in source} | {e[1] for e in source})
        return space_from_edges(points, source)
    if points is None:
        points = range(len(source))
    return space_from_matrix(list(points), source)


def is_epsilon_geodesic(space: FiniteMetricSpace, eps: float):
    """Test whether every pair admits a chain of <= eps hops summing to d(x,y).

    Returns (True, None) or (False, (x, y)) with a violating pair.  A chain
    exists iff the shortest path restricted to hops of length <= eps
    reproduces the full distance (within relative tolerance 1e-9).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = space.dist
    hop = np.where(d <= eps + METRIC_ATOL, d, np.inf)
    np.fill_diagonal(hop, 0.0)
    restricted = shortest_path(np.where(np.isinf(hop), 0, hop), method="D", directed=False)
    # shortest_path on a dense matrix treats 0 as "no edge"; re-add diag.
    gap = restricted - d
    tol = GEODESIC_RTOL * np.maximum(d, 1.0)
    bad = np.argwhere(gap > tol)
    if bad.size:
        i, j = bad[0]
        return False, (space.points[i], space.points[j])
    return True, None
