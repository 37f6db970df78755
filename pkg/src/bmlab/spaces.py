"""Finite metric spaces behind the geodesic analytics.

Two concrete flavors: a dense space wrapping a full distance matrix (the
underlying graph is complete), and a graph space over a sparse adjacency
structure, unit-weight or real-weighted.  Both expose single-source and
source-set distance fields; graph spaces keep a small cache of BFS /
Dijkstra results.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

__all__ = ["DenseSpace", "GraphSpace", "space_from_quad", "space_from_field"]

_CACHE_SIZE = 128


class DenseSpace:
    """Metric space given by an explicit symmetric distance matrix."""

    is_graph = False

    def __init__(self, dmat: np.ndarray, integer_metric: bool = False):
        self.dmat = np.asarray(dmat, dtype=float)
        self.n = self.dmat.shape[0]
        self.integer_metric = integer_metric

    def dist(self, i: int, j: int) -> float:
        return float(self.dmat[i, j])

    def dist_from(self, i: int) -> np.ndarray:
        return self.dmat[i]

    def dist_to_set(self, sources) -> np.ndarray:
        return self.dmat[np.asarray(sources, dtype=np.int64)].min(axis=0)

    def eccentricity(self, i: int) -> float:
        return float(self.dmat[i].max())


class GraphSpace:
    """Metric space of a connected graph, CSR adjacency.

    ``weights`` is None for the unit-weight (integer) graph metric.
    """

    is_graph = True

    def __init__(self, indptr, indices, weights=None, coords=None):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        self.n = len(self.indptr) - 1
        self.integer_metric = weights is None
        self.coords = coords  # optional (n, 2) layout, e.g. grid positions
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._sparse = None

    @classmethod
    def from_quad(cls, quad) -> "GraphSpace":
        indptr, indices = quad.adjacency()
        return cls(indptr, indices)

    def neighbors(self, i: int):
        sl = slice(self.indptr[i], self.indptr[i + 1])
        w = np.ones(sl.stop - sl.start) if self.weights is None else self.weights[sl]
        return self.indices[sl], w

    def edge_weight(self, u: int, v: int) -> float:
        """Distance between adjacent vertices (edges are always tight here:
        every 2-hop detour costs at least one extra nonnegative weight)."""
        vs, ws = self.neighbors(u)
        hit = ws[vs == v]
        if hit.size == 0:
            raise ValueError(f"vertices {u} and {v} are not adjacent")
        return float(hit.min())

    def _as_sparse(self):
        if self._sparse is None:
            from scipy.sparse import csr_matrix
            data = np.ones(len(self.indices)) if self.weights is None else self.weights
            self._sparse = csr_matrix((data, self.indices, self.indptr),
                                      shape=(self.n, self.n))
        return self._sparse

    def dist_from(self, i: int) -> np.ndarray:
        hit = self._cache.get(i)
        if hit is not None:
            self._cache.move_to_end(i)
            return hit
        from scipy.sparse.csgraph import dijkstra
        # adjacency is stored symmetrized, so directed search is equivalent
        d = dijkstra(self._as_sparse(), directed=True, indices=i)
        self._cache[i] = d
        if len(self._cache) > _CACHE_SIZE:
            self._cache.popitem(last=False)
        return d

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_from(i)[j])

    def dist_to_set(self, sources) -> np.ndarray:
        sources = np.asarray(sources, dtype=np.int64)
        from scipy.sparse.csgraph import dijkstra
        return dijkstra(self._as_sparse(), directed=True, indices=sources,
                        min_only=True)

    def ball(self, src: int, radius: float) -> np.ndarray:
        """Vertices within ``radius`` of src; local flood for unit weights."""
        if self.weights is not None:
            return np.flatnonzero(self.dist_from(src) <= radius)
        visited = np.zeros(self.n, dtype=bool)
        visited[src] = True
        members = [np.array([src], dtype=np.int64)]
        frontier = members[0]
        for _ in range(int(radius)):
            nbrs = _gather(self.indptr, self.indices, frontier)
            fresh = np.unique(nbrs[~visited[nbrs]])
            if fresh.size == 0:
                break
            visited[fresh] = True
            members.append(fresh)
            frontier = fresh
        return np.concatenate(members)

    def eccentricity(self, i: int) -> float:
        return float(self.dist_from(i).max())


def _gather(indptr, indices, frontier):
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    offs = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    return indices[offs + np.arange(total)]


def _bfs_field(indptr, indices, n, sources) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    frontier = np.asarray(sources, dtype=np.int64)
    dist[frontier] = 0
    d = 0
    while frontier.size:
        d += 1
        nbrs = _gather(indptr, indices, frontier)
        nbrs = nbrs[dist[nbrs] < 0]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs)
        dist[frontier] = d
    return dist


def space_from_quad(quad) -> GraphSpace:
    return GraphSpace.from_quad(quad)


def space_from_field(field, gamma: float) -> GraphSpace:
    """Weighted grid space for a scalar field: 4-neighbor lattice with edge
    weight (w(u) + w(v)) / 2 where w = exp(gamma * field).

    With half weights on entry and exit, edge-path lengths reproduce
    vertex-sum lengths up to the fixed endpoint correction, so standard
    shortest paths apply exactly.
    """
    h = np.asarray(field.values, dtype=float)
    n = h.shape[0]
    w = np.exp(gamma * h).ravel()
    ids = np.arange(n * n).reshape(n, n)
    pairs = []
    pairs.append((ids[:, :-1].ravel(), ids[:, 1:].ravel()))
    pairs.append((ids[:-1, :].ravel(), ids[1:, :].ravel()))
    u = np.concatenate([p[0] for p in pairs] + [p[1] for p in pairs])
    v = np.concatenate([p[1] for p in pairs] + [p[0] for p in pairs])
    ew = 0.5 * (w[u] + w[v])
    order = np.argsort(u, kind="stable")
    u, v, ew = u[order], v[order], ew[order]
    counts = np.bincount(u, minlength=n * n)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    coords = np.column_stack(np.divmod(np.arange(n * n), n))
    return GraphSpace(indptr, v, ew, coords=coords)
