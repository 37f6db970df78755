"""Random labeled plane trees and their quadrangulations.

A uniform plane tree with i.i.d. {-1,0,+1} edge-label increments is turned
into a rooted pointed quadrangulation by corner chaining: every corner is
joined to the next corner (cyclically along the contour) whose label is one
less, and the corners of minimal label are joined to an extra vertex placed
at label min-1.  The resulting arcs form a half-edge map whose faces all
have degree 4 and whose graph distance from the extra vertex to any tree
vertex is label(u) - min_label + 1.

Half-edge conventions: arc a yields half-edges 2a (tail side) and 2a+1;
``opp`` is the pairing h ^ 1; ``next_out`` is the counterclockwise rotation
among half-edges sharing a tail; faces are orbits of h -> next_out[h ^ 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream

__all__ = [
    "LabeledPlaneTree",
    "Quadrangulation",
    "FilledBall",
    "sample_labeled_tree",
    "cvs_construct",
    "bfs_metric",
    "filled_ball",
    "boundary_length_process",
    "max_boundary_tail_report",
    "calibrate_scaling",
]


# ---------------------------------------------------------------------------
# labeled plane trees

@dataclass
class LabeledPlaneTree:
    """Plane tree given by its contour steps (+1 down into a child, -1 up)
    plus one integer label per vertex; the root carries label 0."""

    n_edges: int
    contour: np.ndarray  # +-1, length 2 n_edges
    labels: np.ndarray   # per vertex, root first

    def __post_init__(self):
        self.contour = np.asarray(self.contour, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.contour) != 2 * self.n_edges:
            raise ValueError("contour length must be 2 * n_edges")
        walk = np.cumsum(self.contour)
        if walk[-1] != 0 or np.any(walk[:-1] < 0):
            raise ValueError("contour must be a nonnegative walk returning to 0")
        if len(self.labels) != self.n_edges + 1:
            raise ValueError("need one label per vertex")
        if self.labels[0] != 0:
            raise ValueError("root label must be 0")
        verts = self.contour_vertices()
        ends = np.concatenate([verts[1:], [verts[0]]])
        if np.any(np.abs(self.labels[verts] - self.labels[ends]) > 1):
            raise ValueError("labels must change by at most 1 across edges")

    def contour_vertices(self) -> np.ndarray:
        """Vertex id visited at each contour time 0 .. 2n-1 (root = 0).

        Ids are assigned in order of first visit; also validates that label
        increments along edges lie in {-1, 0, +1}.
        """
        n = self.n_edges
        verts = np.empty(2 * n, dtype=np.int64)
        stack = [0]
        nxt = 1
        for k, step in enumerate(self.contour):
            verts[k] = stack[-1]
            if step == 1:
                stack.append(nxt)
                nxt += 1
            else:
                stack.pop()
        if nxt != n + 1:
            raise ValueError("malformed contour")
        return verts


def sample_labeled_tree(n_edges: int, rng: RngStream) -> LabeledPlaneTree:
    """Uniform plane tree with i.i.d. uniform {-1,0,+1} label increments.

    The contour is drawn by the cycle lemma: a uniform arrangement of n up
    and n+1 down steps has exactly one rotation that stays nonnegative
    until its final down step, and dropping that step is uniform over
    contours.
    """
    if n_edges < 1:
        raise ValueError("n_edges must be at least 1")
    gen = rng.generator()
    seq = np.concatenate([np.ones(n_edges, dtype=np.int64),
                          -np.ones(n_edges + 1, dtype=np.int64)])
    gen.shuffle(seq)
    walk = np.cumsum(seq)
    pivot = int(np.argmin(walk))  # first index attaining the minimum (= -1 level)
    rot = np.roll(seq, -(pivot + 1))
    contour = rot[:-1]
    incs = gen.integers(-1, 2, size=n_edges)
    labels = np.zeros(n_edges + 1, dtype=np.int64)
    stack = [0]
    nxt = 1
    e = 0
    for step in contour:
        if step == 1:
            labels[nxt] = labels[stack[-1]] + incs[e]
            stack.append(nxt)
            nxt += 1
            e += 1
        else:
            stack.pop()
    return LabeledPlaneTree(n_edges, contour, labels)


# ---------------------------------------------------------------------------
# quadrangulations as half-edge maps

@dataclass
class Quadrangulation:
    """Rooted pointed quadrangulation, half-edge representation."""

    tail: np.ndarray        # tail vertex per half-edge
    next_out: np.ndarray    # ccw next half-edge around the tail vertex
    root_half_edge: int
    pointed_vertex: int
    n_faces: int
    meta: dict = field(default_factory=dict)
    _csr: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.tail = np.asarray(self.tail, dtype=np.int64)
        self.next_out = np.asarray(self.next_out, dtype=np.int64)

    @property
    def n_half_edges(self) -> int:
        return len(self.tail)

    @property
    def n_edges(self) -> int:
        return self.n_half_edges // 2

    @property
    def n_vertices(self) -> int:
        return int(self.tail.max()) + 1

    def opp(self, h) -> np.ndarray | int:
        return h ^ 1

    def head(self, h):
        return self.tail[h ^ 1]

    def face_next(self, h):
        return self.next_out[h ^ 1]

    def faces(self) -> list[list[int]]:
        """Orbits of the facial walk; each orbit lists half-edges."""
        seen = np.zeros(self.n_half_edges, dtype=bool)
        out = []
        for h0 in range(self.n_half_edges):
            if seen[h0]:
                continue
            cyc = []
            h = h0
            while not seen[h]:
                seen[h] = True
                cyc.append(h)
                h = int(self.next_out[h ^ 1])
            out.append(cyc)
        return out

    def validate(self) -> None:
        """Structural checks: permutations, connectivity, all faces degree 4,
        and the Euler count."""
        m = self.n_half_edges
        if m % 2:
            raise ValueError("odd number of half-edges")
        if sorted(self.next_out.tolist()) != list(range(m)):
            raise ValueError("next_out is not a permutation")
        if np.any(self.tail[self.next_out] != self.tail):
            raise ValueError("next_out must preserve the tail vertex")
        fs = self.faces()
        if any(len(f) != 4 for f in fs):
            raise ValueError("all faces must have degree 4")
        v, e, f = self.n_vertices, self.n_edges, len(fs)
        if f != self.n_faces or e != 2 * self.n_faces or v != self.n_faces + 2:
            raise ValueError("face/edge/vertex counts are inconsistent")
        if v - e + f != 2:
            raise ValueError("Euler characteristic is not 2")
        if len(self.vertex_components()) != 1:
            raise ValueError("map is not connected")

    def vertex_components(self):
        indptr, indices = self.adjacency()
        n = self.n_vertices
        comp = -np.ones(n, dtype=np.int64)
        comps = []
        for s in range(n):
            if comp[s] >= 0:
                continue
            comp[s] = len(comps)
            frontier = np.array([s])
            members = [s]
            while frontier.size:
                nbrs = _gather(indptr, indices, frontier)
                nbrs = np.unique(nbrs[comp[nbrs] < 0])
                comp[nbrs] = len(comps)
                members.extend(nbrs.tolist())
                frontier = nbrs
            comps.append(members)
        return comps

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, indices) over directed half-edges."""
        if self._csr is None:
            order = np.argsort(self.tail, kind="stable")
            indices = self.tail[np.asarray(order) ^ 1]
            counts = np.bincount(self.tail, minlength=self.n_vertices)
            indptr = np.concatenate([[0], np.cumsum(counts)])
            object.__setattr__(self, "_csr", (indptr, indices))
        return self._csr

    def degree(self, v: int) -> int:
        indptr, _ = self.adjacency()
        return int(indptr[v + 1] - indptr[v])

    def canonical_key(self) -> bytes:
        """Canonical encoding of the rooted pointed map.

        Half-edges are relabeled by a deterministic traversal from the root
        half-edge using (next_out, opp); the key is the relabeled next_out
        table plus the pointed vertex's orbit position.
        """
        m = self.n_half_edges
        new = -np.ones(m, dtype=np.int64)
        order = []
        stackless = [self.root_half_edge]
        while stackless:
            h = stackless.pop()
            if new[h] >= 0:
                continue
            new[h] = len(order)
            order.append(h)
            stackless.append(int(self.next_out[h]))
            stackless.append(h ^ 1)
        relabeled_next = new[self.next_out[order]]
        relabeled_opp = new[np.asarray(order) ^ 1]
        pointed_flag = (self.tail[order] == self.pointed_vertex).astype(np.int8)
        return (relabeled_next.astype("<i8").tobytes()
                + relabeled_opp.astype("<i8").tobytes()
                + pointed_flag.tobytes())

    def to_json(self) -> str:
        payload = {
            "header": {
                "kind": "quadrangulation-halfedge-v1",
                "n_faces": int(self.n_faces),
                "n_vertices": int(self.n_vertices),
                "root_half_edge": int(self.root_half_edge),
                "pointed_vertex": int(self.pointed_vertex),
                "opp_convention": "xor1",
                **{k: v for k, v in self.meta.items()
                   if isinstance(v, (int, float, str))},
            },
            "tail": self.tail.tolist(),
            "next_out": self.next_out.tolist(),
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Quadrangulation":
        payload = json.loads(text)
        h = payload["header"]
        return cls(np.array(payload["tail"]), np.array(payload["next_out"]),
                   int(h["root_half_edge"]), int(h["pointed_vertex"]),
                   int(h["n_faces"]), meta=dict(h))


def _gather(indptr, indices, frontier):
    """Concatenate indices[indptr[v]:indptr[v+1]] over v in frontier."""
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    offs = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    return indices[offs + np.arange(total)]


def _corner_successors(corner_labels: np.ndarray) -> tuple[np.ndarray, int]:
    """succ[k] = first corner cyclically after k with label one less;
    -1 marks corners of minimal label (they chain to the extra vertex)."""
    n2 = len(corner_labels)
    lmin = int(corner_labels.min())
    succ = -np.ones(n2, dtype=np.int64)
    by_label: dict[int, np.ndarray] = {}
    order = np.argsort(corner_labels, kind="stable")
    sorted_labels = corner_labels[order]
    bounds = np.flatnonzero(np.diff(sorted_labels)) + 1
    groups = np.split(order, bounds)
    for g in groups:
        by_label[int(corner_labels[g[0]])] = np.sort(g)
    for lab, ks in by_label.items():
        if lab == lmin:
            continue
        targets = by_label[lab - 1]
        pos = np.searchsorted(targets, ks, side="right")
        succ[ks] = targets[pos % len(targets)]
    return succ, lmin


def cvs_construct(tree: LabeledPlaneTree, sign: int = 1) -> Quadrangulation:
    """Corner-chaining construction of a rooted pointed quadrangulation.

    Each corner k emits one arc to its successor corner (or to the extra
    vertex when its label is minimal).  Within a corner the incoming arc
    ends are ordered nearest source first, then the outgoing end; this is
    the unique noncrossing attachment order.  The root edge is corner 0's
    arc, oriented away from corner 0 for sign=+1 and reversed for sign=-1.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = tree.n_edges
    n2 = 2 * n
    verts = tree.contour_vertices()
    corner_labels = tree.labels[verts]
    succ, lmin = _corner_successors(corner_labels)
    star = int(n + 1)  # the extra vertex id

    # arc a goes from corner a to succ[a]; half-edge 2a sits at corner a
    incoming: list[list[int]] = [[] for _ in range(n2)]
    star_sources = []
    for k in range(n2):
        tgt = succ[k]
        if tgt < 0:
            star_sources.append(k)
        else:
            incoming[tgt].append(k)

    # nearest (cyclically closest preceding) source first within a corner
    for k in range(n2):
        if len(incoming[k]) > 1:
            incoming[k].sort(key=lambda src: (k - src) % n2)

    tail = np.empty(2 * n2, dtype=np.int64)
    tail[0::2] = verts[np.arange(n2)]
    heads = np.where(succ >= 0, verts[succ], star)
    tail[1::2] = heads

    corners_of_vertex: list[list[int]] = [[] for _ in range(n + 1)]
    for k in range(n2):
        corners_of_vertex[verts[k]].append(k)

    rotations: list[list[int]] = [[] for _ in range(n + 2)]
    for v in range(n + 1):
        rot = rotations[v]
        for k in corners_of_vertex[v]:
            for src in incoming[k]:
                rot.append(2 * src + 1)
            rot.append(2 * k)
    # the extra vertex is interior: seen from it, the boundary corners wind
    # the other way
    rotations[star] = [2 * k + 1 for k in reversed(star_sources)]

    next_out = np.empty(2 * n2, dtype=np.int64)
    for rot in rotations:
        r = np.asarray(rot)
        next_out[r] = np.roll(r, -1)

    root_he = 0 if sign == 1 else 1
    quad = Quadrangulation(tail, next_out, root_he, star, n,
                           meta={"label_min": lmin})
    return quad


# ---------------------------------------------------------------------------
# graph metric

def bfs_metric(quad: Quadrangulation, source: int) -> np.ndarray:
    """Exact graph distances from ``source`` (int32, -1 unreachable)."""
    indptr, indices = quad.adjacency()
    return _bfs(indptr, indices, quad.n_vertices, source)


def _bfs(indptr, indices, n, source) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
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


# ---------------------------------------------------------------------------
# filled balls and boundary lengths

@dataclass
class FilledBall:
    """Ball of the graph metric with all non-basepoint holes filled."""

    center: int
    basepoint: int
    radius: int
    vertex_set: np.ndarray      # bool mask over vertices
    boundary_length: int


def filled_ball(quad: Quadrangulation, center: int, basepoint: int,
                radius: int, _dist_from_center: np.ndarray | None = None) -> FilledBall:
    """Complement of the basepoint's component of the ball complement.

    Requires 1 <= radius < d(center, basepoint); otherwise the ball would
    swallow the basepoint.
    """
    dist = _dist_from_center if _dist_from_center is not None \
        else bfs_metric(quad, center)
    dcb = int(dist[basepoint])
    if radius < 1 or radius >= dcb:
        raise ValueError("need 1 <= radius < d(center, basepoint)")
    indptr, indices = quad.adjacency()
    n = quad.n_vertices
    outside = dist > radius
    comp = np.zeros(n, dtype=bool)  # basepoint component of the complement
    comp[basepoint] = True
    frontier = np.array([basepoint], dtype=np.int64)
    while frontier.size:
        nbrs = _gather(indptr, indices, frontier)
        nbrs = nbrs[outside[nbrs] & ~comp[nbrs]]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs)
        comp[frontier] = True
    vertex_set = ~comp
    boundary = _edges_across(quad, vertex_set)
    return FilledBall(center, basepoint, radius, vertex_set, boundary)


def _edges_across(quad: Quadrangulation, mask: np.ndarray) -> int:
    tail_in = mask[quad.tail]
    head_in = mask[quad.tail[np.arange(quad.n_half_edges) ^ 1]]
    return int(np.count_nonzero(tail_in & ~head_in))


def boundary_length_process(quad: Quadrangulation, center: int,
                            basepoint: int) -> np.ndarray:
    """Boundary length of the filled ball at radii 1 .. d(center,basepoint)-1."""
    dist = bfs_metric(quad, center)
    dcb = int(dist[basepoint])
    if dcb < 2:
        raise ValueError("need d(center, basepoint) >= 2")
    out = np.empty(dcb - 1, dtype=np.int64)
    for r in range(1, dcb):
        out[r - 1] = filled_ball(quad, center, basepoint, r,
                                 _dist_from_center=dist).boundary_length
    return out


def max_boundary_tail_report(max_lengths, tail_fraction: float = 0.5) -> dict:
    """Log-log tail slope of max boundary lengths across samples, with CI.

    Fits log P[M > m] against log m over the upper ``tail_fraction`` of the
    sample; exploratory output, never gated.
    """
    m = np.sort(np.asarray(max_lengths, dtype=float))
    if len(m) < 8:
        raise ValueError("need at least 8 samples for a tail fit")
    k0 = int(len(m) * (1.0 - tail_fraction))
    xs, ys = [], []
    for k in range(k0, len(m) - 1):
        if m[k] <= 0:
            continue
        xs.append(np.log(m[k]))
        ys.append(np.log(1.0 - (k + 1) / (len(m) + 1)))
    a = np.vstack([xs, np.ones(len(xs))]).T
    coef, res, *_ = np.linalg.lstsq(a, np.asarray(ys), rcond=None)
    dof = max(len(xs) - 2, 1)
    s2 = (res[0] / dof) if len(res) else 0.0
    sxx = float(np.sum((np.asarray(xs) - np.mean(xs)) ** 2))
    stderr = float(np.sqrt(s2 / sxx)) if sxx > 0 else float("nan")
    return {"tail_slope": float(coef[0]), "stderr": stderr,
            "ci95": [float(coef[0] - 1.96 * stderr),
                     float(coef[0] + 1.96 * stderr)],
            "samples": len(m)}


def calibrate_scaling(quad_root_dists, snake_root_dists) -> float:
    """Distance rescaling matching mean distance-to-root across samplers.

    Accepts sequences of per-sample distance arrays; returns the factor to
    multiply the first family by so the pooled means agree.
    """
    q = np.concatenate([np.asarray(a, dtype=float).ravel() for a in quad_root_dists]) \
        if len(quad_root_dists) else np.array([])
    s = np.concatenate([np.asarray(a, dtype=float).ravel() for a in snake_root_dists]) \
        if len(snake_root_dists) else np.array([])
    if q.size == 0 or s.size == 0:
        raise ValueError("both sample families must be nonempty")
    mq = float(np.mean(q))
    if mq == 0:
        raise ValueError("degenerate first family (zero mean distance)")
    return float(np.mean(s)) / mq
