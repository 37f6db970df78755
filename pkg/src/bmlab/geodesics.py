"""Geodesic extraction and geometric statistics on finite metric spaces.

Works uniformly over dense spaces (snake-built metrics) and graph spaces
(quadrangulations, weighted grids).  Geodesics between a pair are the paths
of the tight-edge DAG: edges (u, v) with

    d(a, u) + w(u, v) + d(v, b) <= d(a, b) + slack.

On dense spaces only "immediate" tight edges are kept (no third point fits
strictly between), so bundle paths are the insertion-maximal tight chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnclassifiableBundleError
from .rng import RngStream

__all__ = [
    "GeodesicPath",
    "GeodesicBundle",
    "StarReport",
    "geodesic_dag",
    "enumerate_geodesics",
    "extract_geodesic",
    "hausdorff_distance",
    "coalescence_point",
    "classify_network",
    "star_census",
    "frame_box_dimension",
    "space_box_dimension",
    "greedy_ball_cover_count",
    "strong_confluence_statistic",
    "end_deficit",
    "isotonic_fit",
]

LENGTH_RTOL = 1e-9


@dataclass
class GeodesicPath:
    """A geodesic as a vertex sequence with cumulative lengths."""

    vertices: list[int]
    cumlen: np.ndarray

    def __post_init__(self):
        self.cumlen = np.asarray(self.cumlen, dtype=float)
        if len(self.vertices) != len(self.cumlen) or self.cumlen[0] != 0.0:
            raise ValueError("cumlen must align with vertices and start at 0")
        if np.any(np.diff(self.cumlen) < 0):
            raise ValueError("cumlen must be nondecreasing")

    @property
    def length(self) -> float:
        return float(self.cumlen[-1])

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class GeodesicBundle:
    """All geodesics between a fixed pair, plus the network signature."""

    endpoints: tuple[int, int]
    paths: list[GeodesicPath]
    truncated: bool = False
    slack: float = 0.0
    signature: tuple[int, int, int] | None = None
    splitting_points: list[tuple[int, int]] | None = None

    def __len__(self) -> int:
        return len(self.paths)


@dataclass
class StarReport:
    """Geodesics around a center that stay disjoint inside a ball."""

    center: int
    k: int
    witnesses: list[GeodesicPath]
    disjoint_radius: float
    skipped: bool = False


def _slack_for(space, a, b, slack):
    if slack is not None:
        if slack < 0:
            raise ValueError("slack must be nonnegative")
        return float(slack)
    if space.integer_metric:
        return 0.0
    return LENGTH_RTOL * max(space.dist(a, b), 1.0)


def _build_path(space, verts) -> GeodesicPath:
    if space.is_graph:
        steps = [space.edge_weight(u, v) for u, v in zip(verts[:-1], verts[1:])]
    else:
        steps = [space.dmat[u, v] for u, v in zip(verts[:-1], verts[1:])]
    return GeodesicPath(list(map(int, verts)),
                        np.concatenate([[0.0], np.cumsum(steps)]))


# ---------------------------------------------------------------------------
# tight-edge DAG and enumeration

def geodesic_dag(space, target: int, slack: float | None = None) -> list[np.ndarray]:
    """Predecessor structure toward ``target``.

    Entry u lists the neighbors v that make progress toward the target:
    d(u, target) = w(u, v) + d(v, target) up to slack.
    """
    dt = space.dist_from(target)
    eps = float(slack) if slack is not None else \
        (0.0 if space.integer_metric else LENGTH_RTOL * max(float(dt.max()), 1.0))
    out = []
    for u in range(space.n):
        if space.is_graph:
            vs, ws = space.neighbors(u)
        else:
            vs = np.arange(space.n)
            ws = space.dmat[u]
        ok = (ws > 0) & (ws + dt[vs] <= dt[u] + eps) & (vs != u)
        out.append(vs[ok])
    return out


def _candidate_subgraph(space, a, b, eps):
    """Vertices and tight edges of the a->b geodesic corridor."""
    da = space.dist_from(a)
    db = space.dist_from(b)
    total = float(da[b])
    cand = np.flatnonzero(da + db <= total + eps)
    edges: dict[int, list[int]] = {int(u): [] for u in cand}
    if space.is_graph:
        candset = set(cand.tolist())
        for u in cand:
            vs, ws = space.neighbors(int(u))
            for v, w in zip(vs, ws):
                v = int(v)
                if v in candset and w > 0 and da[u] + w + db[v] <= total + eps \
                        and da[v] > da[u]:
                    edges[int(u)].append(v)
    else:
        sub = space.dmat[np.ix_(cand, cand)]
        m = len(cand)
        da_c, db_c = da[cand], db[cand]
        tight = (sub > 0) & (da_c[:, None] + sub + db_c[None, :] <= total + eps) \
            & (da_c[:, None] < da_c[None, :])
        # immediate edges only: no strictly-between point fits within slack
        for i in range(m):
            for j in np.flatnonzero(tight[i]):
                between = (da_c > da_c[i]) & (da_c < da_c[j]) & \
                          (sub[i] + sub[:, j] <= sub[i, j] + eps)
                between[i] = between[j] = False
                if not np.any(between):
                    edges[int(cand[i])].append(int(cand[j]))
    return da, db, total, edges


def enumerate_geodesics(space, a: int, b: int, slack: float | None = None,
                        cap: int = 4096) -> GeodesicBundle:
    """Bundle of all geodesics from a to b; truncated (with flag) at ``cap``."""
    if a == b:
        raise ValueError("endpoints must be distinct")
    eps = _slack_for(space, a, b, slack)
    da, db, total, edges = _candidate_subgraph(space, a, b, eps)
    paths: list[GeodesicPath] = []
    truncated = False
    stack: list[list[int]] = [[a]]
    while stack:
        verts = stack.pop()
        u = verts[-1]
        if u == b:
            if len(paths) >= cap:
                truncated = True
                break
            paths.append(_build_path(space, verts))
            continue
        for v in sorted(edges.get(u, []), reverse=True):
            stack.append(verts + [v])
    for p in paths:
        tol = eps * max(len(p) - 1, 1) + LENGTH_RTOL * max(total, 1.0)
        if abs(p.length - total) > tol:
            raise AssertionError("enumerated path is not tight")
    return GeodesicBundle((a, b), paths, truncated=truncated, slack=eps)


def extract_geodesic(space, a: int, b: int, rng: RngStream | None = None,
                     slack: float | None = None,
                     _fields: tuple | None = None) -> GeodesicPath:
    """One geodesic from a to b, uniform random tie-breaking at branches."""
    if a == b:
        raise ValueError("endpoints must be distinct")
    eps = _slack_for(space, a, b, slack)
    if _fields is None:
        da, db = space.dist_from(a), space.dist_from(b)
    else:
        da, db = _fields
    gen = rng.generator() if rng is not None else None
    verts = [a]
    u = a
    guard = 8 * space.n + 8
    for _ in range(guard):
        if u == b:
            return _build_path(space, verts)
        if space.is_graph:
            vs, ws = space.neighbors(u)
        else:
            vs = np.arange(space.n)
            ws = space.dmat[u]
        ok = (ws > 0) & (da[u] + ws + db[vs] <= da[b] + eps) & (da[vs] > da[u])
        choices = vs[ok]
        if choices.size == 0:
            raise AssertionError("dead end while tracing a geodesic")
        if not space.is_graph:
            # immediate step: smallest forward distance among tight choices
            fwd = da[choices]
            choices = choices[fwd == fwd.min()]
        u = int(choices[gen.integers(choices.size)]) if gen is not None \
            else int(choices[0])
        verts.append(u)
    raise AssertionError("geodesic tracing exceeded its step guard")


# ---------------------------------------------------------------------------
# set statistics

def hausdorff_distance(space, set_a, set_b) -> float:
    """max of the two directed sup-inf distances between point sets."""
    sa = np.asarray(list(set_a), dtype=np.int64)
    sb = np.asarray(list(set_b), dtype=np.int64)
    if sa.size == 0 or sb.size == 0:
        raise ValueError("both sets must be nonempty")
    to_b = space.dist_to_set(sb)
    to_a = space.dist_to_set(sa)
    return float(max(to_b[sa].max(), to_a[sb].max()))


def coalescence_point(space, root: int, g1: GeodesicPath,
                      g2: GeodesicPath) -> tuple[int, float]:
    """First shared-suffix vertex of two geodesics into ``root`` and its
    distance to the root; (root, 0) when only the root is shared."""
    if g1.vertices[-1] != root or g2.vertices[-1] != root:
        raise ValueError("both geodesics must end at the root")
    k = 0
    m = min(len(g1), len(g2))
    while k < m and g1.vertices[-1 - k] == g2.vertices[-1 - k]:
        k += 1
    merge_pos = len(g1) - k
    vertex = g1.vertices[merge_pos]
    dist_to_root = g1.length - float(g1.cumlen[merge_pos])
    return int(vertex), dist_to_root


# ---------------------------------------------------------------------------
# network signatures

def classify_network(bundle: GeodesicBundle) -> tuple[int, int, int]:
    """(I, J, K) signature of a complete bundle.

    I and J count distinct first edges at the two endpoints.  K counts
    splitting points seen walking from the second endpoint toward the
    first: each interior vertex contributes (number of distinct outgoing
    branches used in that direction) - 1.
    """
    if bundle.truncated:
        raise UnclassifiableBundleError(
            "bundle was truncated; the signature needs every geodesic")
    if not bundle.paths:
        raise ValueError("empty bundle")
    u, v = bundle.endpoints
    first = {p.vertices[1] for p in bundle.paths if len(p) > 1}
    last = {p.vertices[-2] for p in bundle.paths if len(p) > 1}
    branches: dict[int, set[int]] = {}
    for p in bundle.paths:
        # orient v -> u: the outgoing branch at an interior vertex is its
        # forward predecessor
        for pos in range(1, len(p) - 1):
            branches.setdefault(p.vertices[pos], set()).add(p.vertices[pos - 1])
    splitting = [(z, len(s) - 1) for z, s in sorted(branches.items()) if len(s) > 1]
    k_total = sum(mult for _, mult in splitting)
    sig = (len(first), len(last), int(k_total))
    bundle.signature = sig
    bundle.splitting_points = splitting
    return sig


# ---------------------------------------------------------------------------
# star census

def star_census(space, k: int, radius: float, sample_centers, rng: RngStream,
                restarts: int = 16, exhaustive_max: int = 10) -> list[StarReport]:
    """Largest m <= k pairwise-disjoint geodesic germs at sampled centers.

    Greedy with restarts above ``exhaustive_max`` points; tiny spaces are
    searched exhaustively.  Centers whose eccentricity is below the radius
    are skipped with a flag.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if radius <= 0:
        raise ValueError("radius must be positive")
    gen = rng.generator()
    reports = []
    for center in sample_centers:
        center = int(center)
        dc = space.dist_from(center)
        far = np.flatnonzero(dc > radius)
        if far.size == 0:
            reports.append(StarReport(center, 0, [], radius, skipped=True))
            continue
        if space.n <= exhaustive_max:
            best = _best_star_exhaustive(space, center, k, radius, far, dc)
        else:
            best = _best_star_greedy(space, center, k, radius, far, dc, gen,
                                     restarts)
        reports.append(StarReport(center, len(best), best, radius))
    return reports


def _ball_prefix(path: GeodesicPath, radius: float) -> frozenset:
    inside = [v for v, c in zip(path.vertices[1:], path.cumlen[1:]) if c <= radius]
    return frozenset(inside)


def _max_disjoint(prefixes, k):
    """Largest pairwise-disjoint subfamily (exact, small inputs)."""
    best: list[int] = []

    def grow(start, chosen, used):
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        if len(chosen) == k:
            return
        for i in range(start, len(prefixes)):
            if not (prefixes[i] & used):
                grow(i + 1, chosen + [i], used | prefixes[i])

    grow(0, [], frozenset())
    return best


def _best_star_exhaustive(space, center, k, radius, far, dc):
    cands = []
    for t in far:
        bundle = enumerate_geodesics(space, center, int(t), cap=512)
        cands.extend(bundle.paths)
    prefixes = [_ball_prefix(p, radius) for p in cands]
    chosen = _max_disjoint(prefixes, k)
    return [cands[i] for i in chosen]


def _best_star_greedy(space, center, k, radius, far, dc, gen, restarts):
    best: list[GeodesicPath] = []
    n_targets = min(4 * k, far.size)
    for _ in range(restarts):
        targets = gen.choice(far, size=n_targets, replace=False)
        paths = []
        for t in targets:
            sub = RngStream(int(gen.integers(1 << 62)), 0)
            paths.append(extract_geodesic(space, center, int(t), sub,
                                          _fields=(dc, space.dist_from(int(t)))))
        order = gen.permutation(len(paths))
        chosen: list[GeodesicPath] = []
        used: set[int] = set()
        for idx in order:
            pref = _ball_prefix(paths[idx], radius)
            if not (pref & used):
                chosen.append(paths[idx])
                used |= pref
                if len(chosen) == k:
                    break
        if len(chosen) > len(best):
            best = chosen
        if len(best) == k:
            break
    return best


# ---------------------------------------------------------------------------
# covering dimension estimates

def greedy_ball_cover_count(space, points: np.ndarray, eps: float) -> int:
    """Number of eps-balls a farthest-point greedy cover needs for ``points``.

    Lazy: one distance field per chosen center, no pairwise matrix.
    """
    pts = np.asarray(points, dtype=np.int64)
    if pts.size == 0:
        return 0
    mind = np.full(len(pts), np.inf)
    count = 0
    cur = 0  # start at the first point, then farthest-first
    while True:
        count += 1
        mind = np.minimum(mind, space.dist_from(int(pts[cur]))[pts])
        far = int(np.argmax(mind))
        if mind[far] <= eps:
            return count
        cur = far


def frame_box_dimension(space, pair_count: int, scales, rng: RngStream,
                        return_counts: bool = False):
    """Box-count slope of the geodesic frame of sampled pairs.

    The frame is the union of one geodesic per sampled pair minus that
    pair's endpoints.  Returns (slope, stderr) of log cover-count against
    log(1/eps) over the given scales.
    """
    scales = np.asarray(sorted(scales), dtype=float)
    if len(scales) < 3 or scales[-1] / scales[0] < 10.0 - 1e-9:
        raise ValueError("need at least 3 scales spanning a decade")
    gen = rng.generator()
    frame: set[int] = set()
    for r in range(pair_count):
        a = int(gen.integers(space.n))
        b = int(gen.integers(space.n))
        if a == b:
            continue
        g = extract_geodesic(space, a, b, RngStream(int(gen.integers(1 << 62))))
        frame.update(g.vertices[1:-1])
    pts = np.array(sorted(frame), dtype=np.int64)
    if pts.size == 0:
        raise ValueError("empty frame; increase pair_count")
    counts = [greedy_ball_cover_count(space, pts, e) for e in scales]
    slope, stderr = _loglog_slope(scales, counts)
    if return_counts:
        return slope, stderr, dict(zip(scales.tolist(), counts))
    return slope, stderr


def space_box_dimension(space, scales) -> tuple[float, float]:
    """Box-count slope of the whole space.

    Scan-order greedy cover with radius-truncated balls; cheaper than
    farthest-point at full size and shifts only the intercept.
    """
    scales = np.asarray(sorted(scales), dtype=float)
    use_local = getattr(space, "ball", None) is not None
    counts = []
    for e in scales:
        covered = np.zeros(space.n, dtype=bool)
        cnt = 0
        for v in range(space.n):
            if covered[v]:
                continue
            cnt += 1
            if use_local:
                covered[space.ball(v, e)] = True
            else:
                covered[space.dist_from(v) <= e] = True
        counts.append(cnt)
    return _loglog_slope(scales, counts)


def _loglog_slope(scales, counts) -> tuple[float, float]:
    x = np.log(1.0 / np.asarray(scales, dtype=float))
    y = np.log(np.maximum(np.asarray(counts, dtype=float), 1.0))
    a = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(a, y, rcond=None)
    dof = max(len(x) - 2, 1)
    s2 = (res[0] / dof) if len(res) else 0.0
    sxx = np.sum((x - x.mean()) ** 2)
    return float(coef[0]), float(np.sqrt(s2 / sxx)) if sxx > 0 else 0.0


# ---------------------------------------------------------------------------
# strong-confluence statistic

def end_deficit(g1: GeodesicPath, g2: GeodesicPath) -> float:
    """Largest end-segment of either geodesic not contained in the other.

    For one direction: the length of the prefix before the first vertex
    lying on the other path, or of the suffix after the last such vertex
    (the whole length if they are disjoint).  The pair deficit is the max
    over both directions.
    """
    def one_sided(p: GeodesicPath, other: GeodesicPath) -> float:
        members = set(other.vertices)
        hits = [i for i, v in enumerate(p.vertices) if v in members]
        if not hits:
            return p.length
        prefix = float(p.cumlen[hits[0]])
        suffix = p.length - float(p.cumlen[hits[-1]])
        return max(prefix, suffix)

    return max(one_sided(g1, g2), one_sided(g2, g1))


def strong_confluence_statistic(space, epsilon_list, rng: RngStream,
                                n_pairs: int = 200,
                                anchor_min_dist: float | None = None,
                                perturb_radii=None,
                                return_samples: bool = False):
    """Mean end deficit of geodesic pairs, tabulated by Hausdorff closeness.

    Samples anchor pairs, perturbs the endpoints within small balls to get
    a second geodesic, and reports for each epsilon the mean deficit over
    pairs whose Hausdorff distance is at most epsilon.  Rows with no
    qualifying pairs are flagged empty.
    """
    if space.n < 1000:
        raise ValueError("need a space with at least 1000 points")
    gen = rng.generator()
    eps_sorted = sorted(float(e) for e in epsilon_list)
    if anchor_min_dist is None:
        anchor_min_dist = 4.0 * max(eps_sorted)
    if perturb_radii is None:
        top = max(eps_sorted)
        perturb_radii = (0.0, top / 4.0, top / 2.0, top)
    samples: list[tuple[float, float]] = []  # (hausdorff, deficit)
    attempts = 0
    while len(samples) < n_pairs and attempts < 20 * n_pairs:
        attempts += 1
        a = int(gen.integers(space.n))
        b = int(gen.integers(space.n))
        if a == b:
            continue
        da = space.dist_from(a)
        if da[b] < anchor_min_dist:
            continue
        r = float(perturb_radii[gen.integers(len(perturb_radii))])
        if r == 0:
            a2, b2 = a, b
        else:
            near_a = np.flatnonzero(da <= r)
            db = space.dist_from(b)
            near_b = np.flatnonzero(db <= r)
            a2 = int(near_a[gen.integers(near_a.size)])
            b2 = int(near_b[gen.integers(near_b.size)])
            if a2 == b2:
                continue
        g1 = extract_geodesic(space, a, b, RngStream(int(gen.integers(1 << 62))))
        g2 = extract_geodesic(space, a2, b2, RngStream(int(gen.integers(1 << 62))))
        dh = hausdorff_distance(space, g1.vertices, g2.vertices)
        samples.append((dh, end_deficit(g1, g2)))
    rows = []
    for e in eps_sorted:
        sel = [d for (dh, d) in samples if dh <= e]
        rows.append({
            "epsilon": e,
            "count": len(sel),
            "mean_deficit": float(np.mean(sel)) if sel else None,
            "empty": not sel,
        })
    if return_samples:
        return rows, samples
    return rows


def isotonic_fit(values, weights=None) -> np.ndarray:
    """Nondecreasing least-squares fit (pool adjacent violators)."""
    y = [float(v) for v in values]
    w = [1.0] * len(y) if weights is None else [float(x) for x in weights]
    blocks = [[y[i] * w[i], w[i], 1] for i in range(len(y))]  # sum, weight, count
    out: list[list[float]] = []
    for blk in blocks:
        out.append(blk)
        while len(out) > 1 and out[-2][0] / out[-2][1] > out[-1][0] / out[-1][1]:
            s, ww, c = out.pop()
            out[-1][0] += s
            out[-1][1] += ww
            out[-1][2] += c
    fitted = []
    for s, ww, c in out:
        fitted.extend([s / ww] * int(c))
    return np.array(fitted)
