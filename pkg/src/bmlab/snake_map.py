"""Finite metric spaces built from label processes.

From a sampled excursion-plus-labels pair this module computes the seed
pseudo-distance between grid points (label sum minus twice the better of
the two arc minima), then closes it under chaining to get the largest
metric dominated by it.  The closure is an all-pairs shortest path over the
complete seed graph: vectorized Floyd-Warshall up to 1024 points, a C
implementation above that.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .gaussian import BrownianSnakeSample
from .rng import RngStream

__all__ = [
    "DiscreteBrownianMap",
    "d_circ",
    "d_circ_matrix",
    "quotient_metric",
    "resample_marked_points",
]

SIZE_CAP_DEFAULT = 4096
IDENTIFY_TOL = 1e-12


@dataclass
class DiscreteBrownianMap:
    """Finite pseudometric space with a root, dual root, and uniform mass.

    Points at pseudodistance below the identification tolerance stay
    distinct indices; ``identified_pairs`` records them.
    """

    dmat: np.ndarray
    root_index: int
    dual_root_index: int
    grid_times: np.ndarray
    seed_info: dict = field(default_factory=dict)
    identified_pairs: np.ndarray | None = None
    argmin_tied: bool = False

    def __post_init__(self):
        self.dmat = np.asarray(self.dmat, dtype=float)
        n = self.dmat.shape[0]
        if self.dmat.shape != (n, n):
            raise ValueError("dmat must be square")

    @property
    def n(self) -> int:
        return self.dmat.shape[0]

    @property
    def mass(self) -> float:
        return 1.0 / self.n

    def dist_to_root(self) -> np.ndarray:
        return self.dmat[self.root_index]

    def dump_binary(self, fp) -> None:
        """JSON header line + row-major float64 payload."""
        header = {"n": self.n, "format": "float64-row-major",
                  "root_index": int(self.root_index),
                  "dual_root_index": int(self.dual_root_index)}
        header.update({k: v for k, v in self.seed_info.items()
                       if isinstance(v, (int, float, str))})
        fp.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        fp.write(np.ascontiguousarray(self.dmat, dtype="<f8").tobytes())

    @classmethod
    def load_binary(cls, fp) -> "DiscreteBrownianMap":
        header = json.loads(fp.readline().decode("utf-8"))
        n = int(header["n"])
        dmat = np.frombuffer(fp.read(8 * n * n), dtype="<f8").reshape(n, n)
        return cls(dmat.copy(), int(header["root_index"]),
                   int(header["dual_root_index"]),
                   np.arange(n, dtype=float), seed_info=header)


def d_circ(snake: BrownianSnakeSample, i: int, j: int) -> float:
    """Seed pseudo-distance between grid indices i and j.

    Y_i + Y_j minus twice the larger of the two arc minima of Y, where the
    complementary arc wraps through both endpoints.
    """
    n = len(snake)
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("index out of range")
    y = snake.y_values
    lo, hi = (i, j) if i <= j else (j, i)
    inner = float(np.min(y[lo:hi + 1]))
    wrap = float(min(np.min(y[:lo + 1]), np.min(y[hi:])))
    return float(y[i] + y[j] - 2.0 * max(inner, wrap))


def d_circ_matrix(snake: BrownianSnakeSample) -> np.ndarray:
    """All-pairs seed pseudo-distances, O(n^2)."""
    y = snake.y_values
    n = len(y)
    inner = np.zeros((n, n))
    for i in range(n):
        inner[i, i:] = np.minimum.accumulate(y[i:])
    prefix = np.minimum.accumulate(y)
    suffix = np.minimum.accumulate(y[::-1])[::-1]
    wrap = np.minimum(prefix[:, None], suffix[None, :])  # i <= j: min(y[:i+1], y[j:])
    upper = y[:, None] + y[None, :] - 2.0 * np.maximum(inner, wrap)
    out = np.triu(upper)
    out = out + out.T - np.diag(np.diag(out))
    np.fill_diagonal(out, 0.0)
    return out


def _apsp_closure(w: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    if n <= 1024:
        d = w.copy()
        for k in range(n):
            np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
        return d
    from scipy.sparse.csgraph import floyd_warshall
    return floyd_warshall(w, directed=False)


def quotient_metric(snake: BrownianSnakeSample,
                    size_cap: int = SIZE_CAP_DEFAULT) -> DiscreteBrownianMap:
    """Largest metric dominated by the seed pseudo-distance.

    Computed as the shortest-path closure of the complete graph weighted by
    the seed values (the chain infimum over finitely many points is exactly
    this closure).  The root is the label argmin, the dual root is grid
    index 0.
    """
    n = len(snake)
    if n > size_cap:
        raise ResourceLimitError(
            f"n={n} exceeds the closure size cap {size_cap} (O(n^3))")
    seed = d_circ_matrix(snake)
    dmat = _apsp_closure(seed)
    close = np.argwhere(np.triu(dmat <= IDENTIFY_TOL, k=1))
    return DiscreteBrownianMap(
        dmat,
        root_index=snake.s_star_index,
        dual_root_index=0,
        grid_times=snake.x_path.times.copy(),
        identified_pairs=close if len(close) else None,
        argmin_tied=snake.argmin_tied,
    )


def resample_marked_points(bm: DiscreteBrownianMap, rng: RngStream) -> tuple[int, int]:
    """Two independent uniform indices, for re-rooted experiments."""
    gen = rng.generator()
    return int(gen.integers(bm.n)), int(gen.integers(bm.n))
