"""Stable branching processes and their driving spectrally positive paths.

The branching family is parameterized by alpha in (1, 2) and a constant
c > 0 through its closed-form marginal laws:

    u_t(lam) = (lam^(1-alpha) + c t)^(1/(1-alpha))
    E[exp(-lam Y_t)] = exp(-Y_0 u_t(lam))
    P[extinction after t] = 1 - exp(-(c t)^(1/(1-alpha)) Y_0)

Calibration note: u_t above solves du/dt = -(c/(alpha-1)) u^alpha, so the
driving path matching these marginals has Laplace exponent
(c/(alpha-1)) * lam^alpha.  Simulation steps on the uniform grid of
branching time: a step from value y consumes driving time y*dt and adds an
increment with the exact stable law for that duration (the step-level form
of the integral time change).  The driving path reaches 0 by creeping,
which discrete increments with a light left tail essentially never
reproduce, so once the value falls below a small cutoff the remaining
lifetime is drawn from the exact extinction law instead.

The module also carries the truncated point process governing merge depths
along a boundary interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .paths import GridPath
from .rng import RngStream
from .stable import stable_increments

__all__ = [
    "CsbpPath",
    "LevyPath",
    "MergePPP",
    "u_t",
    "extinction_prob",
    "sample_levy",
    "sample_csbp",
    "lamperti_levy_to_csbp",
    "lamperti_csbp_to_levy",
    "csbp_excursion_lifetime_cdf",
    "sample_merge_ppp",
    "merge_depth",
    "csbp_marginals",
    "levy_exponent_scale",
    "absorption_cutoff",
    "extinction_time_from",
    "LawCheck",
]

MAX_STEPS_DEFAULT = 2_000_000


# ---------------------------------------------------------------------------
# closed forms

def u_t(alpha: float, c: float, lam: float, t: float) -> float:
    """Laplace-transform kernel of the branching process.

    Total on lam >= 0, t >= 0; lam = 0 maps to 0 and t = 0 returns lam.
    """
    _check_ac(alpha, c)
    if lam < 0 or t < 0:
        raise ValueError("lam and t must be nonnegative")
    if lam == 0.0:
        return 0.0
    if t == 0.0:
        return float(lam)
    return float((lam ** (1.0 - alpha) + c * t) ** (1.0 / (1.0 - alpha)))


def extinction_prob(alpha: float, c: float, y0: float, t: float) -> float:
    """P[the process started at y0 is still alive at time t]."""
    _check_ac(alpha, c)
    if y0 < 0:
        raise ValueError("y0 must be nonnegative")
    if t <= 0:
        raise ValueError("t must be positive")
    return float(-np.expm1(-((c * t) ** (1.0 / (1.0 - alpha))) * y0))


def _check_ac(alpha: float, c: float):
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (1, 2)")
    if c <= 0:
        raise ValueError("c must be positive")


# ---------------------------------------------------------------------------
# path containers

@dataclass
class LevyPath:
    """Spectrally positive stable path on a uniform grid."""

    alpha: float
    c: float
    path: GridPath

    def __post_init__(self):
        _check_ac(self.alpha, self.c)
        if self.path.kind != "levy":
            raise ValueError("path kind must be 'levy'")


@dataclass
class CsbpPath:
    """Branching-process path; absorbed at 0 and flat afterwards."""

    alpha: float
    c: float
    path: GridPath
    extinction_index: int | None = None

    def __post_init__(self):
        _check_ac(self.alpha, self.c)
        if self.path.kind != "csbp":
            raise ValueError("path kind must be 'csbp'")
        v = self.path.values
        if np.any(v < 0):
            raise ValueError("branching-process values must be nonnegative")
        zeros = np.flatnonzero(v == 0.0)
        if zeros.size:
            first = int(zeros[0])
            if np.any(v[first:] != 0.0):
                raise ValueError("path must stay at 0 once it hits 0")
            if self.extinction_index is None:
                self.extinction_index = first
            elif self.extinction_index != first:
                raise ValueError("extinction_index must be the first zero index")

    @property
    def extinction_time(self) -> float | None:
        if self.extinction_index is None:
            return None
        return float(self.path.times[self.extinction_index])


# ---------------------------------------------------------------------------
# simulation

def sample_levy(alpha: float, c: float, x0: float, horizon: float, dt: float,
                rng: RngStream, stop_at_zero: bool = True,
                max_steps: int = MAX_STEPS_DEFAULT) -> LevyPath:
    """Stable path started at x0 on a uniform dt-grid up to ``horizon``.

    With ``stop_at_zero`` the path is truncated at its first nonpositive
    grid value (the value is kept, so the crossing is visible).
    """
    _check_ac(alpha, c)
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    n_steps = int(np.ceil(horizon / dt))
    if n_steps > max_steps:
        raise ResourceLimitError(
            f"horizon/dt needs {n_steps} steps, budget is {max_steps}")
    incs = stable_increments(alpha, c, dt, rng, size=n_steps)
    values = np.concatenate([[x0], x0 + np.cumsum(incs)])
    if stop_at_zero:
        hit = np.flatnonzero(values <= 0.0)
        if hit.size:
            values = values[: int(hit[0]) + 1]
    times = dt * np.arange(len(values))
    return LevyPath(alpha, c, GridPath(times, values, "levy"))


def lamperti_levy_to_csbp(lp: LevyPath) -> CsbpPath:
    """Time-change a driving path into a branching-process path.

    The integral clock (of 1/X) is computed by trapezoidal quadrature on
    the grid; a nonpositive final value is replaced by absorption at 0,
    with the crossing time found by linear interpolation of the clock.
    """
    x = lp.path.values
    t_grid = lp.path.times
    if len(x) == 0:
        raise ValueError("empty path")
    if len(x) > 1 and np.any(x[:-1] <= 0):
        raise ValueError("driving path must be positive before its final value")
    absorbed = len(x) > 1 and x[-1] <= 0.0
    lead = x[:-1] if absorbed else x
    dt = np.diff(t_grid[: len(lead)])
    inv = 1.0 / lead
    clock = np.concatenate([[0.0], np.cumsum(0.5 * dt * (inv[:-1] + inv[1:]))])
    if absorbed:
        # partial step up to the zero crossing, left-value rectangle rule
        theta = x[-2] / (x[-2] - x[-1])
        step = t_grid[len(lead)] - t_grid[len(lead) - 1]
        zeta = clock[-1] + theta * step / x[-2]
        if zeta <= clock[-1]:
            zeta = np.nextafter(clock[-1], np.inf)
        times = np.concatenate([clock, [zeta]])
        values = np.concatenate([lead, [0.0]])
        ext = len(values) - 1
    else:
        times, values, ext = clock, lead.copy(), None
    return CsbpPath(lp.alpha, lp.c, GridPath(times, values, "csbp"),
                    extinction_index=ext)


def lamperti_csbp_to_levy(cp: CsbpPath) -> LevyPath:
    """Inverse time change; the clock integrates Y by trapezoids."""
    y = cp.path.values
    t_grid = cp.path.times
    if len(y) == 0:
        raise ValueError("empty path")
    keep = len(y) if cp.extinction_index is None else cp.extinction_index + 1
    yy = y[:keep]
    dt = np.diff(t_grid[:keep])
    clock = np.concatenate([[0.0], np.cumsum(0.5 * dt * (yy[:-1] + yy[1:]))])
    clock = np.maximum.accumulate(clock)
    # strictly increasing grid is required; collapse any stalled tail
    good = np.concatenate([[True], np.diff(clock) > 0])
    return LevyPath(cp.alpha, cp.c,
                    GridPath(clock[good], yy[good], "levy"))


def levy_exponent_scale(alpha: float, c: float) -> float:
    """Laplace-exponent constant of the driving path for branching c."""
    return c / (alpha - 1.0)


def extinction_time_from(alpha: float, c: float, y: np.ndarray,
                         gen) -> np.ndarray:
    """Exact extinction-time draws for processes started at ``y``.

    Inverts P[zeta <= s] = exp(-(c s)^(1/(1-alpha)) y).
    """
    u = gen.uniform(size=np.shape(y))
    return ((np.asarray(y) / -np.log(u)) ** (alpha - 1.0)) / c


def absorption_cutoff(alpha: float, c: float, dt: float) -> float:
    """Value level below which the endgame is drawn exactly (one driving
    step's noise scale); ``c`` is the branching constant."""
    return (levy_exponent_scale(alpha, c) * dt) ** (1.0 / alpha)


def sample_csbp(alpha: float, c: float, y0: float, horizon: float, dt: float,
                rng: RngStream, max_steps: int = MAX_STEPS_DEFAULT) -> CsbpPath:
    """Branching-process path from y0, absorbed at 0, truncated at ``horizon``.

    Steps live on the uniform dt-grid of branching time: each step consumes
    driving time y*dt and adds an increment with the exact stable law for
    that duration (the step-level form of the integral time change).  Once
    the value falls below ``absorption_cutoff`` the remaining lifetime is
    drawn from the exact extinction law and the path is pinned at 0 from
    there on.
    """
    _check_ac(alpha, c)
    if y0 < 0:
        raise ValueError("y0 must be nonnegative")
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    n_steps = int(np.ceil(horizon / dt))
    if n_steps > max_steps:
        raise ResourceLimitError(
            f"horizon/dt needs {n_steps} steps, budget is {max_steps}")
    if y0 == 0.0:
        times0 = np.array([0.0, horizon])
        return CsbpPath(alpha, c, GridPath(times0, np.zeros(2), "csbp"),
                        extinction_index=0)
    gen = rng.generator()
    c_levy = levy_exponent_scale(alpha, c)
    cutoff = absorption_cutoff(alpha, c, dt)
    times = [0.0]
    vals = [float(y0)]
    ext = None
    y = float(y0)
    if y <= cutoff:
        ext = float(extinction_time_from(alpha, c, y, gen))
    else:
        for k in range(1, n_steps + 1):
            inc = float(stable_increments(alpha, c_levy, y * dt, gen, size=1)[0])
            y = y + inc
            t_now = k * dt
            if y <= cutoff:
                rem = 0.0 if y <= 0 else float(extinction_time_from(alpha, c, y, gen))
                ext = t_now + rem
                break
            times.append(t_now)
            vals.append(y)
    if ext is not None and ext <= horizon:
        times.append(float(ext))
        vals.append(0.0)
        return CsbpPath(alpha, c, GridPath(np.array(times), np.array(vals), "csbp"),
                        extinction_index=len(vals) - 1)
    return CsbpPath(alpha, c, GridPath(np.array(times), np.array(vals), "csbp"),
                    extinction_index=None)


def csbp_marginals(alpha: float, c: float, y0: float, t_targets, dt: float,
                   rng: RngStream, size: int,
                   max_steps: int = MAX_STEPS_DEFAULT,
                   cutoff: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Marginal values of ``size`` independent paths at the given times.

    Returns (values, extinction_times): values[k, j] is the path value at
    t_targets[j] (0 if extinct by then), extinction_times[k] is +inf for
    paths alive at the last target.  Same stepping and exact endgame as
    :func:`sample_csbp`, vectorized across paths.  Paths inside the endgame
    report their entry value until their drawn death time.

    ``cutoff`` overrides the endgame level; a rescaled problem should scale
    it along with the state (scheme self-similarity).
    """
    _check_ac(alpha, c)
    t_targets = np.sort(np.asarray(t_targets, dtype=float))
    horizon = float(t_targets[-1])
    n_steps = int(np.ceil(horizon / dt))
    if n_steps > max_steps:
        raise ResourceLimitError(
            f"horizon/dt needs {n_steps} steps, budget is {max_steps}")
    gen = rng.generator()
    c_levy = levy_exponent_scale(alpha, c)
    if cutoff is None:
        cutoff = absorption_cutoff(alpha, c, dt)
    y = np.full(size, float(y0))
    ext_time = np.full(size, np.inf)
    snapshots = np.empty((size, len(t_targets)))
    target_steps = [int(round(tt / dt)) for tt in t_targets]
    if y0 == 0.0:
        ext_time[:] = 0.0
        return np.zeros((size, len(t_targets))), ext_time
    if y0 <= cutoff:
        ext_time[:] = extinction_time_from(alpha, c, y, gen)
        snapshots[:] = y[:, None]
    else:
        active = np.arange(size)
        for k in range(1, n_steps + 1):
            if active.size:
                ya = y[active]
                inc = stable_increments(alpha, c_levy, ya * dt, gen, size=active.size)
                yn = ya + inc
                ended = yn <= cutoff
                if np.any(ended):
                    rows = active[ended]
                    entry = np.maximum(yn[ended], 0.0)
                    ext_time[rows] = k * dt + np.where(
                        entry > 0,
                        extinction_time_from(alpha, c, entry, gen), 0.0)
                    y[rows] = entry
                y[active[~ended]] = yn[~ended]
                active = active[~ended]
            for j, ks in enumerate(target_steps):
                if ks == k:
                    snapshots[:, j] = y
    out = np.empty((size, len(t_targets)))
    for j, tt in enumerate(t_targets):
        out[:, j] = np.where(ext_time <= tt, 0.0, snapshots[:, j])
    return out, ext_time


# ---------------------------------------------------------------------------
# excursion lifetime law (window-normalized)

def csbp_excursion_lifetime_cdf(alpha: float, t: float, t_min: float,
                                t_max: float) -> float:
    """CDF at t of the excursion lifetime law restricted to [t_min, t_max].

    The unrestricted density is proportional to t^(1/(1-alpha) - 1) (an
    infinite measure near 0); only window-normalized values are exposed.
    """
    _check_ac(alpha, 1.0)
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    if t < t_min or t > t_max:
        raise ValueError("t outside the window")
    q = 1.0 / (1.0 - alpha)
    return float((t_min ** q - t ** q) / (t_min ** q - t_max ** q))


# ---------------------------------------------------------------------------
# merge point process

@dataclass
class MergePPP:
    """Truncated Poisson points (s, x) on [0,1] x (x_min, inf), intensity x^-3.

    The expected number of points above depth w over an s-interval of
    length L is L / (2 w^2).
    """

    points: np.ndarray  # shape (m, 2): columns s, x
    x_min: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.x_min <= 0:
            raise ValueError("x_min must be positive")
        if self.points.size and np.any(self.points[:, 1] < self.x_min):
            raise ValueError("all depths must be at least x_min")


def sample_merge_ppp(x_min: float, rng: RngStream) -> MergePPP:
    if x_min <= 0:
        raise ValueError("x_min must be positive")
    gen = rng.generator()
    mean = 0.5 / (x_min * x_min)
    m = int(gen.poisson(mean))
    s = gen.uniform(0.0, 1.0, size=m)
    x = x_min / np.sqrt(1.0 - gen.uniform(0.0, 1.0, size=m))
    return MergePPP(np.column_stack([s, x]), x_min)


def merge_depth(ppp: MergePPP, a: float, b: float) -> float:
    """Largest depth among points with s in (a, b); 0 if none (i.e. the
    merge happens below the truncation level)."""
    if a >= b:
        raise ValueError("need a < b")
    if ppp.points.size == 0:
        return 0.0
    s, x = ppp.points[:, 0], ppp.points[:, 1]
    mask = (s > a) & (s < b)
    if not np.any(mask):
        return 0.0
    return float(np.max(x[mask]))


# ---------------------------------------------------------------------------
# law-test records

@dataclass
class LawCheck:
    """One Monte Carlo law check: estimate vs closed-form target."""

    name: str
    estimate: float
    se: float
    target: float
    tolerance: float
    passed: bool
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, name: str, samples: np.ndarray, target: float,
                     se_mult: float = 3.0, abs_slack: float = 0.0,
                     **extra) -> "LawCheck":
        est = float(np.mean(samples))
        se = float(np.std(samples, ddof=1) / np.sqrt(len(samples)))
        tol = se_mult * se + abs_slack
        return cls(name, est, se, float(target), tol,
                   abs(est - target) < tol, dict(extra))

    def to_record(self) -> dict:
        rec = {
            "name": self.name,
            "estimate": self.estimate,
            "se": self.se,
            "target": self.target,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
        }
        rec.update(self.extra)
        return rec
