"""
blowup-lab — Monte Carlo Oracle
Path simulation used to check every closed form independently:
  - Wiener and pinned-bridge samplers on reproducible per-path Philox streams
  - the exact solution of the fatigue equation and its explosion time
  - ensemble crossing frequencies with the per-step bridge-crossing correction
  - the Euler-Maruyama scheme with Osgood step T_k = h / b(X_k)

Every path i of a run with seed s draws from Philox(key=s, counter=i·2^128),
so a path can be regenerated alone and ensembles do not depend on how the
paths are split across worker threads.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from .barrier_crossing import BridgePin, Horizon, LinearBarrier
from .blowup_cdf import InitialConditionSpec, ModelParams, _intercept_array, diffusion, drift
from .errors import DomainError, NumericError, ResourceGuardError
from .normal_math import Probability
from .settings import Settings, get_settings

logger = structlog.get_logger(__name__)

MAX_GRID_STEPS   = 10 ** 8
MIN_PATHS        = 100
BLOCK_CELLS      = 2 ** 22       # upper bound on matrix cells per block
EXPLODED         = math.inf      # marker for post-explosion values of the exact solution
Z_95             = 1.959963984540054
ENSEMBLE_STREAM  = 2 ** 62       # counter lane reserved for lock-step ensembles
NORMAL_CHUNK     = 4096


# ─── Enums ────────────────────────────────────────────────────────────────────

class PathStatus(str, Enum):
    EXPLODED          = "exploded"
    SURVIVED          = "survived"
    NONPOSITIVE_STATE = "nonpositive_state"


# ─── Data Models ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PathGrid:
    """Uniform grid {0, dt, 2dt, …, t_end} plus optional extra mark times."""
    t_end: float
    dt:    float
    marks: Tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.t_end > 0.0) or not math.isfinite(self.t_end):
            raise DomainError(f"t_end must be finite and > 0, got {self.t_end!r}")
        if not (self.dt > 0.0) or self.dt > self.t_end:
            raise DomainError(f"dt must satisfy 0 < dt <= t_end, got dt={self.dt!r}")
        if self.t_end / self.dt > MAX_GRID_STEPS:
            raise ResourceGuardError(f"grid of {self.t_end / self.dt:.3g} steps exceeds {MAX_GRID_STEPS:.0e}")
        object.__setattr__(self, "marks", tuple(float(m) for m in self.marks))

    def times(self) -> np.ndarray:
        n = int(math.ceil(self.t_end / self.dt - 1e-9))
        uniform = np.minimum(np.arange(n + 1) * self.dt, self.t_end)
        uniform[-1] = self.t_end
        extra = [m for m in self.marks if 0.0 < m <= self.t_end]
        times = np.union1d(uniform, extra)
        # drop near-duplicates created by floating multiples of dt
        keep = np.concatenate([[True], np.diff(times) > 1e-12 * self.t_end])
        times = times[keep]
        for m in extra:
            times[np.argmin(np.abs(times - m))] = m
        return times

    def index_of(self, t: float) -> int:
        times = self.times()
        i = int(np.argmin(np.abs(times - t)))
        if times[i] != t:
            raise DomainError(f"time {t!r} is not a grid point")
        return i


@dataclass(frozen=True)
class WienerPath:
    grid:   PathGrid
    times:  np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class PathEnsembleResult:
    estimate:  Probability
    n_paths:   int
    std_error: float
    ci95:      Tuple[float, float]
    seed:      int
    dt:        float
    successes: int

    @classmethod
    def from_count(cls, successes: int, n_paths: int, seed: int, dt: float) -> "PathEnsembleResult":
        est = successes / n_paths
        se = math.sqrt(est * (1.0 - est) / n_paths)
        ci = (max(0.0, est - Z_95 * se), min(1.0, est + Z_95 * se))
        return cls(est, n_paths, se, ci, seed, dt, successes)


@dataclass(frozen=True)
class ExplosionRecord:
    exploded:       bool
    tau_estimate:   float            # +inf when the path did not explode
    crossing_index: Optional[int]
    status:         PathStatus = PathStatus.SURVIVED


@dataclass(frozen=True)
class EulerTrajectory:
    times:  np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class EulerEnsembleResult:
    tau:    np.ndarray               # +inf where the path did not explode
    status: np.ndarray               # PathStatus values
    steps:  int

    def exploded_fraction(self) -> float:
        return float(np.mean(self.status == PathStatus.EXPLODED.value))


# ─── Random streams ───────────────────────────────────────────────────────────

def path_generator(seed: int, path_index: int) -> np.random.Generator:
    if seed < 0 or path_index < 0:
        raise DomainError("seed and path_index must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed, counter=path_index << 128))


def _increments(gen: np.random.Generator, steps: np.ndarray) -> np.ndarray:
    return gen.standard_normal(steps.size) * np.sqrt(steps)


def _check_ensemble(n_paths: int) -> None:
    if n_paths < MIN_PATHS:
        raise ResourceGuardError(f"n_paths must be >= {MIN_PATHS}, got {n_paths}")


def _blocks(n_paths: int, columns: int, settings: Settings) -> List[Tuple[int, int]]:
    rows = max(1, min(settings.block_size, BLOCK_CELLS // max(columns, 1)))
    return [(start, min(start + rows, n_paths)) for start in range(0, n_paths, rows)]


def _run_blocks(n_paths: int, columns: int, work: Callable[[int, int], int],
                settings: Optional[Settings] = None) -> int:
    settings = settings or get_settings()
    blocks = _blocks(n_paths, columns, settings)
    workers = min(settings.worker_count(), len(blocks))
    if workers <= 1:
        return sum(work(a, b) for a, b in blocks)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(lambda ab: work(*ab), blocks))


def _wiener_block(times: np.ndarray, seed: int, start: int, stop: int,
                  with_uniforms: bool) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    steps = np.diff(times)
    w = np.zeros((stop - start, times.size))
    u = np.empty((stop - start, steps.size)) if with_uniforms else None
    for row, i in enumerate(range(start, stop)):
        gen = path_generator(seed, i)
        w[row, 1:] = np.cumsum(_increments(gen, steps))
        if with_uniforms:
            u[row] = gen.random(steps.size)
    return w, u


def _count_crossings(clearance: np.ndarray, times: np.ndarray,
                     uniforms: Optional[np.ndarray]) -> int:
    """
    clearance[:, i] = barrier(t_i) − path(t_i) over the observed window.
    A path crosses on the grid when clearance <= 0, or inside a step with
    probability exp(−2 d_i d_{i+1} / Δt) when both ends are clear.
    """
    hit = (clearance <= 0.0).any(axis=1)
    if uniforms is not None and clearance.shape[1] > 1:
        d0, d1 = clearance[:, :-1], clearance[:, 1:]
        dt = np.diff(times[: clearance.shape[1]])
        with np.errstate(over="ignore"):
            p = np.where((d0 > 0.0) & (d1 > 0.0), np.exp(-2.0 * d0 * d1 / dt), 0.0)
        hit |= (uniforms[:, : p.shape[1]] < p).any(axis=1)
    return int(np.count_nonzero(hit))


# ─── Samplers ─────────────────────────────────────────────────────────────────

def sample_wiener(grid: PathGrid, seed: int, path_index: int) -> WienerPath:
    times = grid.times()
    values = np.zeros(times.size)
    values[1:] = np.cumsum(_increments(path_generator(seed, path_index), np.diff(times)))
    return WienerPath(grid, times, values)


def sample_pinned_bridge(grid: PathGrid, pin_value: float, seed: int, path_index: int) -> WienerPath:
    """W_t − (t/T) W_T + (t/T) x on a grid ending at T."""
    w = sample_wiener(grid, seed, path_index)
    frac = w.times / grid.t_end
    values = w.values - frac * w.values[-1] + frac * pin_value
    values[-1] = pin_value
    return WienerPath(grid, w.times, values)


def wiener_endpoint_moments(grid: PathGrid, n_paths: int, seed: int) -> Tuple[float, float]:
    """Sample mean and variance of W_{t_end} over an ensemble."""
    _check_ensemble(n_paths)
    ends = np.array([sample_wiener(grid, seed, i).values[-1] for i in range(n_paths)])
    return float(ends.mean()), float(ends.var(ddof=1))


# ─── Exact solution ───────────────────────────────────────────────────────────

def _explosion_from_base(times: np.ndarray, base: np.ndarray) -> ExplosionRecord:
    below = np.flatnonzero(base <= 0.0)
    if below.size == 0:
        return ExplosionRecord(False, math.inf, None, PathStatus.SURVIVED)
    k = int(below[0])
    if k == 0:
        return ExplosionRecord(True, 0.0, 0, PathStatus.EXPLODED)
    b0, b1 = base[k - 1], base[k]
    tau = times[k - 1] + (times[k] - times[k - 1]) * b0 / (b0 - b1)
    return ExplosionRecord(True, float(tau), k, PathStatus.EXPLODED)


def exact_solution_path(initial: float, w: WienerPath, params: ModelParams) -> Tuple[np.ndarray, ExplosionRecord]:
    """
    L_t = (initial^(1−p) − c1(p−1)t − c2(p−1)W_t)^(1/(1−p)) until the base first
    reaches zero; from then on the values are EXPLODED.
    """
    if not (initial > 0.0):
        raise DomainError(f"initial must be > 0, got {initial!r}")
    q = params.p - 1.0
    base = initial ** (-q) - params.c1 * q * w.times - params.c2 * q * w.values
    record = _explosion_from_base(w.times, base)

    values = np.full(w.times.size, EXPLODED)
    stop = record.crossing_index if record.exploded else w.times.size
    values[:stop] = base[:stop] ** (-1.0 / q)
    return values, record


def exact_tau_ensemble(initial: float, params: ModelParams, grid: PathGrid,
                       n_paths: int, seed: int, level: float = math.inf,
                       bridge_correction: bool = True,
                       settings: Optional[Settings] = None) -> np.ndarray:
    """
    First times the exact solution reaches `level` (explosion for level=inf),
    +inf if that does not happen on the grid.

    The event is W_t >= (initial^(1−p) − level^(1−p) − c1(p−1)t) / (c2(p−1)),
    a linear barrier. A grid crossing is placed by linear interpolation. With
    bridge_correction a crossing inside a step whose ends are both clear is
    drawn with probability exp(−2 d_i d_{i+1} / Δt) and placed at the step
    midpoint, so {τ <= t} has the exact law at every grid time.
    """
    _check_ensemble(n_paths)
    if not (initial > 0.0):
        raise DomainError(f"initial must be > 0, got {initial!r}")
    if not (level > initial):
        raise DomainError(f"level must exceed the initial value, got {level!r}")
    q = params.p - 1.0
    scale = params.c2 * q
    times = grid.times()
    steps = np.diff(times)
    midpoints = times[:-1] + 0.5 * steps
    # base of the closed form minus its value at `level`; zero at the event
    shifted = initial ** (-q) - (0.0 if math.isinf(level) else level ** (-q)) - params.c1 * q * times
    correct = bridge_correction and scale > 0.0

    taus = np.full(n_paths, math.inf)
    for start, stop in _blocks(n_paths, times.size, settings or get_settings()):
        w, u = _wiener_block(times, seed, start, stop, correct)
        base = shifted[None, :] - scale * w
        event = base[:, 1:] <= 0.0
        bridged = np.zeros_like(event)
        if correct:
            d0, d1 = base[:, :-1] / scale, base[:, 1:] / scale
            with np.errstate(over="ignore"):
                p_cross = np.where((d0 > 0.0) & (d1 > 0.0), np.exp(-2.0 * d0 * d1 / steps), 0.0)
            bridged = u < p_cross
            event |= bridged

        rows = np.flatnonzero(event.any(axis=1))
        k = np.argmax(event[rows], axis=1)
        b0, b1 = base[rows, k], base[rows, k + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            interpolated = times[k] + steps[k] * b0 / (b0 - b1)
        taus[start + rows] = np.where(bridged[rows, k], midpoints[k], interpolated)
    return taus


# ─── Ensemble crossing oracles ────────────────────────────────────────────────

def mc_blowup_cdf(r: float, params: ModelParams, g: InitialConditionSpec,
                  n_paths: int, dt: float, seed: int,
                  bridge_correction: bool = True,
                  settings: Optional[Settings] = None) -> PathEnsembleResult:
    """
    Frequency of {W_t >= R(t, W_T) for some t <= r} with I = g(W_T), simulated on
    [0, max(r, T)] with r and T inserted as grid points.
    """
    _check_ensemble(n_paths)
    params.require_noise()
    if not (r > 0.0) or not math.isfinite(r):
        raise DomainError(f"r must be finite and > 0, got {r!r}")

    grid = PathGrid(max(r, params.T), min(dt, max(r, params.T)), marks=(r, params.T))
    times = grid.times()
    i_t, i_r = grid.index_of(params.T), grid.index_of(r)
    slope = params.c1 / params.c2
    window = times[: i_r + 1]

    def work(start: int, stop: int) -> int:
        w, u = _wiener_block(times, seed, start, stop, bridge_correction)
        intercept = _intercept_array(w[:, i_t], params, g)
        clearance = intercept[:, None] - slope * window[None, :] - w[:, : i_r + 1]
        return _count_crossings(clearance, times, u)

    hits = _run_blocks(n_paths, times.size, work, settings)
    result = PathEnsembleResult.from_count(hits, n_paths, seed, grid.dt)
    logger.info("monte_carlo.blowup_cdf", r=r, n_paths=n_paths, seed=seed, dt=grid.dt,
                bridge_correction=bridge_correction, estimate=result.estimate, std_error=result.std_error)
    return result


def mc_bm_crossing(barrier: LinearBarrier, horizon: Horizon, n_paths: int, dt: float, seed: int,
                   bridge_correction: bool = True,
                   settings: Optional[Settings] = None) -> PathEnsembleResult:
    """Frequency of {W_t >= a + bt for some t <= r} for free Brownian motion."""
    _check_ensemble(n_paths)
    plus = barrier.to_plus()
    if not horizon.is_finite:
        raise DomainError("simulation needs a finite horizon")
    grid = PathGrid(horizon.r, min(dt, horizon.r))
    times = grid.times()

    def work(start: int, stop: int) -> int:
        w, u = _wiener_block(times, seed, start, stop, bridge_correction)
        clearance = plus.intercept + plus.slope * times[None, :] - w
        return _count_crossings(clearance, times, u)

    hits = _run_blocks(n_paths, times.size, work, settings)
    return PathEnsembleResult.from_count(hits, n_paths, seed, grid.dt)


def mc_bridge_crossing(barrier: LinearBarrier, horizon: Horizon, pin: BridgePin,
                       n_paths: int, dt: float, seed: int,
                       bridge_correction: bool = True,
                       settings: Optional[Settings] = None) -> PathEnsembleResult:
    """
    Frequency of {B_t >= a − bt for some t <= r} where B is pinned at B_T = x on
    [0, T] and continues as free Brownian motion from x after T.
    """
    _check_ensemble(n_paths)
    minus = barrier.to_minus()
    if not horizon.is_finite:
        raise DomainError("simulation needs a finite horizon")
    T, x = pin.pin_time, pin.pin_value
    grid = PathGrid(max(horizon.r, T), min(dt, max(horizon.r, T)), marks=(horizon.r, T))
    times = grid.times()
    i_t, i_r = grid.index_of(T), grid.index_of(horizon.r)
    frac = np.minimum(times / T, 1.0)
    window = times[: i_r + 1]

    def work(start: int, stop: int) -> int:
        w, u = _wiener_block(times, seed, start, stop, bridge_correction)
        w_t = w[:, i_t][:, None]
        bridge = np.where(times[None, :] <= T, w - frac * w_t + frac * x, x + (w - w_t))
        bridge[:, i_t] = x
        clearance = minus.intercept - minus.slope * window[None, :] - bridge[:, : i_r + 1]
        return _count_crossings(clearance, times, u)

    hits = _run_blocks(n_paths, times.size, work, settings)
    return PathEnsembleResult.from_count(hits, n_paths, seed, grid.dt)


# ─── Euler-Maruyama with Osgood step ──────────────────────────────────────────

def euler_osgood_path(initial: float, params: ModelParams, h: float, seed: int,
                      t_max: float, blowup_threshold: float = 1e6,
                      path_index: int = 0, max_steps: int = 10 ** 7) -> Tuple[EulerTrajectory, ExplosionRecord]:
    """
    X_{k+1} = X_k + T_k b(X_k) + σ(X_k) ΔW_k with T_k = h / b(X_k), ΔW_k ~ N(0, T_k).
    Explosion is declared at X_k >= blowup_threshold with τ = Σ T_j; paths that
    reach X_k <= 0 are censored with NONPOSITIVE_STATE.
    Any blowup_threshold above the initial value is accepted; the default 1e6
    stands in for infinity, smaller levels give the hitting time of that level.
    """
    if not (initial > 0.0):
        raise DomainError(f"initial must be > 0, got {initial!r}")
    if not (h > 0.0):
        raise DomainError(f"h must be > 0, got {h!r}")
    if not (blowup_threshold > initial):
        raise DomainError("blowup_threshold must exceed the initial value")

    gen = path_generator(seed, path_index)
    c1, c2, p = params.c1, params.c2, params.p
    noise_coef = 0.5 * p * c2 * c2
    x, t = float(initial), 0.0
    times, values = [t], [x]
    normals, cursor = gen.standard_normal(NORMAL_CHUNK), 0

    for step in range(max_steps):
        if x >= blowup_threshold:
            return (EulerTrajectory(np.asarray(times), np.asarray(values)),
                    ExplosionRecord(True, t, step, PathStatus.EXPLODED))
        if t >= t_max:
            return (EulerTrajectory(np.asarray(times), np.asarray(values)),
                    ExplosionRecord(False, math.inf, None, PathStatus.SURVIVED))

        if cursor == NORMAL_CHUNK:
            normals, cursor = gen.standard_normal(NORMAL_CHUNK), 0
        b = c1 * x ** p + noise_coef * x ** (2.0 * p - 1.0)
        tk = h / b
        x = x + tk * b + c2 * x ** p * math.sqrt(tk) * normals[cursor]
        t += tk
        cursor += 1

        if not math.isfinite(x) or not math.isfinite(t):
            raise NumericError("euler_osgood_path produced a non-finite state",
                               {"step": step, "t": t, "x": x, "h": h, "seed": seed})
        times.append(t)
        values.append(x)
        if x <= 0.0:
            return (EulerTrajectory(np.asarray(times), np.asarray(values)),
                    ExplosionRecord(False, math.inf, None, PathStatus.NONPOSITIVE_STATE))

    raise ResourceGuardError(f"euler_osgood_path exceeded max_steps={max_steps}")


def euler_osgood_ensemble(initial: float, params: ModelParams, h: float, n_paths: int,
                          seed: int, t_max: float, blowup_threshold: float = 1e6,
                          max_steps: int = 10 ** 7) -> EulerEnsembleResult:
    """
    All paths advanced in lock-step, each with its own Osgood step. One Philox
    lane (seed, ENSEMBLE_STREAM) feeds a normal per path per round. As in
    euler_osgood_path, blowup_threshold only needs to exceed the initial value.
    """
    _check_ensemble(n_paths)
    if not (initial > 0.0) or not (h > 0.0) or not (blowup_threshold > initial):
        raise DomainError("euler_osgood_ensemble needs initial > 0, h > 0 and blowup_threshold > initial")

    gen = path_generator(seed, ENSEMBLE_STREAM)
    x = np.full(n_paths, float(initial))
    t = np.zeros(n_paths)
    tau = np.full(n_paths, math.inf)
    status = np.full(n_paths, PathStatus.SURVIVED.value, dtype=object)
    active = np.ones(n_paths, dtype=bool)

    for step in range(max_steps):
        exploded = active & (x >= blowup_threshold)
        tau[exploded] = t[exploded]
        status[exploded] = PathStatus.EXPLODED.value
        active &= ~exploded
        active &= t < t_max
        if not active.any():
            break

        z = gen.standard_normal(n_paths)
        xa = x[active]
        b = drift(xa, params)
        tk = h / b
        xa = xa + tk * b + diffusion(xa, params) * np.sqrt(tk) * z[active]
        if not np.isfinite(xa).all():
            raise NumericError("euler_osgood_ensemble produced a non-finite state", {"step": step, "h": h})
        x[active] = xa
        t[active] += tk

        censored = active & (x <= 0.0)
        status[censored] = PathStatus.NONPOSITIVE_STATE.value
        active &= ~censored
    else:
        raise ResourceGuardError(f"euler_osgood_ensemble exceeded max_steps={max_steps}")

    result = EulerEnsembleResult(tau, status, step)
    logger.info("monte_carlo.euler_ensemble", n_paths=n_paths, h=h, steps=step,
                exploded_fraction=result.exploded_fraction())
    return result


# ─── Comparison helpers ───────────────────────────────────────────────────────

def empirical_cdf(samples: Sequence[float], points: Sequence[float]) -> np.ndarray:
    s = np.sort(np.asarray(samples, dtype=float))
    return np.searchsorted(s, np.asarray(points, dtype=float), side="right") / s.size


def sup_discrepancy(samples: Sequence[float], points: Sequence[float],
                    reference: Sequence[float]) -> float:
    return float(np.max(np.abs(empirical_cdf(samples, points) - np.asarray(reference, dtype=float))))
