"""
blowup-lab — Blow-up Time Distribution
Distribution function P(τ <= r) of the explosion time of the fatigue
equation with anticipating initial value I = g(W_T).

τ is the first time W reaches the barrier R(t, W_T) = R(0, W_T) − (c1/c2)t,
so P(τ <= r) = ∫ P(bridge crosses R(·, x) on [0, r] | W_T = x) φ(0, T)(x) dx.
The integral is taken in u = x/√T against the unit normal weight, with
panels split wherever a(x) = R(T, x) − x changes sign or g has a kink.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.optimize import brentq

from .barrier_crossing import (
    BridgePin,
    Horizon,
    LinearBarrier,
    Orientation,
    bm_crossing_finite,
    bridge_crossing,
    bridge_crossing_array,
)
from .errors import BlowupLabError, DomainError, NumericError, QuadratureConvergenceError
from .normal_math import ArrayLike, Probability, as_probability, normal_pdf, NormalDensityParams
from .quadrature import integrate

logger = structlog.get_logger(__name__)

INTERCEPT_CAP   = 1e300
LOG_INTERCEPT_CAP = math.log(INTERCEPT_CAP)
ROOT_SCAN_POINTS = 4097
# brentq refuses rtol below 4 eps
ROOT_RTOL        = 4.0 * np.finfo(float).eps


# ─── Enums ────────────────────────────────────────────────────────────────────

class InitialKind(str, Enum):
    CONSTANT       = "constant"
    EXPONENTIAL    = "exponential"
    AFFINE_CLAMPED = "affine_clamped"
    TABLE          = "table"


class Regime(str, Enum):
    BEFORE_T = "BEFORE_T"
    AT_T     = "AT_T"
    AFTER_T  = "AFTER_T"


class PointStatus(str, Enum):
    OK            = "ok"
    NOT_CONVERGED = "not_converged"
    FAILED        = "failed"


# ─── Data Models ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ModelParams:
    """
    Constants of the generalized Paris law
        dL = (c1 L^p + p c2²/2 L^(2p−1)) dt + c2 L^p dW
    and the anticipation horizon T of the initial value g(W_T).

    allow_zero_noise admits c2 = 0 for deterministic scheme checks; every
    analytic operation still requires c2 > 0.
    """
    c1: float
    c2: float
    p:  float
    T:  float
    allow_zero_noise: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("c1", "c2", "p", "T"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.c1 <= 0.0:
            raise DomainError(f"c1 must be > 0, got {self.c1!r}")
        if self.c2 < 0.0 or (self.c2 == 0.0 and not self.allow_zero_noise):
            raise DomainError(f"c2 must be > 0, got {self.c2!r}")
        if self.p <= 1.0:
            raise DomainError(f"p must be > 1 (explosive regime), got {self.p!r}")
        if self.T <= 0.0:
            raise DomainError(f"T must be > 0, got {self.T!r}")

    def require_noise(self) -> None:
        if self.c2 <= 0.0:
            raise DomainError("this operation needs c2 > 0")


@dataclass(frozen=True)
class InitialConditionSpec:
    """Positive Borel function g defining the initial value I = g(W_T)."""
    kind:   InitialKind
    l0:     Optional[float] = None
    scale:  Optional[float] = None
    rate:   Optional[float] = None
    slope:  Optional[float] = None
    offset: Optional[float] = None
    floor:  Optional[float] = None
    knots:  Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", InitialKind(self.kind))
        object.__setattr__(self, "knots", tuple((float(x), float(y)) for x, y in self.knots))

        def need(*names):
            for name in names:
                value = getattr(self, name)
                if value is None or not math.isfinite(value):
                    raise DomainError(f"g.{name} is required and must be finite for kind {self.kind.value}")

        if self.kind is InitialKind.CONSTANT:
            need("l0")
            if self.l0 <= 0.0:
                raise DomainError(f"g.l0 must be > 0, got {self.l0!r}")
        elif self.kind is InitialKind.EXPONENTIAL:
            need("scale", "rate")
            if self.scale <= 0.0:
                raise DomainError(f"g.scale must be > 0, got {self.scale!r}")
        elif self.kind is InitialKind.AFFINE_CLAMPED:
            need("slope", "offset", "floor")
            if self.floor <= 0.0:
                raise DomainError(f"g.floor must be > 0, got {self.floor!r}")
        else:
            if len(self.knots) < 1:
                raise DomainError("g.knots needs at least one (x, g(x)) pair")
            xs = [x for x, _ in self.knots]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise DomainError("g.knots must be strictly increasing in x")
            if any(not (y > 0.0) or not math.isfinite(y) for _, y in self.knots):
                raise DomainError("g.knots values must be finite and > 0")

    # ── Constructors ──────────────────────────────────────────────────────────

    @classmethod
    def constant(cls, l0: float) -> "InitialConditionSpec":
        return cls(InitialKind.CONSTANT, l0=l0)

    @classmethod
    def exponential(cls, scale: float, rate: float) -> "InitialConditionSpec":
        return cls(InitialKind.EXPONENTIAL, scale=scale, rate=rate)

    @classmethod
    def affine_clamped(cls, slope: float, offset: float, floor: float) -> "InitialConditionSpec":
        return cls(InitialKind.AFFINE_CLAMPED, slope=slope, offset=offset, floor=floor)

    @classmethod
    def table(cls, knots: Sequence[Tuple[float, float]]) -> "InitialConditionSpec":
        return cls(InitialKind.TABLE, knots=tuple(knots))

    # ── Evaluation ────────────────────────────────────────────────────────────

    def log_g(self, x: ArrayLike) -> ArrayLike:
        xx = np.asarray(x, dtype=float)
        if self.kind is InitialKind.CONSTANT:
            out = np.full(xx.shape, math.log(self.l0))
        elif self.kind is InitialKind.EXPONENTIAL:
            out = math.log(self.scale) + self.rate * xx
        elif self.kind is InitialKind.AFFINE_CLAMPED:
            out = np.log(np.maximum(self.floor, self.slope * xx + self.offset))
        else:
            xs, ys = zip(*self.knots)
            out = np.log(np.interp(xx, xs, ys))
        return float(out) if np.ndim(x) == 0 else out

    def g(self, x: ArrayLike) -> ArrayLike:
        with np.errstate(over="ignore"):
            out = np.exp(self.log_g(x))
        return float(out) if np.ndim(x) == 0 else out

    def kinks(self) -> List[float]:
        """x positions where g is not smooth."""
        if self.kind is InitialKind.AFFINE_CLAMPED and self.slope != 0.0:
            return [(self.floor - self.offset) / self.slope]
        if self.kind is InitialKind.TABLE:
            return [x for x, _ in self.knots]
        return []


@dataclass(frozen=True)
class QuadratureConfig:
    truncation_sigmas: float = 8.0
    abs_tol:           float = 1e-9
    max_refinements:   int   = 20

    def __post_init__(self):
        if not (self.truncation_sigmas >= 4.0):
            raise DomainError(f"truncation_sigmas must be >= 4, got {self.truncation_sigmas!r}")
        if not (self.abs_tol > 0.0):
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if self.max_refinements < 0:
            raise DomainError(f"max_refinements must be >= 0, got {self.max_refinements!r}")


@dataclass(frozen=True)
class CdfPoint:
    r:                         float
    probability:               Probability
    regime:                    Regime
    quadrature_error_estimate: float
    status:                    PointStatus   = PointStatus.OK
    message:                   Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status is PointStatus.OK


def regime_of(r: float, T: float) -> Regime:
    if r < T:
        return Regime.BEFORE_T
    if r == T:
        return Regime.AT_T
    return Regime.AFTER_T


# ─── Model coefficients ───────────────────────────────────────────────────────

def drift(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """b(x) = c1 x^p + (p c2²/2) x^(2p−1)."""
    xx = np.asarray(x, dtype=float)
    out = params.c1 * xx ** params.p + 0.5 * params.p * params.c2 ** 2 * xx ** (2.0 * params.p - 1.0)
    return float(out) if np.ndim(x) == 0 else out


def diffusion(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """σ(x) = c2 x^p."""
    xx = np.asarray(x, dtype=float)
    out = params.c2 * xx ** params.p
    return float(out) if np.ndim(x) == 0 else out


def deterministic_blowup_time(initial: float, params: ModelParams) -> float:
    """Blow-up time of the noise-free equation: initial^(1−p) / (c1 (p−1))."""
    if not (initial > 0.0):
        raise DomainError(f"initial must be > 0, got {initial!r}")
    return initial ** (1.0 - params.p) / (params.c1 * (params.p - 1.0))


# ─── Barrier geometry ─────────────────────────────────────────────────────────

def barrier_slope(params: ModelParams) -> float:
    params.require_noise()
    return params.c1 / params.c2


def _intercept_array(x: ArrayLike, params: ModelParams, g: InitialConditionSpec) -> np.ndarray:
    log_r0 = -math.log(params.c2 * (params.p - 1.0)) - (params.p - 1.0) * np.asarray(g.log_g(x), dtype=float)
    capped = log_r0 > LOG_INTERCEPT_CAP
    if capped.any():
        logger.debug("barrier_intercept.capped", count=int(np.count_nonzero(capped)), cap=INTERCEPT_CAP)
    return np.exp(np.minimum(log_r0, LOG_INTERCEPT_CAP))


def barrier_intercept(x: ArrayLike, params: ModelParams, g: InitialConditionSpec) -> ArrayLike:
    """R(0, x) = 1 / (c2 (p−1) g(x)^(p−1)), evaluated in log space and capped at 1e300."""
    params.require_noise()
    out = _intercept_array(x, params, g)
    return float(out) if np.ndim(x) == 0 else out


def barrier_at(t: ArrayLike, x: ArrayLike, params: ModelParams, g: InitialConditionSpec) -> ArrayLike:
    """R(t, x) = R(0, x) − (c1/c2) t."""
    out = _intercept_array(x, params, g) - barrier_slope(params) * np.asarray(t, dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def a_of_x(x: ArrayLike, params: ModelParams, g: InitialConditionSpec) -> ArrayLike:
    """a(x) = R(0, x) − x − c1 T / c2 = R(T, x) − x."""
    params.require_noise()
    xx = np.asarray(x, dtype=float)
    out = _intercept_array(xx, params, g) - xx - params.c1 * params.T / params.c2
    return float(out) if np.ndim(x) == 0 else out


def barrier_sign_changes(params: ModelParams, g: InitialConditionSpec,
                         lo: float, hi: float) -> List[float]:
    """Roots of a(x) in (lo, hi): scan for sign changes, then bisect with brentq."""
    scan = np.union1d(np.linspace(lo, hi, ROOT_SCAN_POINTS),
                      [k for k in g.kinks() if lo < k < hi])
    values = a_of_x(scan, params, g)
    roots = []
    for left, right, fl, fr in zip(scan[:-1], scan[1:], values[:-1], values[1:]):
        if fl == 0.0:
            roots.append(float(left))
        elif fl * fr < 0.0:
            try:
                roots.append(brentq(lambda z: a_of_x(z, params, g), left, right, xtol=1e-14, rtol=ROOT_RTOL))
            except (ValueError, RuntimeError) as e:
                raise NumericError(f"root of a(x) in [{left!r}, {right!r}] not found: {e}",
                                   {"left": float(left), "right": float(right)}) from e
    return roots


# ─── Conditional crossing ─────────────────────────────────────────────────────

def conditional_crossing(x: float, r: float, params: ModelParams, g: InitialConditionSpec) -> Probability:
    """P(W crosses R(·, x) on [0, r] | W_T = x)."""
    barrier = LinearBarrier(barrier_intercept(x, params, g), barrier_slope(params), Orientation.MINUS)
    return bridge_crossing(barrier, Horizon(r), BridgePin(params.T, x))


def _conditional_array(x: np.ndarray, r: float, params: ModelParams, g: InitialConditionSpec) -> np.ndarray:
    return bridge_crossing_array(_intercept_array(x, params, g), params.c1 / params.c2, r, params.T, x)


def unconditional_cdf(r: float, params: ModelParams, l0: float) -> Probability:
    """P(τ <= r) for a deterministic initial value l0 (linear barrier, no pin)."""
    params.require_noise()
    a0 = 1.0 / (params.c2 * (params.p - 1.0) * l0 ** (params.p - 1.0))
    return bm_crossing_finite(LinearBarrier(a0, -params.c1 / params.c2, Orientation.PLUS), Horizon(r))


# ─── Distribution function ────────────────────────────────────────────────────

def blowup_cdf(r: float, params: ModelParams, g: InitialConditionSpec,
               quad: Optional[QuadratureConfig] = None) -> CdfPoint:
    """P(τ <= r) as a quadrature of the conditional crossing probability."""
    quad = quad or QuadratureConfig()
    params.require_noise()
    if math.isnan(r) or not (r > 0.0) or not math.isfinite(r):
        raise DomainError(f"r must be finite and > 0, got {r!r}")

    sqrt_t = math.sqrt(params.T)
    limit = quad.truncation_sigmas
    unit = NormalDensityParams(1.0)

    def integrand(u: np.ndarray) -> np.ndarray:
        return _conditional_array(sqrt_t * u, r, params, g) * normal_pdf(u, unit)

    roots_x = barrier_sign_changes(params, g, -limit * sqrt_t, limit * sqrt_t)
    kinks_x = [k for k in g.kinks() if -limit * sqrt_t < k < limit * sqrt_t]
    breakpoints = [-limit, limit] + [z / sqrt_t for z in roots_x + kinks_x]

    result = integrate(integrand, breakpoints, abs_tol=quad.abs_tol, max_refinements=quad.max_refinements)

    value = result.value
    if 1.0 < value <= 1.0 + result.error:
        value = 1.0
    elif -result.error <= value < 0.0:
        value = 0.0

    point = CdfPoint(
        r=r,
        probability=as_probability(value),
        regime=regime_of(r, params.T),
        quadrature_error_estimate=result.error,
    )
    logger.debug("blowup_cdf.point", r=r, regime=point.regime.value, probability=point.probability,
                 error=result.error, panels=result.panels, roots=len(roots_x))
    return point


def blowup_cdf_curve(r_grid: Sequence[float], params: ModelParams, g: InitialConditionSpec,
                     quad: Optional[QuadratureConfig] = None,
                     max_workers: Optional[int] = None) -> List[CdfPoint]:
    """
    Pointwise blowup_cdf over a strictly increasing grid. Failures do not
    abort the curve: each point carries its own status.
    """
    quad = quad or QuadratureConfig()
    grid = [float(r) for r in r_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("r_grid must be strictly increasing")

    def one(r: float) -> CdfPoint:
        try:
            return blowup_cdf(r, params, g, quad)
        except QuadratureConvergenceError as e:
            return CdfPoint(r, float(np.clip(e.best_estimate, 0.0, 1.0)), regime_of(r, params.T),
                            e.error_estimate, PointStatus.NOT_CONVERGED, str(e))
        except BlowupLabError as e:
            return CdfPoint(r, math.nan, regime_of(r, params.T) if r > 0 else Regime.BEFORE_T,
                            math.nan, PointStatus.FAILED, str(e))

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            points = list(pool.map(one, grid))
    else:
        points = [one(r) for r in grid]

    for prev, cur in zip(points, points[1:]):
        if prev.ok and cur.ok and cur.probability < prev.probability - 2.0 * quad.abs_tol:
            logger.warning("blowup_cdf.non_monotone", r_prev=prev.r, r=cur.r,
                           drop=prev.probability - cur.probability)
    return points
