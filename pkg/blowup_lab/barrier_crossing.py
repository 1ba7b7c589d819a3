"""
blowup-lab — Linear Barrier Crossing
Closed-form crossing probabilities of linear barriers by standard Brownian
motion (barrier a + bt) and by a Brownian bridge pinned at W_T = x
(barrier a − bt), for horizons before, at and after the pin.

Public operations take validated dataclasses and return floats. The
underscore kernels broadcast over numpy arrays of intercepts and pin values
and are what the blow-up CDF quadrature evaluates.
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .normal_math import ArrayLike, Probability, as_probability, exp_times_phi, std_normal_cdf


# ─── Enums ────────────────────────────────────────────────────────────────────

class Orientation(str, Enum):
    PLUS  = "plus"     # event {W_t >= a + b t}
    MINUS = "minus"    # event {W_t >= a - b t}


# ─── Data Models ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class LinearBarrier:
    intercept:   float
    slope:       float
    orientation: Orientation = Orientation.MINUS

    def __post_init__(self):
        if not (math.isfinite(self.intercept) and math.isfinite(self.slope)):
            raise DomainError(f"barrier intercept and slope must be finite, got {self!r}")
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    def to_plus(self) -> "LinearBarrier":
        """a − bt under MINUS is a + (−b)t under PLUS."""
        if self.orientation is Orientation.PLUS:
            return self
        return LinearBarrier(self.intercept, -self.slope, Orientation.PLUS)

    def to_minus(self) -> "LinearBarrier":
        if self.orientation is Orientation.MINUS:
            return self
        return LinearBarrier(self.intercept, -self.slope, Orientation.MINUS)

    def value_at(self, t: ArrayLike) -> ArrayLike:
        sign = 1.0 if self.orientation is Orientation.PLUS else -1.0
        return self.intercept + sign * self.slope * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class BridgePin:
    pin_time:  float    # T
    pin_value: float    # x

    def __post_init__(self):
        if not (self.pin_time > 0.0) or not math.isfinite(self.pin_time):
            raise DomainError(f"pin_time must be finite and > 0, got {self.pin_time!r}")
        if not math.isfinite(self.pin_value):
            raise DomainError(f"pin_value must be finite, got {self.pin_value!r}")


@dataclass(frozen=True)
class Horizon:
    r: float    # may be +inf

    def __post_init__(self):
        if math.isnan(self.r) or not (self.r > 0.0):
            raise DomainError(f"horizon r must be > 0, got {self.r!r}")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.r)


def _require(barrier: LinearBarrier, orientation: Orientation) -> None:
    if barrier.orientation is not orientation:
        raise DomainError(
            f"expected {orientation.value.upper()} barrier, got {barrier.orientation.value.upper()}; "
            "convert with to_plus()/to_minus()"
        )


# ─── Kernels (broadcasting) ───────────────────────────────────────────────────

def _bm_infinite(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    with np.errstate(over="ignore"):
        p = np.exp(-2.0 * a * b)
    return np.where((a > 0.0) & (b > 0.0), p, 1.0)


def _bm_finite(a: ArrayLike, b: ArrayLike, r: float) -> ArrayLike:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    sr = math.sqrt(r)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        p = std_normal_cdf(-(a / sr + b * sr)) + exp_times_phi(-2.0 * a * b, b * sr - a / sr)
    return np.where(a > 0.0, p, 1.0)


def _at_pin(a: ArrayLike, b: float, T: float, x: ArrayLike) -> ArrayLike:
    a, x = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    gap = a - x - b * T
    with np.errstate(over="ignore", invalid="ignore"):
        p = np.exp(-2.0 * a * gap / T)
    return np.where((a > 0.0) & (gap > 0.0), p, 1.0)


def _before_pin(a: ArrayLike, b: float, r: float, T: float, x: ArrayLike) -> ArrayLike:
    a, x = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    v = (T - r) / (r * T)          # 1/r − 1/T without cancellation near r = T
    sv = math.sqrt(v)
    gap = a - x - b * T
    with np.errstate(over="ignore", invalid="ignore"):
        z = gap / (T * sv)
        upper = z + a * sv
        lower = z - a * sv
        p = std_normal_cdf(-upper) + exp_times_phi(-2.0 * a * gap / T, lower)
    return np.where(a > 0.0, p, 1.0)


def _after_pin(a: ArrayLike, b: float, r: float, T: float, x: ArrayLike) -> ArrayLike:
    a, x = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    sh = math.sqrt(r - T)
    gap = a - x - b * T
    with np.errstate(over="ignore", invalid="ignore"):
        bridge_exp = -2.0 * a * gap / T
        w_up = gap / sh - b * sh
        w_dn = -b * sh - gap / sh
        p = (
            exp_times_phi(bridge_exp, w_up)
            - exp_times_phi(bridge_exp + 2.0 * gap * b, w_dn)
            + std_normal_cdf(-w_up)
            + exp_times_phi(2.0 * gap * b, w_dn)
        )
    return np.where((a > 0.0) & (gap > 0.0), p, 1.0)


def bridge_crossing_array(a: ArrayLike, b: float, r: float, T: float, x: ArrayLike) -> ArrayLike:
    """Dispatcher kernel over r < T / r = T / r > T for arrays of (a, x)."""
    if r < T:
        out = _before_pin(a, b, r, T, x)
    elif r == T:
        out = _at_pin(a, b, T, x)
    else:
        out = _after_pin(a, b, r, T, x)
    return as_probability(out)


# ─── Brownian motion (PLUS barrier a + bt) ────────────────────────────────────

def bm_crossing_infinite(barrier: LinearBarrier) -> Probability:
    """P(W_t >= a + bt for some t >= 0): exp(−2ab) if a, b > 0, else 1."""
    _require(barrier, Orientation.PLUS)
    return as_probability(float(_bm_infinite(barrier.intercept, barrier.slope)))


def bm_crossing_finite(barrier: LinearBarrier, horizon: Horizon) -> Probability:
    """P(W_t >= a + bt for some t <= r), any sign of b."""
    _require(barrier, Orientation.PLUS)
    if not horizon.is_finite:
        raise DomainError("bm_crossing_finite needs a finite horizon; use bm_crossing_infinite")
    return as_probability(float(_bm_finite(barrier.intercept, barrier.slope, horizon.r)))


# ─── Brownian bridge (MINUS barrier a − bt, pinned W_T = x) ───────────────────

def bridge_crossing_at_pin(barrier: LinearBarrier, pin: BridgePin) -> Probability:
    _require(barrier, Orientation.MINUS)
    return as_probability(float(_at_pin(barrier.intercept, barrier.slope, pin.pin_time, pin.pin_value)))


def bridge_crossing_before_pin(barrier: LinearBarrier, horizon: Horizon, pin: BridgePin) -> Probability:
    _require(barrier, Orientation.MINUS)
    if not horizon.r < pin.pin_time:
        raise DomainError(f"before_pin needs r < T, got r={horizon.r!r}, T={pin.pin_time!r}")
    return as_probability(float(
        _before_pin(barrier.intercept, barrier.slope, horizon.r, pin.pin_time, pin.pin_value)
    ))


def bridge_crossing_after_pin(barrier: LinearBarrier, horizon: Horizon, pin: BridgePin) -> Probability:
    """
    Crossing on [0, r] with r > T: the pinned bridge on [0, T] and the free
    continuation from x on [T, r] are conditionally independent, so the two
    crossing events combine as P(A) + P(B) − P(A)P(B).
    """
    _require(barrier, Orientation.MINUS)
    if not horizon.r > pin.pin_time:
        raise DomainError(f"after_pin needs r > T, got r={horizon.r!r}, T={pin.pin_time!r}")
    if not horizon.is_finite:
        # r -> inf: the continuation crosses a.s. unless the barrier keeps rising
        continuation = LinearBarrier(barrier.intercept - barrier.slope * pin.pin_time - pin.pin_value,
                                     -barrier.slope, Orientation.PLUS)
        a_part = bridge_crossing_at_pin(barrier, pin)
        b_part = bm_crossing_infinite(continuation)
        return as_probability(a_part + b_part - a_part * b_part)
    return as_probability(float(
        _after_pin(barrier.intercept, barrier.slope, horizon.r, pin.pin_time, pin.pin_value)
    ))


def bridge_crossing(barrier: LinearBarrier, horizon: Horizon, pin: BridgePin) -> Probability:
    """Dispatch on r < T, r = T, r > T."""
    _require(barrier, Orientation.MINUS)
    if horizon.r < pin.pin_time:
        return bridge_crossing_before_pin(barrier, horizon, pin)
    if horizon.r == pin.pin_time:
        return bridge_crossing_at_pin(barrier, pin)
    return bridge_crossing_after_pin(barrier, horizon, pin)
