"""
blowup-lab — Normal Distribution Kernel
Standard normal CDF/PDF, the scaled zero-mean density, the closed-form
Gaussian exponential integral and the exp(u)·Φ(w) product helper.

All functions accept Python floats or numpy arrays and broadcast.
Scalar in, float out.
"""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .errors import DomainError, ProbabilityConsistencyError

ArrayLike    = Union[float, np.ndarray]
Probability  = float   # value in [0, 1]; see as_probability()

SQRT2          = math.sqrt(2.0)
CLAMP_WINDOW   = 1e-12
LOG_SPACE_EXP  = 30.0    # exp(u)·Φ(w) switches to log space above this exponent
LOG_SPACE_TAIL = -6.0    # ... or when u > 0 and w sits this far in the lower tail


# ─── Data Models ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NormalDensityParams:
    """Zero-mean normal density φ(0, variance)."""
    variance: float

    def __post_init__(self):
        if not (self.variance > 0.0) or not math.isfinite(self.variance):
            raise DomainError(f"variance must be finite and > 0, got {self.variance!r}")


# ─── Helpers ──────────────────────────────────────────────────────────────────

def _out(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def _reject_nan(z: np.ndarray, name: str) -> None:
    if np.isnan(z).any():
        raise DomainError(f"{name} must not be NaN")


def as_probability(value: ArrayLike) -> ArrayLike:
    """
    Clamp round-off excursions into [0, 1].
    Values inside [-1e-12, 1+1e-12] are clamped; anything further out means a
    formula is wrong and raises ProbabilityConsistencyError.
    """
    scalar = np.ndim(value) == 0
    v = np.asarray(value, dtype=float)
    bad = np.isnan(v) | (v < -CLAMP_WINDOW) | (v > 1.0 + CLAMP_WINDOW)
    if bad.any():
        raise ProbabilityConsistencyError(float(v[bad].flat[0]) if v.ndim else float(v))
    return _out(np.clip(v, 0.0, 1.0), scalar)


# ─── Normal distribution ──────────────────────────────────────────────────────

def std_normal_cdf(z: ArrayLike) -> ArrayLike:
    """Φ(z) through erfc, accurate in both tails. ±inf map to the CDF limits."""
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=float)
    _reject_nan(zz, "z")
    return _out(0.5 * special.erfc(-zz / SQRT2), scalar)


def log_std_normal_cdf(z: ArrayLike) -> ArrayLike:
    """log Φ(z); uses the asymptotic tail series far below zero."""
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=float)
    _reject_nan(zz, "z")
    return _out(special.log_ndtr(zz), scalar)


def normal_pdf(x: ArrayLike, params: NormalDensityParams) -> ArrayLike:
    """(2π·variance)^(-1/2) · exp(-x²/(2·variance))."""
    if not isinstance(params, NormalDensityParams):
        params = NormalDensityParams(float(params))
    scalar = np.ndim(x) == 0
    xx = np.asarray(x, dtype=float)
    v = params.variance
    return _out(np.exp(-xx * xx / (2.0 * v)) / math.sqrt(2.0 * math.pi * v), scalar)


def exp_times_phi(u: ArrayLike, w: ArrayLike) -> ArrayLike:
    """
    exp(u)·Φ(w) without overflow or cancellation.
    Large positive u paired with a deep lower-tail w is recombined as
    exp(u + log Φ(w)).
    """
    scalar = np.ndim(u) == 0 and np.ndim(w) == 0
    uu, ww = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(w, dtype=float))
    _reject_nan(uu, "u")
    _reject_nan(ww, "w")

    use_log = (uu > LOG_SPACE_EXP) | ((uu > 0.0) & (ww < LOG_SPACE_TAIL))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = np.exp(uu) * (0.5 * special.erfc(-ww / SQRT2))
        logged = np.exp(uu + special.log_ndtr(ww))
        out = np.where(use_log, logged, direct)
    # Φ(-inf) = 0 wins over any exponent; exp(-inf) = 0 wins over any Φ.
    out = np.where((ww == -np.inf) | (uu == -np.inf), 0.0, out)
    return _out(out, scalar)


def gaussian_exp_integral(a: float, b: float, k: float) -> float:
    """
    ∫_{-∞}^{k} exp(-(a x² + b x)) dx = exp(b²/4a) · √(π/a) · Φ((2ka + b)/√(2a)).
    k may be +inf.
    """
    if math.isnan(a) or math.isnan(b) or math.isnan(k):
        raise DomainError("gaussian_exp_integral arguments must not be NaN")
    if a <= 0.0:
        raise DomainError(f"a must be > 0, got {a!r}")

    w = (2.0 * k * a + b) / math.sqrt(2.0 * a) if math.isfinite(k) else k
    u = b * b / (4.0 * a)
    return math.sqrt(math.pi / a) * exp_times_phi(u, w)
