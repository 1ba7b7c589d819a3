"""
blowup-lab — Normal Kernel Tests
Run: pytest tests/test_normal_math.py -v
"""
import math

import numpy as np
import pytest
from scipy import integrate, special

from blowup_lab.errors import DomainError, ProbabilityConsistencyError
from blowup_lab.normal_math import (
    NormalDensityParams,
    as_probability,
    exp_times_phi,
    gaussian_exp_integral,
    log_std_normal_cdf,
    normal_pdf,
    std_normal_cdf,
)

PHI_1      = 0.841344746068543
PDF_0      = 0.3989422804014327
SQRT_2PI   = math.sqrt(2.0 * math.pi)


# ─── Φ and log Φ ──────────────────────────────────────────────────────────────

class TestStdNormalCdf:
    def test_centre(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_one(self):
        assert std_normal_cdf(1.0) == pytest.approx(PHI_1, abs=1e-15)

    def test_infinities(self):
        assert std_normal_cdf(-math.inf) == 0.0
        assert std_normal_cdf(math.inf) == 1.0

    def test_deep_lower_tail_keeps_relative_accuracy(self):
        assert std_normal_cdf(-30.0) == pytest.approx(special.ndtr(-30.0), rel=1e-12)
        assert std_normal_cdf(-30.0) > 0.0

    def test_symmetry_on_array(self):
        z = np.linspace(-10, 10, 41)
        np.testing.assert_allclose(std_normal_cdf(z) + std_normal_cdf(-z), 1.0, atol=1e-15)

    def test_scalar_in_float_out(self):
        assert isinstance(std_normal_cdf(0.3), float)

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            std_normal_cdf(math.nan)


class TestLogStdNormalCdf:
    def test_matches_log_of_cdf_in_bulk(self):
        for z in (-5.0, -1.0, 0.0, 2.0):
            assert log_std_normal_cdf(z) == pytest.approx(math.log(std_normal_cdf(z)), rel=1e-13)

    def test_far_tail_asymptotic(self):
        z = -40.0
        expected = (-z * z / 2.0 - math.log(-z) - 0.5 * math.log(2.0 * math.pi)
                    + math.log1p(-1.0 / z**2 + 3.0 / z**4 - 15.0 / z**6))
        assert log_std_normal_cdf(z) == pytest.approx(expected, rel=1e-12)

    def test_finite_where_cdf_underflows(self):
        assert std_normal_cdf(-40.0) == 0.0
        assert math.isfinite(log_std_normal_cdf(-40.0))


# ─── Density ──────────────────────────────────────────────────────────────────

class TestNormalPdf:
    def test_unit_peak(self):
        assert normal_pdf(0.0, NormalDensityParams(1.0)) == pytest.approx(PDF_0, abs=1e-16)

    def test_variance_scales_peak(self):
        assert normal_pdf(0.0, NormalDensityParams(4.0)) == pytest.approx(PDF_0 / 2.0, rel=1e-15)

    def test_integrates_to_one(self):
        value, _ = integrate.quad(lambda x: normal_pdf(x, NormalDensityParams(2.5)), -np.inf, np.inf)
        assert value == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("variance", [0.0, -1.0, math.inf, math.nan])
    def test_bad_variance(self, variance):
        with pytest.raises(DomainError):
            NormalDensityParams(variance)


# ─── exp(u)·Φ(w) ──────────────────────────────────────────────────────────────

class TestExpTimesPhi:
    def test_zero_exponent_is_cdf(self):
        for w in (-3.0, 0.0, 2.0):
            assert exp_times_phi(0.0, w) == pytest.approx(std_normal_cdf(w), rel=1e-15)

    def test_large_exponent_against_deep_tail(self):
        value = exp_times_phi(1000.0, -50.0)
        assert math.isfinite(value) and value > 0.0
        assert math.log(value) == pytest.approx(1000.0 + special.log_ndtr(-50.0), rel=1e-12)

    def test_infinite_arguments(self):
        assert exp_times_phi(-math.inf, 0.0) == 0.0
        assert exp_times_phi(5.0, -math.inf) == 0.0
        assert exp_times_phi(-2.0, math.inf) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_broadcasts(self):
        out = exp_times_phi(np.array([0.0, 1.0]), 0.0)
        assert out.shape == (2,)
        assert out[1] == pytest.approx(0.5 * math.e, rel=1e-15)


# ─── Gaussian exponential integral ────────────────────────────────────────────

class TestGaussianExpIntegral:
    def test_full_line(self):
        assert gaussian_exp_integral(0.5, 0.0, math.inf) == pytest.approx(SQRT_2PI, rel=1e-15)

    def test_half_line(self):
        assert gaussian_exp_integral(1.0, 0.0, 0.0) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-15)

    @pytest.mark.parametrize("a,b,k", [(0.7, -1.3, 0.4), (2.0, 3.0, -1.0), (0.1, 0.5, 5.0)])
    def test_against_quad(self, a, b, k):
        reference, _ = integrate.quad(lambda x: math.exp(-(a * x * x + b * x)), -np.inf, k,
                                      epsabs=0.0, epsrel=1e-12)
        assert gaussian_exp_integral(a, b, k) == pytest.approx(reference, rel=1e-10)

    def test_minus_infinity_upper_limit(self):
        assert gaussian_exp_integral(1.0, 0.0, -math.inf) == 0.0

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_nonpositive_a(self, a):
        with pytest.raises(DomainError):
            gaussian_exp_integral(a, 0.0, 1.0)

    def test_nan(self):
        with pytest.raises(DomainError):
            gaussian_exp_integral(1.0, math.nan, 1.0)


# ─── Probability clamping ─────────────────────────────────────────────────────

class TestAsProbability:
    def test_round_off_is_clamped(self):
        assert as_probability(1.0 + 1e-13) == 1.0
        assert as_probability(-1e-13) == 0.0

    def test_real_excursion_raises(self):
        with pytest.raises(ProbabilityConsistencyError):
            as_probability(1.1)

    def test_nan_raises(self):
        with pytest.raises(ProbabilityConsistencyError):
            as_probability(np.array([0.2, math.nan]))
