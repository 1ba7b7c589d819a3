"""
blowup-lab — Quadrature Engine Tests
Run: pytest tests/test_quadrature.py -v
"""
import math

import numpy as np
import pytest
from scipy import integrate as scipy_integrate

from blowup_lab.errors import DomainError, QuadratureConvergenceError
from blowup_lab.quadrature import NODES, W_GAUSS, W_KRONROD, gauss_kronrod_panels, integrate


class TestRule:
    def test_weights_sum_to_two(self):
        assert W_KRONROD.sum() == pytest.approx(2.0, abs=1e-15)
        assert W_GAUSS.sum() == pytest.approx(2.0, abs=1e-15)

    def test_nodes_symmetric(self):
        np.testing.assert_allclose(NODES, -NODES[::-1], atol=0.0)

    def test_exact_for_polynomials(self):
        # K15 integrates degree 22 exactly, G7 degree 13
        value, error = gauss_kronrod_panels(lambda x: x ** 12, np.array([0.0]), np.array([1.0]))
        assert value[0] == pytest.approx(1.0 / 13.0, rel=1e-14)
        assert error[0] < 1e-14


class TestIntegrate:
    def test_gaussian(self):
        result = integrate(lambda x: np.exp(-x * x / 2.0), [-8.0, 8.0])
        assert result.value == pytest.approx(math.sqrt(2.0 * math.pi), abs=1e-9)
        assert result.error <= 1e-9

    def test_jump_at_breakpoint_is_exact(self):
        result = integrate(lambda x: (x > 0.3).astype(float), [-1.0, 0.3, 1.0])
        assert result.value == pytest.approx(0.7, abs=1e-14)
        assert result.refinements == 0

    def test_kink_at_breakpoint(self):
        result = integrate(lambda x: np.abs(x - 0.2), [-1.0, 0.2, 1.0])
        assert result.value == pytest.approx(1.04, abs=1e-13)

    def test_against_scipy(self):
        f = lambda x: np.cos(3.0 * x) * np.exp(-x * x)
        reference, _ = scipy_integrate.quad(f, -2.0, 3.0, epsabs=1e-14, epsrel=1e-13)
        assert integrate(f, [-2.0, 3.0], abs_tol=1e-11).value == pytest.approx(reference, abs=1e-11)

    def test_vectorized_calls(self):
        shapes = []

        def f(x):
            shapes.append(x.shape)
            return np.ones_like(x)

        integrate(f, [0.0, 2.5])
        assert shapes and all(len(s) == 2 and s[1] == 15 for s in shapes)

    def test_unresolved_jump_reports_best_estimate(self):
        with pytest.raises(QuadratureConvergenceError) as info:
            integrate(lambda x: (x > 0.3).astype(float), [-1.0, 1.0], max_refinements=3)
        assert info.value.best_estimate == pytest.approx(0.7, abs=0.13)
        assert info.value.error_estimate > 1e-9

    def test_needs_two_breakpoints(self):
        with pytest.raises(DomainError):
            integrate(lambda x: x, [1.0, 1.0])

    def test_positive_tolerance(self):
        with pytest.raises(DomainError):
            integrate(lambda x: x, [0.0, 1.0], abs_tol=0.0)
