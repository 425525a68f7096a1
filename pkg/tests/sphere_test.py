import math
import unittest
import sys
import os

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial
from scipy import integrate, stats

# Add parent directory to system path to allow imports from src folder
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.utils.errors import DomainError
from src.utils.sphere import (MarginalDensity, SpherePoint, SphereSpec, gauss_jacobi,
                              gaussian_domination_check, gaussian_envelope, gaussian_lower_ratio,
                              k_apply_polynomial, local_gaussian_deviation, marginal_cdf,
                              marginal_density_eval, moment_monomial, project_pair_polynomial,
                              quadrature_rule, sample_uniform, squeeze_bounds, weight_average,
                              weight_jensen_bound, _rho)


class TestSphereTypes(unittest.TestCase):

    def test_invalid_specs(self):
        with self.assertRaises(DomainError):
            SphereSpec(1)
        with self.assertRaises(DomainError):
            SphereSpec(5, 0.0)
        with self.assertRaises(DomainError):
            MarginalDensity(SphereSpec(5), 5)

    def test_radial_projection(self):
        """
        Expected behavior:
        - on_sphere rescales a vector to energy E per particle
        - the zero vector cannot be projected
        """
        spec = SphereSpec(4, 2.0)
        point = SpherePoint.on_sphere(spec, [1.0, 2.0, 3.0, 4.0])
        self.assertTrue(point.check(spec))
        self.assertAlmostEqual(point.energy, 2.0, places=14)
        with self.assertRaises(DomainError):
            SpherePoint.on_sphere(spec, np.zeros(4))


class TestSampling(unittest.TestCase):

    def setUp(self):
        self.spec = SphereSpec(10, 1.5)

    def test_samples_lie_on_the_sphere(self):
        points = sample_uniform(self.spec, 3, 1000)
        self.assertEqual(points.shape, (1000, 10))
        np.testing.assert_allclose(np.sum(points ** 2, axis=1), 15.0, rtol=1e-12)

    def test_seed_is_reproducible(self):
        a = sample_uniform(self.spec, [4, 1], 10)
        b = sample_uniform(self.spec, [4, 1], 10)
        np.testing.assert_array_equal(a, b)

    def test_first_coordinate_follows_the_marginal(self):
        """Kolmogorov-Smirnov test of v_1 against the exact CDF."""
        spec = SphereSpec(6)
        den = MarginalDensity(spec, 1)
        sample = sample_uniform(spec, 11, 20_000)[:, 0]
        result = stats.kstest(sample, lambda x: marginal_cdf(den, x))
        self.assertGreater(result.pvalue, 1e-3)


class TestMarginals(unittest.TestCase):

    def test_density_integrates_to_one(self):
        for N, E in ((3, 1.0), (10, 1.0), (25, 2.0)):
            den = MarginalDensity(SphereSpec(N, E), 1)
            R = den.sphere.radius
            total, _ = integrate.quad(lambda v: den.pdf(np.array([v]))[0], -R, R)
            self.assertAlmostEqual(total, 1.0, places=6)

    def test_two_dimensional_density(self):
        """The m=2 density is uniform on the disc when N = 4."""
        den = MarginalDensity(SphereSpec(4), 2)
        self.assertAlmostEqual(marginal_density_eval(den, [0.3, -0.2]), 1 / (4 * math.pi), places=12)
        self.assertEqual(marginal_density_eval(den, [2.0, 1.0]), 0.0)

    def test_cdf_endpoints(self):
        den = MarginalDensity(SphereSpec(8), 1)
        R = den.sphere.radius
        np.testing.assert_allclose(marginal_cdf(den, np.array([-R, 0.0, R])), [0.0, 0.5, 1.0], atol=1e-14)

    def test_gaussian_domination(self):
        """rho_N / M stays below e^2 on the support for N >= 10."""
        for N in (10, 20, 50):
            grid = np.linspace(-math.sqrt(N), math.sqrt(N), 2001)
            self.assertLess(gaussian_domination_check(N, grid), math.e ** 2)
        with self.assertRaises(DomainError):
            gaussian_domination_check(4, [0.0])

    def test_envelopes_bracket_the_density(self):
        """
        Expected behavior:
        - rho_N <= K_N sqrt(2 pi) e^{3v^2/2N} M on the support
        - rho_N/M >= K_N sqrt(2 pi) e^{-v^4/2N} on |v| <= N^{1/4}
        """
        N = 30
        grid = np.linspace(-math.sqrt(N) + 1e-9, math.sqrt(N) - 1e-9, 801)
        self.assertTrue(np.all(_rho(N, grid) <= gaussian_envelope(N, grid) * (1 + 1e-12)))
        inner = np.linspace(-N ** 0.25, N ** 0.25, 201)
        ratio = _rho(N, inner) / (np.exp(-inner ** 2 / 2) / math.sqrt(2 * math.pi))
        self.assertTrue(np.all(ratio >= gaussian_lower_ratio(N, inner) * (1 - 1e-12)))
        with self.assertRaises(DomainError):
            gaussian_lower_ratio(N, np.array([N ** 0.25 + 0.1]))

    def test_local_convergence_to_the_maxwellian(self):
        """
        Expected behavior:
        - sup_{|v|<=10} |rho_100 - M| < 0.05
        - sup_{|v|<=2} |rho_100 / M - 1| < 0.05
        """
        self.assertLess(local_gaussian_deviation(100, np.linspace(-10, 10, 2001)), 0.05)
        self.assertLess(local_gaussian_deviation(100, np.linspace(-2, 2, 401), relative=True), 0.05)


class TestWeights(unittest.TestCase):

    def test_weight_average_between_jensen_bound_and_one(self):
        spec = SphereSpec(12)
        points = sample_uniform(spec, 5, 500)
        for gamma in (0.0, 0.5, 1.0):
            w = weight_average(points, gamma)
            self.assertTrue(np.all(w >= weight_jensen_bound(12, gamma) - 1e-12))
            self.assertTrue(np.all(w <= 1 + 1e-12))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=2, max_value=500), st.floats(min_value=0.0, max_value=1.0))
    def test_squeeze_brackets_the_jensen_bound(self, N, gamma):
        lower, upper = squeeze_bounds(N, gamma)
        value = weight_jensen_bound(N, gamma)
        self.assertLessEqual(lower, value + 1e-15)
        self.assertLessEqual(value, upper + 1e-15)

    def test_squeeze_rejects_gamma_above_one(self):
        with self.assertRaises(DomainError):
            squeeze_bounds(10, 1.5)


class TestMomentsAndQuadrature(unittest.TestCase):

    def setUp(self):
        self.spec = SphereSpec(10)

    def test_closed_form_moments(self):
        """
        Expected behavior:
        - E[v1^2] = 1, E[v1^4] = 3N/(N+2), E[v1^2 v2^2] = N/(N+2) on the E=1 sphere
        - odd exponents give 0
        """
        self.assertAlmostEqual(moment_monomial(self.spec, [2]), 1.0, places=14)
        self.assertAlmostEqual(moment_monomial(self.spec, [4]), 30 / 12, places=14)
        self.assertAlmostEqual(moment_monomial(self.spec, [2, 2]), 10 / 12, places=14)
        self.assertEqual(moment_monomial(self.spec, [3, 2]), 0.0)
        with self.assertRaises(DomainError):
            moment_monomial(self.spec, [2] * 11)

    def test_gauss_jacobi_exactness(self):
        """Three Gauss-Legendre nodes on [0, 1] integrate t^5 exactly."""
        t, w = gauss_jacobi(3, 0.0, 0.0)
        self.assertAlmostEqual(float(np.sum(w)), 1.0, places=14)
        self.assertAlmostEqual(float(np.dot(w, t ** 5)), 1 / 6, places=13)

    def test_one_dimensional_rule_matches_moments(self):
        den = MarginalDensity(self.spec, 1)
        v, w = quadrature_rule(den, 8)
        for k in range(0, 8):
            np.testing.assert_allclose(float(np.dot(w, v ** (2 * k))),
                                       moment_monomial(self.spec, [2 * k]), rtol=1e-10)

    def test_two_dimensional_rule_matches_moments(self):
        den = MarginalDensity(self.spec, 2)
        points, w = quadrature_rule(den, 8)
        value = float(np.dot(w, points[:, 0] ** 4 * points[:, 1] ** 2))
        self.assertAlmostEqual(value, moment_monomial(self.spec, [4, 2]), places=10)

    def test_rule_size_limits(self):
        with self.assertRaises(DomainError):
            quadrature_rule(MarginalDensity(self.spec, 1), 2)


class TestAveragingOperators(unittest.TestCase):

    def setUp(self):
        self.spec = SphereSpec(10)

    def test_k_on_v_squared(self):
        """K v^2 = (N - v^2)/(N - 1)."""
        image = k_apply_polynomial(self.spec, Polynomial([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(image.coef, [10 / 9, 0.0, -1 / 9], atol=1e-14)

    def test_polynomials_and_coefficient_lists_agree(self):
        """A Polynomial argument is used as is, not wrapped as a single coefficient."""
        coefficients = [1.0, 0.0, -2.0, 0.0, 0.5]
        from_list = k_apply_polynomial(self.spec, coefficients)
        from_poly = k_apply_polynomial(self.spec, Polynomial(coefficients))
        np.testing.assert_allclose(from_poly.coef, from_list.coef, atol=1e-14)
        self.assertEqual(from_poly.degree(), 4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(3, 30), st.integers(0, 4), st.integers(0, 4))
    def test_k_is_self_adjoint(self, N, a, b):
        """<K v^2a, v^2b> = <v^2a, K v^2b> under the single-particle marginal."""
        spec = SphereSpec(N)
        f = Polynomial([0.0] * (2 * a) + [1.0])
        g = Polynomial([0.0] * (2 * b) + [1.0])
        v, w = quadrature_rule(MarginalDensity(spec, 1), 12)
        left = float(np.dot(w, k_apply_polynomial(spec, f)(v) * g(v)))
        right = float(np.dot(w, f(v) * k_apply_polynomial(spec, g)(v)))
        self.assertAlmostEqual(left, right, delta=1e-9 * max(1.0, abs(left)))

    def test_k_preserves_integrals(self):
        """E[K phi] = E[phi] for phi = v^6."""
        image = k_apply_polynomial(self.spec, Polynomial([0, 0, 0, 0, 0, 0, 1.0]))
        v, w = quadrature_rule(MarginalDensity(self.spec, 1), 8)
        self.assertAlmostEqual(float(np.dot(w, image(v))), moment_monomial(self.spec, [6]), places=10)

    def test_pair_projection(self):
        """
        Expected behavior:
        - P v_k^2 = (N - s)/(N - 2)
        - P v_k^4 = 3 (N - s)^2 / ((N - 2) N)
        """
        second = project_pair_polynomial(self.spec, 2)
        np.testing.assert_allclose(second.coef, [10 / 8, -1 / 8], atol=1e-14)
        fourth = project_pair_polynomial(self.spec, 4)
        np.testing.assert_allclose(fourth.coef, np.array([100.0, -20.0, 1.0]) * 3 / 80, atol=1e-13)
        with self.assertRaises(DomainError):
            project_pair_polynomial(SphereSpec(2), 2)
        with self.assertRaises(DomainError):
            project_pair_polynomial(self.spec, 3)


if __name__ == '__main__':
    unittest.main()
