import unittest
import sys
import os

import numpy as np

# Add parent directory to system path to allow imports from src folder
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.utils.bounds import hat_delta_lb
from src.utils.errors import DegenerateProfileError, DomainError, NumericalError
from src.utils.sphere import SphereSpec, moment_monomial
from src.utils.variational import (LinearizedModel, TrialProfile, dirichlet_form_A, dirichlet_quotient,
                                   exact_maxwellian_spectrum, f0_profile, linearized_gap, orthogonalize,
                                   profile_norm_sq, rayleigh_min, _symmetric_eigh)


class TestTrialProfiles(unittest.TestCase):

    def test_monomial(self):
        profile = TrialProfile.monomial(10, 3)
        self.assertEqual(profile.degree, 3)
        self.assertAlmostEqual(float(profile.evaluate(2.0)), 64.0, places=12)
        self.assertFalse(profile.orthogonalized)

    def test_orthogonalize_removes_constants_and_energy(self):
        """
        Expected behavior:
        - <phi, 1> = 0 and <phi, v^2> = 0 under the one-particle marginal
        - The v^4 coefficient is untouched
        """
        spec = SphereSpec(10)
        profile = orthogonalize(TrialProfile([0.3, -1.0, 0.5, 0.2], 10))
        c = profile.coefficients
        self.assertTrue(profile.orthogonalized)
        mean = sum(c[j] * moment_monomial(spec, [2 * j]) for j in range(len(c)))
        energy = sum(c[j] * moment_monomial(spec, [2 * j + 2]) for j in range(len(c)))
        self.assertAlmostEqual(mean, 0.0, places=12)
        self.assertAlmostEqual(energy, 0.0, places=11)
        self.assertEqual(c[2], 0.5)

    def test_span_of_one_and_energy_collapses(self):
        profile = orthogonalize(TrialProfile([3.0, -2.0], 10))
        self.assertTrue(profile.is_zero)
        self.assertEqual(profile_norm_sq(profile), 0.0)

    def test_rejects_single_particle(self):
        with self.assertRaises(DomainError):
            TrialProfile([1.0], 1)


class TestDirichletForm(unittest.TestCase):

    def test_f0_quotient_at_gamma_zero(self):
        """E(f0, f0)/||f0||^2 = (N+2)/(2(N-1)) at gamma = 0."""
        for N in (3, 6, 8, 20):
            self.assertAlmostEqual(dirichlet_quotient(f0_profile(N), 0.0), (N + 2) / (2 * (N - 1)), places=10)

    def test_two_particles(self):
        """At N = 2 every mean-zero function decays at rate 2^{gamma+1}."""
        for gamma in (0.0, 0.5, 1.0):
            self.assertAlmostEqual(dirichlet_quotient(f0_profile(2), gamma), 2 ** (gamma + 1), places=10)

    def test_rates_grow_with_gamma(self):
        values = [dirichlet_quotient(f0_profile(10), g) for g in (0.0, 0.5, 1.0)]
        self.assertTrue(values[0] < values[1] < values[2])

    def test_errors(self):
        """
        Expected behavior:
        - A raw profile must be orthogonalized first
        - Too few angular nodes are rejected
        - The zero profile has no quotient
        """
        with self.assertRaises(DomainError):
            dirichlet_form_A(TrialProfile.monomial(10, 2), 0.5)
        with self.assertRaises(DomainError):
            dirichlet_form_A(f0_profile(10), 0.5, theta_nodes=3)
        with self.assertRaises(DomainError):
            dirichlet_form_A(f0_profile(10), 1.5)
        zero = TrialProfile(np.zeros(3), 10, orthogonalized=True)
        self.assertEqual(dirichlet_form_A(zero, 0.5), 0.0)
        with self.assertRaises(DegenerateProfileError):
            dirichlet_quotient(zero, 0.5)

    def test_more_angular_nodes_do_not_change_the_value(self):
        profile = f0_profile(10)
        np.testing.assert_allclose(dirichlet_form_A(profile, 0.5),
                                   dirichlet_form_A(profile, 0.5, theta_nodes=40), rtol=1e-12)


class TestRayleighRitz(unittest.TestCase):

    def test_degree_four_is_the_f0_quotient(self):
        self.assertAlmostEqual(rayleigh_min(6, 0.0, 4)[0], 0.8, places=10)
        self.assertAlmostEqual(rayleigh_min(8, 0.0, 4)[0], 10 / 14, places=10)
        self.assertAlmostEqual(rayleigh_min(2, 0.5, 4)[0], 2 ** 1.5, places=10)

    def test_minimizer_attains_the_value(self):
        value, profile = rayleigh_min(10, 0.5, 8)
        self.assertTrue(profile.orthogonalized)
        np.testing.assert_allclose(dirichlet_quotient(profile, 0.5), value, rtol=1e-8)

    def test_larger_spaces_give_smaller_values(self):
        values = [rayleigh_min(12, 0.5, d)[0] for d in (4, 6, 8)]
        self.assertLessEqual(values[1], values[0] + 1e-9)
        self.assertLessEqual(values[2], values[1] + 1e-9)

    def test_sandwich_with_lower_bound(self):
        for N in (4, 10, 30):
            self.assertLessEqual(hat_delta_lb(N, 0.5, 10), rayleigh_min(N, 0.5, 6)[0])

    def test_invalid_degrees(self):
        with self.assertRaises(DomainError):
            rayleigh_min(10, 0.5, 5)
        with self.assertRaises(DomainError):
            rayleigh_min(10, 0.5, 14)
        with self.assertRaises(DomainError):
            rayleigh_min(10, -0.5, 4)


class TestLinearizedGap(unittest.TestCase):

    def test_gamma_zero(self):
        """The linearized gap at gamma = 0 is 1/2, attained by He_4."""
        self.assertAlmostEqual(linearized_gap(LinearizedModel(0.0)), 0.5, delta=1e-6)

    def test_basis_growth(self):
        small = linearized_gap(LinearizedModel(0.5, basis_size=8))
        large = linearized_gap(LinearizedModel(0.5, basis_size=16))
        self.assertGreater(large, 0.0)
        self.assertLessEqual(large, small + 1e-10)

    def test_large_basis_uses_matching_quadrature(self):
        """
        Expected behavior:
        - Basis 32 runs with the default quadrature order 64
        - The value stays above the certified 0.0263 and does not exceed basis 16
        """
        model = LinearizedModel(0.5, basis_size=32)
        self.assertEqual(model.nodes, 64)
        value = linearized_gap(model)
        self.assertGreaterEqual(value, 0.0263)
        self.assertLessEqual(value, linearized_gap(LinearizedModel(0.5, basis_size=16)) + 1e-9)

    def test_solver_failures_are_numerical_errors(self):
        with self.assertRaises(NumericalError):
            _symmetric_eigh(np.array([[1.0, np.nan], [np.nan, 1.0]]), "nan")
        with self.assertRaises(NumericalError):
            _symmetric_eigh(np.array([[np.inf]]), "inf", values_only=True)
        np.testing.assert_allclose(_symmetric_eigh(np.diag([2.0, 1.0]), "ok", values_only=True), [1.0, 2.0])

    def test_model_validation(self):
        with self.assertRaises(DomainError):
            linearized_gap(LinearizedModel(0.5, basis_size=3))
        with self.assertRaises(DomainError):
            linearized_gap(LinearizedModel(0.5, basis_size=16, quadrature_order=20))
        with self.assertRaises(DomainError):
            linearized_gap(LinearizedModel(1.5))


class TestExactMaxwellianSpectrum(unittest.TestCase):

    def test_gap_and_alignment(self):
        """
        Expected behavior:
        - gap = (N+2)/(2(N-1))
        - The gap eigenvector is f0
        - The constants give the eigenvalue 0
        """
        for N in (3, 4, 6):
            spectrum = exact_maxwellian_spectrum(N, 4)
            self.assertAlmostEqual(spectrum.gap, (N + 2) / (2 * (N - 1)), places=9)
            self.assertAlmostEqual(spectrum.alignment, 1.0, places=7)
            self.assertAlmostEqual(spectrum.eigenvalues[0], 0.0, places=8)

    def test_seven_and_eight_particles(self):
        self.assertAlmostEqual(exact_maxwellian_spectrum(7, 4).gap, 0.75, places=9)
        self.assertAlmostEqual(exact_maxwellian_spectrum(8, 4).gap, 10 / 14, places=9)

    def test_higher_degree_keeps_the_gap(self):
        spectrum = exact_maxwellian_spectrum(5, 6)
        self.assertAlmostEqual(spectrum.gap, 7 / 8, places=8)
        self.assertGreater(spectrum.retained_dimension, 2)
        self.assertEqual(spectrum.to_dict()['N'], 5)

    def test_domains(self):
        with self.assertRaises(DomainError):
            exact_maxwellian_spectrum(9, 4)
        with self.assertRaises(DomainError):
            exact_maxwellian_spectrum(5, 10)


if __name__ == '__main__':
    unittest.main()
