import unittest
import sys
import os
from unittest import mock

# Add parent directory to system path to allow imports from src folder
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.controllers import BoundsController, ReportController, SimulationController, SpectrumController
from src.utils.errors import DomainError, NumericalError


class TestBoundsController(unittest.TestCase):
    """
    Test suite for BoundsController.
    Covers bound reports, the product demos and the correlation command.
    """

    def setUp(self):
        self.controller = BoundsController()

    def test_compute_bounds(self):
        """
        Expected behavior:
        - One report per N, in order
        - Reports are cached per N
        """
        success, payload, error = self.controller.compute_bounds([10, 20], 0.5)
        self.assertTrue(success)
        self.assertIsNone(error)
        self.assertEqual([r['N'] for r in payload['reports']], [10, 20])
        self.assertAlmostEqual(payload['reports'][0]['lambda_lb'], 0.0297264112, places=7)
        self.assertEqual(self.controller.get_report(20).N, 20)
        self.assertIsNone(self.controller.get_report(30))

    def test_failure_keeps_the_exception(self):
        success, payload, error = self.controller.compute_bounds([1], 0.5)
        self.assertFalse(success)
        self.assertIsNone(payload)
        self.assertIn("N must be >= 2", error)
        self.assertIsInstance(self.controller.last_error, DomainError)

    def test_product_demos(self):
        success, payload, _ = self.controller.run_product_demo('telescoping')
        self.assertTrue(success)
        self.assertAlmostEqual(payload['closed_form']['value'], 0.5, places=12)
        self.assertAlmostEqual(payload['partial']['value'], 0.5, places=5)

        success, payload, _ = self.controller.run_product_demo('uniform-factor')
        self.assertTrue(success)
        self.assertLess(payload['difference'], 0.0)
        self.assertLess(abs(payload['difference']), 1e-6)

        success, payload, _ = self.controller.run_product_demo('hard-sphere-tail', 0.5)
        self.assertTrue(success)
        self.assertEqual(payload['start'], 11)
        self.assertAlmostEqual(payload['product']['value'], 0.4022428260, places=6)

        success, _, error = self.controller.run_product_demo('harmonic')
        self.assertFalse(success)
        self.assertIn("harmonic", error)

    def test_correlation_spectrum(self):
        success, payload, _ = self.controller.correlation_spectrum(10, 1, 2, samples=20_000, seed=1)
        self.assertTrue(success)
        self.assertAlmostEqual(payload['spectrum']['eigenvalues'][1], -1 / 9, places=14)
        self.assertAlmostEqual(payload['projection_bound'], 0.5, places=14)
        self.assertTrue(payload['check']['holds'])

        success, _, _ = self.controller.correlation_spectrum(4, 1, 2)
        self.assertFalse(success)


class TestSpectrumController(unittest.TestCase):

    def setUp(self):
        self.controller = SpectrumController()

    def test_exact_spectrum(self):
        success, payload, _ = self.controller.exact_spectrum(4, 4)
        self.assertTrue(success)
        self.assertAlmostEqual(payload['gap'], payload['closed_form_gap'], places=9)
        self.assertIn((4, 4), self.controller.spectra)

    def test_exact_spectrum_domain(self):
        success, _, error = self.controller.exact_spectrum(9, 4)
        self.assertFalse(success)
        self.assertTrue(error)

    def test_raw_numeric_failures_are_wrapped(self):
        """
        Expected behavior:
        - A FloatingPointError from the solver does not escape the controller
        - last_error is a NumericalError that keeps the original as its cause
        """
        with mock.patch('src.controllers.spectrum_controller.rayleigh_min',
                        side_effect=FloatingPointError("overflow in pencil")):
            success, payload, error = self.controller.variational(6, 0.0, 4, 8)
        self.assertFalse(success)
        self.assertIsNone(payload)
        self.assertIn("overflow in pencil", error)
        self.assertIsInstance(self.controller.last_error, NumericalError)
        self.assertIsInstance(self.controller.last_error.__cause__, FloatingPointError)

    def test_variational(self):
        """
        Expected behavior:
        - Degree 4 reduces to the f0 quotient, 0.8 for N = 6 at gamma = 0
        - The linearized gap at gamma = 0 is 1/2
        """
        success, payload, _ = self.controller.variational(6, 0.0, 4, 8)
        self.assertTrue(success)
        self.assertAlmostEqual(payload['rayleigh_min'], 0.8, places=10)
        self.assertAlmostEqual(payload['f0_quotient'], 0.8, places=10)
        self.assertAlmostEqual(payload['linearized_gap'], 0.5, delta=1e-6)


class TestSimulationController(unittest.TestCase):

    def setUp(self):
        self.controller = SimulationController()

    def test_estimate_and_record(self):
        success, payload, _ = self.controller.estimate_gap(6, 0.0, replicas=500, seed=3)
        self.assertTrue(success)
        self.assertEqual(payload['N'], 6)
        self.assertGreater(payload['rate'], 0.0)
        self.assertIn((6, 0.0, 1.0), self.controller.estimates)

        success, payload, _ = self.controller.record(5, 0.5, collisions=10, seed=4)
        self.assertTrue(success)
        self.assertEqual(payload['rows'], 11)
        self.assertEqual(len(self.controller.get_trajectory()), 11)

    def test_numerical_failure(self):
        success, _, _ = self.controller.estimate_gap(6, 0.0, replicas=100, horizon=0.01)
        self.assertFalse(success)
        self.assertIsInstance(self.controller.last_error, NumericalError)


class TestReportController(unittest.TestCase):

    def test_sandwich_rows(self):
        """
        Expected behavior:
        - delta_lb <= hat_delta_lb <= rayleigh_min
        - The Monte Carlo rate does not fall below the lower bound
        """
        controller = ReportController()
        success, payload, _ = controller.build_report([6, 12], 0.0, replicas=500, seed=5)
        self.assertTrue(success)
        self.assertEqual(len(payload['rows']), 2)
        for row in payload['rows']:
            self.assertLessEqual(row['delta_lb'], row['hat_delta_lb'])
            self.assertLessEqual(row['hat_delta_lb'], row['rayleigh_min'])
            self.assertTrue(row['mc_consistent'])

    def test_sandwich_grid(self):
        """
        Expected behavior, for N in {4, 8, 16, 32} and gamma in {0, 1/2, 1}:
        - 0 < delta_lb <= hat_delta_lb <= rayleigh_min; below N0 both chains are the base bound
        - The Monte Carlo rate is at least delta_lb - 3 sigma
        """
        controller = ReportController()
        for gamma in (0.0, 0.5, 1.0):
            with self.subTest(gamma=gamma):
                success, payload, error = controller.build_report([4, 8, 16, 32], gamma, replicas=500,
                                                                  horizon=6.0, seed=11)
                self.assertTrue(success, error)
                for row in payload['rows']:
                    self.assertGreater(row['delta_lb'], 0.0)
                    self.assertLessEqual(row['delta_lb'], row['hat_delta_lb'])
                    self.assertLessEqual(row['hat_delta_lb'], row['rayleigh_min'])
                    self.assertGreaterEqual(row['mc_rate'], row['delta_lb'] - 3 * row['mc_stderr'])
                first = payload['rows'][0]
                self.assertEqual(first['delta_lb'], first['hat_delta_lb'])

    def test_rates_refer_to_unit_energy(self):
        controller = ReportController()
        success, payload, _ = controller.build_report([4], 0.5, replicas=500, seed=6, E=4.0)
        self.assertTrue(success)
        row = payload['rows'][0]
        # E = 4 doubles the raw rate when gamma = 1/2
        self.assertLess(abs(row['mc_rate'] - row['rayleigh_min']), 0.5 * row['rayleigh_min'])

    def test_failure_is_forwarded(self):
        controller = ReportController()
        success, _, error = controller.build_report([6], 0.5, degree=5)
        self.assertFalse(success)
        self.assertIsInstance(controller.last_error, DomainError)
        self.assertTrue(error)


if __name__ == '__main__':
    unittest.main()
