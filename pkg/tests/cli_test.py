import contextlib
import csv
import io
import json
import tempfile
import unittest
import sys
import os
from unittest import mock

import numpy as np

# Add parent directory to system path to allow imports from src folder
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import cli
from src.utils.config import build_config
from src.utils.file_io import TRAJECTORY_HEADER

ENV = {'KACGAP_THREADS': '1'}


class TestCommandLine(unittest.TestCase):
    """End-to-end runs of cli.main with output written to a temporary directory."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def run_cli(self, argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = cli.main(argv, ENV)
        return code, out.getvalue(), err.getvalue()

    def load(self, name):
        with open(self.path(name), encoding='utf-8') as handle:
            return json.load(handle)

    def test_no_arguments_prints_the_command_table(self):
        code, out, _ = self.run_cli([])
        self.assertEqual(code, 1)
        self.assertIn("simulate", out)

    def test_bounds(self):
        """
        Expected behavior:
        - Exit code 0
        - The document carries config, provenance and a content hash
        """
        code, _, _ = self.run_cli(['bounds', '--N', '10', '40', '--gamma', '0.5', '-o', self.path('b.json')])
        self.assertEqual(code, 0)
        document = self.load('b.json')
        self.assertEqual(document['command'], 'bounds')
        self.assertEqual(document['config']['N'], [10, 40])
        self.assertIn('library_version', document['provenance'])
        self.assertAlmostEqual(document['result']['reports'][0]['lambda_lb'], 0.0297264112, places=7)
        self.assertEqual(len(document['content_hash']), 64)

    def test_json_goes_to_stdout_without_output_path(self):
        code, out, _ = self.run_cli(['products', '--demo', 'telescoping'])
        self.assertEqual(code, 0)
        document = json.loads(out)
        self.assertAlmostEqual(document['result']['closed_form']['value'], 0.5, places=12)

    def test_spectrum_requires_gamma_zero(self):
        code, _, err = self.run_cli(['spectrum', '--gamma', '0.5', '--N', '4'])
        self.assertEqual(code, 2)
        self.assertIn("gamma = 0", err)

    def test_spectrum(self):
        code, _, _ = self.run_cli(['spectrum', '--gamma', '0', '--N', '4', '5', '-o', self.path('s.json')])
        self.assertEqual(code, 0)
        results = self.load('s.json')['result']['results']
        self.assertAlmostEqual(results[0]['gap'], 1.0, places=9)
        self.assertAlmostEqual(results[1]['gap'], 7 / 8, places=9)

    def test_simulate_trajectory_csv(self):
        code, _, _ = self.run_cli(['simulate', '--N', '4', '--format', 'csv', '-o', self.path('t.csv')])
        self.assertEqual(code, 0)
        with open(self.path('t.csv'), encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(tuple(rows[0]), TRAJECTORY_HEADER)
        self.assertEqual(len(rows), 1 + 1001)

    def test_simulate_json_with_trajectory(self):
        code, _, _ = self.run_cli(['simulate', '--N', '6', '--gamma', '0', '--replicas', '300',
                                   '--trajectory', self.path('traj.csv'), '-o', self.path('sim.json')])
        self.assertEqual(code, 0)
        self.assertTrue(os.path.exists(self.path('traj.csv')))
        result = self.load('sim.json')['result']['results'][0]
        self.assertGreater(result['rate'], 0.0)

    def test_numerical_failure_exit_code(self):
        code, _, err = self.run_cli(['simulate', '--N', '6', '--gamma', '0', '--replicas', '100',
                                     '--horizon', '0.01'])
        self.assertEqual(code, 3)
        self.assertIn("fit window", err)

    def test_eigensolver_failure_exit_code(self):
        """
        Expected behavior:
        - A LAPACK failure in the pencil solve is reported, not raised
        - Exit code 3
        """
        failing = mock.Mock(side_effect=np.linalg.LinAlgError("leading minor not positive definite"))
        with mock.patch('src.utils.variational.eigh', failing):
            code, _, err = self.run_cli(['variational', '--gamma', '0.5', '--N', '10', '--degree', '4'])
        self.assertEqual(code, 3)
        self.assertIn("eigensolver failed", err)
        self.assertTrue(failing.called)

    def test_config_file(self):
        with open(self.path('run.cfg'), 'w', encoding='utf-8') as handle:
            handle.write("# gamma = 0 chain\ngamma = 0\nN = 6, 12\nn0 = 10\n")
        code, _, _ = self.run_cli(['bounds', '--config', self.path('run.cfg'), '-o', self.path('c.json')])
        self.assertEqual(code, 0)
        document = self.load('c.json')
        self.assertEqual(document['config']['gamma'], 0.0)
        self.assertEqual(document['config']['N'], [6, 12])

    def test_missing_config_file(self):
        code, _, _ = self.run_cli(['bounds', '--config', self.path('absent.cfg')])
        self.assertEqual(code, 2)

    def test_run_takes_a_validated_config(self):
        config = build_config(None, {'command': 'products', 'demo': 'telescoping',
                                     'output_path': self.path('p.json')}, environ=ENV)
        with contextlib.redirect_stdout(io.StringIO()):
            self.assertEqual(cli.run(config), 0)
        self.assertEqual(self.load('p.json')['command'], 'products')

    def test_bad_n0_is_an_argparse_error(self):
        with self.assertRaises(SystemExit) as raised:
            self.run_cli(['bounds', '--n0', 'soon'])
        self.assertEqual(raised.exception.code, 2)


if __name__ == '__main__':
    unittest.main()
