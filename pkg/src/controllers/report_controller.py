"""
Report Controller - Composes the sandwich table.

For every N the table lists

    delta_lb <= hat_delta_lb <= rayleigh_min

next to the Monte Carlo decay rate of f0, which should not fall below
delta_lb by more than three standard errors.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..utils import console
from ..utils.errors import BoundViolation, KacGapError, NUMERIC_FAILURES, as_numerical_error
from .bounds_controller import BoundsController
from .simulation_controller import SimulationController
from .spectrum_controller import SpectrumController

Result = Tuple[bool, Optional[Dict], Optional[str]]

SANDWICH_RTOL = 1e-9


class ReportController:
    """Controller for the report command; delegates to the other three."""

    def __init__(self, workers: int = 1) -> None:
        self.bounds = BoundsController(workers)
        self.spectrum = SpectrumController()
        self.simulation = SimulationController(workers)
        self.rows: List[Dict] = []
        self.last_error: Optional[KacGapError] = None

    def _fail(self, error: KacGapError) -> Result:
        self.last_error = error
        return False, None, str(error)

    def _delegate(self, outcome: Result, controller) -> Dict:
        success, payload, _ = outcome
        if not success:
            raise controller.last_error
        return payload

    def build_report(self, N_values: Sequence[int], gamma: float, n0: Union[int, str] = 10,
                     degree: int = 4, basis_size: int = 16, replicas: int = 1000,
                     horizon: float = 4.0, seed: int = 0, E: float = 1.0) -> Result:
        """
        One sandwich row per N.

        Returns:
            tuple: (success, {'gamma', 'rows': [...]}, error)
        """
        self.last_error = None
        self.rows = []
        try:
            for N in N_values:
                self.rows.append(self._row(N, gamma, n0, degree, basis_size, replicas, horizon, seed, E))
            return True, {'gamma': gamma, 'rows': self.rows}, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))

    def _row(self, N: int, gamma: float, n0, degree: int, basis_size: int, replicas: int,
             horizon: float, seed: int, E: float) -> Dict:
        bounds = self._delegate(self.bounds.compute_bounds([N], gamma, n0), self.bounds)['reports'][0]
        variational = self._delegate(self.spectrum.variational(N, gamma, degree, basis_size), self.spectrum)
        mc = self._delegate(
            self.simulation.estimate_gap(N, gamma, E, replicas, horizon, seed), self.simulation)

        hat, full, upper = bounds['hat_delta_lb'], bounds['delta_lb'], variational['rayleigh_min']
        if hat > upper * (1 + SANDWICH_RTOL):
            raise BoundViolation(f"N={N}: hat_delta_lb {hat:.6g} exceeds rayleigh_min {upper:.6g}")

        # rates scale like E^gamma; bounds refer to E = 1
        rate = mc['rate'] / E ** gamma
        stderr = mc['stderr'] / E ** gamma
        floor = full if full is not None else hat
        mc_consistent = rate >= floor - 3 * stderr
        if not mc_consistent:
            console.warn(f"N={N}: Monte Carlo rate {rate:.4g} is below the lower bound {floor:.4g} by more than 3 sigma")
        return {
            'N': N,
            'delta_lb': full,
            'hat_delta_lb': hat,
            'rayleigh_min': upper,
            'mc_rate': rate,
            'mc_stderr': stderr,
            'mc_consistent': mc_consistent,
        }
