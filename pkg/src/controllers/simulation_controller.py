"""
Simulation Controller - Handles Monte Carlo runs of the Kac walk.
"""

from typing import Dict, List, Optional, Tuple

from ..utils.errors import KacGapError, NUMERIC_FAILURES, as_numerical_error
from ..utils.kac_walk import GapEstimate, estimate_gap_autocorr, record_trajectory
from ..utils.sphere import SphereSpec

Result = Tuple[bool, Optional[Dict], Optional[str]]


class SimulationController:
    """Controller for the simulate command."""

    def __init__(self, workers: int = 1) -> None:
        self.workers = workers
        self.estimates: Dict[Tuple[int, float, float], GapEstimate] = {}
        self.trajectory: List[Tuple] = []
        self.last_error: Optional[KacGapError] = None

    def _fail(self, error: KacGapError) -> Result:
        self.last_error = error
        return False, None, str(error)

    def estimate_gap(self, N: int, gamma: float, E: float = 1.0, replicas: int = 1000,
                     horizon: float = 4.0, seed: int = 0, observable='f0') -> Result:
        """
        Autocorrelation decay rate of an observable.

        Returns:
            tuple: (success, GapEstimate as dict, error)
        """
        self.last_error = None
        try:
            estimate = estimate_gap_autocorr(SphereSpec(N, E), gamma, observable, horizon,
                                             replicas, seed, workers=self.workers)
            self.estimates[(N, gamma, E)] = estimate
            payload = estimate.to_dict()
            payload.update({'N': N, 'gamma': gamma, 'E': E, 'seed': seed})
            return True, payload, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))

    def record(self, N: int, gamma: float, E: float = 1.0, collisions: int = 1000,
               seed: int = 0) -> Result:
        """Simulate one replica and keep its collision log for export."""
        self.last_error = None
        try:
            self.trajectory = record_trajectory(SphereSpec(N, E), gamma, 'f0', collisions, seed)
            return True, {'collisions': collisions, 'rows': len(self.trajectory)}, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))

    def get_trajectory(self) -> List[Tuple]:
        """Get the rows of the last recorded trajectory."""
        return self.trajectory
