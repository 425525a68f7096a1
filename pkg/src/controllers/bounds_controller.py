"""
Bounds Controller - Handles rigorous bounds, product demos and correlation spectra.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..utils.bounds import DEFAULT_TRUNCATION, BoundReport, certify_lambda
from ..utils.correlation import (CorrelationSpectrum, correlation_bound_check,
                                 projection_sum_bound, radial_orthonormal_basis)
from ..utils.errors import DomainError, KacGapError, NUMERIC_FAILURES, as_numerical_error
from ..utils.products import (RationalProductSpec, gamma_product_limit, partial_product,
                              uniform_factor_spec)

# prod_{j>=2} (1 - 1/j^2) = 1/2
TELESCOPING_NUMERATOR = (1.0, 0.0, -1.0)
TELESCOPING_DENOMINATOR = (1.0, 0.0, 0.0)
TELESCOPING_START = 2

PARTIAL_PRODUCT_CHECK = 1_000_000
HARD_SPHERE_TAIL_START = 10

Result = Tuple[bool, Optional[Dict], Optional[str]]


class BoundsController:
    """Controller for the bounds, products and correlation commands."""

    def __init__(self, workers: int = 1, truncation: int = DEFAULT_TRUNCATION) -> None:
        self.workers = workers
        self.truncation = truncation
        self.reports: Dict[int, BoundReport] = {}
        self.last_error: Optional[KacGapError] = None

    def _fail(self, error: KacGapError) -> Result:
        self.last_error = error
        return False, None, str(error)

    def compute_bounds(self, N_values: Sequence[int], gamma: float,
                       n0: Union[int, str] = 10) -> Result:
        """
        Build a BoundReport for every N.

        Returns:
            tuple: (success, {'gamma', 'reports': [...]}, error)
        """
        self.last_error = None
        try:
            reports: List[Dict] = []
            for N in N_values:
                report = BoundReport.build(N, gamma, n0, self.truncation, self.workers)
                self.reports[N] = report
                reports.append(report.to_dict())
            return True, {'gamma': gamma, 'reports': reports}, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))

    def get_report(self, N: int) -> Optional[BoundReport]:
        """Get the last report computed for N."""
        return self.reports.get(N)

    # =====================
    # Product Demos
    # =====================

    def run_product_demo(self, demo: str, gamma: float = 0.5) -> Result:
        """
        Evaluate one of the named products.

        uniform-factor: closed form of prod_{j>=3}[1 - (4j+1)/((j-1)^2 (j+1))]
            next to its partial product up to 10^6.
        telescoping: prod_{j>=2}(1 - 1/j^2), whose value is 1/2.
        hard-sphere-tail: prod_{k=11}^{K}(1 - A_k/k^2) with its tail certificate.
        """
        self.last_error = None
        try:
            if demo == 'uniform-factor':
                payload = self._closed_form_demo(uniform_factor_spec())
            elif demo == 'telescoping':
                spec = RationalProductSpec.from_polynomials(
                    TELESCOPING_NUMERATOR, TELESCOPING_DENOMINATOR, TELESCOPING_START)
                payload = self._closed_form_demo(spec)
                payload['expected'] = 0.5
            elif demo == 'hard-sphere-tail':
                certificate = certify_lambda(gamma, HARD_SPHERE_TAIL_START, self.truncation,
                                             False, self.workers)
                payload = {
                    'gamma': gamma,
                    'start': HARD_SPHERE_TAIL_START + 1,
                    'product': certificate.product.to_dict(),
                    'tail_majorant': certificate.tail_majorant,
                }
            else:
                raise DomainError(f"unknown product demo '{demo}'")
            payload['demo'] = demo
            return True, payload, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))

    def _closed_form_demo(self, spec: RationalProductSpec) -> Dict:
        closed = gamma_product_limit(spec)
        partial = partial_product(spec, PARTIAL_PRODUCT_CHECK)
        return {
            'closed_form': closed.to_dict(),
            'partial': partial.to_dict(),
            'difference': closed.value - partial.value,
        }

    # =====================
    # Correlation Operators
    # =====================

    def correlation_spectrum(self, N: int, m: int = 1, order: int = 1,
                             samples: int = 100_000, seed: int = 0) -> Result:
        """
        Eigenvalues of K_{(N,m)}, the averaged projection bound of the given
        order, and a sampled check of the near-independence inequality on the
        degree-2 radial eigenfunction.
        """
        self.last_error = None
        try:
            spectrum = CorrelationSpectrum.build(N, m)
            eigenfunction = radial_orthonormal_basis(N, m, 2)[2]
            check = correlation_bound_check(N, m, eigenfunction, eigenfunction, seed, samples)
            payload = {
                'spectrum': spectrum.to_dict(),
                'order': order,
                'projection_bound': projection_sum_bound(N, order),
                'check': check.to_dict(),
            }
            return True, payload, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))
