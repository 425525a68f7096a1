"""
Spectrum Controller - Handles exact spectra and variational upper bounds.
"""

from typing import Dict, Optional, Tuple

from ..utils.errors import KacGapError, NUMERIC_FAILURES, as_numerical_error
from ..utils.variational import (LinearizedModel, MaxwellianSpectrum, dirichlet_quotient,
                                 exact_maxwellian_spectrum, f0_profile, linearized_gap,
                                 rayleigh_min)

Result = Tuple[bool, Optional[Dict], Optional[str]]


class SpectrumController:
    """Controller for the spectrum and variational commands."""

    def __init__(self) -> None:
        self.spectra: Dict[Tuple[int, int], MaxwellianSpectrum] = {}
        self.last_error: Optional[KacGapError] = None

    def _fail(self, error: KacGapError) -> Result:
        self.last_error = error
        return False, None, str(error)

    def exact_spectrum(self, N: int, degree: int) -> Result:
        """
        Spectrum of -L on symmetric polynomials of degree <= degree (gamma = 0).

        Returns:
            tuple: (success, MaxwellianSpectrum as dict plus the closed form, error)
        """
        self.last_error = None
        try:
            spectrum = exact_maxwellian_spectrum(N, degree)
            self.spectra[(N, degree)] = spectrum
            payload = spectrum.to_dict()
            payload['closed_form_gap'] = (N + 2) / (2 * (N - 1))
            return True, payload, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))

    def variational(self, N: int, gamma: float, degree: int, basis_size: int) -> Result:
        """
        Rayleigh-Ritz minimum over profiles of degree <= degree, the quotient
        of the single profile f0, and the Galerkin value of the linearized gap.
        """
        self.last_error = None
        try:
            value, profile = rayleigh_min(N, gamma, degree)
            payload = {
                'N': N,
                'gamma': gamma,
                'degree': degree,
                'rayleigh_min': value,
                'profile': profile.to_dict(),
                'f0_quotient': dirichlet_quotient(f0_profile(N), gamma),
                'basis_size': basis_size,
                'linearized_gap': linearized_gap(LinearizedModel(gamma, basis_size)),
            }
            return True, payload, None
        except KacGapError as e:
            return self._fail(e)
        except NUMERIC_FAILURES as e:
            return self._fail(as_numerical_error(e))
