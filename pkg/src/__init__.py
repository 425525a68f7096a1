"""
KacGap - Spectral gaps of the Kac walk.

This package provides rigorous lower bounds, variational upper bounds, exact
Maxwellian spectra and Monte Carlo estimates for the spectral gap of the Kac
master equation with collision rates (v_i^2 + v_j^2)^gamma.
"""

__version__ = "1.0.0"
__author__ = "KacGap Team"

from .controllers import BoundsController, ReportController, SimulationController, SpectrumController
from .utils import (BoundReport, CorrelationSpectrum, GapEstimate, KacGapError, KacWalk,
                    MaxwellianSpectrum, RunConfig, SphereSpec, TrialProfile)

__all__ = [
    'BoundsController',
    'SpectrumController',
    'SimulationController',
    'ReportController',
    'BoundReport',
    'CorrelationSpectrum',
    'GapEstimate',
    'KacGapError',
    'KacWalk',
    'MaxwellianSpectrum',
    'RunConfig',
    'SphereSpec',
    'TrialProfile',
]
