"""
Controllers package for orchestrating the library.
"""

from .bounds_controller import BoundsController
from .spectrum_controller import SpectrumController
from .simulation_controller import SimulationController
from .report_controller import ReportController

__all__ = [
    'BoundsController',
    'SpectrumController',
    'SimulationController',
    'ReportController',
]
