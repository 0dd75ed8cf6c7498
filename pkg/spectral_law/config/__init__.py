# config/__init__.py - Configuration package initialization
"""
Configuration package for the spectral-law engine.
"""

from .config import *

__all__ = [
    'DEFAULT_SEED', 'SOLVER_DEFAULTS', 'ZGRID_DEFAULTS', 'DISCRETIZATION',
    'SIMULATION_DEFAULTS', 'TOLERANCES', 'MIN_CONVERGED_FRACTION',
    'HISTOGRAM_DEFAULTS', 'DATA_PATHS', 'FILE_EXTENSIONS', 'EXIT_CODES',
    'LOGGING', 'AVAILABLE_TEMPLATES'
]
