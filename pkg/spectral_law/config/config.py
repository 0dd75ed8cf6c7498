# config.py - Configuration for the spectral-law engine
"""
Configuration settings for simulation, solving and comparison runs.
"""

# Default reproducibility settings
DEFAULT_SEED = 42

# Fixed-point solver settings
SOLVER_DEFAULTS = {
    'tol': 1e-9,
    'max_iter': 2000,
    'damping': 0.5,
    'init': 1j,
    'warm_start': True,
    'chunk_size': None,
    'workers': 1
}

# Evaluation line z = x + i*eta
ZGRID_DEFAULTS = {
    'x_min': 0.0,
    'x_max': 5.0,
    'count': 800,
    'eta': 0.01
}

# Discretization of continuous parameter laws
DISCRETIZATION = {
    'quad_points': 200,
    'moment_tolerance': 0.02,
    'max_doublings': 1
}

# Simulator settings
SIMULATION_DEFAULTS = {
    'linear_burn_in': 200,
    'matrix_ar_burn_in': 300,
    'simpson_nodes': 33
}

# Numerical tolerances
TOLERANCES = {
    'weight_input': 1e-9,      # raw weights may miss 1 by this much
    'weight_sum': 1e-12,       # normalized weights
    'symmetry': 1e-10,
    'eig_clamp': 1e-8,
    'rank_one': 1e-12,
    'partition': 1e-12,
    'quantile': 1e-12,
    'mass_band': (0.97, 1.03)
}

# Sweeps below this converged fraction are treated as solver failures by the CLI
MIN_CONVERGED_FRACTION = 0.5

# Histogram settings for overlays
HISTOGRAM_DEFAULTS = {
    'bins': 60
}

# Data storage settings
DATA_PATHS = {
    'templates': 'data/templates',
    'outputs': 'output'
}

# File extensions
FILE_EXTENSIONS = {
    'config': '.json',
    'template': '.json',
    'table': '.csv',
    'sidecar': '.json'
}

# CLI exit codes
EXIT_CODES = {
    'ok': 0,
    'usage': 1,
    'parse': 2,
    'model': 3,
    'solver': 4
}

# Logging setup used by the command line entry point
LOGGING = {
    'format': '%(levelname)s %(name)s: %(message)s',
    'level': 'WARNING'
}

# Template names
AVAILABLE_TEMPLATES = [
    'mar_demo', 'mp_identity', 'mp_wide', 'separable_demo', 'variance_profile',
    'linear_ar1', 'rcv_step', 'mixture_two', 'point_mass'
]
