# spectral_law/__init__.py - Limiting spectral distribution engine
"""
spectral-law - simulate large random matrices and solve for their limiting
spectral distributions.

A model family (i.i.d. covariance, weighted covariance, variance profile,
linear process, realized covariance of a diffusion, matrix autoregression or
finite mixture) is described by a small JSON document. The engine can

- simulate seeded data matrices and their empirical spectra
- reduce the family to a kernel equation over a pair of laws (G, H) with a
  link f(a, b), solve it on a line z = x + i eta and invert the Stieltjes
  transform to a density
- compare simulated spectra with the solved law (Kolmogorov and Wasserstein
  distances, first-moment gap) and write plot-ready tables

Main components:
- measures: discrete laws, quantiles and distances between distribution functions
- spectra: Gram matrices, eigenvalues and ESDs
- models / experiment: configuration schema
- simulate: seeded samplers for every family
- kernel: fixed-point solver and density inversion
- theory: per-family problems and closed-form residuals
- compare: agreement reports
- data_manager / cli: files and the command line

Example usage:
    from spectral_law.models import parse_model
    from spectral_law.kernel import ZGrid
    from spectral_law.theory import solve_spec

    spec = parse_model({'family': 'iid_covariance', 'sigma_eigs': [1.0] * 200})
    prob, field, density = solve_spec(spec, 200, 400, ZGrid.linspace(0, 4, 400, 0.01))
"""

__version__ = '0.1.0'
__author__ = 'Spectral Law Team'

__all__ = [
    'compare', 'data_manager', 'errors', 'experiment', 'expressions', 'kernel',
    'measures', 'models', 'simulate', 'spectra', 'theory'
]
