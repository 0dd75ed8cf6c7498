# theory.py - Limiting spectral problems for each model family
"""
Translation of model specifications into kernel-equation problems.

problem_for builds the (G, H, f, c) description of a family's limiting law;
solve_lsd hands it to the kernel solver, choosing the scalar iteration when
the link factors on the atom lattice. The closed-form equations known for the
special cases (Marchenko-Pastur, the weighted sample covariance system, the
two-population mixture) are exposed as residual functions so solved problems
can be checked against them.
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .config import DISCRETIZATION, TOLERANCES
from .errors import GridMismatch, SpecInvariantViolated
from .expressions import Expression
from .kernel import (
    DensityCurve, KernelField, SolverConfig, ZGrid, evaluate_link, invert_density,
    link_matrix, solve_dual, solve_master, solve_separable
)
from .measures import (
    DiscreteMeasure, empirical_measure, integrate, point_mass, quantiles, uniform_measure,
    vector_empirical_measure
)
from .models import (
    DiffusionRCVSpec, FiniteMixtureSpec, IidCovarianceSpec, LinearProcessSpec,
    MatrixARSpec, SeparableSpec, VarianceProfileSpec, column_covariance_eigenvalues,
    eigen_values
)

logger = logging.getLogger(__name__)


# Links

def coordinate_link(a, b):
    return a + 0.0 * b


def product_link(a, b):
    return a * b


def matrix_ar_link(a, b):
    return 1.0 / (1.0 - a * b)


class SquaredProfileLink:
    """f(s, t) = sigma(s, t)^2"""

    def __init__(self, profile: Expression):
        self.profile = profile

    def __call__(self, s, t):
        return np.asarray(self.profile(s, t), dtype=float) ** 2

    def __str__(self):
        return f"({self.profile})**2"


class SpectralDensityLink:
    """
    f(a, lambda) = |sum_j a_j e^{i j lambda}|^2 for coefficient vectors a.

    The value is 2 pi times the spectral density of the linear process with
    coefficients a at frequency lambda.
    """

    def __init__(self, lags: int):
        self.lags = lags

    def matrix(self, a_atoms: np.ndarray, b_atoms: np.ndarray) -> np.ndarray:
        frequencies = np.asarray(b_atoms, dtype=float).reshape(-1)
        phases = np.exp(1j * np.outer(np.arange(self.lags + 1), frequencies))
        return np.abs(np.asarray(a_atoms, dtype=float) @ phases) ** 2

    def __str__(self):
        return f"|sum_j psi_j exp(i j lambda)|**2, J={self.lags}"


class VolatilityLink:
    """
    f(s, r) = gamma(s, Theta(r))^2 v(r) for observation times tau_0..tau_n.

    Theta interpolates the partition linearly between the grid points i/n and
    v(r) = n (tau_i - tau_{i-1}) on ((i-1)/n, i/n].
    """

    def __init__(self, gamma: Expression, times: np.ndarray):
        self.gamma = gamma
        self.times = np.asarray(times, dtype=float)
        self.n = len(self.times) - 1

    def time_change(self, r) -> np.ndarray:
        return np.interp(r, np.linspace(0.0, 1.0, self.n + 1), self.times)

    def durations(self, r) -> np.ndarray:
        index = np.clip(np.ceil(np.asarray(r, dtype=float) * self.n).astype(int), 1, self.n)
        return self.n * np.diff(self.times)[index - 1]

    def __call__(self, s, r):
        return np.asarray(self.gamma(s, self.time_change(r)), dtype=float) ** 2 * self.durations(r)

    def __str__(self):
        return f"({self.gamma})**2 * v(r), n={self.n}"


class QuantileLink:
    """f(s, i) = quantile function of component i at level s"""

    def __init__(self, components: Sequence[DiscreteMeasure]):
        self.components = list(components)

    def matrix(self, a_atoms: np.ndarray, b_atoms: np.ndarray) -> np.ndarray:
        levels = np.asarray(a_atoms, dtype=float).reshape(-1)
        labels = np.asarray(b_atoms, dtype=float).reshape(-1).astype(int)
        return np.column_stack([quantiles(self.components[label - 1], levels) for label in labels])

    def __str__(self):
        return f"H_i^-1(s), M={len(self.components)}"


class SwappedLink:
    """f'(b, a) = f(a, b)"""

    def __init__(self, link):
        self.link = link

    def matrix(self, a_atoms: np.ndarray, b_atoms: np.ndarray) -> np.ndarray:
        return evaluate_link(self.link, b_atoms, a_atoms).T

    def __str__(self):
        return f"swap({_describe(self.link)})"


def _describe(link) -> str:
    return getattr(link, '__name__', None) or str(link)


# Companion relation

class CompanionTransform:
    """
    Stieltjes transform of X X^T / n from that of X^T X / p.

    With m~ solved on the grid z / c, m(z) = (1 - c)/(c z) + m~(z / c) / c^2.
    """

    def __init__(self, c: float):
        if not np.isfinite(c) or c <= 0:
            raise SpecInvariantViolated(f"dimension ratio c must be positive, got {c}")
        self.c = float(c)

    def source_grid(self, z: ZGrid) -> ZGrid:
        return z.scaled(self.c)

    def apply(self, m_tilde, source: ZGrid, target: ZGrid) -> np.ndarray:
        if len(source) != len(target) or not np.allclose(source.points, target.points / self.c,
                                                         rtol=1e-12, atol=1e-15):
            raise GridMismatch("companion transform needs m~ on the grid z / c")
        z = target.points
        return (1.0 - self.c) / (self.c * z) + np.asarray(m_tilde, dtype=complex) / self.c ** 2

    def apply_field(self, field: KernelField, target: ZGrid) -> KernelField:
        m = self.apply(field.m, field.z, target)
        return replace(field, z=target, m=m, c=self.c, method=f"{field.method}+companion",
                       row_zero_mass=field.column_zero_mass, column_zero_mass=field.row_zero_mass)


def companion_transform(m_tilde, source: ZGrid, target: ZGrid, c: float) -> np.ndarray:
    return CompanionTransform(c).apply(m_tilde, source, target)


# Problems

@dataclass(frozen=True, eq=False)
class LsdProblem:
    """
    Kernel-equation description of a limiting spectral law.

    form names the iteration used when the link does not factor: 'master'
    iterates over the atoms of G, 'dual' over the atoms of H.
    """
    G: DiscreteMeasure
    H: DiscreteMeasure
    f: Any
    c: float
    post_transform: Optional[CompanionTransform] = None
    family: str = 'custom'
    link: str = ''
    form: str = 'master'
    quad_points: Optional[int] = None

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0:
            raise SpecInvariantViolated(f"dimension ratio c must be positive, got {self.c}")
        if self.form not in ('master', 'dual'):
            raise SpecInvariantViolated(f"unknown iteration form {self.form!r}")
        if not self.link:
            object.__setattr__(self, 'link', _describe(self.f))

    def link_matrix(self) -> np.ndarray:
        return link_matrix(self.f, self.G, self.H)

    def first_moment(self) -> float:
        """Double integral of f over G x H, the mean of the limiting law"""
        row_means = DiscreteMeasure(self.link_matrix() @ self.H.weights, self.G.weights)
        return integrate(row_means, lambda value: value).real

    def summary(self) -> Dict[str, Any]:
        return {
            'family': self.family,
            'link': self.link,
            'form': self.form,
            'c': self.c,
            'quad_points': self.quad_points,
            'companion': self.post_transform is not None,
            'G': self.G.to_dict(),
            'H': self.H.to_dict()
        }


def _ratio(p: int, n: int) -> float:
    if p < 1 or n < 1:
        raise SpecInvariantViolated(f"dimensions must be positive, got p={p}, n={n}")
    return p / n


def problem_for(spec, p: int, n: int, quad_points: Optional[int] = None) -> LsdProblem:
    """
    Kernel-equation problem of a model family at dimensions p x n.

    Args:
        spec: One of the seven ModelSpec variants
        p, n: Dimensions; c = p/n
        quad_points: Atoms used for each continuous parameter

    Returns:
        LsdProblem
    """
    spec.check(p, n)
    Q = quad_points or DISCRETIZATION['quad_points']
    c = _ratio(p, n)

    if isinstance(spec, IidCovarianceSpec):
        return LsdProblem(empirical_measure(spec.eigenvalues(p)), point_mass(1.0), coordinate_link, c,
                          family='iid_covariance')

    if isinstance(spec, SeparableSpec):
        G = empirical_measure(eigen_values(spec.a_eigs, p, 'a_eigs'))
        H = empirical_measure(eigen_values(spec.b_weights, n, 'b_weights'))
        return LsdProblem(G, H, product_link, c, family='separable')

    if isinstance(spec, VarianceProfileSpec):
        return LsdProblem(uniform_measure(Q), uniform_measure(Q), SquaredProfileLink(spec.expression()), c,
                          family='variance_profile', quad_points=Q)

    if isinstance(spec, LinearProcessSpec):
        table = spec.coefficient_table(p)
        G = vector_empirical_measure(table.T)
        H = uniform_measure(Q, 0.0, 2.0 * np.pi)
        return LsdProblem(G, H, SpectralDensityLink(spec.lags()), c, family='linear_process',
                          form='dual', quad_points=Q)

    if isinstance(spec, DiffusionRCVSpec):
        link = VolatilityLink(spec.expression(), spec.partition(n))
        return LsdProblem(uniform_measure(Q), uniform_measure(Q), link, c, family='diffusion_rcv',
                          quad_points=Q)

    if isinstance(spec, MatrixARSpec):
        a, b = spec.coefficients(p, n)
        return LsdProblem(empirical_measure(a ** 2), empirical_measure(b ** 2), matrix_ar_link, c,
                          family='matrix_ar')

    if isinstance(spec, FiniteMixtureSpec):
        eta = np.asarray(spec.eta, dtype=float)
        H = DiscreteMeasure(np.arange(1, len(eta) + 1, dtype=float), eta / eta.sum())
        link = QuantileLink([empirical_measure(row) for row in spec.components(p)])
        return LsdProblem(uniform_measure(Q), H, link, c, family='finite_mixture', quad_points=Q)

    raise SpecInvariantViolated(f"no limiting problem for {type(spec).__name__}")


def companion_problem(prob: LsdProblem) -> LsdProblem:
    """The transposed problem (G and H swapped, c inverted) with the companion transform attached"""
    if prob.post_transform is not None:
        raise SpecInvariantViolated("problem already carries a companion transform")
    link = SwappedLink(prob.f)
    return LsdProblem(prob.H, prob.G, link, 1.0 / prob.c, post_transform=CompanionTransform(prob.c),
                      family=prob.family, link=str(link), form='master', quad_points=prob.quad_points)


def separable_factors(F: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Nonnegative g, h with F = g h^T to relative accuracy 1e-12, or None"""
    scale = float(np.max(np.abs(F))) if F.size else 0.0
    if scale == 0.0:
        return np.zeros(F.shape[0]), np.zeros(F.shape[1])
    U, S, Vt = linalg.svd(F, full_matrices=False)
    g = np.abs(U[:, 0]) * np.sqrt(S[0])
    h = np.abs(Vt[0]) * np.sqrt(S[0])
    if np.max(np.abs(np.outer(g, h) - F)) <= TOLERANCES['rank_one'] * scale:
        return g, h
    return None


def _solve_direct(prob: LsdProblem, z: ZGrid, cfg: SolverConfig, force_master: bool) -> KernelField:
    F = prob.link_matrix()
    if not force_master:
        factors = separable_factors(F)
        if factors is not None:
            logger.info("%s link factors on the atom lattice; using the scalar iteration", prob.family)
            return solve_separable(prob.G, prob.H, factors[0], factors[1], prob.c, z, cfg)
    if prob.form == 'dual':
        return solve_dual(prob.G, prob.H, F, prob.c, z, cfg)
    return solve_master(prob.G, prob.H, F, prob.c, z, cfg)


def solve_lsd(prob: LsdProblem, z: ZGrid, cfg: Optional[SolverConfig] = None,
              force_master: bool = False) -> Tuple[KernelField, DensityCurve]:
    """
    Solve a problem on z and invert the result to a density.

    force_master skips the separability test and always runs the problem's
    own form. A companion problem is solved on z / c and transformed back.
    """
    cfg = cfg or SolverConfig()
    if prob.post_transform is not None:
        source = prob.post_transform.source_grid(z)
        field = prob.post_transform.apply_field(_solve_direct(prob, source, cfg, force_master), z)
    else:
        field = _solve_direct(prob, z, cfg, force_master)
    return field, invert_density(field)


def solve_spec(spec, p: int, n: int, z: ZGrid, cfg: Optional[SolverConfig] = None,
               quad_points: Optional[int] = None) -> Tuple[LsdProblem, KernelField, DensityCurve]:
    """
    problem_for followed by solve_lsd.

    Families with continuous parameters are re-solved with twice the atoms
    when the solved mean misses the first-moment identity.
    """
    Q = quad_points or DISCRETIZATION['quad_points']
    prob = problem_for(spec, p, n, Q)
    field, density = solve_lsd(prob, z, cfg)
    if prob.quad_points is None:
        return prob, field, density

    for _ in range(DISCRETIZATION['max_doublings']):
        target = prob.first_moment()
        gap = abs(density.mean() - target) / max(abs(target), np.finfo(float).tiny)
        if gap <= DISCRETIZATION['moment_tolerance']:
            break
        Q *= 2
        logger.info("first moment misses by %.2f%%; re-solving with Q=%d", 100 * gap, Q)
        prob = problem_for(spec, p, n, Q)
        field, density = solve_lsd(prob, z, cfg)
    return prob, field, density


def population_first_moment(spec, p: int, n: int) -> float:
    """(1/(pn)) sum of the column-covariance eigenvalues, the expected (1/p) tr S_n"""
    return float(np.mean(column_covariance_eigenvalues(spec, p, n)))


# Closed-form residuals

def _points(z) -> np.ndarray:
    return z.points if isinstance(z, ZGrid) else np.asarray(z, dtype=complex)


def _sup(values: np.ndarray, mask) -> float:
    values = np.abs(values)
    if mask is not None:
        values = values[np.asarray(mask, dtype=bool)]
    return float(values.max()) if values.size else 0.0


def mp_equation_residual(m_values, z, G_sigma: DiscreteMeasure, c: float, mask=None) -> float:
    """sup |m - sum G(l) / (l (1 - c - c z m) - z)| over the grid"""
    m = np.asarray(m_values, dtype=complex)
    zs = _points(z)
    lam = G_sigma.values()[:, None]
    with np.errstate(all='ignore'):
        rhs = G_sigma.weights @ (1.0 / (lam * (1.0 - c - c * zs * m)[None, :] - zs[None, :]))
    return _sup(m - rhs, mask)


def zhang_auxiliaries(field: KernelField, G_A: DiscreteMeasure) -> Tuple[np.ndarray, np.ndarray]:
    """
    (p, q) on the grid for a solved weighted sample covariance problem.

    p is the scalar kernel kappa with K(a) = a kappa, and
    q = -(1/z) sum_a G_A(a) a / (a kappa + 1).
    """
    a = G_A.values()
    if np.max(np.abs(a)) == 0:
        kappa = np.zeros(len(field.z), dtype=complex)
    else:
        j = int(np.argmax(np.abs(a)))
        kappa = field.K[j] / a[j]
    zs = field.z.points
    with np.errstate(all='ignore'):
        q = -(G_A.weights @ (a[:, None] / (a[:, None] * kappa[None, :] + 1.0))) / zs
    return kappa, q


def zhang_system_residual(m, p_values, q_values, z, G_A: DiscreteMeasure, H_B: DiscreteMeasure, c: float,
                          mask=None) -> float:
    """
    Largest residual of the three-equation system in (m, p, q):

        m = -(1 - 1/c)/z - (1/(c z)) sum H_B(b) / (1 + c q b)
        m = -(1/z) sum G_A(a) / (1 + p a)
        m = -1/z - p q
    """
    m = np.asarray(m, dtype=complex)
    p = np.asarray(p_values, dtype=complex)
    q = np.asarray(q_values, dtype=complex)
    zs = _points(z)
    a = G_A.values()[:, None]
    b = H_B.values()[:, None]
    with np.errstate(all='ignore'):
        first = -(1.0 - 1.0 / c) / zs - (H_B.weights @ (1.0 / (1.0 + c * q[None, :] * b))) / (c * zs)
        second = -(G_A.weights @ (1.0 / (1.0 + p[None, :] * a))) / zs
        third = -1.0 / zs - p * q
    residual = np.maximum.reduce([np.abs(m - first), np.abs(m - second), np.abs(m - third)])
    return _sup(residual, mask)


def mixture_two_population_residual(m, underline_m, z, eta1: float, H2: DiscreteMeasure, c: float,
                                    mask=None) -> float:
    """
    Residual of -z m = sum H2(l) / (1 - u + (underline_m + u) l) with
    u = eta1 / (z + c z m), for the mixture of an identity component (weight
    eta1) and a component with eigenvalue law H2.
    """
    m = np.asarray(m, dtype=complex)
    zs = _points(z)
    if underline_m is None:
        underline_m = companion_stieltjes(m, zs, c)
    underline_m = np.asarray(underline_m, dtype=complex)
    lam = H2.values()[:, None]
    with np.errstate(all='ignore'):
        u = eta1 / (zs + c * zs * m)
        rhs = H2.weights @ (1.0 / (1.0 - u[None, :] + (underline_m + u)[None, :] * lam))
    return _sup(-zs * m - rhs, mask)


def companion_stieltjes(m, z, c: float) -> np.ndarray:
    """Stieltjes transform of X^T X / n: -(1 - c)/z + c m"""
    zs = _points(z)
    return -(1.0 - c) / zs + c * np.asarray(m, dtype=complex)


def circulant_spectrum(psi_row, T: int) -> np.ndarray:
    """|sum_j psi_j e^{i j lambda_l}|^2 at the Fourier frequencies lambda_l = 2 pi l / T"""
    psi = np.asarray(psi_row, dtype=float).reshape(-1)
    frequencies = 2.0 * np.pi * np.arange(T) / T
    return SpectralDensityLink(len(psi) - 1).matrix(psi[None, :], frequencies)[0]
