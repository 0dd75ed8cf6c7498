# kernel.py - Fixed-point solver for the kernel equation and Stieltjes inversion
"""
Numerical solution of the limiting-spectrum kernel equation.

For a coordinate law G, a column law H, a link f(a, b) >= 0 and a dimension
ratio c, the kernel K(a, z) solves

    K(a, z) = sum_b H(b) f(a, b) / (-z + c sum_a' G(a') f(a', b) / (K(a', z) + 1))

and the Stieltjes transform of the limiting law is

    m(z) = -(1/z) sum_a G(a) / (K(a, z) + 1).

Three iterations of the same equation are provided:

    master     iterates K over the atoms of G
    separable  iterates one scalar when f(a, b) = g(a) h(b)
    dual       iterates the column kernel K0(b) over the atoms of H

Every z point is an independent damped Picard iteration. A sweep walks the grid
left to right, warm-starting each point from its converged neighbour; a point
that fails to converge is flagged and never reported as converged.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import integrate as quadrature

from .config import SOLVER_DEFAULTS, TOLERANCES
from .errors import BadLink, BadRange, ConfigError, MassOutOfBand, NothingConverged, SpecInvariantViolated
from .measures import DiscreteMeasure, PiecewiseLinearCDF

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ZGrid:
    """Evaluation line z_k = x_k + i eta with strictly increasing x_k"""
    x: np.ndarray
    eta: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        eta = float(self.eta)
        if len(x) == 0 or not np.all(np.isfinite(x)):
            raise BadRange("z grid needs at least one finite abscissa")
        if np.any(np.diff(x) <= 0):
            raise BadRange("z grid abscissas must be strictly increasing")
        if not np.isfinite(eta) or eta <= 0:
            raise BadRange(f"imaginary offset eta must be positive, got {eta}")
        x.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'eta', eta)

    @classmethod
    def linspace(cls, x_min: float, x_max: float, count: int, eta: float) -> 'ZGrid':
        if count < 1 or (count > 1 and not x_min < x_max):
            raise BadRange(f"z grid needs x_min < x_max and count >= 1, got [{x_min}, {x_max}] x {count}")
        return cls(np.linspace(x_min, x_max, count), eta)

    @property
    def points(self) -> np.ndarray:
        return self.x + 1j * self.eta

    def scaled(self, factor: float) -> 'ZGrid':
        """The grid z / factor"""
        return ZGrid(self.x / factor, self.eta / factor)

    def __len__(self) -> int:
        return len(self.x)

    def to_dict(self) -> Dict[str, Any]:
        return {'x': self.x.tolist(), 'eta': self.eta}


@dataclass(frozen=True)
class SolverConfig:
    """Damped Picard iteration settings shared by every z point"""
    tol: float = SOLVER_DEFAULTS['tol']
    max_iter: int = SOLVER_DEFAULTS['max_iter']
    damping: float = SOLVER_DEFAULTS['damping']
    init: complex = SOLVER_DEFAULTS['init']
    warm_start: bool = SOLVER_DEFAULTS['warm_start']
    chunk_size: Optional[int] = SOLVER_DEFAULTS['chunk_size']
    workers: int = SOLVER_DEFAULTS['workers']

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError(f"solver tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"solver max_iter must be at least 1, got {self.max_iter}")
        if not 0 < self.damping <= 1:
            raise ConfigError(f"solver damping must lie in (0, 1], got {self.damping}")
        if complex(self.init).imag < 0:
            raise ConfigError(f"solver init must lie in the closed upper half plane, got {self.init}")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ConfigError(f"chunk_size must be positive, got {self.chunk_size}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")


def _complex_pairs(values: np.ndarray) -> list:
    return np.stack([values.real, values.imag], axis=-1).tolist()


@dataclass(frozen=True, eq=False)
class KernelField:
    """
    Solved kernel on a z grid.

    K[j, k] is K(a_j, z_k) for the atoms of G; m[k] the Stieltjes transform;
    residual[k] the relative fixed-point gap; converged[k] whether that gap met
    the tolerance before max_iter.
    """
    a_atoms: np.ndarray
    z: ZGrid
    K: np.ndarray
    m: np.ndarray
    residual: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    c: float
    method: str = 'master'
    column_kernel: Optional[np.ndarray] = None
    row_zero_mass: float = 0.0
    column_zero_mass: float = 0.0

    def __post_init__(self):
        for name in ('a_atoms', 'K', 'm', 'residual', 'converged', 'iterations', 'column_kernel'):
            value = getattr(self, name)
            if value is not None:
                value = np.array(value)
                value.setflags(write=False)
                object.__setattr__(self, name, value)

    @property
    def converged_fraction(self) -> float:
        return float(np.mean(self.converged))

    @property
    def rank_bound(self) -> float:
        """Mass at zero forced by rank: zero rows of the link, or fewer live columns than rows"""
        return max(0.0, self.row_zero_mass, 1.0 - (1.0 - self.column_zero_mass) / self.c)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'method': self.method,
            'c': self.c,
            'z': self.z.to_dict(),
            'a_atoms': self.a_atoms.tolist(),
            'K': _complex_pairs(self.K),
            'm': _complex_pairs(self.m),
            'residual': self.residual.tolist(),
            'converged': self.converged.tolist(),
            'iterations': self.iterations.tolist(),
            'converged_fraction': self.converged_fraction,
            'rank_bound': self.rank_bound
        }
        if self.column_kernel is not None:
            data['column_kernel'] = _complex_pairs(self.column_kernel)
        return data


def _poisson_bump(x: np.ndarray, eta: float) -> np.ndarray:
    return (eta / np.pi) / (x ** 2 + eta ** 2)


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """
    Density proxy rho(x) = Im m(x + i eta)/pi with an atom at zero.

    rho still contains the Poisson-kernel image of smoothed_atom (the whole
    atom when None); continuous_part() removes it. The rest of the atom is mass
    that never showed up on the grid.
    """
    x: np.ndarray
    rho: np.ndarray
    atom_at_zero: float
    eta: float
    c: float = 1.0
    converged_fraction: float = 1.0
    smoothed_atom: Optional[float] = None

    def __post_init__(self):
        for name in ('x', 'rho'):
            value = np.array(getattr(self, name), dtype=float)
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def continuous_part(self) -> np.ndarray:
        imaged = self.atom_at_zero if self.smoothed_atom is None else self.smoothed_atom
        return np.maximum(self.rho - imaged * _poisson_bump(self.x, self.eta), 0.0)

    def continuous_mass(self) -> float:
        if len(self.x) < 2:
            return 0.0
        return float(quadrature.trapezoid(self.continuous_part(), self.x))

    def mass(self) -> float:
        return self.atom_at_zero + self.continuous_mass()

    def mean(self) -> float:
        """First moment of the normalized law; the atom sits at 0"""
        if len(self.x) < 2:
            return 0.0
        first = float(quadrature.trapezoid(self.x * self.continuous_part(), self.x))
        return first / self.mass()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'eta': self.eta,
            'atom_at_zero': self.atom_at_zero,
            'c': self.c,
            'converged_fraction': self.converged_fraction,
            'smoothed_atom': self.atom_at_zero if self.smoothed_atom is None else self.smoothed_atom,
            'mass': self.mass()
        }


def evaluate_link(f, a_atoms: np.ndarray, b_atoms: np.ndarray) -> np.ndarray:
    """
    Raw link values F[j, l] = f(a_j, b_l) for atom arrays of shape (N, d) and (M, d').

    f may be a numpy-broadcasting callable of scalar atoms, an object with a
    matrix(a_atoms, b_atoms) method (vector atoms), or a precomputed array.
    """
    if isinstance(f, np.ndarray):
        return np.asarray(f, dtype=float)
    if hasattr(f, 'matrix'):
        return np.asarray(f.matrix(a_atoms, b_atoms), dtype=float)
    if a_atoms.shape[1] == 1 and b_atoms.shape[1] == 1:
        with np.errstate(all='ignore'):
            F = np.asarray(f(a_atoms[:, 0][:, None], b_atoms[:, 0][None, :]), dtype=float)
        try:
            return np.broadcast_to(F, (len(a_atoms), len(b_atoms)))
        except ValueError as exc:
            raise BadLink(f"link returned shape {F.shape} on a {len(a_atoms)} x {len(b_atoms)} lattice") from exc
    return np.array([[f(a, b) for b in b_atoms] for a in a_atoms], dtype=float)


def link_matrix(f, G: DiscreteMeasure, H: DiscreteMeasure) -> np.ndarray:
    """Link values on the atom lattice of G x H, checked finite and nonnegative"""
    F = evaluate_link(f, G.atoms, H.atoms)
    if F.shape != (G.size, H.size):
        raise BadLink(f"link matrix has shape {F.shape}, expected {(G.size, H.size)}")
    if not np.all(np.isfinite(F)):
        raise BadLink("link is not finite on every atom pair")
    if np.any(F < 0):
        raise BadLink(f"link is negative on an atom pair (min {F.min():.3e})")
    return F


def _relative_gap(state: np.ndarray, image: np.ndarray) -> float:
    return float(np.max(np.abs(image - state)) / max(1.0, float(np.max(np.abs(state)))))


class _MasterForm:
    method = 'master'

    def __init__(self, wG: np.ndarray, wH: np.ndarray, F: np.ndarray, c: float):
        self.wG, self.wH, self.F, self.c = wG, wH, F, c
        self.size = len(wG)

    def step(self, K: np.ndarray, z: complex) -> np.ndarray:
        denominator = -z + self.c * ((self.wG / (K + 1.0)) @ self.F)
        return self.F @ (self.wH / denominator)

    def kernel(self, K: np.ndarray, z: complex) -> np.ndarray:
        return K

    def stieltjes(self, K: np.ndarray, z: complex) -> complex:
        return complex(-np.sum(self.wG / (K + 1.0)) / z)


class _SeparableForm:
    method = 'separable'
    size = 1

    def __init__(self, wG: np.ndarray, wH: np.ndarray, g: np.ndarray, h: np.ndarray, c: float):
        self.wG, self.wH, self.g, self.h, self.c = wG, wH, g, h, c

    def step(self, kappa: np.ndarray, z: complex) -> np.ndarray:
        inner = np.sum(self.wG * self.g / (self.g * kappa[0] + 1.0))
        return np.array([np.sum(self.wH * self.h / (-z + self.c * self.h * inner))])

    def kernel(self, kappa: np.ndarray, z: complex) -> np.ndarray:
        return self.g * kappa[0]

    def stieltjes(self, kappa: np.ndarray, z: complex) -> complex:
        return complex(-np.sum(self.wG / (self.g * kappa[0] + 1.0)) / z)


class _DualForm:
    method = 'dual'

    def __init__(self, wG: np.ndarray, wH: np.ndarray, F: np.ndarray, c: float):
        self.wG, self.wH, self.F, self.c = wG, wH, F, c
        self.size = len(wH)

    def _row_resolvent(self, K0: np.ndarray, z: complex) -> np.ndarray:
        return 1.0 / (-z + self.F @ (self.wH / (self.c * K0 + 1.0)))

    def step(self, K0: np.ndarray, z: complex) -> np.ndarray:
        return (self.wG * self._row_resolvent(K0, z)) @ self.F

    def kernel(self, K0: np.ndarray, z: complex) -> np.ndarray:
        return -1.0 / (z * self._row_resolvent(K0, z)) - 1.0

    def stieltjes(self, K0: np.ndarray, z: complex) -> complex:
        return complex(np.sum(self.wG * self._row_resolvent(K0, z)))


def _iterate(form, z: complex, start: np.ndarray, cfg: SolverConfig) -> Tuple[np.ndarray, float, bool, int]:
    """Damped Picard iteration at one z; returns (state, residual, converged, iterations)"""
    state = start.copy()
    residual = np.inf
    with np.errstate(all='ignore'):
        for iteration in range(1, cfg.max_iter + 1):
            image = form.step(state, z)
            if not np.all(np.isfinite(image)):
                return state, np.inf, False, iteration
            residual = _relative_gap(state, image)
            if residual <= cfg.tol:
                check = _relative_gap(image, form.step(image, z))
                if check <= cfg.tol:
                    return image, check, True, iteration
                state = image
                continue
            state = state + cfg.damping * (image - state)
    return state, residual, False, cfg.max_iter


def _solve_chunk(form, points: np.ndarray, cfg: SolverConfig) -> list:
    initial = np.full(form.size, complex(cfg.init), dtype=complex)
    previous = None
    results = []
    for z in points:
        start = previous if (cfg.warm_start and previous is not None) else initial
        state, residual, converged, iterations = _iterate(form, z, start, cfg)
        if not converged and start is not initial:
            state, residual, converged, retry = _iterate(form, z, initial, cfg)
            iterations += retry
        if not converged:
            logger.debug("no convergence at z=%s after %d iterations (residual %.3e)", z, iterations, residual)
        previous = state if converged else None
        results.append((state, residual, converged, iterations))
    return results


def _zero_masses(F: np.ndarray, G: DiscreteMeasure, H: DiscreteMeasure) -> Tuple[float, float]:
    """G-mass of atoms whose link row vanishes and H-mass of vanishing link columns"""
    dead = F == 0.0
    return float(G.weights[dead.all(axis=1)].sum()), float(H.weights[dead.all(axis=0)].sum())


def _sweep(form, G: DiscreteMeasure, H: DiscreteMeasure, F: np.ndarray, z: ZGrid, c: float, cfg: SolverConfig,
           column_kernel: bool = False) -> KernelField:
    points = z.points
    size = cfg.chunk_size or len(points)
    chunks = [points[start:start + size] for start in range(0, len(points), size)]
    if cfg.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            solved = list(pool.map(lambda chunk: _solve_chunk(form, chunk, cfg), chunks))
    else:
        solved = [_solve_chunk(form, chunk, cfg) for chunk in chunks]
    results = [item for chunk in solved for item in chunk]

    states = [state for state, _, _, _ in results]
    with np.errstate(all='ignore'):
        K = np.column_stack([form.kernel(state, zk) for state, zk in zip(states, points)])
        m = np.array([form.stieltjes(state, zk) for state, zk in zip(states, points)])
    residual = np.array([r for _, r, _, _ in results], dtype=float)
    converged = np.array([ok for _, _, ok, _ in results], dtype=bool)
    iterations = np.array([it for _, _, _, it in results], dtype=int)

    logger.info("%s sweep: %d/%d points converged, worst residual %.3e, max iterations %d",
                form.method, int(converged.sum()), len(points),
                float(residual[converged].max()) if converged.any() else float('nan'),
                int(iterations.max()))
    row_zero, column_zero = _zero_masses(F, G, H)
    return KernelField(
        a_atoms=G.atoms, z=z, K=K, m=m, residual=residual, converged=converged,
        iterations=iterations, c=float(c), method=form.method,
        column_kernel=np.column_stack(states) if column_kernel else None,
        row_zero_mass=row_zero, column_zero_mass=column_zero
    )


def _check_ratio(c: float):
    if not np.isfinite(c) or c <= 0:
        raise SpecInvariantViolated(f"dimension ratio c must be positive, got {c}")


def solve_master(G: DiscreteMeasure, H: DiscreteMeasure, f, c: float, z: ZGrid,
                 cfg: Optional[SolverConfig] = None) -> KernelField:
    """
    Solve the kernel equation over the atoms of G at every point of z.

    Args:
        G: Coordinate law
        H: Column law
        f: Link, see link_matrix
        c: Dimension ratio p/n
        z: Evaluation grid
        cfg: Iteration settings

    Returns:
        KernelField with per-point convergence flags
    """
    _check_ratio(c)
    F = link_matrix(f, G, H)
    return _sweep(_MasterForm(G.weights, H.weights, F, c), G, H, F, z, c, cfg or SolverConfig())


def _factor_values(values, size: int, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(values) != size:
        raise BadLink(f"{name} has {len(values)} values for {size} atoms")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise BadLink(f"{name} must be finite and nonnegative")
    return values


def solve_separable(G: DiscreteMeasure, H: DiscreteMeasure, g_values, h_values, c: float, z: ZGrid,
                    cfg: Optional[SolverConfig] = None) -> KernelField:
    """Scalar iteration for f(a, b) = g(a) h(b); K is reported as g(a) kappa(z)"""
    _check_ratio(c)
    g = _factor_values(g_values, G.size, 'g_values')
    h = _factor_values(h_values, H.size, 'h_values')
    return _sweep(_SeparableForm(G.weights, H.weights, g, h, c), G, H, np.outer(g, h), z, c,
                  cfg or SolverConfig())


def solve_dual(G: DiscreteMeasure, H: DiscreteMeasure, f, c: float, z: ZGrid,
               cfg: Optional[SolverConfig] = None) -> KernelField:
    """
    Iterate the column kernel K0(b) = sum_a G(a) f(a, b) T(a) with
    T(a) = 1/(-z + sum_b H(b) f(a, b)/(c K0(b) + 1)) and m = sum_a G(a) T(a).

    Cheaper than the master form when H has fewer atoms than G, and the natural
    form for the linear process. K0 is kept as column_kernel.
    """
    _check_ratio(c)
    F = link_matrix(f, G, H)
    return _sweep(_DualForm(G.weights, H.weights, F, c), G, H, F, z, c, cfg or SolverConfig(),
                  column_kernel=True)


def invert_density(field: KernelField) -> DensityCurve:
    """
    Density proxy Im m/pi over the converged points, with the zero atom.

    The atom starts at the field's rank bound, whose Poisson-kernel image is
    part of rho. When the grid starts within eta of 0, the mass missing from
    atom + integral of the continuous part is added to the atom, less the
    estimated tail (eta/pi) |Re m| that leaks past the right end of the grid.
    Otherwise a shortfall is left for cdf_from_density to reject.
    """
    converged = field.converged
    if not converged.any():
        raise NothingConverged(f"none of the {len(converged)} grid points converged")
    if not converged.all():
        logger.warning("excluding %d non-converged grid points from the density", int((~converged).sum()))

    x = field.z.x[converged]
    m = field.m[converged]
    eta = field.z.eta
    rho = np.maximum(m.imag / np.pi, 0.0)

    bound = field.rank_bound
    atom = bound
    if len(x) > 1 and abs(x[0]) <= eta:
        visible = float(quadrature.trapezoid(np.maximum(rho - bound * _poisson_bump(x, eta), 0.0), x))
        # -Re m at the right end, less the share of the atom
        right = -m[-1].real - bound * x[-1] / (x[-1] ** 2 + eta ** 2)
        beyond = eta / np.pi * max(0.0, float(right))
        shortfall = 1.0 - bound - visible - beyond
        if shortfall > 0:
            atom = min(1.0, bound + shortfall)
            logger.debug("attributing mass %.4f missing from the grid to the atom at zero", shortfall)

    return DensityCurve(x=x, rho=rho, atom_at_zero=atom, eta=eta, c=field.c,
                        converged_fraction=field.converged_fraction, smoothed_atom=bound)


def cdf_from_density(d: DensityCurve) -> PiecewiseLinearCDF:
    """
    Distribution function atom * 1{x >= 0} + integral of the continuous part,
    renormalized to end at 1.
    """
    continuous = d.continuous_part()
    if len(d.x) > 1:
        accumulated = quadrature.cumulative_trapezoid(continuous, d.x, initial=0.0)
    else:
        accumulated = np.zeros(1)
    total = d.atom_at_zero + float(accumulated[-1])
    lo, hi = TOLERANCES['mass_band']
    if not lo <= total <= hi:
        raise MassOutOfBand(f"density mass {total:.4f} outside [{lo}, {hi}]; widen the grid or lower eta")
    return PiecewiseLinearCDF(d.x, accumulated / total, d.atom_at_zero / total)


def equation_residual(field: KernelField, G: DiscreteMeasure, H: DiscreteMeasure, f, c: float) -> np.ndarray:
    """Relative gap between the stored K and the right-hand side of the kernel equation, per z"""
    form = _MasterForm(G.weights, H.weights, link_matrix(f, G, H), c)
    with np.errstate(all='ignore'):
        gaps = [_relative_gap(field.K[:, k], form.step(field.K[:, k], zk)) for k, zk in enumerate(field.z.points)]
    return np.array(gaps, dtype=float)


def mp_quadratic_root(z, c: float):
    """
    K solving z K^2 + (z + 1 - c) K + 1 = 0 with Im K >= 0 and Im zK >= 0.

    This is the kernel for G = H = delta_1 with f(a, b) = a b.
    """
    z = np.asarray(z, dtype=complex)
    b = z + 1.0 - c
    root = np.sqrt(b * b - 4.0 * z)
    candidates = np.stack([(-b + root) / (2.0 * z), (-b - root) / (2.0 * z)])
    score = np.minimum(candidates.imag, (z * candidates).imag)
    chosen = np.where(score[0] >= score[1], candidates[0], candidates[1])
    return complex(chosen) if chosen.ndim == 0 else chosen


def mp_stieltjes(z, c: float):
    """Stieltjes transform of the identity-covariance law at ratio c"""
    z = np.asarray(z, dtype=complex)
    m = -1.0 / (z * (mp_quadratic_root(z, c) + 1.0))
    return complex(m) if np.ndim(m) == 0 else m


def mp_density(x, c: float) -> np.ndarray:
    """Continuous part of the identity-covariance law at ratio c"""
    x = np.asarray(x, dtype=float)
    lower, upper = (1.0 - np.sqrt(c)) ** 2, (1.0 + np.sqrt(c)) ** 2
    inside = (x > lower) & (x < upper) & (x > 0)
    safe = np.where(inside, x, 1.0)
    return np.where(inside, np.sqrt(np.abs((upper - safe) * (safe - lower))) / (2.0 * np.pi * c * safe), 0.0)
