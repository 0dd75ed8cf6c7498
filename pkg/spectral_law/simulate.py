# simulate.py - Seeded data matrices for the seven model families
"""
Reproducible generation of p x n data matrices.

Random streams are split with numpy's SeedSequence: the run seed spawns an
auxiliary stream (mixture labels, RCV drift) and a column root whose children
give one PCG64 stream per column. The linear process draws per row instead,
since its rows are the independent units. Because every column (or row) owns
its stream, generation can be spread over a thread pool without changing a
single bit of the output.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonFiniteProfile, NotStationary, SpecInvariantViolated
from .expressions import Expression
from .models import (
    DiffusionRCVSpec, FiniteMixtureSpec, IidCovarianceSpec, LinearProcessSpec,
    MatrixARSpec, SeparableSpec, VarianceProfileSpec, eigen_values, rcv_weights,
    validate_partition
)
from .spectra import DataMatrix

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64

Profile = Union[Expression, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def spawn_streams(seed: int, count: int) -> Tuple[np.random.Generator, List[np.random.Generator]]:
    """
    Split a run seed into an auxiliary stream and count independent substreams.

    Args:
        seed: Unsigned 64-bit run seed
        count: Number of substreams (columns, or rows for the linear process)

    Returns:
        (auxiliary generator, list of per-unit generators)
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    aux_seq, unit_root = np.random.SeedSequence(int(seed)).spawn(2)
    streams = [np.random.Generator(np.random.PCG64(child)) for child in unit_root.spawn(count)]
    return np.random.Generator(np.random.PCG64(aux_seq)), streams


def _draw_each(streams: Sequence[np.random.Generator], draw, workers: int = 1) -> list:
    if workers > 1 and len(streams) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(draw, streams))
    return [draw(rng) for rng in streams]


def _gaussian_columns(streams, length: int, workers: int = 1) -> np.ndarray:
    columns = _draw_each(streams, lambda rng: rng.standard_normal(length), workers)
    return np.column_stack(columns)


def _check_dimensions(p: int, n: int):
    if p < 1 or n < 1:
        raise DimensionMismatch(f"dimensions must be positive, got {p} x {n}")


def _nonnegative_vector(values, length: int, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(values) != length:
        raise DimensionMismatch(f"{name} has {len(values)} entries, expected {length}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise SpecInvariantViolated(f"{name} must be finite and nonnegative")
    return values


def sample_iid_covariance(sigma_eigs, p: int, n: int, seed: int, workers: int = 1) -> DataMatrix:
    """Columns diag(sqrt(sigma_eigs)) z_j with standard normal z_j"""
    _check_dimensions(p, n)
    sigma = _nonnegative_vector(sigma_eigs, p, 'sigma_eigs')
    _, streams = spawn_streams(seed, n)
    Z = _gaussian_columns(streams, p, workers)
    return DataMatrix(np.sqrt(sigma)[:, None] * Z)


def sample_separable(a_eigs, b_weights, p: int, n: int, seed: int, workers: int = 1) -> DataMatrix:
    """Columns sqrt(b_i) diag(sqrt(a_eigs)) z_i; equals the i.i.d. sampler when every b_i is 1"""
    _check_dimensions(p, n)
    a = _nonnegative_vector(a_eigs, p, 'a_eigs')
    b = _nonnegative_vector(b_weights, n, 'b_weights')
    _, streams = spawn_streams(seed, n)
    Z = _gaussian_columns(streams, p, workers)
    return DataMatrix((np.sqrt(a)[:, None] * Z) * np.sqrt(b)[None, :])


def sample_variance_profile(profile: Profile, p: int, n: int, seed: int, workers: int = 1) -> DataMatrix:
    """Entries sigma(i/p, j/n) Z_ij"""
    _check_dimensions(p, n)
    s = np.arange(1, p + 1) / p
    t = np.arange(1, n + 1) / n
    with np.errstate(all='ignore'):
        sigma = np.asarray(profile(s[:, None], t[None, :]), dtype=float)
    sigma = np.broadcast_to(sigma, (p, n))
    if not np.all(np.isfinite(sigma)):
        raise NonFiniteProfile(f"profile {profile} is not finite on the {p} x {n} grid")

    _, streams = spawn_streams(seed, n)
    Z = _gaussian_columns(streams, p, workers)
    return DataMatrix(sigma * Z)


def linear_process_tail_bound(spec: LinearProcessSpec) -> float:
    """Sum of |psi_j| beyond the truncation lag; zero for finite coefficient tables"""
    return spec.tail_bound()


def sample_linear_process(psi, p: int, T: int, seed: int, workers: int = 1) -> DataMatrix:
    """
    p independent MA(J) rows X[l, t] = sum_j psi[j, l] Z[l, t - j], t = 1..T.

    psi is the (J+1) x p coefficient table; each row draws J + T innovations
    and the first J serve as pre-samples.
    """
    _check_dimensions(p, T)
    table = np.asarray(psi, dtype=float)
    if table.ndim == 1:
        table = np.repeat(table[:, None], p, axis=1)
    if table.ndim != 2 or table.shape[1] != p or table.shape[0] < 1:
        raise DimensionMismatch(f"psi must be a (J+1) x {p} table, got shape {table.shape}")
    if not np.all(np.isfinite(table)):
        raise SpecInvariantViolated("psi coefficients must be finite")

    J = table.shape[0] - 1
    _, streams = spawn_streams(seed, p)
    Z = np.vstack(_draw_each(streams, lambda rng: rng.standard_normal(J + T), workers))

    X = np.zeros((p, T))
    for j in range(J + 1):
        X += table[j][:, None] * Z[:, J - j:J - j + T]
    return DataMatrix(X)


def sample_diffusion_rcv(gamma: Expression, times, drift_bound: float, p: int, n: int, seed: int,
                         workers: int = 1) -> DataMatrix:
    """
    Increments of a diffusion with volatility gamma observed at times tau_0..tau_n.

    Column i is diag(sqrt(w[:, i])) Z_i / sqrt(n), plus (tau_i - tau_{i-1}) mu when
    drift_bound > 0, with mu drawn once per run uniformly in [-drift_bound, drift_bound].
    The realized covariance is the plain sum of outer products, so the returned
    matrix has Gram divisor 1.
    """
    _check_dimensions(p, n)
    if drift_bound < 0 or not np.isfinite(drift_bound):
        raise SpecInvariantViolated(f"drift_bound must be finite and nonnegative, got {drift_bound}")
    times = np.linspace(0.0, 1.0, n + 1) if times is None else validate_partition(times, n)
    weights = rcv_weights(gamma, times, p, n)

    aux, streams = spawn_streams(seed, n)
    Z = _gaussian_columns(streams, p, workers)
    X = np.sqrt(weights) * Z / np.sqrt(n)
    if drift_bound > 0:
        mu = aux.uniform(-drift_bound, drift_bound, size=p)
        X = X + mu[:, None] * np.diff(times)[None, :]
    return DataMatrix(X, gram_divisor=1.0)


def _check_stationary(a: np.ndarray, b: np.ndarray):
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise SpecInvariantViolated("AR coefficients must be finite")
    rate = float(np.max(np.abs(a)) * np.max(np.abs(b)))
    if rate >= 1:
        raise NotStationary(f"max|a| * max|b| = {rate:.4f} must be below 1")


def _ar_column(rng: np.random.Generator, coefficient: np.ndarray, steps: int, record: Sequence[int]) -> Dict[int, np.ndarray]:
    """Iterate x_s = coefficient * x_{s-1} + z_s from x_0 = 0, keeping the requested steps"""
    wanted = set(record)
    snapshots = {}
    x = np.zeros(len(coefficient))
    for step in range(1, steps + 1):
        x = coefficient * x + rng.standard_normal(len(coefficient))
        if step in wanted:
            snapshots[step] = x
    return snapshots


def sample_matrix_ar_path(a_eigs, b_diag, times: Sequence[int], burn_in: int, m: int, n: int, seed: int,
                          workers: int = 1) -> Dict[int, DataMatrix]:
    """
    Several observations of one realization of X_s = diag(a) X_{s-1} diag(b) + Z_s.

    Args:
        a_eigs: Row coefficients, length m
        b_diag: Column coefficients, length n
        times: Observation indices t >= 1, counted after the burn-in
        burn_in: Number of discarded steps from X_0 = 0
        m, n: Matrix dimensions
        seed: Run seed

    Returns:
        Dictionary mapping each t to the m x n matrix X_{burn_in + t}
    """
    _check_dimensions(m, n)
    a = np.asarray(a_eigs, dtype=float).reshape(-1)
    b = np.asarray(b_diag, dtype=float).reshape(-1)
    if len(a) != m or len(b) != n:
        raise DimensionMismatch(f"need {m} row and {n} column coefficients, got {len(a)} and {len(b)}")
    _check_stationary(a, b)
    times = sorted(set(int(t) for t in times))
    if not times or times[0] < 1:
        raise SpecInvariantViolated("observation times must be integers >= 1")
    if burn_in < 0:
        raise SpecInvariantViolated(f"burn_in must be nonnegative, got {burn_in}")

    steps = [burn_in + t for t in times]
    _, streams = spawn_streams(seed, n)
    columns = _draw_each(
        list(zip(streams, b)),
        lambda unit: _ar_column(unit[0], a * unit[1], steps[-1], steps),
        workers
    )
    return {
        t: DataMatrix(np.column_stack([column[step] for column in columns]))
        for t, step in zip(times, steps)
    }


def sample_matrix_ar(a_eigs, b_diag, t: int, burn_in: int, m: int, n: int, seed: int,
                     workers: int = 1) -> DataMatrix:
    """The observation X_{burn_in + t} of the matrix AR(1) recursion"""
    return sample_matrix_ar_path(a_eigs, b_diag, [t], burn_in, m, n, seed, workers)[t]


def sample_mixture(eta, component_eigs, means, p: int, n: int, seed: int, workers: int = 1) -> DataMatrix:
    """Column j is mu_I + diag(sqrt(component_eigs[I])) z_j with I ~ eta"""
    _check_dimensions(p, n)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if np.any(eta < 0) or not np.isfinite(eta.sum()) or abs(eta.sum() - 1.0) > 1e-9:
        raise SpecInvariantViolated("eta must be a probability vector")
    components = np.asarray(component_eigs, dtype=float)
    if components.shape != (len(eta), p):
        raise SpecInvariantViolated(f"need {len(eta)} component eigenvalue lists of length {p}")
    if not np.all(np.isfinite(components)) or np.any(components < 0):
        raise SpecInvariantViolated("component eigenvalues must be finite and nonnegative")
    centres = np.zeros((len(eta), p)) if means is None else np.asarray(means, dtype=float)
    if centres.shape != (len(eta), p):
        raise SpecInvariantViolated(f"need {len(eta)} mean vectors of length {p}")

    aux, streams = spawn_streams(seed, n)
    labels = aux.choice(len(eta), size=n, p=eta / eta.sum())
    Z = _gaussian_columns(streams, p, workers)
    return DataMatrix(np.sqrt(components[labels]).T * Z + centres[labels].T)


def simulate(spec, p: int, n: int, seed: int, workers: int = 1) -> DataMatrix:
    """
    Generate one data matrix for any model family.

    Args:
        spec: One of the seven ModelSpec variants
        p, n: Dimensions (m x n for the matrix AR family, p x T for the linear process)
        seed: Run seed; the same (spec, p, n, seed) always gives the same matrix
        workers: Threads used for column generation

    Returns:
        DataMatrix
    """
    spec.check(p, n)

    if isinstance(spec, IidCovarianceSpec):
        return sample_iid_covariance(spec.eigenvalues(p), p, n, seed, workers)

    if isinstance(spec, SeparableSpec):
        a = eigen_values(spec.a_eigs, p, 'a_eigs')
        b = eigen_values(spec.b_weights, n, 'b_weights')
        return sample_separable(a, b, p, n, seed, workers)

    if isinstance(spec, VarianceProfileSpec):
        return sample_variance_profile(spec.expression(), p, n, seed, workers)

    if isinstance(spec, LinearProcessSpec):
        bound = linear_process_tail_bound(spec)
        if bound > 0:
            logger.info("linear process truncated at lag %d, coefficient tail bound %.3e", spec.lags(), bound)
        return sample_linear_process(spec.coefficient_table(p), p, n, seed, workers)

    if isinstance(spec, DiffusionRCVSpec):
        return sample_diffusion_rcv(spec.expression(), spec.partition(n), spec.drift_bound, p, n, seed, workers)

    if isinstance(spec, MatrixARSpec):
        a, b = spec.coefficients(p, n)
        return sample_matrix_ar(a, b, spec.t, spec.burn_in, p, n, seed, workers)

    if isinstance(spec, FiniteMixtureSpec):
        return sample_mixture(spec.eta, spec.components(p), spec.mean_vectors(p), p, n, seed, workers)

    raise SpecInvariantViolated(f"unsupported model {type(spec).__name__}")


def simulate_observations(spec, p: int, n: int, seed: int, times: Optional[Sequence[int]] = None,
                          workers: int = 1) -> Dict[Optional[int], DataMatrix]:
    """
    One matrix per observation time for the matrix AR family, a single matrix otherwise.

    Keys are the observation indices t, or None for families without a time index.
    """
    if isinstance(spec, MatrixARSpec) and times:
        spec.check(p, n)
        a, b = spec.coefficients(p, n)
        return sample_matrix_ar_path(a, b, times, spec.burn_in, p, n, seed, workers)
    return {None: simulate(spec, p, n, seed, workers)}
