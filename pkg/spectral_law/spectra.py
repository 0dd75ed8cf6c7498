# spectra.py - Gram matrices, eigenvalues and empirical spectral distributions
"""
Dense symmetric eigendecomposition of Gram matrices.

Eigenvalues come from LAPACK's symmetric tridiagonal reduction (scipy.linalg.eigh),
the standard dense route for matrices up to a few thousand rows.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from .config import TOLERANCES
from .errors import (
    BadRange, DimensionMismatch, LowerHalfPlane, NoConvergence, NotSymmetric,
    SpecInvariantViolated
)
from .measures import EmpiricalDistribution

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """
    A p x n real data matrix whose columns are the observations.

    gram_divisor is the factor the Gram matrix is divided by; None means n.
    """
    entries: np.ndarray
    gram_divisor: Optional[float] = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise DimensionMismatch(f"data matrix must be p x n with p, n >= 1, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise SpecInvariantViolated("data matrix entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def divisor(self) -> float:
        return float(self.n if self.gram_divisor is None else self.gram_divisor)


@dataclass(frozen=True, eq=False)
class ESD:
    """Sorted eigenvalues of a Gram matrix with the dimensions that produced it"""
    eigenvalues: np.ndarray
    p: int
    n: int

    def __post_init__(self):
        values = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if len(values) == 0:
            raise DimensionMismatch("an ESD needs at least one eigenvalue")
        values.setflags(write=False)
        object.__setattr__(self, 'eigenvalues', values)

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def mean(self) -> float:
        return float(self.eigenvalues.mean())

    def distribution(self) -> EmpiricalDistribution:
        return EmpiricalDistribution(self.eigenvalues)

    def to_dict(self) -> Dict[str, Any]:
        return {'p': self.p, 'n': self.n, 'eigenvalues': self.eigenvalues.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ESD':
        return cls(np.sort(np.asarray(data['eigenvalues'], dtype=float)), int(data['p']), int(data['n']))


def gram_covariance(X: DataMatrix) -> np.ndarray:
    """S = X X^T / divisor, symmetrized after accumulation"""
    entries = X.entries
    S = entries @ entries.T / X.divisor
    return (S + S.T) / 2.0


def _check_symmetric(S: np.ndarray):
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotSymmetric(f"matrix must be square, got shape {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 1.0)
    asymmetry = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asymmetry > TOLERANCES['symmetry'] * scale:
        raise NotSymmetric(f"matrix asymmetry {asymmetry:.3e} exceeds tolerance")


def eigenvalues_symmetric(S) -> np.ndarray:
    """Full real spectrum of a symmetric matrix in ascending order"""
    S = np.asarray(S, dtype=float)
    _check_symmetric(S)
    try:
        values = linalg.eigh(S, eigvals_only=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise NoConvergence(f"symmetric eigensolver did not converge: {exc}") from exc
    return np.sort(values)


def esd(S, n: Optional[int] = None) -> ESD:
    """
    Empirical spectral distribution of S with round-off eigenvalues set to zero.

    Eigenvalues within eps_eig * max(1, spectral radius) of zero, of either
    sign, become exactly 0. When n < p the Gram matrix has rank at most n and
    the smallest p - n eigenvalues are zero as well.
    """
    S = np.asarray(S, dtype=float)
    values = eigenvalues_symmetric(S).copy()
    epsilon = TOLERANCES['eig_clamp'] * max(1.0, float(np.max(np.abs(values))))

    if np.any(values < -epsilon):
        logger.warning("spectrum has %d eigenvalues below -%.3e; matrix is not PSD",
                       int(np.sum(values < -epsilon)), epsilon)
    values[np.abs(values) <= epsilon] = 0.0
    p = S.shape[0]
    n = p if n is None else n
    if n < p:
        values[:p - n] = 0.0
    return ESD(np.sort(values), p, n)


def esd_of(X: DataMatrix) -> ESD:
    return esd(gram_covariance(X), n=X.n)


def empirical_stieltjes(e: ESD, z):
    """(1/p) sum_j 1/(lambda_j - z) for z in the upper half plane"""
    z_values = np.asarray(z, dtype=complex)
    if np.any(z_values.imag <= 0):
        raise LowerHalfPlane("Stieltjes transform is evaluated only for Im z > 0")
    result = np.mean(1.0 / (e.eigenvalues[:, None] - z_values.reshape(1, -1)), axis=0)
    if z_values.ndim == 0:
        return complex(result[0])
    return result.reshape(z_values.shape)


def histogram(e: ESD, bins: int, range: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bin edges and density heights normalized by the total eigenvalue count.

    Heights integrate to the fraction of eigenvalues inside [lo, hi].
    """
    lo, hi = float(range[0]), float(range[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi or bins < 1:
        raise BadRange(f"histogram needs lo < hi and bins >= 1, got [{lo}, {hi}] with {bins} bins")
    counts, edges = np.histogram(e.eigenvalues, bins=bins, range=(lo, hi))
    heights = counts / (len(e.eigenvalues) * np.diff(edges))
    return edges, heights
